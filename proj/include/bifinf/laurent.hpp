#pragma once

// Finite Laurent polynomials in one parameter t, and vector-valued arcs built
// from them. Coefficients may be doubles, exact rationals, or polynomials in
// unknown coefficients (for symbolic condition generation); the few
// operations that depend on the coefficient type are the overloads below.
//
// Exponents live in a dense window [lo, hi]. The top stored coefficient may be
// zero; the order is always computed, never assumed.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "bifinf/error.hpp"
#include "bifinf/rational.hpp"
#include "bifinf/sparse_poly.hpp"

namespace bifinf {

inline double zero_like(double) { return 0.0; }
inline Rational zero_like(const Rational&) { return Rational(0); }
inline SparsePoly zero_like(const SparsePoly& p) { return SparsePoly(p.nvars()); }

inline double coeff_from(const Rational& r, double) { return r.get_d(); }
inline Rational coeff_from(const Rational& r, const Rational&) { return r; }
inline SparsePoly coeff_from(const Rational& r, const SparsePoly& like) {
    return SparsePoly::constant(like.nvars(), r);
}

inline bool coeff_is_zero(double v) { return v == 0.0; }
inline bool coeff_is_zero(const Rational& v) { return v == 0; }
inline bool coeff_is_zero(const SparsePoly& v) { return v.is_zero(); }

/// Order of the zero series.
inline constexpr int kNegInfinity = std::numeric_limits<int>::min();

template <class T>
class Laurent {
public:
    Laurent() : Laurent(0, 0, T{}) {}

    Laurent(int lo, int hi, T zero) : lo_(lo), hi_(hi), coeffs_() {
        if (lo > hi) throw ValidationError("Laurent window requires lo <= hi");
        coeffs_.assign(static_cast<std::size_t>(hi - lo + 1), zero_like(zero));
    }

    static Laurent constant(T c) {
        Laurent s(0, 0, c);
        s.coeffs_[0] = std::move(c);
        return s;
    }

    static Laurent monomial(int exponent, T c) {
        Laurent s(exponent, exponent, c);
        s.coeffs_[0] = std::move(c);
        return s;
    }

    int lo() const noexcept { return lo_; }
    int hi() const noexcept { return hi_; }

    /// Zero outside the window.
    T coefficient(int e) const {
        if (e < lo_ || e > hi_) return zero_like(coeffs_.front());
        return coeffs_[static_cast<std::size_t>(e - lo_)];
    }

    T& at(int e) {
        if (e < lo_ || e > hi_) throw ValidationError("exponent outside Laurent window");
        return coeffs_[static_cast<std::size_t>(e - lo_)];
    }

    const T& at(int e) const {
        if (e < lo_ || e > hi_) throw ValidationError("exponent outside Laurent window");
        return coeffs_[static_cast<std::size_t>(e - lo_)];
    }

    T zero() const { return zero_like(coeffs_.front()); }

    /// Largest exponent with a nonzero coefficient; kNegInfinity for the zero series.
    int order() const {
        for (int e = hi_; e >= lo_; --e)
            if (!coeff_is_zero(coeffs_[static_cast<std::size_t>(e - lo_)])) return e;
        return kNegInfinity;
    }

    /// Smallest exponent with a nonzero coefficient; nullopt for the zero series.
    std::optional<int> low_order() const {
        for (int e = lo_; e <= hi_; ++e)
            if (!coeff_is_zero(coeffs_[static_cast<std::size_t>(e - lo_)])) return e;
        return std::nullopt;
    }

    bool is_zero() const { return order() == kNegInfinity; }

    /// Same series with the window shrunk to its support ([0,0] if zero).
    Laurent trimmed() const {
        int top = order();
        if (top == kNegInfinity) return Laurent(0, 0, zero());
        int bottom = *low_order();
        Laurent out(bottom, top, zero());
        for (int e = bottom; e <= top; ++e) out.at(e) = at(e);
        return out;
    }

    /// Copy over the window [lo, hi]; coefficients outside are dropped or zero-filled.
    Laurent rewindowed(int lo, int hi) const {
        Laurent out(lo, hi, zero());
        for (int e = std::max(lo, lo_); e <= std::min(hi, hi_); ++e) out.at(e) = at(e);
        return out;
    }

    Laurent& operator+=(const Laurent& o) {
        if (o.lo_ < lo_ || o.hi_ > hi_) *this = rewindowed(std::min(lo_, o.lo_), std::max(hi_, o.hi_));
        for (int e = o.lo_; e <= o.hi_; ++e) at(e) += o.at(e);
        return *this;
    }

    Laurent& operator-=(const Laurent& o) {
        if (o.lo_ < lo_ || o.hi_ > hi_) *this = rewindowed(std::min(lo_, o.lo_), std::max(hi_, o.hi_));
        for (int e = o.lo_; e <= o.hi_; ++e) at(e) -= o.at(e);
        return *this;
    }

    Laurent& operator*=(const T& s) {
        for (auto& c : coeffs_) c *= s;
        return *this;
    }

    friend Laurent operator+(Laurent a, const Laurent& b) { return a += b; }
    friend Laurent operator-(Laurent a, const Laurent& b) { return a -= b; }
    friend Laurent operator*(Laurent a, const T& s) { return a *= s; }

    friend Laurent operator-(Laurent a) {
        for (auto& c : a.coeffs_) c = zero_like(c) - c;
        return a;
    }

    friend Laurent operator*(const Laurent& a, const Laurent& b) { return multiply(a, b); }

    /// Product keeping only exponents >= keep_from (all when nullopt).
    static Laurent multiply(const Laurent& a, const Laurent& b,
                            std::optional<int> keep_from = std::nullopt) {
        int lo = a.lo_ + b.lo_;
        int hi = a.hi_ + b.hi_;
        if (keep_from && *keep_from > lo) lo = std::min(*keep_from, hi);
        Laurent out(lo, hi, a.zero());
        for (int i = a.lo_; i <= a.hi_; ++i) {
            const T& ca = a.at(i);
            if (coeff_is_zero(ca)) continue;
            int jmin = std::max(b.lo_, lo - i);
            for (int j = jmin; j <= b.hi_; ++j) {
                const T& cb = b.at(j);
                if (coeff_is_zero(cb)) continue;
                out.at(i + j) += ca * cb;
            }
        }
        return out;
    }

    friend bool operator==(const Laurent& a, const Laurent& b) {
        int lo = std::min(a.lo_, b.lo_), hi = std::max(a.hi_, b.hi_);
        for (int e = lo; e <= hi; ++e)
            if (!(a.coefficient(e) == b.coefficient(e))) return false;
        return true;
    }

    /// Numeric value at t (double or rational coefficients).
    double evaluate(double t) const {
        double sum = 0;
        for (int e = lo_; e <= hi_; ++e) {
            double c = to_double_coeff(at(e));
            if (c != 0.0) sum += c * std::pow(t, e);
        }
        return sum;
    }

private:
    static double to_double_coeff(double v) { return v; }
    static double to_double_coeff(const Rational& v) { return v.get_d(); }

    int lo_, hi_;
    std::vector<T> coeffs_;
};

template <class T>
int ord_t(const Laurent<T>& g) {
    return g.order();
}

/// Vector-valued Laurent polynomial with one shared exponent window.
template <class T>
class LaurentArc {
public:
    LaurentArc() = default;

    LaurentArc(std::size_t dim, int lo, int hi, T zero) : lo_(lo), hi_(hi) {
        if (dim == 0) throw ValidationError("arc needs at least one component");
        comps_.assign(dim, Laurent<T>(lo, hi, zero));
    }

    /// Components are re-windowed onto the union of their windows.
    static LaurentArc from_components(const std::vector<Laurent<T>>& comps) {
        if (comps.empty()) throw ValidationError("arc needs at least one component");
        int lo = comps.front().lo(), hi = comps.front().hi();
        for (const auto& c : comps) {
            lo = std::min(lo, c.lo());
            hi = std::max(hi, c.hi());
        }
        LaurentArc arc(comps.size(), lo, hi, comps.front().zero());
        for (std::size_t i = 0; i < comps.size(); ++i) arc.comps_[i] = comps[i].rewindowed(lo, hi);
        return arc;
    }

    std::size_t dim() const noexcept { return comps_.size(); }
    int lo() const noexcept { return lo_; }
    int hi() const noexcept { return hi_; }

    const Laurent<T>& component(std::size_t i) const { return comps_.at(i); }
    const std::vector<Laurent<T>>& components() const noexcept { return comps_; }

    std::vector<T> coefficient(int e) const {
        std::vector<T> v;
        v.reserve(comps_.size());
        for (const auto& c : comps_) v.push_back(c.coefficient(e));
        return v;
    }

    void set(int e, std::size_t component, T value) { comps_.at(component).at(e) = std::move(value); }

    LaurentArc rewindowed(int lo, int hi) const {
        std::vector<Laurent<T>> cs;
        for (const auto& c : comps_) cs.push_back(c.rewindowed(lo, hi));
        LaurentArc arc;
        arc.lo_ = lo;
        arc.hi_ = hi;
        arc.comps_ = std::move(cs);
        return arc;
    }

    std::vector<double> evaluate(double t) const {
        std::vector<double> v;
        v.reserve(comps_.size());
        for (const auto& c : comps_) v.push_back(c.evaluate(t));
        return v;
    }

    friend bool operator==(const LaurentArc& a, const LaurentArc& b) {
        if (a.dim() != b.dim()) return false;
        for (std::size_t i = 0; i < a.dim(); ++i)
            if (!(a.comps_[i] == b.comps_[i])) return false;
        return true;
    }

private:
    int lo_ = 0, hi_ = 0;
    std::vector<Laurent<T>> comps_;
};

/// Drops every coefficient with exponent < D. Arcs already starting at or above D are unchanged.
template <class T>
LaurentArc<T> truncate_arc(const LaurentArc<T>& arc, int D) {
    if (D > arc.hi()) throw ValidationError("truncation bound above the arc window: empty truncation");
    if (arc.lo() >= D) return arc;
    return arc.rewindowed(D, arc.hi());
}

/// Substitutes the arc into q and collects powers of t.
///
/// With `keep_from`, only exponents >= keep_from are guaranteed exact in the
/// result (lower ones are dropped); the intermediate products are pruned
/// accordingly, which keeps symbolic expansions small.
template <class T>
Laurent<T> compose(const SparsePoly& q, const LaurentArc<T>& arc,
                   std::optional<int> keep_from = std::nullopt) {
    if (arc.dim() != q.nvars()) throw ValidationError("arc dimension does not match polynomial");
    const T zero = arc.component(0).zero();
    const int degree = std::max(q.total_degree(), 0);
    const int top = std::max(arc.hi(), 0);

    auto cutoff = [&](int remaining_degree) -> std::optional<int> {
        if (!keep_from) return std::nullopt;
        return *keep_from - remaining_degree * top;
    };

    // powers[i][e] = x_i(t)^e, pruned for use inside a term of degree <= `degree`.
    std::vector<std::vector<Laurent<T>>> powers(arc.dim());
    for (std::size_t i = 0; i < arc.dim(); ++i) {
        int maxe = std::max(q.degree_in(i), 0);
        powers[i].reserve(static_cast<std::size_t>(maxe) + 1);
        powers[i].push_back(Laurent<T>::constant(coeff_from(Rational(1), zero)));
        for (int e = 1; e <= maxe; ++e)
            powers[i].push_back(
                Laurent<T>::multiply(powers[i].back(), arc.component(i), cutoff(degree - e)));
    }

    Laurent<T> result = Laurent<T>::constant(zero);
    for (const auto& [m, c] : q.terms()) {
        Laurent<T> acc = Laurent<T>::constant(coeff_from(c, zero));
        int used = 0;
        for (std::size_t i = 0; i < arc.dim(); ++i) {
            std::uint32_t e = m.exps[i];
            if (e == 0) continue;
            used += static_cast<int>(e);
            acc = Laurent<T>::multiply(acc, powers[i][e], cutoff(static_cast<int>(m.degree) - used));
        }
        result += acc;
    }
    if (keep_from && result.lo() < *keep_from) {
        int hi = std::max(result.hi(), *keep_from);
        result = result.rewindowed(*keep_from, hi);
    }
    return result;
}

}  // namespace bifinf
