#pragma once

// Dense univariate polynomials over Q with Sturm-sequence real root isolation.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "bifinf/error.hpp"
#include "bifinf/rational.hpp"

namespace bifinf {

class UnivariatePoly {
public:
    UnivariatePoly() = default;

    /// Ascending coefficients; trailing zeros are stripped.
    explicit UnivariatePoly(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { normalize(); }

    static UnivariatePoly constant(const Rational& c) { return UnivariatePoly({c}); }

    /// x - r
    static UnivariatePoly linear_root(const Rational& r) { return UnivariatePoly({-r, Rational(1)}); }

    bool is_zero() const noexcept { return c_.empty(); }
    /// -1 for the zero polynomial.
    int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
    const std::vector<Rational>& coeffs() const noexcept { return c_; }

    Rational coeff(int i) const {
        return (i < 0 || i > degree()) ? Rational(0) : c_[static_cast<std::size_t>(i)];
    }
    Rational leading() const { return is_zero() ? Rational(0) : c_.back(); }

    Rational evaluate(const Rational& x) const {
        Rational acc = 0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
        return acc;
    }

    double evaluate(double x) const {
        double acc = 0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + it->get_d();
        return acc;
    }

    int sign_at(const Rational& x) const { return sgn(evaluate(x)); }

    /// Sign as x -> +inf (positive) or -inf (negative).
    int sign_at_infinity(bool positive) const {
        if (is_zero()) return 0;
        int s = sgn(leading());
        return (positive || degree() % 2 == 0) ? s : -s;
    }

    UnivariatePoly derivative() const {
        std::vector<Rational> d;
        for (std::size_t i = 1; i < c_.size(); ++i) d.push_back(c_[i] * Rational(static_cast<long>(i)));
        return UnivariatePoly(std::move(d));
    }

    UnivariatePoly monic() const {
        if (is_zero()) return *this;
        UnivariatePoly out = *this;
        Rational lc = leading();
        for (auto& c : out.c_) c /= lc;
        return out;
    }

    friend UnivariatePoly operator+(const UnivariatePoly& a, const UnivariatePoly& b) {
        std::vector<Rational> r(std::max(a.c_.size(), b.c_.size()));
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = a.coeff(static_cast<int>(i)) + b.coeff(static_cast<int>(i));
        return UnivariatePoly(std::move(r));
    }

    friend UnivariatePoly operator-(const UnivariatePoly& a, const UnivariatePoly& b) {
        std::vector<Rational> r(std::max(a.c_.size(), b.c_.size()));
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = a.coeff(static_cast<int>(i)) - b.coeff(static_cast<int>(i));
        return UnivariatePoly(std::move(r));
    }

    friend UnivariatePoly operator*(const UnivariatePoly& a, const UnivariatePoly& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<Rational> r(a.c_.size() + b.c_.size() - 1);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
        return UnivariatePoly(std::move(r));
    }

    friend UnivariatePoly operator*(const Rational& s, const UnivariatePoly& a) {
        std::vector<Rational> r = a.c_;
        for (auto& c : r) c *= s;
        return UnivariatePoly(std::move(r));
    }

    friend UnivariatePoly operator-(const UnivariatePoly& a) { return Rational(-1) * a; }

    friend bool operator==(const UnivariatePoly& a, const UnivariatePoly& b) { return a.c_ == b.c_; }

    /// Euclidean division: a = q*b + r with deg r < deg b.
    static std::pair<UnivariatePoly, UnivariatePoly> divmod(const UnivariatePoly& a, const UnivariatePoly& b) {
        if (b.is_zero()) throw ValidationError("polynomial division by zero");
        std::vector<Rational> rem = a.c_;
        int db = b.degree();
        int dq = a.degree() - db;
        if (dq < 0) return {UnivariatePoly(), a};
        std::vector<Rational> q(static_cast<std::size_t>(dq) + 1);
        const Rational& lb = b.c_.back();
        for (int k = dq; k >= 0; --k) {
            Rational f = rem[static_cast<std::size_t>(k + db)] / lb;
            q[static_cast<std::size_t>(k)] = f;
            if (f == 0) continue;
            for (int j = 0; j <= db; ++j) rem[static_cast<std::size_t>(k + j)] -= f * b.c_[static_cast<std::size_t>(j)];
        }
        rem.resize(static_cast<std::size_t>(db));
        return {UnivariatePoly(std::move(q)), UnivariatePoly(std::move(rem))};
    }

    static UnivariatePoly gcd(UnivariatePoly a, UnivariatePoly b) {
        while (!b.is_zero()) {
            auto r = divmod(a, b).second;
            a = std::move(b);
            b = r.monic();
        }
        return a.monic();
    }

    /// q / gcd(q, q'): same distinct roots, all simple.
    UnivariatePoly square_free_part() const {
        if (degree() <= 0) return *this;
        UnivariatePoly g = gcd(*this, derivative());
        return divmod(*this, g).first.monic();
    }

    /// Cauchy bound: every real root r satisfies |r| < bound.
    Rational root_bound() const {
        if (degree() <= 0) return Rational(1);
        Rational m = 0;
        for (int i = 0; i < degree(); ++i) m = std::max(m, Rational(abs(c_[static_cast<std::size_t>(i)] / leading())));
        return m + 1;
    }

    std::string to_string(const std::string& var = "x") const {
        if (is_zero()) return "0";
        std::string out;
        for (int i = degree(); i >= 0; --i) {
            const Rational& c = c_[static_cast<std::size_t>(i)];
            if (c == 0) continue;
            if (!out.empty()) out += c < 0 ? " - " : " + ";
            else if (c < 0) out += "-";
            Rational mag = abs(c);
            if (i == 0 || mag != 1) out += mag.get_str() + (i ? "*" : "");
            if (i > 0) out += var + (i > 1 ? "^" + std::to_string(i) : "");
        }
        return out;
    }

private:
    void normalize() {
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }

    std::vector<Rational> c_;
};

/// Standard Sturm sequence p0 = q, p1 = q', p_{k+1} = -rem(p_{k-1}, p_k).
inline std::vector<UnivariatePoly> sturm_sequence(const UnivariatePoly& q) {
    std::vector<UnivariatePoly> seq{q, q.derivative()};
    while (!seq.back().is_zero()) {
        auto r = UnivariatePoly::divmod(seq[seq.size() - 2], seq.back()).second;
        if (r.is_zero()) break;
        // positive rescaling keeps signs and tames coefficient growth
        Rational lc = abs(r.leading());
        seq.push_back(Rational(-1) / lc * r);
    }
    if (seq.back().is_zero()) seq.pop_back();
    return seq;
}

namespace detail {
inline int count_variations(const std::vector<int>& signs) {
    int v = 0, last = 0;
    for (int s : signs) {
        if (s == 0) continue;
        if (last != 0 && s != last) ++v;
        last = s;
    }
    return v;
}
}  // namespace detail

inline int sign_variations(const std::vector<UnivariatePoly>& seq, const Rational& x) {
    std::vector<int> s;
    s.reserve(seq.size());
    for (const auto& p : seq) s.push_back(p.sign_at(x));
    return detail::count_variations(s);
}

inline int sign_variations_at_infinity(const std::vector<UnivariatePoly>& seq, bool positive) {
    std::vector<int> s;
    s.reserve(seq.size());
    for (const auto& p : seq) s.push_back(p.sign_at_infinity(positive));
    return detail::count_variations(s);
}

/// Number of distinct real roots in (a, b] by Sturm's theorem.
inline int count_real_roots(const UnivariatePoly& q, const Rational& a, const Rational& b) {
    auto seq = sturm_sequence(q.square_free_part());
    return sign_variations(seq, a) - sign_variations(seq, b);
}

/// Isolating interval (lo, hi) for exactly one real root; endpoints are never roots.
struct RootInterval {
    Rational lo, hi;
    bool square_free = true;
    int multiplicity = 1;
};

namespace detail {

/// Splitting point near the midpoint that is not a root of q.
inline Rational safe_split(const UnivariatePoly& q, const Rational& lo, const Rational& hi) {
    Rational mid = (lo + hi) / 2;
    Rational step = (hi - lo) / 64;
    for (int k = 1; q.evaluate(mid) == 0; ++k) mid = (lo + hi) / 2 + (k % 2 ? k : -k) * step / 2;
    return mid;
}

inline void isolate(const UnivariatePoly& q, const std::vector<UnivariatePoly>& seq, const Rational& lo,
                    const Rational& hi, int vlo, int vhi, std::vector<RootInterval>& out) {
    int count = vlo - vhi;
    if (count <= 0) return;
    if (count == 1) {
        out.push_back({lo, hi, true, 1});
        return;
    }
    Rational mid = safe_split(q, lo, hi);
    int vmid = sign_variations(seq, mid);
    isolate(q, seq, lo, mid, vlo, vmid, out);
    isolate(q, seq, mid, hi, vmid, vhi, out);
}

/// Multiplicity of the root inside iv, via repeated derivatives.
inline int multiplicity_in(const UnivariatePoly& q, const RootInterval& iv) {
    int m = 1;
    UnivariatePoly g = UnivariatePoly::gcd(q, q.derivative());
    while (g.degree() > 0 && count_real_roots(g, iv.lo, iv.hi) > 0) {
        ++m;
        g = UnivariatePoly::gcd(g, g.derivative());
    }
    return m;
}

}  // namespace detail

/// Disjoint isolating intervals for the distinct real roots, ascending.
inline std::vector<RootInterval> isolate_real_roots(const UnivariatePoly& q) {
    if (q.is_zero()) throw ValidationError("cannot isolate roots of the zero polynomial");
    std::vector<RootInterval> out;
    if (q.degree() == 0) return out;
    UnivariatePoly sf = q.square_free_part();
    auto seq = sturm_sequence(sf);
    Rational bound = sf.root_bound();
    detail::isolate(sf, seq, -bound, bound, sign_variations(seq, -bound), sign_variations(seq, bound), out);
    for (auto& iv : out) iv.multiplicity = detail::multiplicity_in(q, iv);
    return out;
}

/// Bisects until the interval is narrower than eps; returns the midpoint.
/// A midpoint that is an exact root is returned immediately.
inline Rational refine_root(const UnivariatePoly& q, const RootInterval& iv, const Rational& eps) {
    UnivariatePoly sf = q.square_free_part();
    Rational lo = iv.lo, hi = iv.hi;
    int slo = sf.sign_at(lo);
    if (slo == 0) throw ValidationError("interval endpoint is a root");
    while (hi - lo >= eps) {
        Rational mid = (lo + hi) / 2;
        int sm = sf.sign_at(mid);
        if (sm == 0) return mid;
        if (sm == slo) lo = mid;
        else hi = mid;
    }
    return (lo + hi) / 2;
}

/// Like refine_root but stops at relative width eps (absolute width eps once the
/// interval straddles zero); used for roots of very different magnitudes.
inline Rational refine_root_relative(const UnivariatePoly& q, const RootInterval& iv, double eps) {
    UnivariatePoly sf = q.square_free_part();
    Rational lo = iv.lo, hi = iv.hi;
    int slo = sf.sign_at(lo);
    if (slo == 0) throw ValidationError("interval endpoint is a root");
    Rational reps = from_double(eps);
    for (int iter = 0; iter < 4000; ++iter) {
        Rational scale = std::min(abs(lo), abs(hi));
        if (scale == 0) scale = std::max(abs(lo), abs(hi)) / 1024;
        bool straddles = sgn(lo) < 0 && sgn(hi) > 0;
        Rational width = hi - lo;
        if (!straddles && width < reps * scale) break;
        if (straddles && width < reps * reps) break;
        // geometric split when the interval spans many orders of magnitude
        Rational mid;
        if (lo == 0 || hi == 0) {
            // one endpoint is the (non-root) origin: shrink towards it geometrically
            mid = lo == 0 ? hi / 1024 : lo / 1024;
        } else if (!straddles && sgn(lo) > 0 && hi > 16 * lo) {
            mid = from_double(std::sqrt(lo.get_d()) * std::sqrt(hi.get_d()));
            if (!(mid > lo && mid < hi)) mid = (lo + hi) / 2;
        } else if (!straddles && sgn(hi) < 0 && lo < 16 * hi) {
            mid = -from_double(std::sqrt(-lo.get_d()) * std::sqrt(-hi.get_d()));
            if (!(mid > lo && mid < hi)) mid = (lo + hi) / 2;
        } else if (straddles) {
            // split at zero so tiny roots are then reached geometrically
            mid = Rational(0);
        } else {
            mid = (lo + hi) / 2;
        }
        int sm = sf.sign_at(mid);
        if (sm == 0) return mid;
        if (sm == slo) lo = mid;
        else hi = mid;
    }
    return (lo + hi) / 2;
}

}  // namespace bifinf
