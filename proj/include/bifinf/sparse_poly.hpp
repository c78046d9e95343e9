#pragma once

// Exact sparse multivariate polynomials over the rationals.
//
// Terms are kept in graded lexicographic order, highest first, which is also
// the canonical printing order. Zero coefficients are never stored, so the
// zero polynomial has an empty term map.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "bifinf/error.hpp"
#include "bifinf/rational.hpp"

namespace bifinf {

using Exponents = std::vector<std::uint32_t>;

/// Exponent vector with its cached total degree.
struct Monomial {
    std::uint32_t degree = 0;
    Exponents exps;

    Monomial() = default;
    explicit Monomial(Exponents e)
        : degree(std::accumulate(e.begin(), e.end(), std::uint32_t{0})), exps(std::move(e)) {}

    friend bool operator==(const Monomial& a, const Monomial& b) { return a.exps == b.exps; }
};

/// Graded lex, descending: higher total degree first, then lexicographically larger.
struct GradedLexGreater {
    bool operator()(const Monomial& a, const Monomial& b) const {
        if (a.degree != b.degree) return a.degree > b.degree;
        return std::lexicographical_compare(b.exps.begin(), b.exps.end(), a.exps.begin(),
                                            a.exps.end());
    }
};

template <class T>
T integer_power(T base, std::uint32_t e) {
    T result(1);
    while (e > 0) {
        if (e & 1u) result *= base;
        e >>= 1u;
        if (e > 0) base *= base;
    }
    return result;
}

class SparsePoly {
public:
    using TermMap = std::map<Monomial, Rational, GradedLexGreater>;

    SparsePoly() = default;
    explicit SparsePoly(std::size_t nvars) : nvars_(nvars) {}

    static SparsePoly constant(std::size_t nvars, const Rational& c) {
        SparsePoly p(nvars);
        p.add_term(Exponents(nvars, 0), c);
        return p;
    }

    static SparsePoly variable(std::size_t nvars, std::size_t index) {
        if (index >= nvars) throw ValidationError("variable index out of range");
        Exponents e(nvars, 0);
        e[index] = 1;
        SparsePoly p(nvars);
        p.add_term(std::move(e), Rational(1));
        return p;
    }

    static SparsePoly monomial(Exponents exps, const Rational& c) {
        SparsePoly p(exps.size());
        p.add_term(std::move(exps), c);
        return p;
    }

    std::size_t nvars() const noexcept { return nvars_; }
    const TermMap& terms() const noexcept { return terms_; }
    std::size_t term_count() const noexcept { return terms_.size(); }
    bool is_zero() const noexcept { return terms_.empty(); }

    bool is_constant() const {
        return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.degree == 0);
    }

    /// -1 for the zero polynomial.
    int total_degree() const {
        return terms_.empty() ? -1 : static_cast<int>(terms_.begin()->first.degree);
    }

    int degree_in(std::size_t var) const {
        check_index(var);
        int d = -1;
        for (const auto& [m, c] : terms_) d = std::max(d, static_cast<int>(m.exps[var]));
        return d;
    }

    Rational coefficient(const Exponents& exps) const {
        if (exps.size() != nvars_) throw ValidationError("exponent vector length mismatch");
        auto it = terms_.find(Monomial(exps));
        return it == terms_.end() ? Rational(0) : it->second;
    }

    Rational constant_term() const { return coefficient(Exponents(nvars_, 0)); }

    void add_term(Exponents exps, const Rational& c) {
        if (exps.size() != nvars_) throw ValidationError("exponent vector length mismatch");
        add_term(Monomial(std::move(exps)), c);
    }

    void add_term(Monomial m, const Rational& c) {
        if (c == 0) return;
        auto [it, inserted] = terms_.try_emplace(std::move(m), c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    SparsePoly& operator+=(const SparsePoly& o) {
        match(o);
        for (const auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }

    SparsePoly& operator-=(const SparsePoly& o) {
        match(o);
        for (const auto& [m, c] : o.terms_) add_term(m, -c);
        return *this;
    }

    SparsePoly& operator*=(const Rational& s) {
        if (s == 0) {
            terms_.clear();
            return *this;
        }
        for (auto& [m, c] : terms_) c *= s;
        return *this;
    }

    SparsePoly& operator*=(const SparsePoly& o) {
        *this = *this * o;
        return *this;
    }

    friend SparsePoly operator+(SparsePoly a, const SparsePoly& b) { return a += b; }
    friend SparsePoly operator-(SparsePoly a, const SparsePoly& b) { return a -= b; }
    friend SparsePoly operator*(SparsePoly a, const Rational& s) { return a *= s; }
    friend SparsePoly operator*(const Rational& s, SparsePoly a) { return a *= s; }

    friend SparsePoly operator-(SparsePoly a) {
        for (auto& [m, c] : a.terms_) c = -c;
        return a;
    }

    friend SparsePoly operator*(const SparsePoly& a, const SparsePoly& b) {
        a.match(b);
        SparsePoly out(a.nvars_);
        if (a.is_zero() || b.is_zero()) return out;
        Exponents e(a.nvars_);
        for (const auto& [ma, ca] : a.terms_) {
            for (const auto& [mb, cb] : b.terms_) {
                for (std::size_t i = 0; i < e.size(); ++i) e[i] = ma.exps[i] + mb.exps[i];
                Monomial m;
                m.degree = ma.degree + mb.degree;
                m.exps = e;
                out.add_term(std::move(m), ca * cb);
            }
        }
        return out;
    }

    friend bool operator==(const SparsePoly& a, const SparsePoly& b) {
        return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
    }

    SparsePoly pow(std::uint32_t e) const {
        SparsePoly result = constant(nvars_, Rational(1));
        SparsePoly base = *this;
        while (e > 0) {
            if (e & 1u) result *= base;
            e >>= 1u;
            if (e > 0) base = base * base;
        }
        return result;
    }

    /// Exact in rational mode; for floating types the result carries rounding error.
    template <class T>
    T evaluate(std::span<const T> point) const {
        if (point.size() != nvars_) throw ValidationError("evaluation point has wrong dimension");
        T sum(0);
        for (const auto& [m, c] : terms_) {
            T term = coeff_as<T>(c);
            for (std::size_t i = 0; i < nvars_; ++i)
                if (m.exps[i] != 0) term *= integer_power(point[i], m.exps[i]);
            sum += term;
        }
        return sum;
    }

    template <class T>
    T evaluate(const std::vector<T>& point) const {
        return evaluate(std::span<const T>(point));
    }

    /// Sum of |c|*|x^alpha| over terms: the magnitude scale that evaluation cancels against.
    double magnitude_at(std::span<const double> point) const {
        if (point.size() != nvars_) throw ValidationError("evaluation point has wrong dimension");
        double sum = 0;
        for (const auto& [m, c] : terms_) {
            double term = std::abs(c.get_d());
            for (std::size_t i = 0; i < nvars_; ++i)
                if (m.exps[i] != 0) term *= integer_power(std::abs(point[i]), m.exps[i]);
            sum += term;
        }
        return sum;
    }

    SparsePoly partial_derivative(std::size_t var) const {
        check_index(var);
        SparsePoly out(nvars_);
        for (const auto& [m, c] : terms_) {
            if (m.exps[var] == 0) continue;
            Exponents e = m.exps;
            Rational k(e[var]);
            e[var] -= 1;
            out.add_term(std::move(e), c * k);
        }
        return out;
    }

    /// Replaces variable `var` by a constant; the variable count is unchanged.
    SparsePoly substitute(std::size_t var, const Rational& value) const {
        check_index(var);
        SparsePoly out(nvars_);
        for (const auto& [m, c] : terms_) {
            Exponents e = m.exps;
            std::uint32_t k = e[var];
            e[var] = 0;
            Rational factor = c;
            if (k > 0) factor *= integer_power(value, k);
            out.add_term(std::move(e), factor);
        }
        return out;
    }

    /// Re-indexes variables: old variable i becomes variable `mapping[i]` of a
    /// ring with `new_nvars` variables. Old variables with nonzero exponent must be mapped.
    SparsePoly remap(std::size_t new_nvars, std::span<const std::size_t> mapping) const {
        if (mapping.size() != nvars_) throw ValidationError("variable mapping has wrong length");
        SparsePoly out(new_nvars);
        for (const auto& [m, c] : terms_) {
            Exponents e(new_nvars, 0);
            for (std::size_t i = 0; i < nvars_; ++i) {
                if (m.exps[i] == 0) continue;
                if (mapping[i] >= new_nvars) throw ValidationError("variable mapping out of range");
                e[mapping[i]] += m.exps[i];
            }
            out.add_term(std::move(e), c);
        }
        return out;
    }

    /// Canonical text: graded lex order, `*` between factors, `^` for powers.
    std::string to_string(std::span<const std::string> names) const {
        if (names.size() != nvars_) throw ValidationError("variable name count mismatch");
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [m, c] : terms_) {
            Rational mag = abs(c);
            if (first) {
                if (c < 0) os << "-";
            } else {
                os << (c < 0 ? " - " : " + ");
            }
            first = false;
            bool wrote = false;
            if (mag != 1 || m.degree == 0) {
                os << mag.get_str();
                wrote = true;
            }
            for (std::size_t i = 0; i < nvars_; ++i) {
                if (m.exps[i] == 0) continue;
                if (wrote) os << "*";
                os << names[i];
                if (m.exps[i] > 1) os << "^" << m.exps[i];
                wrote = true;
            }
        }
        return os.str();
    }

    std::string to_string(const std::vector<std::string>& names) const {
        return to_string(std::span<const std::string>(names));
    }

private:
    template <class T>
    static T coeff_as(const Rational& c) {
        if constexpr (std::is_same_v<T, Rational>) {
            return c;
        } else {
            return static_cast<T>(c.get_d());
        }
    }

    void check_index(std::size_t var) const {
        if (var >= nvars_) throw ValidationError("variable index out of range");
    }

    void match(const SparsePoly& o) const {
        if (o.nvars_ != nvars_) throw ValidationError("polynomials live in different rings");
    }

    std::size_t nvars_ = 0;
    TermMap terms_;
};

/// Default variable names x1..xn.
inline std::vector<std::string> default_names(std::size_t n, const std::string& stem = "x") {
    std::vector<std::string> names;
    names.reserve(n);
    for (std::size_t i = 0; i < n; ++i) names.push_back(stem + std::to_string(i + 1));
    return names;
}

}  // namespace bifinf
