#pragma once

// Exact rational numbers backed by GMP (mpq_class keeps numerator/denominator
// canonical: positive denominator, reduced, zero as 0/1).

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <string>

#include "bifinf/error.hpp"

namespace bifinf {

using Rational = mpq_class;
using Integer = mpz_class;

inline Rational make_rational(long num, long den = 1) {
    if (den == 0) throw ValidationError("rational with zero denominator");
    Rational r(num, den);
    r.canonicalize();
    return r;
}

inline double to_double(const Rational& r) { return r.get_d(); }

/// Exact conversion; every finite double is a dyadic rational.
inline Rational from_double(double v) {
    if (!std::isfinite(v)) throw ValidationError("non-finite value cannot be made rational");
    return Rational(v);
}

/// "p/q" or "p" when the denominator is 1.
inline std::string to_string(const Rational& r) { return r.get_str(); }

inline int sign(const Rational& r) { return sgn(r); }

/// Parses "12", "-3/4" or a decimal "0.125" exactly.
inline Rational parse_rational(const std::string& text) {
    auto dot = text.find('.');
    if (dot == std::string::npos) {
        Rational r;
        if (r.set_str(text, 10) != 0) throw ValidationError("bad rational literal '" + text + "'");
        if (r.get_den() == 0) throw ValidationError("rational with zero denominator");
        r.canonicalize();
        return r;
    }
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    Integer num;
    if (digits.empty() || digits == "-" || num.set_str(digits, 10) != 0)
        throw ValidationError("bad decimal literal '" + text + "'");
    Integer den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, text.size() - dot - 1);
    Rational r(num, den);
    r.canonicalize();
    return r;
}

/// Best rational approximation with denominator at most `max_den`
/// (continued-fraction convergents and semiconvergents).
inline Rational best_rational(double v, std::int64_t max_den) {
    if (!std::isfinite(v)) throw ValidationError("non-finite value cannot be rationalized");
    Rational x = from_double(v);
    Integer p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    Rational rest = x;
    for (int iter = 0; iter < 64; ++iter) {
        Integer a;
        mpz_fdiv_q(a.get_mpz_t(), rest.get_num_mpz_t(), rest.get_den_mpz_t());
        Integer p2 = a * p1 + p0;
        Integer q2 = a * q1 + q0;
        if (q2 > max_den) {
            // semiconvergent: largest k with k*q1 + q0 <= max_den
            Integer k = (Integer(max_den) - q0) / q1;
            Rational semi(k * p1 + p0, k * q1 + q0);
            semi.canonicalize();
            Rational conv(p1, q1);
            conv.canonicalize();
            return abs(semi - x) < abs(conv - x) ? semi : conv;
        }
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        Rational frac = rest - Rational(a);
        if (frac == 0) break;
        rest = 1 / frac;
    }
    Rational r(p1, q1);
    r.canonicalize();
    return r;
}

}  // namespace bifinf
