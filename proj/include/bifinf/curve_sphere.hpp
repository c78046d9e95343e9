#pragma once

// Real points of a plane curve {m = 0} on the circle |(x,y) - a| = R.
//
// The circle is parametrized rationally,
//   x = a1 + R (1 - u^2)/(1 + u^2),   y = a2 + 2 R u/(1 + u^2),
// which turns the problem into one univariate polynomial in u with exact
// rational coefficients. Roots are isolated with Sturm sequences and refined
// to high relative precision, so coordinates stay accurate even when one of
// them is many orders of magnitude below R. The point u = infinity,
// (a1 - R, a2), is checked separately.

#include <cmath>
#include <vector>

#include "bifinf/error.hpp"
#include "bifinf/sparse_poly.hpp"
#include "bifinf/univariate.hpp"

namespace bifinf {

struct RealPoint2 {
    double x = 0, y = 0;
    Rational exact_x, exact_y;  ///< rational point on the circle; the certificate
    Rational u_lo, u_hi;        ///< isolating interval of the parameter (equal when exact)
    bool parameter_at_infinity = false;
    double residual = 0;         ///< |m(p)| / sum |c_a| |p|_inf^|a| at the rational point p
    double sphere_residual = 0;  ///< |(x-a1)^2 + (y-a2)^2 - R^2| / R^2 at the float point
};

struct CurveSphereResult {
    std::vector<RealPoint2> points;  ///< ordered by parameter u, the u = infinity point last
    /// m vanishes on the whole circle; callers sample the circle instead.
    bool degenerate = false;
};

namespace detail {

/// (1+u^2)^D * m(x(u), y(u)) as an exact polynomial in u.
inline UnivariatePoly circle_pullback(const SparsePoly& m, const Rational& a1, const Rational& a2,
                                      const Rational& R) {
    int D = std::max(m.total_degree(), 0);
    UnivariatePoly W({Rational(1), Rational(0), Rational(1)});
    UnivariatePoly X = a1 * W + UnivariatePoly({R, Rational(0), -R});
    UnivariatePoly Y = a2 * W + UnivariatePoly({Rational(0), 2 * R});
    auto powers = [](const UnivariatePoly& base, int k) {
        std::vector<UnivariatePoly> v{UnivariatePoly::constant(Rational(1))};
        for (int i = 1; i <= k; ++i) v.push_back(v.back() * base);
        return v;
    };
    auto Xp = powers(X, D), Yp = powers(Y, D), Wp = powers(W, D);
    UnivariatePoly out;
    for (const auto& [mono, c] : m.terms()) {
        int i = static_cast<int>(mono.exps[0]), j = static_cast<int>(mono.exps[1]);
        out = out + c * (Xp[static_cast<std::size_t>(i)] * Yp[static_cast<std::size_t>(j)] *
                         Wp[static_cast<std::size_t>(D - i - j)]);
    }
    return out;
}

inline RealPoint2 make_point(const SparsePoly& m, const Rational& ex, const Rational& ey, const Rational& a1,
                             const Rational& a2, const Rational& R, double xd, double yd) {
    RealPoint2 p;
    p.exact_x = ex;
    p.exact_y = ey;
    p.x = xd;
    p.y = yd;
    std::vector<Rational> pt{ex, ey};
    double val = std::abs(m.evaluate(pt).get_d());
    double rho = std::max(std::abs(xd), std::abs(yd)), scale = 0;
    for (const auto& [mono, c] : m.terms()) scale += std::abs(c.get_d()) * std::pow(rho, static_cast<double>(mono.degree));
    p.residual = scale > 0 ? val / scale : val;
    double Rd = R.get_d();
    double dx = xd - a1.get_d(), dy = yd - a2.get_d();
    p.sphere_residual = std::abs(dx * dx + dy * dy - Rd * Rd) / (Rd * Rd);
    return p;
}

}  // namespace detail

inline CurveSphereResult curve_sphere_intersect(const SparsePoly& m, Rational a1, Rational a2, Rational R,
                                                double rel_eps = 1e-24) {
    a1.canonicalize();
    a2.canonicalize();
    R.canonicalize();
    if (m.nvars() != 2) throw ValidationError("curve-sphere intersection needs a plane curve (n = 2)");
    if (R <= 0) throw ValidationError("radius must be positive");
    CurveSphereResult out;
    if (m.is_zero()) {
        out.degenerate = true;
        return out;
    }
    UnivariatePoly P = detail::circle_pullback(m, a1, a2, R);
    if (P.is_zero()) {
        out.degenerate = true;
        return out;
    }
    const double a1d = a1.get_d(), a2d = a2.get_d(), Rd = R.get_d();
    if (P.degree() > 0) {
        for (const auto& iv : isolate_real_roots(P)) {
            Rational u = refine_root_relative(P, iv, rel_eps);
            Rational W = 1 + u * u;
            Rational ex = a1 + R * (1 - u * u) / W;
            Rational ey = a2 + 2 * R * u / W;
            // float coordinates from the float parameter avoid cancellation in x - a1 ~ +-R
            double ud = u.get_d();
            double xd, yd;
            if (std::abs(ud) <= 1.0) {
                double wd = 1.0 + ud * ud;
                xd = a1d + Rd * (1.0 - ud * ud) / wd;
                yd = a2d + 2.0 * Rd * ud / wd;
            } else {
                double v = 1.0 / ud;  // u = 1/v, x = a1 + R (v^2 - 1)/(v^2 + 1)
                double wd = v * v + 1.0;
                xd = a1d + Rd * (v * v - 1.0) / wd;
                yd = a2d + 2.0 * Rd * v / wd;
            }
            RealPoint2 p = detail::make_point(m, ex, ey, a1, a2, R, xd, yd);
            p.u_lo = iv.lo;
            p.u_hi = iv.hi;
            out.points.push_back(std::move(p));
        }
    }
    Rational ix = a1 - R;
    if (m.evaluate(std::vector<Rational>{ix, a2}) == 0) {
        RealPoint2 p = detail::make_point(m, ix, a2, a1, a2, R, ix.get_d(), a2d);
        p.parameter_at_infinity = true;
        out.points.push_back(std::move(p));
    }
    return out;
}

}  // namespace bifinf
