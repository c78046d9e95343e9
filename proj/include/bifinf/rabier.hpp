#pragma once

// The Rabier function nu(A) = inf_{|y|=1} |A^T y| and the asymptotic
// critical value evidence |x| nu(Df(x)) along paths going to infinity.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bifinf/diffgeo.hpp"
#include "bifinf/error.hpp"
#include "bifinf/laurent.hpp"
#include "bifinf/poly_map.hpp"

namespace bifinf {

using RealMatrix = Eigen::MatrixXd;

namespace detail {

inline void check_rabier_shape(const RealMatrix& A) {
    if (A.rows() < 1) throw ValidationError("matrix needs at least one row");
    if (A.rows() > A.cols()) throw ValidationError("nu needs p <= n (rows <= columns)");
    if (!A.allFinite()) throw NumericError("matrix has non-finite entries");
}

}  // namespace detail

/// Smallest singular value of a p x n matrix, p <= n.
inline double nu(const RealMatrix& A) {
    detail::check_rabier_shape(A);
    if (A.isZero(0.0)) return 0.0;
    Eigen::JacobiSVD<RealMatrix> svd(A);
    return svd.singularValues()(A.rows() - 1);
}

/// Minimum of |A^T y| over `samples` uniformly random unit vectors y. An upper
/// bound for nu(A).
inline double nu_bruteforce(const RealMatrix& A, std::size_t samples, std::uint64_t seed) {
    detail::check_rabier_shape(A);
    if (samples < 1) throw ValidationError("need at least one sample");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Eigen::Index p = A.rows();
    RealMatrix At = A.transpose();
    Eigen::VectorXd y(p);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < samples; ++s) {
        double norm = 0;
        do {
            for (Eigen::Index i = 0; i < p; ++i) y(i) = normal(rng);
            norm = y.norm();
        } while (norm == 0);
        y /= norm;
        best = std::min(best, (At * y).norm());
    }
    return best;
}

struct RabierSample {
    double t = 0;
    std::vector<double> x;
    double norm_x = 0;
    double nu_value = 0;
    double product = 0;
    std::vector<double> f_value;
    bool ok = true;
    std::string error;  ///< set when evaluation overflowed at this t
};

inline std::vector<double> geometric_schedule(double t0, double ratio, std::size_t count) {
    if (!(t0 > 0) || !(ratio > 1)) throw ValidationError("schedule needs t0 > 0 and ratio > 1");
    std::vector<double> out;
    double t = t0;
    for (std::size_t i = 0; i < count; ++i, t *= ratio) out.push_back(t);
    return out;
}

namespace detail {

inline void check_schedule(const std::vector<double>& ts) {
    for (std::size_t i = 1; i < ts.size(); ++i)
        if (!(ts[i] > ts[i - 1])) throw ValidationError("t schedule must be strictly increasing");
}

inline void finish_sample(RabierSample& s, const RealMatrix& Df) {
    double nx = 0;
    for (double v : s.x) nx += v * v;
    s.norm_x = std::sqrt(nx);
    bool finite = std::isfinite(s.norm_x) && Df.allFinite();
    for (double v : s.f_value) finite = finite && std::isfinite(v);
    if (!finite) {
        s.ok = false;
        s.error = "overflow evaluating the path or the map";
        return;
    }
    s.nu_value = nu(Df);
    s.product = s.norm_x * s.nu_value;
}

}  // namespace detail

/// Samples along an exact Laurent arc. f and Df are composed with the arc
/// symbolically first, so cancellations such as (xy + 1)^2 = 0 on the path
/// are exact before evaluation in floating point.
inline std::vector<RabierSample> rabier_profile(const PolyMap& f, const LaurentArc<Rational>& arc,
                                                const std::vector<double>& t_schedule) {
    if (arc.dim() != f.n()) throw ValidationError("path dimension does not match the map");
    detail::check_schedule(t_schedule);
    JacobianMatrix J = jacobian(f);
    std::vector<std::vector<Laurent<Rational>>> Dcomp(f.p());
    for (std::size_t i = 0; i < f.p(); ++i)
        for (std::size_t j = 0; j < f.n(); ++j) Dcomp[i].push_back(compose(J.rows[i][j], arc).trimmed());
    auto fcomp = compose_arc(f, arc);
    std::vector<RabierSample> out;
    for (double t : t_schedule) {
        RabierSample s;
        s.t = t;
        s.x = arc.evaluate(t);
        RealMatrix Df(static_cast<Eigen::Index>(f.p()), static_cast<Eigen::Index>(f.n()));
        for (std::size_t i = 0; i < f.p(); ++i)
            for (std::size_t j = 0; j < f.n(); ++j)
                Df(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = Dcomp[i][j].evaluate(t);
        for (const auto& c : fcomp) s.f_value.push_back(c.evaluate(t));
        detail::finish_sample(s, Df);
        out.push_back(std::move(s));
    }
    return out;
}

using ParametricPath = std::function<std::vector<double>(double)>;

/// Samples along a closed-form path evaluated in floating point.
inline std::vector<RabierSample> rabier_profile(const PolyMap& f, const ParametricPath& path,
                                                const std::vector<double>& t_schedule) {
    detail::check_schedule(t_schedule);
    JacobianMatrix J = jacobian(f);
    std::vector<RabierSample> out;
    for (double t : t_schedule) {
        RabierSample s;
        s.t = t;
        s.x = path(t);
        if (s.x.size() != f.n()) throw ValidationError("path dimension does not match the map");
        auto vals = J.evaluate(std::span<const double>(s.x));
        RealMatrix Df(static_cast<Eigen::Index>(f.p()), static_cast<Eigen::Index>(f.n()));
        for (std::size_t i = 0; i < f.p(); ++i)
            for (std::size_t j = 0; j < f.n(); ++j)
                Df(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vals[i][j];
        s.f_value = f.evaluate(std::span<const double>(s.x));
        detail::finish_sample(s, Df);
        out.push_back(std::move(s));
    }
    return out;
}

struct KinftyEvidence {
    bool pass = false;
    std::vector<double> limit;  ///< f at the last sample
    std::string diagnostic;
};

/// Finite-sample surrogate for "|x_j| -> infinity, |x_j| nu(Df(x_j)) -> 0,
/// f(x_j) converges": the last product is below tol, products do not increase
/// over the last `window` samples, f is Cauchy within tol over the last
/// `window` samples, and |x| grows strictly, by at least a factor 10 overall.
inline KinftyEvidence kinfty_evidence(const std::vector<RabierSample>& profile, double tol = 1e-3,
                                      std::size_t window = 3) {
    KinftyEvidence ev;
    if (profile.size() < 3 || window < 2) {
        ev.diagnostic = "need at least 3 samples";
        return ev;
    }
    for (const auto& s : profile)
        if (!s.ok) {
            ev.diagnostic = "sample at t = " + std::to_string(s.t) + " failed: " + s.error;
            return ev;
        }
    const auto& last = profile.back();
    ev.limit = last.f_value;
    for (std::size_t i = 1; i < profile.size(); ++i)
        if (!(profile[i].norm_x > profile[i - 1].norm_x)) {
            ev.diagnostic = "|x| is not increasing along the path";
            return ev;
        }
    if (!(last.norm_x >= 10 * profile.front().norm_x)) {
        ev.diagnostic = "|x| does not grow enough to indicate escape to infinity";
        return ev;
    }
    if (!(last.product < tol)) {
        ev.diagnostic = "product |x| nu = " + std::to_string(last.product) + " not below tol";
        return ev;
    }
    std::size_t w = std::min(window, profile.size());
    std::size_t start = profile.size() - w;
    for (std::size_t i = start + 1; i < profile.size(); ++i)
        if (profile[i].product > profile[i - 1].product) {
            ev.diagnostic = "product not decreasing over the last samples";
            return ev;
        }
    for (std::size_t i = start; i < profile.size(); ++i)
        for (std::size_t j = i + 1; j < profile.size(); ++j)
            for (std::size_t k = 0; k < last.f_value.size(); ++k)
                if (!(std::abs(profile[i].f_value[k] - profile[j].f_value[k]) <= tol)) {
                    ev.diagnostic = "f values not Cauchy within tol";
                    return ev;
                }
    ev.pass = true;
    ev.diagnostic = "ok";
    return ev;
}

inline std::string profile_to_csv(const std::vector<RabierSample>& profile, std::size_t p) {
    std::ostringstream os;
    os.precision(17);
    os << "t,norm_x,nu,product";
    for (std::size_t k = 0; k < p; ++k) os << ",f_" << k + 1;
    os << "\n";
    for (const auto& s : profile) {
        os << s.t << "," << s.norm_x << "," << s.nu_value << "," << s.product;
        for (std::size_t k = 0; k < p; ++k) {
            os << ",";
            if (k < s.f_value.size()) os << s.f_value[k];
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace bifinf
