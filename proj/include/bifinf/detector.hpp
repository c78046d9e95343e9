#pragma once

// Sphere-sweep estimates of S_a(f), S_inf(f) and NS_inf(f).
//
// For each center a the Milnor set M_a(f) is cut with spheres of growing
// radius, the intersection points are linked into branches across radii, and
// branches along which f settles down yield limit clusters. Values found for
// every center form the S_inf estimate. Everything here is a finite-sample
// estimate; no certificate is produced.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bifinf/arcspace.hpp"
#include "bifinf/curve_sphere.hpp"
#include "bifinf/diffgeo.hpp"
#include "bifinf/error.hpp"
#include "bifinf/poly_map.hpp"
#include "bifinf/rabier.hpp"
#include "bifinf/rational.hpp"

namespace bifinf {

inline constexpr const char* kToolVersion = "0.1.0";

/// R_k = r0 * ratio^k, k = 0 .. steps-1.
struct RadiusSchedule {
    double r0 = 100;
    double ratio = 10;
    std::size_t steps = 5;

    void validate() const {
        if (!(r0 > 0) || !std::isfinite(r0)) throw ValidationError("radius schedule needs r0 > 0");
        if (!(ratio > 1) || !std::isfinite(ratio)) throw ValidationError("radius schedule needs ratio > 1");
        if (steps < 4) throw ValidationError("radius schedule needs at least 4 steps");
    }

    std::vector<double> radii() const {
        validate();
        std::vector<double> out;
        for (std::size_t k = 0; k < steps; ++k) out.push_back(r0 * std::pow(ratio, static_cast<double>(k)));
        return out;
    }

    /// Same range, twice the sampling density.
    RadiusSchedule refined() const { return {r0, std::sqrt(ratio), 2 * steps - 1}; }
};

struct DetectorOptions {
    RadiusSchedule schedule;
    double cluster_tol = 1e-3;     ///< Cauchy window and cluster spread
    double match_tol = 1e-3;       ///< matching cluster values across centers
    double sing_threshold = 1e-6;  ///< near-Sing proxy threshold
    double audit_tol = 1e-3;
    std::size_t cauchy_window = 3;
    std::size_t fallback_samples = 64;
    std::size_t random_centers = 5;
    std::uint64_t seed = 1;
    std::size_t continuation_starts = 0;  ///< 0 picks 24 n
    std::size_t continuation_substeps = 8;

    void validate() const {
        schedule.validate();
        for (double v : {cluster_tol, match_tol, sing_threshold, audit_tol})
            if (!(v > 0)) throw ValidationError("tolerances must be positive");
        if (cauchy_window < 2 || cauchy_window > schedule.steps)
            throw ValidationError("Cauchy window must lie in 2..steps");
        if (fallback_samples < 4) throw ValidationError("fallback sampling needs at least 4 points");
    }
};

struct TrackPoint {
    std::size_t radius_index = 0;
    double radius = 0;
    std::vector<double> x;
    std::vector<double> f;
    double sing = 0;     ///< sing_proximity at x
    double product = 0;  ///< |x| nu(Df(x))
};

struct BranchTrack {
    std::size_t id = 0;
    std::vector<TrackPoint> points;  ///< consecutive radius indices
    bool converged = false;
    bool trivial = false;  ///< near Sing f at some sampled radius
    std::vector<double> limit;
};

struct AuditRecord {
    bool pass = false;
    std::vector<double> products;  ///< one per tracked point
    std::string diagnostic;
};

struct LimitCluster {
    std::vector<double> value;
    std::vector<std::size_t> members;  ///< branch ids
    double spread = 0;
    bool nontrivial = false;
    bool audit_pass = false;
    std::vector<AuditRecord> audits;  ///< one per member
};

struct CenterResult {
    std::vector<double> center;
    std::vector<Rational> exact_center;
    std::string mode;  ///< exact, continuation or fallback
    bool degenerate = false;
    std::vector<std::string> warnings;
    std::vector<std::size_t> points_per_radius;
    std::vector<BranchTrack> branches;
    std::vector<LimitCluster> clusters;
};

struct EstimateEntry {
    std::vector<double> value;
    std::vector<std::size_t> cluster_index;  ///< matched cluster per center
};

struct DetectionReport {
    std::string map;
    std::vector<std::string> var_names;
    std::size_t n = 0, p = 0;
    int d = 0;
    DetectorOptions options;
    std::vector<CenterResult> centers;
    std::vector<EstimateEntry> s_infty;
    std::vector<EstimateEntry> ns_infty;
    bool all_audits_pass = true;
};

inline constexpr const char* kDetectorDisclaimer =
    "Finite-radius, finite-center estimate; not a proof. The bifurcation set at infinity B_inf(f) is not computed "
    "and no claim about it is made.";

namespace detail {

inline double dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

inline std::vector<double> to_doubles(const std::vector<Rational>& v) {
    std::vector<double> out;
    for (const auto& r : v) out.push_back(r.get_d());
    return out;
}

/// f, Df, sing proximity and |x| nu at a point; f and Df exact at the
/// rational point, then rounded.
inline TrackPoint describe_point(const PolyMap& f, const JacobianMatrix& J, const std::vector<Rational>& xr,
                                 std::size_t k, double R) {
    TrackPoint tp;
    tp.radius_index = k;
    tp.radius = R;
    tp.x = to_doubles(xr);
    tp.f = to_doubles(f.evaluate(xr));
    auto D = J.evaluate(std::span<const Rational>(xr));
    RealMatrix Df(static_cast<Eigen::Index>(f.p()), static_cast<Eigen::Index>(f.n()));
    for (std::size_t i = 0; i < f.p(); ++i)
        for (std::size_t j = 0; j < f.n(); ++j)
            Df(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = D[i][j].get_d();
    double nx = 0;
    for (double v : tp.x) nx += v * v;
    tp.product = Df.allFinite() ? std::sqrt(nx) * nu(Df) : std::numeric_limits<double>::infinity();
    tp.sing = sing_proximity(J, std::span<const double>(tp.x));
    return tp;
}

inline std::vector<double> random_direction(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(n);
    double s = 0;
    do {
        s = 0;
        for (auto& c : v) {
            c = normal(rng);
            s += c * c;
        }
    } while (s == 0);
    s = std::sqrt(s);
    for (auto& c : v) c /= s;
    return v;
}

/// Newton / Levenberg-Marquardt corrector for Milnor points on a sphere in
/// Lagrange form: unknowns (x, lambda, mu) with
///   sum_k lambda_k grad f_k(x) = mu (x - a),  |x - a| = R,  |(lambda, mu)| = 1.
/// Row j of the first block is divided by the larger of its own term
/// magnitude and the size of the two vectors it compares, so the residual is a
/// backward error that double evaluation can actually reach.
class MilnorCorrector {
public:
    struct Point {
        std::vector<double> x;
        std::vector<double> mult;  ///< lambda_1..lambda_p, mu
    };

    MilnorCorrector(const PolyMap& f, std::vector<double> center) : a_(std::move(center)), n_(f.n()), p_(f.p()) {
        grads_.resize(p_);
        hess_.resize(p_);
        for (std::size_t k = 0; k < p_; ++k) {
            for (std::size_t j = 0; j < n_; ++j) {
                grads_[k].push_back(f.component(k).partial_derivative(j));
                std::vector<SparsePoly> row;
                for (std::size_t i = 0; i < n_; ++i) row.push_back(grads_[k][j].partial_derivative(i));
                hess_[k].push_back(std::move(row));
            }
        }
    }

    /// Multipliers that best fit the rank condition at x: the smallest right
    /// singular vector of [grad f_1 .. grad f_p, -(x - a)] with unit columns.
    std::vector<double> initial_multipliers(const std::vector<double>& x) const {
        Eigen::MatrixXd M(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(p_ + 1));
        std::span<const double> xs(x);
        for (std::size_t k = 0; k <= p_; ++k)
            for (std::size_t j = 0; j < n_; ++j)
                M(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
                    k < p_ ? grads_[k][j].evaluate(xs) : -(x[j] - a_[j]);
        Eigen::VectorXd scale(p_ + 1);
        for (Eigen::Index k = 0; k < M.cols(); ++k) {
            scale(k) = M.col(k).norm();
            if (scale(k) > 0) M.col(k) /= scale(k);
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
        Eigen::VectorXd v = svd.matrixV().col(M.cols() - 1);
        for (Eigen::Index k = 0; k < v.size(); ++k)
            if (scale(k) > 0) v(k) /= scale(k);
        v.normalize();
        return {v.data(), v.data() + v.size()};
    }

    std::optional<Point> correct(std::vector<double> x, double R, std::optional<std::vector<double>> mult = std::nullopt,
                                 std::size_t max_iter = 60) const {
        const std::size_t N = n_ + p_ + 1;
        Eigen::VectorXd z(static_cast<Eigen::Index>(N));
        std::vector<double> m0 = mult ? *mult : initial_multipliers(x);
        for (std::size_t j = 0; j < n_; ++j) z(static_cast<Eigen::Index>(j)) = x[j];
        for (std::size_t k = 0; k <= p_; ++k) z(static_cast<Eigen::Index>(n_ + k)) = m0[k];
        Eigen::VectorXd r, r_try;
        Eigen::MatrixXd Jm, J_try;
        fill(z, R, r, Jm);
        double lambda = 1e-3;
        for (std::size_t it = 0; it < max_iter; ++it) {
            if (r.lpNorm<Eigen::Infinity>() < 1e-15) break;
            bool improved = false;
            Eigen::MatrixXd A = Jm.transpose() * Jm;
            Eigen::VectorXd g = Jm.transpose() * r;
            for (int attempt = 0; attempt < 13 && !improved; ++attempt) {
                Eigen::VectorXd step;
                if (attempt == 0) {
                    step = Jm.completeOrthogonalDecomposition().solve(-r);
                } else {
                    Eigen::MatrixXd M = A;
                    for (Eigen::Index i = 0; i < M.rows(); ++i) M(i, i) += lambda * (A(i, i) + 1e-30);
                    step = M.ldlt().solve(-g);
                }
                if (!step.allFinite()) {
                    lambda *= 10;
                    continue;
                }
                Eigen::VectorXd zt = z + step;
                fill(zt, R, r_try, J_try);
                if (r_try.allFinite() && r_try.norm() < r.norm()) {
                    z = zt;
                    r = r_try;
                    Jm = J_try;
                    lambda = std::max(lambda / 5, 1e-12);
                    improved = true;
                } else if (attempt > 0) {
                    lambda *= 8;
                }
            }
            if (!improved) break;
        }
        if (!(r.lpNorm<Eigen::Infinity>() < 1e-10)) return std::nullopt;
        Point out;
        for (std::size_t j = 0; j < n_; ++j) out.x.push_back(z(static_cast<Eigen::Index>(j)));
        for (std::size_t k = 0; k <= p_; ++k) out.mult.push_back(z(static_cast<Eigen::Index>(n_ + k)));
        return out;
    }

    /// Euler predictor along the solution curve from radius R to Rn.
    Point predict(const Point& pt, double R, double Rn) const {
        const std::size_t N = n_ + p_ + 1;
        Eigen::VectorXd z(static_cast<Eigen::Index>(N)), r;
        Eigen::MatrixXd Jm;
        for (std::size_t j = 0; j < n_; ++j) z(static_cast<Eigen::Index>(j)) = pt.x[j];
        for (std::size_t k = 0; k <= p_; ++k) z(static_cast<Eigen::Index>(n_ + k)) = pt.mult[k];
        fill(z, R, r, Jm);
        double dx2 = 0;
        for (std::size_t j = 0; j < n_; ++j) dx2 += (pt.x[j] - a_[j]) * (pt.x[j] - a_[j]);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_ + 2));
        rhs(static_cast<Eigen::Index>(n_)) = 2 * dx2 / (R * R * R) * (Rn - R);
        Eigen::VectorXd dz = Jm.completeOrthogonalDecomposition().solve(rhs);
        Point out = pt;
        if (!dz.allFinite()) {
            for (std::size_t j = 0; j < n_; ++j) out.x[j] = a_[j] + (pt.x[j] - a_[j]) * (Rn / R);
            return out;
        }
        for (std::size_t j = 0; j < n_; ++j) out.x[j] += dz(static_cast<Eigen::Index>(j));
        for (std::size_t k = 0; k <= p_; ++k) out.mult[k] += dz(static_cast<Eigen::Index>(n_ + k));
        return out;
    }

private:
    void fill(const Eigen::VectorXd& z, double R, Eigen::VectorXd& r, Eigen::MatrixXd& Jm) const {
        const std::size_t N = n_ + p_ + 1;
        std::vector<double> x(z.data(), z.data() + n_);
        std::span<const double> xs(x);
        r.setZero(static_cast<Eigen::Index>(n_ + 2));
        Jm.setZero(static_cast<Eigen::Index>(n_ + 2), static_cast<Eigen::Index>(N));
        const double mu = z(static_cast<Eigen::Index>(n_ + p_));
        std::vector<std::vector<double>> G(p_, std::vector<double>(n_));
        double scale = 0, dx2 = 0;
        for (std::size_t k = 0; k < p_; ++k) {
            double gn = 0;
            for (std::size_t j = 0; j < n_; ++j) {
                G[k][j] = grads_[k][j].evaluate(xs);
                gn += G[k][j] * G[k][j];
            }
            scale += std::abs(z(static_cast<Eigen::Index>(n_ + k))) * std::sqrt(gn);
        }
        for (std::size_t j = 0; j < n_; ++j) dx2 += (x[j] - a_[j]) * (x[j] - a_[j]);
        scale += std::abs(mu) * std::sqrt(dx2);
        scale = std::max(scale, 1e-300);
        for (std::size_t j = 0; j < n_; ++j) {
            const auto row = static_cast<Eigen::Index>(j);
            double e = -mu * (x[j] - a_[j]);
            double mag = std::abs(mu) * (std::abs(x[j]) + std::abs(a_[j]));
            for (std::size_t k = 0; k < p_; ++k)
                mag += std::abs(z(static_cast<Eigen::Index>(n_ + k))) * grads_[k][j].magnitude_at(xs);
            const double sj = std::max(mag, scale);
            for (std::size_t k = 0; k < p_; ++k) {
                const double lk = z(static_cast<Eigen::Index>(n_ + k));
                e += lk * G[k][j];
                Jm(row, static_cast<Eigen::Index>(n_ + k)) = G[k][j] / sj;
                for (std::size_t i = 0; i < n_; ++i)
                    Jm(row, static_cast<Eigen::Index>(i)) += lk * hess_[k][j][i].evaluate(xs) / sj;
            }
            Jm(row, row) -= mu / sj;
            Jm(row, static_cast<Eigen::Index>(n_ + p_)) = -(x[j] - a_[j]) / sj;
            r(row) = e / sj;
        }
        const auto s = static_cast<Eigen::Index>(n_), nr = static_cast<Eigen::Index>(n_ + 1);
        r(s) = dx2 / (R * R) - 1;
        for (std::size_t j = 0; j < n_; ++j) Jm(s, static_cast<Eigen::Index>(j)) = 2 * (x[j] - a_[j]) / (R * R);
        double m2 = 0;
        for (std::size_t k = 0; k <= p_; ++k) {
            const double v = z(static_cast<Eigen::Index>(n_ + k));
            m2 += v * v;
            Jm(nr, static_cast<Eigen::Index>(n_ + k)) = 2 * v;
        }
        r(nr) = m2 - 1;
    }

    std::vector<double> a_;
    std::size_t n_ = 0, p_ = 0;
    std::vector<std::vector<SparsePoly>> grads_;
    std::vector<std::vector<std::vector<SparsePoly>>> hess_;  ///< [k][j][i]
};

/// Points agree when every coordinate agrees to `rel` relative, coordinates
/// below `floor` counting as noise.
inline bool same_point(const std::vector<double>& x, const std::vector<double>& q, double floor, double rel = 1e-6) {
    for (std::size_t j = 0; j < x.size(); ++j) {
        double s = std::max({std::abs(x[j]), std::abs(q[j]), floor});
        if (std::abs(x[j] - q[j]) > rel * s) return false;
    }
    return true;
}

inline void add_unique(std::vector<MilnorCorrector::Point>& pts, const MilnorCorrector::Point& pt, double R) {
    for (const auto& q : pts)
        if (same_point(q.x, pt.x, 1e-9 * R)) return;
    pts.push_back(pt);
}

/// Milnor points on each sphere: multistart correction on every sphere, plus
/// continuation through intermediate radii of everything found on the
/// previous sphere. Warm-up spheres of radius 1, 2, 4, ... below the schedule
/// seed the sweep while branches are still well separated.
inline std::vector<std::vector<std::vector<double>>> continuation_points(const PolyMap& f,
                                                                         const std::vector<double>& a,
                                                                         const std::vector<double>& radii,
                                                                         const DetectorOptions& opt,
                                                                         std::mt19937_64& rng) {
    MilnorCorrector corr(f, a);
    const std::size_t n = f.n();
    const std::size_t starts = opt.continuation_starts ? opt.continuation_starts : 24 * n;
    const std::size_t sub = std::max<std::size_t>(opt.continuation_substeps, 1);
    std::vector<double> sweep;
    for (double w = 1; w < radii[0] / 1.5; w *= 2) sweep.push_back(w);
    const std::size_t warm = sweep.size();
    sweep.insert(sweep.end(), radii.begin(), radii.end());
    std::vector<MilnorCorrector::Point> prev_level;
    std::vector<std::vector<std::vector<double>>> out;
    for (std::size_t k = 0; k < sweep.size(); ++k) {
        const double R = sweep[k];
        std::vector<MilnorCorrector::Point> level;
        if (k > 0) {
            const double R0 = sweep[k - 1];
            for (const auto& start : prev_level) {
                MilnorCorrector::Point cur = start;
                double Rc = R0;
                const double h0 = std::log(R / R0) / static_cast<double>(sub);
                double h = h0;
                bool lost = false;
                while (Rc < R && !lost) {
                    double Rn = std::min(R, Rc * std::exp(h));
                    if (R - Rn < 1e-12 * R) Rn = R;
                    auto pred = corr.predict(cur, Rc, Rn);
                    auto next = corr.correct(pred.x, Rn, pred.mult);
                    if (next && !same_point(next->x, pred.x, 1e-5 * Rn, 0.2)) next.reset();
                    if (!next) {
                        h /= 2;
                        lost = h < h0 / 64;
                        continue;
                    }
                    cur = *next;
                    Rc = Rn;
                    h = std::min(h0, 2 * h);
                }
                if (!lost) add_unique(level, cur, R);
            }
        }
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (std::size_t s = 0; s < starts; ++s) {
            auto dir = random_direction(rng, n);
            // every other start squeezes coordinates toward the axes, where
            // branches with coordinates ~ 1/R live
            if (s % 2 == 1 && R > 1) {
                double norm = 0;
                for (auto& c : dir) {
                    c *= std::pow(R, -2 * unit(rng));
                    norm += c * c;
                }
                for (auto& c : dir) c /= std::sqrt(norm);
            }
            std::vector<double> x(n);
            for (std::size_t j = 0; j < n; ++j) x[j] = a[j] + R * dir[j];
            if (auto y = corr.correct(x, R)) add_unique(level, *y, R);
        }
        if (k >= warm) {
            std::vector<std::vector<double>> xs;
            for (const auto& q : level) xs.push_back(q.x);
            out.push_back(std::move(xs));
        }
        prev_level = std::move(level);
    }
    return out;
}

inline std::vector<std::vector<double>> sphere_samples(const std::vector<double>& a, double R, std::size_t count,
                                                       std::mt19937_64& rng) {
    std::vector<std::vector<double>> out;
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> dir;
        if (n == 2) {
            double th = 2 * M_PI * static_cast<double>(i) / static_cast<double>(count);
            dir = {std::cos(th), std::sin(th)};
        } else {
            dir = random_direction(rng, n);
        }
        std::vector<double> x(n);
        for (std::size_t j = 0; j < n; ++j) x[j] = a[j] + R * dir[j];
        out.push_back(std::move(x));
    }
    return out;
}

/// Greedy nearest-neighbour linking in ((x - a)/R, asinh f) space between
/// consecutive radii; ties go to the lexicographically smaller pair.
inline std::vector<BranchTrack> link_branches(const std::vector<std::vector<TrackPoint>>& levels,
                                              const std::vector<double>& a) {
    auto feature = [&a](const TrackPoint& tp) {
        std::vector<double> v;
        for (std::size_t j = 0; j < tp.x.size(); ++j) v.push_back((tp.x[j] - a[j]) / tp.radius);
        for (double fv : tp.f) v.push_back(std::asinh(fv));
        return v;
    };
    std::vector<BranchTrack> branches;
    std::vector<std::size_t> alive;  // branches ending at the previous level
    for (std::size_t k = 0; k < levels.size(); ++k) {
        std::vector<std::size_t> next_alive;
        std::vector<bool> used(levels[k].size(), false);
        if (k > 0) {
            struct Pair {
                double d;
                std::size_t b, q;
            };
            std::vector<Pair> pairs;
            for (std::size_t b : alive) {
                auto fb = feature(branches[b].points.back());
                for (std::size_t q = 0; q < levels[k].size(); ++q)
                    pairs.push_back({dist(fb, feature(levels[k][q])), b, q});
            }
            std::sort(pairs.begin(), pairs.end(), [](const Pair& u, const Pair& v) {
                if (u.d != v.d) return u.d < v.d;
                if (u.b != v.b) return u.b < v.b;
                return u.q < v.q;
            });
            std::vector<bool> linked(branches.size(), false);
            for (const auto& pr : pairs) {
                if (linked[pr.b] || used[pr.q]) continue;
                linked[pr.b] = true;
                used[pr.q] = true;
                branches[pr.b].points.push_back(levels[k][pr.q]);
                next_alive.push_back(pr.b);
            }
        }
        for (std::size_t q = 0; q < levels[k].size(); ++q) {
            if (used[q]) continue;
            BranchTrack b;
            b.id = branches.size();
            b.points.push_back(levels[k][q]);
            next_alive.push_back(b.id);
            branches.push_back(std::move(b));
        }
        std::sort(next_alive.begin(), next_alive.end());
        alive = std::move(next_alive);
    }
    return branches;
}

inline void classify_branch(BranchTrack& b, std::size_t last_level, const DetectorOptions& opt) {
    for (const auto& tp : b.points)
        if (tp.sing < opt.sing_threshold) b.trivial = true;
    const std::size_t w = opt.cauchy_window;
    if (b.points.size() < w || b.points.back().radius_index != last_level) return;
    const std::size_t start = b.points.size() - w;
    for (std::size_t i = start; i < b.points.size(); ++i) {
        for (double v : b.points[i].f)
            if (!std::isfinite(v)) return;
        for (std::size_t j = i + 1; j < b.points.size(); ++j)
            if (!(dist(b.points[i].f, b.points[j].f) <= opt.cluster_tol)) return;
    }
    b.converged = true;
    b.limit = b.points.back().f;
}

}  // namespace detail

/// PASS iff the product at the largest radius is below tol and decreased over
/// the Cauchy window.
inline AuditRecord audit_rabier(const BranchTrack& track, double tol = 1e-3, std::size_t window = 3) {
    AuditRecord rec;
    for (const auto& tp : track.points) rec.products.push_back(tp.product);
    if (rec.products.empty()) {
        rec.diagnostic = "empty track";
        return rec;
    }
    const double last = rec.products.back();
    const std::size_t w = std::min(window, rec.products.size());
    const double first = rec.products[rec.products.size() - w];
    if (!(last < tol)) {
        std::ostringstream os;
        os << "product " << last << " at the largest radius is not below " << tol;
        rec.diagnostic = os.str();
        return rec;
    }
    if (w >= 2 && !(last < first)) {
        rec.diagnostic = "product does not decrease over the last radii";
        return rec;
    }
    rec.pass = true;
    rec.diagnostic = "ok";
    return rec;
}

/// Track the evaluation of f and |x| nu along an arbitrary point sequence, for
/// auditing tracks that did not come from the Milnor set.
inline BranchTrack make_track(const PolyMap& f, const std::vector<std::vector<double>>& xs,
                              const std::vector<double>& radii) {
    if (xs.size() != radii.size()) throw ValidationError("one point per radius required");
    JacobianMatrix J = jacobian(f);
    BranchTrack b;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (xs[k].size() != f.n()) throw ValidationError("point dimension does not match the map");
        std::vector<Rational> xr;
        for (double v : xs[k]) xr.push_back(from_double(v));
        b.points.push_back(detail::describe_point(f, J, xr, k, radii[k]));
    }
    return b;
}

/// Milnor branches around one center and their limit clusters.
inline CenterResult milnor_limits(const PolyMap& f, const std::vector<Rational>& center, const DetectorOptions& opt) {
    opt.validate();
    if (center.size() != f.n()) throw ValidationError("center dimension does not match the map");
    CenterResult res;
    res.exact_center = center;
    res.center = detail::to_doubles(center);
    const auto radii = opt.schedule.radii();
    const JacobianMatrix J = jacobian(f);
    const MilnorSystem sys = milnor_system(f, center);
    res.degenerate = sys.degenerate;
    std::uint64_t mix = opt.seed * 0x9E3779B97F4A7C15ull;
    for (const auto& c : center) mix ^= std::hash<std::string>{}(c.get_str()) + 0x9E3779B97F4A7C15ull + (mix << 6) + (mix >> 2);
    std::mt19937_64 rng(mix);

    std::vector<std::vector<std::vector<Rational>>> pts(radii.size());
    auto fallback = [&](std::size_t k) {
        for (const auto& x : detail::sphere_samples(res.center, radii[k], opt.fallback_samples, rng)) {
            std::vector<Rational> xr;
            for (double v : x) xr.push_back(from_double(v));
            pts[k].push_back(std::move(xr));
        }
    };
    if (sys.degenerate) {
        res.mode = "fallback";
        res.warnings.push_back("Milnor system vanishes identically; sampling whole spheres");
        for (std::size_t k = 0; k < radii.size(); ++k) fallback(k);
    } else if (f.n() == 2) {
        res.mode = "exact";
        for (std::size_t k = 0; k < radii.size(); ++k) {
            Rational R = from_double(radii[k]);
            auto cs = curve_sphere_intersect(sys.equations[0], center[0], center[1], R);
            if (cs.degenerate) {
                res.warnings.push_back("Milnor curve contains the circle of radius " + std::to_string(radii[k]) +
                                       "; sampling it");
                fallback(k);
                continue;
            }
            for (const auto& q : cs.points) pts[k].push_back({q.exact_x, q.exact_y});
        }
    } else {
        res.mode = "continuation";
        auto found = detail::continuation_points(f, res.center, radii, opt, rng);
        for (std::size_t k = 0; k < radii.size(); ++k) {
            std::sort(found[k].begin(), found[k].end());
            for (const auto& x : found[k]) {
                std::vector<Rational> xr;
                for (double v : x) xr.push_back(from_double(v));
                pts[k].push_back(std::move(xr));
            }
        }
    }

    std::vector<std::vector<TrackPoint>> levels(radii.size());
    for (std::size_t k = 0; k < radii.size(); ++k) {
        res.points_per_radius.push_back(pts[k].size());
        for (const auto& xr : pts[k]) levels[k].push_back(detail::describe_point(f, J, xr, k, radii[k]));
        std::sort(levels[k].begin(), levels[k].end(),
                  [](const TrackPoint& u, const TrackPoint& v) { return u.x < v.x; });
    }
    res.branches = detail::link_branches(levels, res.center);
    for (auto& b : res.branches) detail::classify_branch(b, radii.size() - 1, opt);

    std::vector<const BranchTrack*> conv;
    for (const auto& b : res.branches)
        if (b.converged) conv.push_back(&b);
    std::sort(conv.begin(), conv.end(), [](const BranchTrack* u, const BranchTrack* v) {
        if (u->limit != v->limit) return u->limit < v->limit;
        return u->id < v->id;
    });
    std::vector<std::vector<const BranchTrack*>> groups;
    for (const BranchTrack* b : conv) {
        bool placed = false;
        for (auto& g : groups) {
            bool close = std::all_of(g.begin(), g.end(), [&](const BranchTrack* m) {
                return detail::dist(m->limit, b->limit) <= opt.cluster_tol;
            });
            if (close) {
                g.push_back(b);
                placed = true;
                break;
            }
        }
        if (!placed) groups.push_back({b});
    }
    for (const auto& g : groups) {
        LimitCluster c;
        c.value.assign(f.p(), 0.0);
        c.nontrivial = true;
        c.audit_pass = true;
        for (const BranchTrack* m : g) {
            c.members.push_back(m->id);
            for (std::size_t i = 0; i < f.p(); ++i) c.value[i] += m->limit[i] / static_cast<double>(g.size());
            c.nontrivial = c.nontrivial && !m->trivial;
            auto audit = audit_rabier(*m, opt.audit_tol, opt.cauchy_window);
            c.audit_pass = c.audit_pass && audit.pass;
            c.audits.push_back(std::move(audit));
            for (const BranchTrack* o : g) c.spread = std::max(c.spread, detail::dist(m->limit, o->limit));
        }
        res.clusters.push_back(std::move(c));
    }
    return res;
}

/// Origin, then user centers, then `count` seeded random centers with
/// coordinates in [-10, 10] on a 1/1000 grid.
inline std::vector<std::vector<Rational>> choose_centers(std::size_t n, const std::vector<std::vector<Rational>>& user,
                                                         std::size_t count, std::uint64_t seed) {
    std::vector<std::vector<Rational>> out{std::vector<Rational>(n, Rational(0))};
    for (const auto& c : user) {
        if (c.size() != n) throw ValidationError("center dimension does not match the map");
        if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> coord(-10000, 10000);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<Rational> c;
        for (std::size_t j = 0; j < n; ++j) c.push_back(make_rational(coord(rng), 1000));
        out.push_back(std::move(c));
    }
    return out;
}

/// Runs milnor_limits for every center (concurrently) and intersects the
/// cluster values.
inline DetectionReport s_infty_estimate(const PolyMap& f, const std::vector<std::vector<Rational>>& user_centers,
                                        const DetectorOptions& opt) {
    opt.validate();
    auto centers = choose_centers(f.n(), user_centers, opt.random_centers, opt.seed);
    if (centers.size() < 2) throw ValidationError("need at least two centers");
    DetectionReport rep;
    rep.map = f.describe();
    rep.var_names = f.var_names();
    rep.n = f.n();
    rep.p = f.p();
    rep.d = f.d();
    rep.options = opt;
    std::vector<std::future<CenterResult>> jobs;
    for (const auto& c : centers) jobs.push_back(std::async(std::launch::async, [&f, c, &opt] { return milnor_limits(f, c, opt); }));
    for (auto& j : jobs) rep.centers.push_back(j.get());

    for (const auto& c : rep.centers)
        for (const auto& cl : c.clusters) rep.all_audits_pass = rep.all_audits_pass && cl.audit_pass;

    for (std::size_t i0 = 0; i0 < rep.centers[0].clusters.size(); ++i0) {
        const auto& base = rep.centers[0].clusters[i0].value;
        EstimateEntry e;
        bool everywhere = true, nontrivial = true;
        std::vector<double> sum(f.p(), 0.0);
        for (const auto& c : rep.centers) {
            std::optional<std::size_t> best;
            double bd = 0;
            for (std::size_t i = 0; i < c.clusters.size(); ++i) {
                double dd = detail::dist(c.clusters[i].value, base);
                if (dd <= opt.match_tol && (!best || dd < bd)) {
                    best = i;
                    bd = dd;
                }
            }
            if (!best) {
                everywhere = false;
                break;
            }
            e.cluster_index.push_back(*best);
            nontrivial = nontrivial && c.clusters[*best].nontrivial;
            for (std::size_t k = 0; k < f.p(); ++k) sum[k] += c.clusters[*best].value[k];
        }
        if (!everywhere) continue;
        for (std::size_t k = 0; k < f.p(); ++k) e.value.push_back(sum[k] / static_cast<double>(rep.centers.size()));
        rep.s_infty.push_back(e);
        if (nontrivial) rep.ns_infty.push_back(e);
    }
    return rep;
}

/// Structured report with a fixed key order.
inline nlohmann::ordered_json report_to_json(const DetectionReport& rep) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["tool"] = "bifinf";
    j["version"] = kToolVersion;
    j["map"] = rep.map;
    j["variables"] = rep.var_names;
    j["n"] = rep.n;
    j["p"] = rep.p;
    j["d"] = rep.d;
    try {
        j["s"] = degree_bound(rep.n, rep.p, rep.d);
    } catch (const ValidationError&) {
        j["s"] = nullptr;  // overflows 64 bits
    }
    const auto& o = rep.options;
    j["seed"] = o.seed;
    j["schedule"] = ordered_json{{"r0", o.schedule.r0}, {"ratio", o.schedule.ratio}, {"steps", o.schedule.steps},
                                 {"radii", o.schedule.radii()}};
    j["tolerances"] = ordered_json{{"cluster", o.cluster_tol},    {"match", o.match_tol},
                                   {"sing", o.sing_threshold},    {"audit", o.audit_tol},
                                   {"cauchy_window", o.cauchy_window}};
    ordered_json cs = ordered_json::array();
    for (const auto& c : rep.centers) {
        ordered_json cj;
        std::vector<std::string> exact;
        for (const auto& r : c.exact_center) exact.push_back(to_string(r));
        cj["center"] = exact;
        cj["mode"] = c.mode;
        cj["degenerate"] = c.degenerate;
        cj["warnings"] = c.warnings;
        cj["points_per_radius"] = c.points_per_radius;
        cj["branches"] = c.branches.size();
        std::size_t converged = 0;
        for (const auto& b : c.branches) converged += b.converged ? 1 : 0;
        cj["converged_branches"] = converged;
        ordered_json cl = ordered_json::array();
        for (const auto& k : c.clusters) {
            ordered_json kj;
            kj["value"] = k.value;
            kj["spread"] = k.spread;
            kj["members"] = k.members;
            kj["nontrivial"] = k.nontrivial;
            ordered_json aj = ordered_json::array();
            for (std::size_t m = 0; m < k.members.size(); ++m)
                aj.push_back(ordered_json{{"branch", k.members[m]},
                                          {"pass", k.audits[m].pass},
                                          {"final_product", k.audits[m].products.back()},
                                          {"diagnostic", k.audits[m].diagnostic}});
            kj["audit"] = ordered_json{{"pass", k.audit_pass}, {"branches", aj}};
            cl.push_back(kj);
        }
        cj["clusters"] = cl;
        cs.push_back(cj);
    }
    j["centers"] = cs;
    auto est = [](const std::vector<EstimateEntry>& v) {
        ordered_json a = ordered_json::array();
        for (const auto& e : v) a.push_back(ordered_json{{"value", e.value}, {"cluster_per_center", e.cluster_index}});
        return a;
    };
    j["s_infty_estimate"] = est(rep.s_infty);
    j["ns_infty_estimate"] = est(rep.ns_infty);
    j["all_audits_pass"] = rep.all_audits_pass;
    j["disclaimer"] = kDetectorDisclaimer;
    return j;
}

/// One row per tracked point of every branch.
inline std::string branch_traces_csv(const DetectionReport& rep) {
    std::ostringstream os;
    os.precision(17);
    os << "center,branch,radius_index,radius";
    for (std::size_t j = 0; j < rep.n; ++j) os << ",x_" << j + 1;
    for (std::size_t k = 0; k < rep.p; ++k) os << ",f_" << k + 1;
    os << ",sing,product,converged,trivial\n";
    for (std::size_t c = 0; c < rep.centers.size(); ++c)
        for (const auto& b : rep.centers[c].branches)
            for (const auto& tp : b.points) {
                os << c << "," << b.id << "," << tp.radius_index << "," << tp.radius;
                for (double v : tp.x) os << "," << v;
                for (double v : tp.f) os << "," << v;
                os << "," << tp.sing << "," << tp.product << "," << (b.converged ? 1 : 0) << ","
                   << (b.trivial ? 1 : 0) << "\n";
            }
    return os.str();
}

/// asinh(f_1) against log10 R for every branch of every center.
inline std::string report_to_svg(const DetectionReport& rep) {
    const double W = 640, H = 420, L = 60, B = 40, T = 20, Rm = 20;
    const auto radii = rep.options.schedule.radii();
    const double x0 = std::log10(radii.front()), x1 = std::log10(radii.back());
    double ymin = -1, ymax = 1;
    for (const auto& c : rep.centers)
        for (const auto& b : c.branches)
            for (const auto& tp : b.points) {
                double v = std::asinh(tp.f[0]);
                if (std::isfinite(v)) {
                    ymin = std::min(ymin, v);
                    ymax = std::max(ymax, v);
                }
            }
    auto X = [&](double R) { return L + (std::log10(R) - x0) / (x1 - x0) * (W - L - Rm); };
    auto Y = [&](double v) { return H - B - (v - ymin) / (ymax - ymin) * (H - B - T); };
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
    std::ostringstream os;
    os << std::fixed << std::setprecision(2);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - Rm << "\" y2=\"" << H - B
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 8 << "\" text-anchor=\"middle\">log10 R</text>\n";
    os << "<text x=\"14\" y=\"" << H / 2 << "\" transform=\"rotate(-90 14 " << H / 2
       << ")\" text-anchor=\"middle\">asinh f_1</text>\n";
    if (ymin < 0 && ymax > 0)
        os << "<line x1=\"" << L << "\" y1=\"" << Y(0) << "\" x2=\"" << W - Rm << "\" y2=\"" << Y(0)
           << "\" stroke=\"#ccc\" stroke-dasharray=\"4\"/>\n";
    for (std::size_t c = 0; c < rep.centers.size(); ++c)
        for (const auto& b : rep.centers[c].branches) {
            if (b.points.size() < 2) continue;
            os << "<polyline fill=\"none\" stroke=\"" << palette[c % 8] << "\" stroke-width=\""
               << (b.converged ? 2.0 : 0.7) << "\" points=\"";
            for (const auto& tp : b.points) os << X(tp.radius) << "," << Y(std::asinh(tp.f[0])) << " ";
            os << "\"/>\n";
        }
    os << "</svg>\n";
    return os.str();
}

}  // namespace bifinf
