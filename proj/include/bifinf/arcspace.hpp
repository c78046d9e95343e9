#pragma once

// Rational arcs at infinity: the degree bound s, arc templates with unknown
// Laurent coefficients, the polynomial condition systems they must satisfy,
// exact witness verification and extraction of alpha_0 = lim f(x(t)).

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bifinf/error.hpp"
#include "bifinf/laurent.hpp"
#include "bifinf/path_parser.hpp"
#include "bifinf/poly_map.hpp"
#include "bifinf/rational.hpp"
#include "bifinf/sparse_poly.hpp"

namespace bifinf {

/// [p(d-1)+1]^(n-p) * [p(d-1)(n-p)+2]^(p-1).
inline std::uint64_t degree_bound(std::size_t n, std::size_t p, int d) {
    if (p < 1 || n <= p) throw ValidationError("degree bound needs n > p >= 1");
    if (d < 1) throw ValidationError("degree bound needs d >= 1");
    auto mul = [](std::uint64_t a, std::uint64_t b) {
        unsigned __int128 r = static_cast<unsigned __int128>(a) * b;
        if (r > std::numeric_limits<std::uint64_t>::max()) throw ValidationError("degree bound overflows 64 bits");
        return static_cast<std::uint64_t>(r);
    };
    const std::uint64_t dm1 = static_cast<std::uint64_t>(d - 1);
    const std::uint64_t A = mul(p, dm1) + 1;
    const std::uint64_t B = mul(mul(p, dm1), n - p) + 2;
    std::uint64_t s = 1;
    for (std::size_t i = 0; i < n - p; ++i) s = mul(s, A);
    for (std::size_t i = 0; i + 1 < p; ++i) s = mul(s, B);
    return s;
}

/// phi_j(x, y) = sum_k y_k df_k/dx_j. For p = 1 the covector is the constant
/// 1 and phi lives in the n source variables; otherwise in n + p variables.
struct PhiSystem {
    std::vector<SparsePoly> phi;
    std::vector<std::string> var_names;
    bool y_constant = true;
};

inline PhiSystem phi(const PolyMap& f) {
    PhiSystem out;
    const std::size_t n = f.n(), p = f.p();
    out.var_names = f.var_names();
    if (p == 1) {
        for (std::size_t j = 0; j < n; ++j) out.phi.push_back(f.component(0).partial_derivative(j));
        return out;
    }
    out.y_constant = false;
    const std::size_t N = n + p;
    bool clash = false;
    for (std::size_t k = 0; k < p; ++k) {
        std::string name = "y" + std::to_string(k + 1);
        clash = clash || std::find(out.var_names.begin(), out.var_names.end(), name) != out.var_names.end();
    }
    for (std::size_t k = 0; k < p; ++k) out.var_names.push_back((clash ? "covector_" : "y") + std::to_string(k + 1));
    std::vector<std::size_t> lift(n);
    for (std::size_t j = 0; j < n; ++j) lift[j] = j;
    for (std::size_t j = 0; j < n; ++j) {
        SparsePoly acc(N);
        for (std::size_t k = 0; k < p; ++k)
            acc += SparsePoly::variable(N, n + k) * f.component(k).partial_derivative(j).remap(N, lift);
        out.phi.push_back(std::move(acc));
    }
    return out;
}

/// Unknown Laurent coefficients a_i (x-part, i in [x_lo, s]) and b_j
/// (covector part, j in [y_lo, 0], only for p > 1). Slots a_i with
/// lead_index < i <= s are pinned to zero.
struct ArcTemplate {
    std::size_t n = 0, p = 0;
    int d = 0;
    int s = 0;
    int x_lo = 0, x_hi = 0;
    int y_lo = 0, y_hi = 0;
    bool has_y = false;
    int lead_index = 0;

    std::size_t x_width() const { return static_cast<std::size_t>(x_hi - x_lo + 1); }
    std::size_t y_width() const { return has_y ? static_cast<std::size_t>(y_hi - y_lo + 1) : 0; }
    std::size_t x_slots() const { return n * x_width(); }
    std::size_t y_slots() const { return p * y_width(); }
    std::size_t unknown_count() const { return x_slots() + y_slots(); }

    std::size_t x_index(int e, std::size_t c) const { return static_cast<std::size_t>(e - x_lo) * n + c; }
    std::size_t y_index(int e, std::size_t c) const { return x_slots() + static_cast<std::size_t>(e - y_lo) * p + c; }
    bool pinned(int e) const { return e > lead_index; }

    static std::string exponent_tag(int e) { return e < 0 ? "m" + std::to_string(-e) : std::to_string(e); }

    /// a_<i>_<c> and b_<j>_<c>; a negative index i is written m|i|, e.g. a_m3_1.
    std::vector<std::string> unknown_names() const {
        std::vector<std::string> out(unknown_count());
        for (int e = x_lo; e <= x_hi; ++e)
            for (std::size_t c = 0; c < n; ++c) out[x_index(e, c)] = "a_" + exponent_tag(e) + "_" + std::to_string(c + 1);
        if (has_y)
            for (int e = y_lo; e <= y_hi; ++e)
                for (std::size_t c = 0; c < p; ++c) out[y_index(e, c)] = "b_" + exponent_tag(e) + "_" + std::to_string(c + 1);
        return out;
    }
};

inline ArcTemplate build_template(const PolyMap& f, std::optional<int> lead_index = std::nullopt) {
    ArcTemplate t;
    t.n = f.n();
    t.p = f.p();
    t.d = f.d();
    std::uint64_t s = degree_bound(t.n, t.p, t.d);
    if (s * static_cast<std::uint64_t>(t.d) > 100000)
        throw ValidationError("arc template too large: d*s = " + std::to_string(s * static_cast<std::uint64_t>(t.d)));
    t.s = static_cast<int>(s);
    t.x_hi = t.s;
    t.x_lo = t.p == 1 ? -t.d * t.s + t.s : -t.d * t.s;
    t.has_y = t.p > 1;
    if (t.has_y) {
        t.y_lo = -t.d * t.s;
        t.y_hi = 0;
    }
    t.lead_index = lead_index.value_or(t.s);
    if (t.lead_index < 1 || t.lead_index > t.s)
        throw ValidationError("lead index must lie in 1..s (s = " + std::to_string(t.s) + ")");
    return t;
}

namespace detail {

template <class T, class Get>
LaurentArc<T> assemble_x(const ArcTemplate& tpl, Get&& get, const T& zero) {
    LaurentArc<T> arc(tpl.n, tpl.x_lo, tpl.x_hi, zero);
    for (int e = tpl.x_lo; e <= tpl.x_hi; ++e) {
        if (tpl.pinned(e)) continue;
        for (std::size_t c = 0; c < tpl.n; ++c) arc.set(e, c, get(tpl.x_index(e, c)));
    }
    return arc;
}

template <class T, class Get>
LaurentArc<T> assemble_y(const ArcTemplate& tpl, Get&& get, const T& zero) {
    LaurentArc<T> arc(tpl.p, tpl.y_lo, tpl.y_hi, zero);
    for (int e = tpl.y_lo; e <= tpl.y_hi; ++e)
        for (std::size_t c = 0; c < tpl.p; ++c) arc.set(e, c, get(tpl.y_index(e, c)));
    return arc;
}

/// f(x(t)) and x_i(t) phi_j(x(t), y(t)), optionally keeping only exponents
/// at or above the given thresholds.
template <class T>
struct ArcExpansion {
    std::vector<Laurent<T>> f;
    std::vector<std::vector<Laurent<T>>> xphi;  ///< [i][j]
};

template <class T>
ArcExpansion<T> expand_arc(const PolyMap& f, const PhiSystem& ph, const LaurentArc<T>& x,
                           const std::optional<LaurentArc<T>>& y, std::optional<int> f_keep,
                           std::optional<int> xphi_keep) {
    ArcExpansion<T> out;
    out.f = compose_arc(f, x, f_keep);
    LaurentArc<T> xy = x;
    if (!ph.y_constant) {
        if (!y) throw ValidationError("covector arc required for p > 1");
        std::vector<Laurent<T>> comps = x.components();
        for (const auto& c : y->components()) comps.push_back(c);
        xy = LaurentArc<T>::from_components(comps);
    }
    std::optional<int> phi_keep;
    if (xphi_keep) phi_keep = *xphi_keep - std::max(x.hi(), 0);
    std::vector<Laurent<T>> phis;
    for (const auto& q : ph.phi) phis.push_back(compose(q, xy, phi_keep));
    out.xphi.resize(x.dim());
    for (std::size_t i = 0; i < x.dim(); ++i)
        for (std::size_t j = 0; j < phis.size(); ++j)
            out.xphi[i].push_back(Laurent<T>::multiply(x.component(i), phis[j], xphi_keep));
    return out;
}

}  // namespace detail

enum class ConditionTag { PosF, NonnegPhi, NormB0, LeadNorm, LeadZero };

inline const char* tag_name(ConditionTag t) {
    switch (t) {
        case ConditionTag::PosF: return "POS_F";
        case ConditionTag::NonnegPhi: return "NONNEG_PHI";
        case ConditionTag::NormB0: return "NORM_B0";
        case ConditionTag::LeadNorm: return "LEAD_NORM";
        case ConditionTag::LeadZero: return "LEAD_ZERO";
    }
    return "?";
}

struct Condition {
    ConditionTag tag = ConditionTag::PosF;
    SparsePoly poly;
    std::size_t i = 0, j = 0;  ///< component indices (f_i for POS_F; x_i, phi_j for NONNEG_PHI)
    int exponent = 0;          ///< power of t whose coefficient this is
};

struct ConditionSystem {
    ArcTemplate tpl;
    std::vector<std::string> unknown_names;
    std::vector<Condition> equations;
    /// Number of (component, exponent) slots the windows allow, before
    /// dropping coefficients that vanish identically.
    std::size_t pos_f_slots = 0, nonneg_phi_slots = 0;
    std::size_t dropped_identically_zero = 0;

    std::size_t count(ConditionTag t) const {
        return static_cast<std::size_t>(std::count_if(equations.begin(), equations.end(),
                                                      [&](const Condition& c) { return c.tag == t; }));
    }
};

inline ConditionSystem generate_conditions(const PolyMap& f, const ArcTemplate& tpl) {
    ConditionSystem sys;
    sys.tpl = tpl;
    sys.unknown_names = tpl.unknown_names();
    const std::size_t N = tpl.unknown_count();
    const SparsePoly zero(N);
    auto var = [&](std::size_t idx) { return SparsePoly::variable(N, idx); };

    SparsePoly lead = SparsePoly::constant(N, Rational(-1));
    for (std::size_t c = 0; c < tpl.n; ++c) lead += var(tpl.x_index(tpl.lead_index, c)).pow(2);
    sys.equations.push_back({ConditionTag::LeadNorm, lead, 0, 0, tpl.lead_index});
    for (int e = tpl.lead_index + 1; e <= tpl.x_hi; ++e)
        for (std::size_t c = 0; c < tpl.n; ++c) sys.equations.push_back({ConditionTag::LeadZero, var(tpl.x_index(e, c)), c, 0, e});
    if (tpl.has_y) {
        SparsePoly b0 = SparsePoly::constant(N, Rational(-1));
        for (std::size_t c = 0; c < tpl.p; ++c) b0 += var(tpl.y_index(0, c)).pow(2);
        sys.equations.push_back({ConditionTag::NormB0, b0, 0, 0, 0});
    }

    PhiSystem ph = phi(f);
    auto x = detail::assemble_x<SparsePoly>(tpl, var, zero);
    std::optional<LaurentArc<SparsePoly>> y;
    if (tpl.has_y) y = detail::assemble_y<SparsePoly>(tpl, var, zero);
    auto ex = detail::expand_arc(f, ph, x, y, 1, 0);

    const int f_top = tpl.d * tpl.x_hi;
    const int xphi_top = tpl.x_hi + (tpl.d - 1) * tpl.x_hi + (tpl.has_y ? tpl.y_hi : 0);
    sys.pos_f_slots = tpl.p * static_cast<std::size_t>(f_top);
    sys.nonneg_phi_slots = tpl.n * tpl.n * static_cast<std::size_t>(xphi_top + 1);
    for (std::size_t k = 0; k < tpl.p; ++k)
        for (int m = 1; m <= f_top; ++m) {
            SparsePoly c = ex.f[k].coefficient(m);
            if (c.is_zero()) ++sys.dropped_identically_zero;
            else sys.equations.push_back({ConditionTag::PosF, std::move(c), k, 0, m});
        }
    for (std::size_t i = 0; i < tpl.n; ++i)
        for (std::size_t j = 0; j < tpl.n; ++j)
            for (int m = 0; m <= xphi_top; ++m) {
                SparsePoly c = ex.xphi[i][j].coefficient(m);
                if (c.is_zero()) ++sys.dropped_identically_zero;
                else sys.equations.push_back({ConditionTag::NonnegPhi, std::move(c), i, j, m});
            }
    return sys;
}

/// Plain-text export: '#' header lines, then one polynomial per line with a
/// trailing comment naming the condition it encodes.
inline std::string condition_system_to_text(const ConditionSystem& sys) {
    const auto& t = sys.tpl;
    std::ostringstream os;
    os << "# condition system\n";
    os << "# n = " << t.n << "\n# p = " << t.p << "\n# d = " << t.d << "\n# s = " << t.s << "\n";
    os << "# k = " << t.lead_index << "\n";
    os << "# x_window = [" << t.x_lo << ", " << t.x_hi << "]\n";
    if (t.has_y) os << "# y_window = [" << t.y_lo << ", " << t.y_hi << "]\n";
    else os << "# y = 1\n";
    os << "# unknowns = " << t.unknown_count() << "\n";
    os << "# equations = " << sys.equations.size() << " (dropped identically zero: " << sys.dropped_identically_zero
       << ")\n";
    for (const auto& c : sys.equations) {
        os << c.poly.to_string(sys.unknown_names) << "   # " << tag_name(c.tag);
        switch (c.tag) {
            case ConditionTag::PosF: os << " f_" << c.i + 1 << " t^" << c.exponent; break;
            case ConditionTag::NonnegPhi: os << " x_" << c.i + 1 << "*phi_" << c.j + 1 << " t^" << c.exponent; break;
            case ConditionTag::LeadZero: os << " a_" << ArcTemplate::exponent_tag(c.exponent) << "_" << c.i + 1; break;
            default: break;
        }
        os << "\n";
    }
    return os.str();
}

/// Result of the exact check of conditions (a'), (b'), (c').
struct ArcWitness {
    LaurentArc<Rational> x;
    std::optional<LaurentArc<Rational>> y;  ///< covector part, p > 1 only
    int lead_exponent = kNegInfinity;       ///< largest k > 0 with a_k != 0
    Rational b0_norm2 = 1;
    std::vector<int> f_orders;               ///< ord_t f_k(x(t))
    std::vector<std::vector<int>> xphi_orders;  ///< ord_t x_i phi_j
    std::vector<Rational> f_constant;        ///< t^0 coefficients of f(x(t))
    bool a_ok = false, b_ok = false, c_ok = false;
    bool pass = false;
    std::optional<std::vector<Rational>> alpha0;
    double residual = 0;  ///< least-squares residual when produced by the solver
    int lead_index = 0;   ///< template lead index the solver used (0 if none)

    std::string describe() const {
        std::ostringstream os;
        os << "arc: " << arc_to_string(x) << "\n";
        if (y) os << "covector: " << arc_to_string(*y) << "\n";
        os << "(a') " << (a_ok ? "PASS" : "FAIL") << ": lead exponent "
           << (lead_exponent == kNegInfinity ? std::string("none") : std::to_string(lead_exponent))
           << ", |b0|^2 = " << to_string(b0_norm2) << "\n";
        os << "(b') " << (b_ok ? "PASS" : "FAIL") << ": ord f =";
        for (int o : f_orders) os << " " << (o == kNegInfinity ? std::string("-inf") : std::to_string(o));
        os << "\n(c') " << (c_ok ? "PASS" : "FAIL") << ": ord x_i*phi_j =";
        for (const auto& row : xphi_orders) {
            os << " [";
            for (std::size_t j = 0; j < row.size(); ++j)
                os << (j ? " " : "") << (row[j] == kNegInfinity ? std::string("-inf") : std::to_string(row[j]));
            os << "]";
        }
        os << "\nresult: " << (pass ? "PASS" : "FAIL") << "\n";
        if (alpha0) {
            os << "alpha0 =";
            for (const auto& v : *alpha0) os << " " << to_string(v) << " (" << v.get_d() << ")";
            os << "\n";
        }
        return os.str();
    }
};

inline ArcWitness verify_witness(const PolyMap& f, const LaurentArc<Rational>& x,
                                 const std::optional<LaurentArc<Rational>>& y = std::nullopt) {
    if (x.dim() != f.n()) throw ValidationError("arc dimension must equal n");
    PhiSystem ph = phi(f);
    if (!ph.y_constant) {
        if (!y) throw ValidationError("p > 1 needs a covector arc y(t)");
        if (y->dim() != f.p()) throw ValidationError("covector arc dimension must equal p");
    }
    ArcWitness w;
    w.x = x;
    if (!ph.y_constant) w.y = y;

    for (int e = std::max(x.hi(), 0); e >= 1; --e) {
        auto a = x.coefficient(e);
        if (std::any_of(a.begin(), a.end(), [](const Rational& v) { return v != 0; })) {
            w.lead_exponent = e;
            break;
        }
    }
    if (w.y) {
        w.b0_norm2 = 0;
        for (const auto& v : w.y->coefficient(0)) w.b0_norm2 += v * v;
    }
    w.a_ok = w.lead_exponent != kNegInfinity && w.b0_norm2 == 1;

    auto ex = detail::expand_arc<Rational>(f, ph, x, w.y, std::nullopt, std::nullopt);
    w.b_ok = true;
    for (const auto& g : ex.f) {
        w.f_orders.push_back(ord_t(g));
        w.f_constant.push_back(g.coefficient(0));
        w.b_ok = w.b_ok && ord_t(g) <= 0;
    }
    w.c_ok = true;
    for (const auto& row : ex.xphi) {
        std::vector<int> orders;
        for (const auto& g : row) {
            orders.push_back(ord_t(g));
            w.c_ok = w.c_ok && ord_t(g) < 0;
        }
        w.xphi_orders.push_back(std::move(orders));
    }
    w.pass = w.a_ok && w.b_ok && w.c_ok;
    if (w.pass) w.alpha0 = w.f_constant;
    return w;
}

/// lim f(x(t)) for a witness whose f(x(t)) stays bounded.
inline std::vector<Rational> alpha0(const ArcWitness& w) {
    if (!w.b_ok) throw ValidationError("alpha0 needs ord_t f(x(t)) <= 0; the witness fails (b')");
    return w.f_constant;
}

inline std::vector<Rational> alpha0(const PolyMap& f, const ArcWitness& w) {
    (void)f;
    return alpha0(w);
}

/// Unknown vector of a concrete arc in a template; throws if the arc does not fit.
inline std::vector<Rational> witness_unknowns(const ArcTemplate& tpl, const LaurentArc<Rational>& x,
                                              const std::optional<LaurentArc<Rational>>& y = std::nullopt) {
    std::vector<Rational> u(tpl.unknown_count());
    if (x.dim() != tpl.n) throw ValidationError("arc dimension must equal n");
    for (int e = x.lo(); e <= x.hi(); ++e)
        for (std::size_t c = 0; c < tpl.n; ++c) {
            Rational v = x.component(c).coefficient(e);
            if (v == 0) continue;
            if (e < tpl.x_lo || e > tpl.x_hi) throw ValidationError("arc coefficient outside the template window");
            u[tpl.x_index(e, c)] = v;
        }
    if (tpl.has_y) {
        if (!y || y->dim() != tpl.p) throw ValidationError("covector arc required");
        for (int e = y->lo(); e <= y->hi(); ++e)
            for (std::size_t c = 0; c < tpl.p; ++c) {
                Rational v = y->component(c).coefficient(e);
                if (v == 0) continue;
                if (e < tpl.y_lo || e > tpl.y_hi) throw ValidationError("covector coefficient outside the template window");
                u[tpl.y_index(e, c)] = v;
            }
    }
    return u;
}

// ---------------------------------------------------------------------------
// Heuristic solving

struct SolveOptions {
    std::size_t restarts = 400;
    std::uint64_t seed = 1;
    int max_iterations = 150;
    double residual_tol = 1e-8;
    std::size_t max_extra_slots = 3;  ///< sparse starts: lead slot plus up to this many others
    double dense_fraction = 0.1;      ///< share of starts over every free slot
    long max_denominator = 64;
    std::size_t max_witnesses = 16;
};

struct SolveDiagnostics {
    std::size_t restarts_run = 0;
    std::size_t converged = 0;
    std::size_t snapped = 0;
    std::size_t verified = 0;
    std::string note;
};

struct SolveResult {
    std::vector<ArcWitness> witnesses;
    SolveDiagnostics diagnostics;
};

namespace detail {

/// Numeric residuals of the condition system at a point: LEAD_NORM, NORM_B0,
/// then every POS_F and NONNEG_PHI slot in generation order (identically zero
/// slots included). Pinned slots are held at zero, so LEAD_ZERO holds by
/// construction. Equal to evaluating the symbolic equations at `u`.
class NumericConditions {
public:
    NumericConditions(const PolyMap& f, const ArcTemplate& tpl) : f_(f), tpl_(tpl), ph_(phi(f)) {}

    const ArcTemplate& tpl() const { return tpl_; }

    std::vector<double> residuals(const std::vector<double>& u) const {
        std::vector<double> r;
        auto get = [&](std::size_t i) { return u[i]; };
        double lead = -1;
        for (std::size_t c = 0; c < tpl_.n; ++c) lead += u[tpl_.x_index(tpl_.lead_index, c)] * u[tpl_.x_index(tpl_.lead_index, c)];
        r.push_back(lead);
        std::optional<LaurentArc<double>> y;
        if (tpl_.has_y) {
            double b0 = -1;
            for (std::size_t c = 0; c < tpl_.p; ++c) b0 += u[tpl_.y_index(0, c)] * u[tpl_.y_index(0, c)];
            r.push_back(b0);
            y = assemble_y<double>(tpl_, get, 0.0);
        }
        auto x = assemble_x<double>(tpl_, get, 0.0);
        auto ex = expand_arc<double>(f_, ph_, x, y, 1, 0);
        const int f_top = tpl_.d * tpl_.x_hi;
        const int xphi_top = tpl_.x_hi + (tpl_.d - 1) * tpl_.x_hi + (tpl_.has_y ? tpl_.y_hi : 0);
        for (std::size_t k = 0; k < tpl_.p; ++k)
            for (int m = 1; m <= f_top; ++m) r.push_back(ex.f[k].coefficient(m));
        for (std::size_t i = 0; i < tpl_.n; ++i)
            for (std::size_t j = 0; j < tpl_.n; ++j)
                for (int m = 0; m <= xphi_top; ++m) r.push_back(ex.xphi[i][j].coefficient(m));
        return r;
    }

    /// Levenberg-Marquardt over the listed free variables; returns the final residual norm.
    double polish(std::vector<double>& u, const std::vector<std::size_t>& free_vars, int max_iter) const {
        std::vector<double> r = residuals(u);
        double norm = vec_norm(r);
        if (free_vars.empty()) return norm;
        const Eigen::Index V = static_cast<Eigen::Index>(free_vars.size());
        const Eigen::Index R = static_cast<Eigen::Index>(r.size());
        double lambda = 1e-3;
        for (int it = 0; it < max_iter && norm > 1e-14; ++it) {
            Eigen::MatrixXd J(R, V);
            for (Eigen::Index v = 0; v < V; ++v) {
                std::size_t idx = free_vars[static_cast<std::size_t>(v)];
                double h = 1e-7 * std::max(1.0, std::abs(u[idx]));
                double keep = u[idx];
                u[idx] = keep + h;
                auto rp = residuals(u);
                u[idx] = keep;
                for (Eigen::Index i = 0; i < R; ++i) J(i, v) = (rp[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(i)]) / h;
            }
            Eigen::VectorXd rv = Eigen::Map<const Eigen::VectorXd>(r.data(), R);
            Eigen::MatrixXd JtJ = J.transpose() * J;
            Eigen::VectorXd g = J.transpose() * rv;
            bool improved = false;
            for (int tries = 0; tries < 12 && !improved; ++tries) {
                Eigen::MatrixXd A = JtJ;
                for (Eigen::Index v = 0; v < V; ++v) A(v, v) += lambda * (JtJ(v, v) + 1e-12);
                Eigen::VectorXd step = A.ldlt().solve(-g);
                if (!step.allFinite()) {
                    lambda *= 10;
                    continue;
                }
                std::vector<double> trial = u;
                for (Eigen::Index v = 0; v < V; ++v) trial[free_vars[static_cast<std::size_t>(v)]] += step(v);
                auto rt = residuals(trial);
                double nt = vec_norm(rt);
                if (std::isfinite(nt) && nt < norm) {
                    u = std::move(trial);
                    r = std::move(rt);
                    norm = nt;
                    lambda = std::max(lambda / 3, 1e-12);
                    improved = true;
                } else {
                    lambda *= 4;
                }
            }
            if (!improved) break;
        }
        return norm;
    }

    ArcWitness verify(const std::vector<Rational>& u) const {
        auto get = [&](std::size_t i) { return u[i]; };
        auto x = assemble_x<Rational>(tpl_, get, Rational(0));
        std::optional<LaurentArc<Rational>> y;
        if (tpl_.has_y) y = assemble_y<Rational>(tpl_, get, Rational(0));
        // trim to the support so printed arcs stay short
        int lo = x.hi(), hi = x.lo();
        for (int e = x.lo(); e <= x.hi(); ++e) {
            auto c = x.coefficient(e);
            if (std::any_of(c.begin(), c.end(), [](const Rational& v) { return v != 0; })) {
                lo = std::min(lo, e);
                hi = std::max(hi, e);
            }
        }
        if (lo <= hi) x = x.rewindowed(lo, hi);
        if (y) {
            int ylo = 0;
            for (int e = y->lo(); e <= 0; ++e) {
                auto c = y->coefficient(e);
                if (std::any_of(c.begin(), c.end(), [](const Rational& v) { return v != 0; })) {
                    ylo = e;
                    break;
                }
            }
            y = y->rewindowed(ylo, 0);
        }
        return verify_witness(f_, x, y);
    }

    static double vec_norm(const std::vector<double>& r) {
        double s = 0;
        for (double v : r) s += v * v;
        return std::sqrt(s);
    }

private:
    const PolyMap& f_;
    ArcTemplate tpl_;
    PhiSystem ph_;
};

/// Fix variables one at a time to nearby small-denominator rationals,
/// re-polishing the rest after each fix.
inline std::optional<std::vector<Rational>> snap_to_rationals(const NumericConditions& nc, std::vector<double> u,
                                                              std::vector<std::size_t> free_vars,
                                                              const SolveOptions& opt) {
    std::vector<Rational> exact(u.size());
    std::vector<bool> fixed(u.size(), true);
    for (std::size_t v : free_vars) fixed[v] = false;
    while (!free_vars.empty()) {
        // snap every variable that already sits on a simple rational
        std::vector<std::size_t> rest;
        for (std::size_t v : free_vars) {
            Rational q = best_rational(u[v], opt.max_denominator);
            if (std::abs(u[v] - q.get_d()) <= 1e-9 * std::max(1.0, std::abs(u[v]))) {
                exact[v] = q;
                u[v] = q.get_d();
            } else {
                rest.push_back(v);
            }
        }
        if (rest.empty()) break;
        // otherwise pin the variable closest to a simple rational and re-polish
        std::size_t pick = rest.front();
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t v : rest) {
            double dist = std::abs(u[v] - best_rational(u[v], 4).get_d());
            if (dist < best) {
                best = dist;
                pick = v;
            }
        }
        Rational q = best_rational(u[pick], 4);
        exact[pick] = q;
        u[pick] = q.get_d();
        rest.erase(std::find(rest.begin(), rest.end(), pick));
        double res = nc.polish(u, rest, opt.max_iterations);
        if (!(res < opt.residual_tol)) return std::nullopt;
        free_vars = rest;
    }
    for (std::size_t i = 0; i < u.size(); ++i)
        if (fixed[i]) exact[i] = u[i] == 0.0 ? Rational(0) : best_rational(u[i], opt.max_denominator);
    return exact;
}

inline bool lex_less(const std::vector<Rational>& a, const std::vector<Rational>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace detail

/// Seeded multistart least squares on the condition system of one template.
/// Only candidates that pass the exact check after rationalization are
/// reported; an empty result says nothing about emptiness of the system.
inline SolveResult solve_conditions(const PolyMap& f, const ArcTemplate& tpl, const SolveOptions& opt = {}) {
    detail::NumericConditions nc(f, tpl);
    SolveResult out;
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<int> lower_x;
    for (int e = tpl.x_lo; e < tpl.lead_index; ++e) lower_x.push_back(e);
    std::vector<std::vector<Rational>> seen;
    std::vector<std::pair<std::vector<Rational>, ArcWitness>> found;

    for (std::size_t r = 0; r < opt.restarts && found.size() < opt.max_witnesses; ++r) {
        ++out.diagnostics.restarts_run;
        std::vector<double> u(tpl.unknown_count(), 0.0);
        std::vector<std::size_t> vars;
        auto activate_x = [&](int e, double scale) {
            for (std::size_t c = 0; c < tpl.n; ++c) {
                u[tpl.x_index(e, c)] = scale * normal(rng);
                vars.push_back(tpl.x_index(e, c));
            }
        };
        activate_x(tpl.lead_index, 1.0);
        bool dense = unit(rng) < opt.dense_fraction;
        if (dense) {
            for (int e : lower_x) activate_x(e, 0.3);
        } else {
            std::vector<int> pool = lower_x;
            std::shuffle(pool.begin(), pool.end(), rng);
            std::size_t extra = std::min(pool.size(), static_cast<std::size_t>(rng() % (opt.max_extra_slots + 1)));
            for (std::size_t i = 0; i < extra; ++i) activate_x(pool[i], 1.0);
        }
        if (tpl.has_y) {
            for (int e = tpl.y_lo; e <= tpl.y_hi; ++e) {
                if (!dense && e != 0 && unit(rng) > 0.15) continue;
                for (std::size_t c = 0; c < tpl.p; ++c) {
                    u[tpl.y_index(e, c)] = (e == 0 ? 1.0 : 0.3) * normal(rng);
                    vars.push_back(tpl.y_index(e, c));
                }
            }
        }
        std::sort(vars.begin(), vars.end());
        double res = nc.polish(u, vars, opt.max_iterations);
        if (!(res < opt.residual_tol)) continue;
        ++out.diagnostics.converged;
        auto exact = detail::snap_to_rationals(nc, u, vars, opt);
        if (!exact) continue;
        ++out.diagnostics.snapped;
        if (std::find(seen.begin(), seen.end(), *exact) != seen.end()) continue;
        seen.push_back(*exact);
        ArcWitness w = nc.verify(*exact);
        if (!w.pass) continue;
        ++out.diagnostics.verified;
        std::vector<double> ud(exact->size());
        for (std::size_t i = 0; i < ud.size(); ++i) ud[i] = (*exact)[i].get_d();
        w.residual = detail::NumericConditions::vec_norm(nc.residuals(ud));
        w.lead_index = tpl.lead_index;
        found.emplace_back(*exact, std::move(w));
    }
    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
        if (a.second.residual != b.second.residual) return a.second.residual < b.second.residual;
        return detail::lex_less(a.first, b.first);
    });
    for (auto& [u, w] : found) out.witnesses.push_back(std::move(w));
    if (out.witnesses.empty())
        out.diagnostics.note = "no exact witness found within the budget (this is not a proof that none exists)";
    return out;
}

inline SolveResult solve_conditions(const PolyMap& f, const ConditionSystem& sys, const SolveOptions& opt = {}) {
    return solve_conditions(f, sys.tpl, opt);
}

}  // namespace bifinf
