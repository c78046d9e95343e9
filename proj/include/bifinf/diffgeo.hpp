#pragma once

// Jacobians, minors, the singular-set system and the Milnor-set system of a
// polynomial map together with the distance function rho_a(x) = |x - a|^2.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bifinf/error.hpp"
#include "bifinf/poly_map.hpp"
#include "bifinf/rational.hpp"
#include "bifinf/sparse_poly.hpp"

namespace bifinf {

using IndexSet = std::vector<std::size_t>;

/// All k-element subsets of {0, ..., n-1} in lexicographic order.
inline std::vector<IndexSet> combinations(std::size_t n, std::size_t k) {
    std::vector<IndexSet> out;
    if (k > n) return out;
    IndexSet idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    for (;;) {
        out.push_back(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

/// Determinant by cofactor expansion along the first row. Sizes here are p or
/// p+1 with p at most a handful, so expansion is cheaper than fraction-free
/// elimination over a polynomial ring.
template <class T>
T determinant_expand(const std::vector<std::vector<T>>& A, const T& zero, const T& one) {
    std::size_t n = A.size();
    if (n == 0) return one;
    if (n == 1) return A[0][0];
    if (n == 2) return A[0][0] * A[1][1] - A[0][1] * A[1][0];
    T det = zero;
    for (std::size_t c = 0; c < n; ++c) {
        if (coeff_is_zero(A[0][c])) continue;
        std::vector<std::vector<T>> sub;
        sub.reserve(n - 1);
        for (std::size_t r = 1; r < n; ++r) {
            std::vector<T> row;
            row.reserve(n - 1);
            for (std::size_t k = 0; k < n; ++k)
                if (k != c) row.push_back(A[r][k]);
            sub.push_back(std::move(row));
        }
        T term = A[0][c] * determinant_expand(sub, zero, one);
        if (c % 2) det = det - term;
        else det = det + term;
    }
    return det;
}

/// Rows are the gradients of f_1..f_p, optionally followed by the rho_a row.
struct JacobianMatrix {
    std::size_t n = 0;
    std::vector<std::vector<SparsePoly>> rows;
    bool has_rho_row = false;

    std::size_t row_count() const noexcept { return rows.size(); }

    /// Square submatrix on the given columns (all rows).
    std::vector<std::vector<SparsePoly>> columns(const IndexSet& cols) const {
        std::vector<std::vector<SparsePoly>> out;
        for (const auto& r : rows) {
            std::vector<SparsePoly> row;
            for (std::size_t c : cols) row.push_back(r.at(c));
            out.push_back(std::move(row));
        }
        return out;
    }

    template <class T>
    std::vector<std::vector<T>> evaluate(std::span<const T> point) const {
        std::vector<std::vector<T>> out;
        out.reserve(rows.size());
        for (const auto& r : rows) {
            std::vector<T> row;
            row.reserve(r.size());
            for (const auto& e : r) row.push_back(e.evaluate(point));
            out.push_back(std::move(row));
        }
        return out;
    }
};

inline JacobianMatrix jacobian(const PolyMap& f) {
    JacobianMatrix J;
    J.n = f.n();
    for (const auto& c : f.components()) {
        std::vector<SparsePoly> row;
        for (std::size_t j = 0; j < f.n(); ++j) row.push_back(c.partial_derivative(j));
        J.rows.push_back(std::move(row));
    }
    return J;
}

inline SparsePoly minor_of(const JacobianMatrix& J, const IndexSet& cols) {
    if (cols.size() != J.row_count()) throw ValidationError("minor needs as many columns as rows");
    std::size_t nv = J.rows.front().front().nvars();
    return determinant_expand(J.columns(cols), SparsePoly(nv), SparsePoly::constant(nv, Rational(1)));
}

namespace detail {

inline std::vector<std::string> center_names(const std::vector<std::string>& vars) {
    std::vector<std::string> out;
    bool clash = false;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        out.push_back("a" + std::to_string(i + 1));
        if (std::find(vars.begin(), vars.end(), out.back()) != vars.end()) clash = true;
    }
    if (clash)
        for (std::size_t i = 0; i < vars.size(); ++i) out[i] = "center_" + std::to_string(i + 1);
    return out;
}

}  // namespace detail

/// D(f, rho_a). With a numeric center the entries live in the n source
/// variables; with a symbolic center they live in 2n variables (x, then a).
inline JacobianMatrix extended_jacobian(const PolyMap& f, const std::optional<std::vector<Rational>>& center) {
    const std::size_t n = f.n();
    JacobianMatrix J = jacobian(f);
    J.has_rho_row = true;
    if (center) {
        if (center->size() != n) throw ValidationError("center has the wrong dimension");
        std::vector<SparsePoly> rho;
        for (std::size_t j = 0; j < n; ++j)
            rho.push_back(SparsePoly::variable(n, j) * Rational(2) - SparsePoly::constant(n, 2 * (*center)[j]));
        J.rows.push_back(std::move(rho));
        return J;
    }
    std::vector<std::size_t> lift(n);
    for (std::size_t j = 0; j < n; ++j) lift[j] = j;
    for (auto& row : J.rows)
        for (auto& e : row) e = e.remap(2 * n, lift);
    std::vector<SparsePoly> rho;
    for (std::size_t j = 0; j < n; ++j)
        rho.push_back((SparsePoly::variable(2 * n, j) - SparsePoly::variable(2 * n, n + j)) * Rational(2));
    J.rows.push_back(std::move(rho));
    return J;
}

struct MilnorSystem {
    std::size_t n = 0, p = 0;
    std::optional<std::vector<Rational>> center;  ///< empty when symbolic
    std::vector<std::string> var_names;           ///< x names, then center names if symbolic
    std::vector<SparsePoly> equations;
    std::vector<IndexSet> index_book;             ///< column multi-index J of each equation
    /// Every equation vanishes identically: gradients of f and rho_a are everywhere dependent.
    bool degenerate = false;

    bool symbolic() const noexcept { return !center.has_value(); }
};

inline MilnorSystem milnor_system(const PolyMap& f, const std::optional<std::vector<Rational>>& center) {
    MilnorSystem sys;
    sys.n = f.n();
    sys.p = f.p();
    sys.center = center;
    sys.var_names = f.var_names();
    if (!center) {
        auto an = detail::center_names(f.var_names());
        sys.var_names.insert(sys.var_names.end(), an.begin(), an.end());
    }
    JacobianMatrix J = extended_jacobian(f, center);
    bool all_zero = true;
    for (auto& cols : combinations(sys.n, sys.p + 1)) {
        SparsePoly m = minor_of(J, cols);
        all_zero = all_zero && m.is_zero();
        sys.equations.push_back(std::move(m));
        sys.index_book.push_back(std::move(cols));
    }
    sys.degenerate = all_zero;
    return sys;
}

inline MilnorSystem milnor_system(const PolyMap& f, const std::vector<Rational>& center) {
    return milnor_system(f, std::optional<std::vector<Rational>>(center));
}

inline MilnorSystem milnor_system_symbolic(const PolyMap& f) { return milnor_system(f, std::nullopt); }

/// Specializes a symbolic system at a numeric center.
inline MilnorSystem substitute_center(const MilnorSystem& sys, const std::vector<Rational>& center) {
    if (!sys.symbolic()) throw ValidationError("system already has a numeric center");
    if (center.size() != sys.n) throw ValidationError("center has the wrong dimension");
    MilnorSystem out = sys;
    out.center = center;
    out.var_names.resize(sys.n);
    std::vector<std::size_t> drop(2 * sys.n);
    for (std::size_t j = 0; j < 2 * sys.n; ++j) drop[j] = j < sys.n ? j : sys.n;  // a-variables are gone after substitution
    bool all_zero = true;
    for (auto& e : out.equations) {
        SparsePoly q = e;
        for (std::size_t k = 0; k < sys.n; ++k) q = q.substitute(sys.n + k, center[k]);
        e = q.remap(sys.n, drop);
        all_zero = all_zero && e.is_zero();
    }
    out.degenerate = all_zero;
    return out;
}

struct SingSystem {
    std::vector<SparsePoly> equations;  ///< all p x p minors of Df
    std::vector<IndexSet> index_book;
};

inline SingSystem sing_system(const PolyMap& f) {
    SingSystem s;
    JacobianMatrix J = jacobian(f);
    for (auto& cols : combinations(f.n(), f.p())) {
        s.equations.push_back(minor_of(J, cols));
        s.index_book.push_back(std::move(cols));
    }
    return s;
}

/// p(d - 1) + 1, the degree bound for the Milnor minors.
inline int milnor_degree_bound(const PolyMap& f) { return static_cast<int>(f.p()) * (f.d() - 1) + 1; }

inline bool minor_degree_audit(const MilnorSystem& sys, const PolyMap& f) {
    int bound = milnor_degree_bound(f);
    return std::all_of(sys.equations.begin(), sys.equations.end(),
                       [&](const SparsePoly& q) { return q.total_degree() <= bound; });
}

struct SubmersionCheck {
    std::size_t k = 0;   ///< the added column
    IndexSet J;          ///< I with k inserted
    double dm_dak = 0;   ///< d m_J / d a_k at (x, a)
    double rel_error = 0;
    bool ok = false;
};

struct GenericCenterReport {
    IndexSet I;
    double minor_I = 0;  ///< M_I[Df(x)]
    std::vector<SubmersionCheck> checks;
    bool all_ok = false;
};

/// For J = I + {k}, the a_k-derivative of m_J(x, a) only touches the rho_a row
/// entry -2 in column k, so it equals -+2 M_I[Df(x)]. Evaluation is exact on
/// the rational values of the given doubles.
inline GenericCenterReport generic_center_witness(const PolyMap& f, const std::vector<double>& a,
                                                  const std::vector<double>& x, IndexSet I,
                                                  double rel_tol = 1e-9) {
    const std::size_t n = f.n(), p = f.p();
    if (a.size() != n || x.size() != n) throw ValidationError("point and center need dimension n");
    std::sort(I.begin(), I.end());
    if (I.size() != p || std::adjacent_find(I.begin(), I.end()) != I.end() || I.back() >= n)
        throw ValidationError("witness index set must have p distinct columns");

    std::vector<Rational> xa;
    for (double v : x) xa.push_back(from_double(v));
    for (double v : a) xa.push_back(from_double(v));
    std::vector<Rational> xr(xa.begin(), xa.begin() + static_cast<std::ptrdiff_t>(n));

    JacobianMatrix Df = jacobian(f);
    Rational MI = minor_of(Df, I).evaluate(xr);
    std::vector<double> xd(x);
    double scale = 0;
    {
        // size of M_I relative to the entries it is built from
        auto mags = Df.columns(I);
        double h = 1;
        for (const auto& row : mags) {
            double s = 0;
            for (const auto& e : row) s += std::pow(e.magnitude_at(xd), 2);
            h *= std::sqrt(s);
        }
        scale = h;
    }
    if (MI == 0 || std::abs(MI.get_d()) <= 1e-12 * scale)
        throw ValidationError("witness minor M_I[Df(x)] vanishes: x is (numerically) in Sing f");

    MilnorSystem sym = milnor_system_symbolic(f);
    GenericCenterReport rep;
    rep.I = I;
    rep.minor_I = MI.get_d();
    rep.all_ok = true;
    Rational expected = 2 * abs(MI);
    for (std::size_t k = 0; k < n; ++k) {
        if (std::find(I.begin(), I.end(), k) != I.end()) continue;
        IndexSet J = I;
        J.insert(std::upper_bound(J.begin(), J.end(), k), k);
        auto it = std::find(sym.index_book.begin(), sym.index_book.end(), J);
        const SparsePoly& mJ = sym.equations[static_cast<std::size_t>(it - sym.index_book.begin())];
        Rational d = mJ.partial_derivative(n + k).evaluate(xa);
        SubmersionCheck c;
        c.k = k;
        c.J = J;
        c.dm_dak = d.get_d();
        c.rel_error = std::abs(Rational(abs(d) - expected).get_d()) / expected.get_d();
        c.ok = c.rel_error <= rel_tol;
        rep.all_ok = rep.all_ok && c.ok;
        rep.checks.push_back(c);
    }
    return rep;
}

/// Normalized distance-to-Sing proxy at a point: the largest p x p minor of
/// Df divided by the Hadamard bound built from the term magnitudes of the
/// entries. Lies in [0, 1]; near 0 means Df(x) is nearly rank deficient
/// relative to the size of its entries.
inline double sing_proximity(const JacobianMatrix& Df, std::span<const double> x) {
    const std::size_t p = Df.row_count(), n = Df.n;
    auto vals = Df.evaluate(x);
    std::vector<std::vector<double>> mags(p, std::vector<double>(n));
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < n; ++j) mags[i][j] = Df.rows[i][j].magnitude_at(x);
    double best = 0;
    for (const auto& cols : combinations(n, p)) {
        std::vector<std::vector<double>> sub(p, std::vector<double>(p));
        double h = 1;
        for (std::size_t i = 0; i < p; ++i) {
            double s = 0;
            for (std::size_t c = 0; c < p; ++c) {
                sub[i][c] = vals[i][cols[c]];
                s += mags[i][cols[c]] * mags[i][cols[c]];
            }
            h *= std::sqrt(s);
        }
        if (h == 0) continue;
        double m = std::abs(determinant_expand(sub, 0.0, 1.0));
        best = std::max(best, std::min(1.0, m / h));
    }
    return best;
}

/// One equation per line in canonical form.
inline std::string system_to_text(const std::vector<SparsePoly>& eqs, const std::vector<std::string>& names) {
    std::ostringstream os;
    for (const auto& q : eqs) os << q.to_string(names) << "\n";
    return os.str();
}

inline std::string milnor_to_text(const MilnorSystem& sys) {
    std::ostringstream os;
    os << "# milnor system: n = " << sys.n << ", p = " << sys.p << ", equations = " << sys.equations.size() << "\n";
    os << "# variables: ";
    for (std::size_t i = 0; i < sys.var_names.size(); ++i) os << (i ? ", " : "") << sys.var_names[i];
    os << "\n# center: ";
    if (sys.center) {
        for (std::size_t i = 0; i < sys.center->size(); ++i) os << (i ? ", " : "") << to_string((*sys.center)[i]);
    } else {
        os << "symbolic";
    }
    os << "\n";
    if (sys.degenerate) os << "# status: degenerate (identically zero)\n";
    for (std::size_t i = 0; i < sys.equations.size(); ++i) {
        os << "# J = {";
        for (std::size_t c = 0; c < sys.index_book[i].size(); ++c) os << (c ? "," : "") << sys.index_book[i][c] + 1;
        os << "}\n" << sys.equations[i].to_string(sys.var_names) << "\n";
    }
    return os.str();
}

inline std::string sing_to_text(const SingSystem& s, const std::vector<std::string>& names) {
    std::ostringstream os;
    os << "# sing system: " << s.equations.size() << " minors\n";
    for (std::size_t i = 0; i < s.equations.size(); ++i) {
        os << "# I = {";
        for (std::size_t c = 0; c < s.index_book[i].size(); ++c) os << (c ? "," : "") << s.index_book[i][c] + 1;
        os << "}\n" << s.equations[i].to_string(names) << "\n";
    }
    return os.str();
}

}  // namespace bifinf
