#pragma once

// Bivariate elimination by Sylvester resultants.
//
// The determinant is computed by evaluation at deg(q1)*deg(q2)+1 integer
// points of the kept variable (exact rational Gaussian elimination) followed
// by Newton interpolation, which avoids polynomial-entry determinants.

#include <sstream>
#include <string>
#include <vector>

#include "bifinf/error.hpp"
#include "bifinf/sparse_poly.hpp"
#include "bifinf/univariate.hpp"

namespace bifinf {

namespace detail {

/// Coefficients of q as a polynomial in variable `elim`, each a univariate in the other variable.
inline std::vector<UnivariatePoly> split_bivariate(const SparsePoly& q, std::size_t elim) {
    std::size_t keep = 1 - elim;
    int de = std::max(q.degree_in(elim), 0);
    std::vector<std::vector<Rational>> dense(static_cast<std::size_t>(de) + 1);
    for (const auto& [m, c] : q.terms()) {
        auto& row = dense[m.exps[elim]];
        if (row.size() <= m.exps[keep]) row.resize(m.exps[keep] + 1);
        row[m.exps[keep]] += c;
    }
    std::vector<UnivariatePoly> out;
    out.reserve(dense.size());
    for (auto& row : dense) out.emplace_back(std::move(row));
    return out;
}

/// Sylvester matrix with entries evaluated at one value of the kept variable.
inline std::vector<std::vector<Rational>> sylvester_at(const std::vector<UnivariatePoly>& a,
                                                       const std::vector<UnivariatePoly>& b,
                                                       const Rational& v) {
    int m = static_cast<int>(a.size()) - 1, n = static_cast<int>(b.size()) - 1;
    int size = m + n;
    std::vector<std::vector<Rational>> S(static_cast<std::size_t>(size),
                                         std::vector<Rational>(static_cast<std::size_t>(size)));
    for (int r = 0; r < n; ++r)
        for (int k = 0; k <= m; ++k)
            S[static_cast<std::size_t>(r)][static_cast<std::size_t>(r + k)] = a[static_cast<std::size_t>(m - k)].evaluate(v);
    for (int r = 0; r < m; ++r)
        for (int k = 0; k <= n; ++k)
            S[static_cast<std::size_t>(n + r)][static_cast<std::size_t>(r + k)] = b[static_cast<std::size_t>(n - k)].evaluate(v);
    return S;
}

inline Rational determinant(std::vector<std::vector<Rational>> A) {
    std::size_t n = A.size();
    Rational det = 1;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && A[piv][col] == 0) ++piv;
        if (piv == n) return 0;
        if (piv != col) {
            std::swap(A[piv], A[col]);
            det = -det;
        }
        det *= A[col][col];
        for (std::size_t r = col + 1; r < n; ++r) {
            if (A[r][col] == 0) continue;
            Rational f = A[r][col] / A[col][col];
            for (std::size_t k = col; k < n; ++k) A[r][k] -= f * A[col][k];
        }
    }
    return det;
}

/// Newton form interpolation through (xs[i], ys[i]).
inline UnivariatePoly interpolate(const std::vector<Rational>& xs, std::vector<Rational> ys) {
    std::size_t n = xs.size();
    for (std::size_t j = 1; j < n; ++j)
        for (std::size_t i = n - 1; i >= j; --i) {
            ys[i] = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - j]);
            if (i == j) break;
        }
    UnivariatePoly p = UnivariatePoly::constant(ys[n - 1]);
    for (std::size_t k = n - 1; k-- > 0;) p = p * UnivariatePoly::linear_root(xs[k]) + UnivariatePoly::constant(ys[k]);
    return p;
}

}  // namespace detail

struct ResultantResult {
    UnivariatePoly poly;  ///< in the kept variable
    /// Identically zero: the inputs share a component (or both degenerate).
    bool degenerate = false;
};

/// Res_{eliminate}(q1, q2) for polynomials in exactly two variables.
inline ResultantResult resultant(const SparsePoly& q1, const SparsePoly& q2, std::size_t eliminate) {
    if (q1.nvars() != 2 || q2.nvars() != 2) throw ValidationError("resultant expects bivariate polynomials");
    if (eliminate > 1) throw ValidationError("eliminated variable index must be 0 or 1");
    if (q1.is_zero() || q2.is_zero()) throw ValidationError("resultant of a zero polynomial");
    auto a = detail::split_bivariate(q1, eliminate);
    auto b = detail::split_bivariate(q2, eliminate);
    int bound = q1.total_degree() * q2.total_degree();
    std::vector<Rational> xs, ys;
    for (int k = 0; k <= bound; ++k) {
        Rational v(k - bound / 2);
        xs.push_back(v);
        ys.push_back(detail::determinant(detail::sylvester_at(a, b, v)));
    }
    ResultantResult out;
    out.poly = detail::interpolate(xs, ys);
    out.degenerate = out.poly.is_zero();
    return out;
}

/// Human-readable Sylvester matrix (entries as polynomials in the kept variable).
inline std::string sylvester_matrix_text(const SparsePoly& q1, const SparsePoly& q2, std::size_t eliminate,
                                         const std::string& kept_name = "x") {
    auto a = detail::split_bivariate(q1, eliminate);
    auto b = detail::split_bivariate(q2, eliminate);
    int m = static_cast<int>(a.size()) - 1, n = static_cast<int>(b.size()) - 1;
    std::ostringstream os;
    for (int r = 0; r < m + n; ++r) {
        os << "[";
        for (int c = 0; c < m + n; ++c) {
            UnivariatePoly e;
            if (r < n && c - r >= 0 && c - r <= m) e = a[static_cast<std::size_t>(m - (c - r))];
            if (r >= n && c - (r - n) >= 0 && c - (r - n) <= n) e = b[static_cast<std::size_t>(n - (c - (r - n)))];
            os << (c ? ", " : "") << e.to_string(kept_name);
        }
        os << "]\n";
    }
    return os.str();
}

}  // namespace bifinf
