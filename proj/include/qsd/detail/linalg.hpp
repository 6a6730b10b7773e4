#pragma once

// Tiny dense solvers for the fixed-size systems that show up in the case
// analysis (at most 4 equations, 4 unknowns). Full pivoting so that rank
// decisions are trustworthy near degenerate configurations.

#include <array>
#include <cmath>
#include <cstddef>

namespace qsd::detail {

inline constexpr std::size_t kMaxDim = 4;

// Solution of A x = b for a k x n system (k, n <= 4). `particular` has free
// variables set to zero; `null_basis` spans the homogeneous solutions.
struct LinearSolution {
    int rank = 0;
    bool consistent = true;
    std::array<double, kMaxDim> particular{};
    int null_dim = 0;
    std::array<std::array<double, kMaxDim>, kMaxDim> null_basis{};
};

// Gaussian elimination with full pivoting. rank_rel is the pivot threshold
// relative to the largest entry of A.
inline LinearSolution solve_small(std::size_t k, std::size_t n,
                                  const std::array<std::array<double, kMaxDim>, kMaxDim>& a_in,
                                  const std::array<double, kMaxDim>& b_in,
                                  double rank_rel = 1e-11) {
    std::array<std::array<double, kMaxDim>, kMaxDim> a = a_in;
    std::array<double, kMaxDim> b = b_in;
    std::array<std::size_t, kMaxDim> col{0, 1, 2, 3};  // column permutation

    double amax = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < n; ++j) amax = std::max(amax, std::abs(a[i][j]));
    }
    const double pivot_tol = rank_rel * (amax > 0.0 ? amax : 1.0);

    LinearSolution sol;
    std::size_t r = 0;
    for (; r < std::min(k, n); ++r) {
        std::size_t pi = r, pj = r;
        double pv = 0.0;
        for (std::size_t i = r; i < k; ++i) {
            for (std::size_t j = r; j < n; ++j) {
                if (std::abs(a[i][j]) > pv) {
                    pv = std::abs(a[i][j]);
                    pi = i;
                    pj = j;
                }
            }
        }
        if (pv <= pivot_tol) break;
        std::swap(a[r], a[pi]);
        std::swap(b[r], b[pi]);
        for (std::size_t i = 0; i < k; ++i) std::swap(a[i][r], a[i][pj]);
        std::swap(col[r], col[pj]);
        for (std::size_t i = r + 1; i < k; ++i) {
            const double f = a[i][r] / a[r][r];
            a[i][r] = 0.0;
            for (std::size_t j = r + 1; j < n; ++j) a[i][j] -= f * a[r][j];
            b[i] -= f * b[r];
        }
    }
    sol.rank = static_cast<int>(r);

    // Consistency: remaining rows must have (numerically) zero rhs.
    double bmax = 0.0;
    for (std::size_t i = 0; i < k; ++i) bmax = std::max(bmax, std::abs(b_in[i]));
    const double rhs_tol = rank_rel * std::max(1.0, std::max(amax, bmax)) * 100.0;
    for (std::size_t i = r; i < k; ++i) {
        if (std::abs(b[i]) > rhs_tol) sol.consistent = false;
    }

    // Back substitution in permuted coordinates; free variables zero.
    std::array<double, kMaxDim> xp{};
    for (std::size_t ii = r; ii-- > 0;) {
        double v = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) v -= a[ii][j] * xp[j];
        xp[ii] = v / a[ii][ii];
    }
    for (std::size_t j = 0; j < n; ++j) sol.particular[col[j]] = xp[j];

    // Null basis: one vector per free column.
    sol.null_dim = static_cast<int>(n - r);
    for (std::size_t f = 0; f < n - r; ++f) {
        std::array<double, kMaxDim> xn{};
        xn[r + f] = 1.0;
        for (std::size_t ii = r; ii-- > 0;) {
            double v = -a[ii][r + f];
            for (std::size_t j = ii + 1; j < r; ++j) v -= a[ii][j] * xn[j];
            xn[ii] = v / a[ii][ii];
        }
        for (std::size_t j = 0; j < n; ++j) sol.null_basis[f][col[j]] = xn[j];
    }
    return sol;
}

// Solve the symmetric 3x3 system H x = g with partial pivoting; returns
// false when H is numerically singular.
inline bool solve_sym3(const std::array<std::array<double, 3>, 3>& h_in,
                       const std::array<double, 3>& g_in, std::array<double, 3>& x) {
    std::array<std::array<double, 4>, 3> m{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) m[i][j] = h_in[i][j];
        m[i][3] = g_in[i];
    }
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int i = c + 1; i < 3; ++i) {
            if (std::abs(m[i][c]) > std::abs(m[piv][c])) piv = i;
        }
        if (m[piv][c] == 0.0 || !std::isfinite(m[piv][c])) return false;
        std::swap(m[c], m[piv]);
        for (int i = c + 1; i < 3; ++i) {
            const double f = m[i][c] / m[c][c];
            for (int j = c; j < 4; ++j) m[i][j] -= f * m[c][j];
        }
    }
    for (int i = 2; i >= 0; --i) {
        double v = m[i][3];
        for (int j = i + 1; j < 3; ++j) v -= m[i][j] * x[j];
        x[i] = v / m[i][i];
        if (!std::isfinite(x[i])) return false;
    }
    return true;
}

}  // namespace qsd::detail
