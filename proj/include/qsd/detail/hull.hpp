#pragma once

// Exact minimum-norm point in the convex hull of a small set of 3-vectors.
// In R^3 the optimal support has at most four affinely independent points
// (Caratheodory), so enumerating supports of size <= 4 and solving each
// equality-constrained least-squares problem exactly is both cheap and
// free of iteration error. Used by the numeric oracle as an
// epsilon-subgradient steepest-descent direction and optimality certificate.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "../vec3.hpp"

namespace qsd::detail {

// Dense Gaussian elimination with partial pivoting, n <= 5. Returns false on
// a numerically singular matrix.
inline bool gauss_n(std::size_t n, std::array<std::array<double, 6>, 5>& m) {
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t i = c + 1; i < n; ++i) {
            if (std::abs(m[i][c]) > std::abs(m[piv][c])) piv = i;
        }
        if (std::abs(m[piv][c]) < 1e-13) return false;
        std::swap(m[c], m[piv]);
        for (std::size_t i = c + 1; i < n; ++i) {
            const double f = m[i][c] / m[c][c];
            for (std::size_t j = c; j <= n; ++j) m[i][j] -= f * m[c][j];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = i + 1; j < n; ++j) m[i][n] -= m[i][j] * m[j][n];
        m[i][n] /= m[i][i];
        if (!std::isfinite(m[i][n])) return false;
    }
    return true;
}

struct MinNormPoint {
    Vec3 point{};
    double norm = 0.0;
};

// min |sum_i a_i g_i| over the simplex. Supports whose KKT system is
// singular are skipped; the optimal support is affinely independent, so it
// is always among the solvable ones.
inline MinNormPoint min_norm_in_hull(const std::vector<Vec3>& g) {
    MinNormPoint best{};
    best.norm = 1e300;
    const std::size_t n = g.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double ni = norm(g[i]);
        if (ni < best.norm) best = {g[i], ni};
    }

    std::array<std::size_t, 4> idx{};
    // Supports of size k = 2..4: solve [[2G, 1],[1^T, 0]] [a; v] = [0; 1].
    for (std::size_t k = 2; k <= std::min<std::size_t>(4, n); ++k) {
        // iterate k-combinations in lexicographic order
        std::vector<std::size_t> comb(k);
        for (std::size_t i = 0; i < k; ++i) comb[i] = i;
        while (true) {
            for (std::size_t i = 0; i < k; ++i) idx[i] = comb[i];
            std::array<std::array<double, 6>, 5> m{};
            for (std::size_t i = 0; i < k; ++i) {
                for (std::size_t j = 0; j < k; ++j) {
                    m[i][j] = 2.0 * dot(g[idx[i]], g[idx[j]]);
                }
                m[i][k] = 1.0;
                m[i][k + 1] = 0.0;
                m[k][i] = 1.0;
            }
            m[k][k] = 0.0;
            m[k][k + 1] = 1.0;
            if (gauss_n(k + 1, m)) {
                bool feasible = true;
                for (std::size_t i = 0; i < k; ++i) {
                    if (m[i][k + 1] < -1e-12) feasible = false;
                }
                if (feasible) {
                    Vec3 pt{};
                    for (std::size_t i = 0; i < k; ++i) pt += m[i][k + 1] * g[idx[i]];
                    const double np = norm(pt);
                    if (np < best.norm) best = {pt, np};
                }
            }
            // next combination
            std::size_t pos = k;
            while (pos > 0 && comb[pos - 1] == n - k + pos - 1) --pos;
            if (pos == 0) break;
            ++comb[pos - 1];
            for (std::size_t i = pos; i < k; ++i) comb[i] = comb[i - 1] + 1;
        }
    }
    return best;
}

}  // namespace qsd::detail
