#pragma once

// Shared test utilities: deterministic random draws, an independent
// two-state closed form, and random rotations for symmetry tests.

#include <cmath>
#include <numbers>

#include <qsd/qsd.hpp>

namespace testutil {

// Uniform in [lo, hi) from the library's deterministic generator.
inline double uniform(qsd::detail::SplitMix64& rng, double lo, double hi) {
    return lo + (hi - lo) * rng.uniform();
}

// Closed form for two weighted states, computed through matrix eigenvalues
// (not through Bloch norms) so it is independent of the solver's arithmetic:
// t = 1/2 (1 + |lambda_1| + |lambda_2|) where lambda_i are the eigenvalues
// of op1 - op2 as a Hermitian matrix.
inline double two_state_closed_form(const qsd::BlochOperator& a, const qsd::BlochOperator& b) {
    const qsd::Matrix2c d = qsd::to_matrix({a.p - b.p, a.r - b.r});
    const double tr = (d[0] + d[3]).real();
    const double det = (d[0] * d[3] - d[1] * d[2]).real();
    const double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
    const double l1 = tr / 2.0 + disc;
    const double l2 = tr / 2.0 - disc;
    return 0.5 * (1.0 + std::abs(l1) + std::abs(l2));
}

// Random rotation matrix columns (orthonormal frame) via a random unit axis
// and angle.
struct Rotation {
    qsd::Vec3 c0, c1, c2;
    qsd::Vec3 apply(const qsd::Vec3& v) const { return v.x * c0 + v.y * c1 + v.z * c2; }
};

inline Rotation random_rotation(qsd::detail::SplitMix64& rng) {
    const double z = 2.0 * rng.uniform() - 1.0;
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    const double rho = std::sqrt(std::max(1.0 - z * z, 0.0));
    const qsd::Vec3 axis{rho * std::cos(phi), rho * std::sin(phi), z};
    const double ang = 2.0 * std::numbers::pi * rng.uniform();
    const double c = std::cos(ang), s = std::sin(ang);
    auto rot = [&](const qsd::Vec3& v) {
        // Rodrigues rotation about `axis` by `ang`
        return c * v + s * cross(axis, v) + (1.0 - c) * dot(axis, v) * axis;
    };
    return {rot({1, 0, 0}), rot({0, 1, 0}), rot({0, 0, 1})};
}

// Direct evaluation of the covering objective on raw operators, for
// fixtures that are not valid states (solve_triplet accepts any operators).
inline double raw_objective(const qsd::Vec3& s, const std::vector<qsd::BlochOperator>& ops) {
    double f = -1e300;
    for (const auto& op : ops) f = std::max(f, op.p + qsd::norm(s - op.r));
    return f;
}

// Brute-force minimizer of raw_objective: pattern search over the full
// 26-direction neighborhood with shrinking step (axis-only moves stall on
// the kinks of a max of norms). Slow and simple; used only to pin expected
// values.
inline double minimize_raw_objective(const std::vector<qsd::BlochOperator>& ops,
                                     qsd::Vec3& best_s) {
    double best = 1e300;
    for (const auto& start : ops) {
        qsd::Vec3 s = start.r;
        double step = 1.0;
        double f = raw_objective(s, ops);
        for (int it = 0; it < 20000 && step > 1e-13; ++it) {
            bool improved = false;
            for (int dx = -1; dx <= 1; ++dx) {
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dz = -1; dz <= 1; ++dz) {
                        if (!dx && !dy && !dz) continue;
                        const qsd::Vec3 cand =
                            s + step * qsd::Vec3{double(dx), double(dy), double(dz)};
                        const double fc = raw_objective(cand, ops);
                        if (fc < f) {
                            f = fc;
                            s = cand;
                            improved = true;
                        }
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
        if (f < best) {
            best = f;
            best_s = s;
        }
    }
    return best;
}

}  // namespace testutil
