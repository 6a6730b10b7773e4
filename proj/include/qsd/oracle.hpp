#pragma once

// Independent verification path: direct first-order minimization of the
// covering objective, sharing no algebra with the analytic case solvers.
// Also home of the deterministic random-instance generator used by the
// test corpus.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "bloch.hpp"
#include "detail/hull.hpp"
#include "geometry.hpp"
#include "vec3.hpp"

namespace qsd {

struct OracleResult {
    double t = 0.0;
    Vec3 s{};
    int iterations = 0;
    bool converged = false;
};

namespace detail {

// Golden-section minimization of phi over [0, hi]; returns the best abscissa.
template <class F>
double golden_min(F&& phi, double hi, int evals, int& counter) {
    const double invphi = 0.6180339887498949;
    double a = 0.0, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = phi(x1), f2 = phi(x2);
    counter += 2;
    for (int i = 0; i < evals; ++i, ++counter) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = phi(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = phi(x2);
        }
    }
    return f1 < f2 ? x1 : x2;
}

}  // namespace detail

// Convex iterative solver for min_s max_x (p_x + |s - r_x|). Three stages:
// multi-start subgradient descent with diminishing step c/sqrt(k),
// coordinate-wise golden-section polish, then an exact epsilon-subgradient
// refinement: the minimum-norm vector in the hull of near-active gradients
// is both a descent direction and an optimality certificate
//   f(s) - f* <= |g~| * diam + band.
// Never throws; `converged` reports whether the certificate reached tol.
inline OracleResult oracle_solve(const Ensemble& ens, double tol = 1e-8,
                                 int max_iter = 200000) {
    const std::size_t m = ens.size();
    if (m == 1) {
        return {ens.op(0).p, ens.op(0).r, 0, true};
    }

    Vec3 centroid{};
    for (const auto& ws : ens) centroid += ws.op.r;
    centroid = centroid / static_cast<double>(m);
    double scale = 1e-12;
    for (const auto& ws : ens) {
        scale = std::max(scale, norm(ws.op.r - centroid) + ws.op.p);
    }
    const double diam = 4.0 * scale;

    const auto f = [&](const Vec3& s) { return covering_objective(s, ens); };

    int iters = 0;
    Vec3 best = centroid;
    double fbest = f(best);

    // Stage 1: subgradient descent, step c/sqrt(k), from every center and
    // the centroid.
    std::vector<Vec3> starts;
    for (const auto& ws : ens) starts.push_back(ws.op.r);
    starts.push_back(centroid);
    const double c = 0.3 * scale;
    for (const Vec3& s0 : starts) {
        Vec3 s = s0;
        for (int k = 1; k <= 300 && iters < max_iter; ++k, ++iters) {
            double fv = -1.0;
            Vec3 grad{};
            for (const auto& ws : ens) {
                const double cand = ws.op.p + norm(s - ws.op.r);
                if (cand > fv) {
                    fv = cand;
                    const Vec3 v = s - ws.op.r;
                    const double d = norm(v);
                    grad = d > 0.0 ? v / d : Vec3{};
                }
            }
            if (fv < fbest) {
                fbest = fv;
                best = s;
            }
            s -= (c / std::sqrt(static_cast<double>(k))) * grad;
        }
    }

    // Stage 2: coordinate-wise golden-section polish.
    Vec3 s = best;
    double h = 0.5 * scale;
    for (int round = 0; round < 14 && iters < max_iter; ++round) {
        for (int axis = 0; axis < 3; ++axis) {
            const Vec3 e{axis == 0 ? 1.0 : 0.0, axis == 1 ? 1.0 : 0.0, axis == 2 ? 1.0 : 0.0};
            const double a =
                detail::golden_min([&](double x) { return f(s + (x - h) * e); }, 2.0 * h, 40,
                                   iters);
            const Vec3 cand = s + (a - h) * e;
            if (f(cand) <= f(s)) s = cand;
            ++iters;
        }
        h *= 0.5;
    }
    if (f(s) < fbest) {
        fbest = f(s);
        best = s;
    }
    s = best;

    // Stage 3: epsilon-subgradient steepest descent with the exact min-norm
    // hull direction.
    bool converged = false;
    double band = 1e-3 * scale;
    const double band_floor = std::max(1e-13 * scale, 0.05 * tol);
    for (int round = 0; round < 600 && iters < max_iter; ++round) {
        const double f0 = f(s);
        ++iters;
        std::vector<Vec3> grads;
        bool zero_subgrad = false;
        for (const auto& ws : ens) {
            const double fx = ws.op.p + norm(s - ws.op.r);
            if (fx >= f0 - band) {
                const Vec3 v = s - ws.op.r;
                const double d = norm(v);
                if (d <= 1e-15 * scale) {
                    zero_subgrad = true;  // sitting on a center: 0 is a subgradient
                } else {
                    grads.push_back(v / d);
                }
            }
        }
        double dnorm = 0.0;
        Vec3 dir{};
        if (!zero_subgrad) {
            const auto mn = detail::min_norm_in_hull(grads);
            dnorm = mn.norm;
            dir = mn.point;
        }
        const double bound = dnorm * diam + band;
        if (bound <= tol) {
            converged = true;
            break;
        }
        if (dnorm * diam <= band) {
            // No useful direction at this resolution; sharpen the band.
            if (band <= band_floor) break;
            band = std::max(band * 0.25, band_floor);
            continue;
        }
        const Vec3 u = dir / dnorm;
        const double step =
            detail::golden_min([&](double x) { return f(s - x * u); }, 2.0 * scale, 48, iters);
        const Vec3 cand = s - step * u;
        if (f(cand) < f0) {
            s = cand;
        } else {
            if (band <= band_floor) break;
            band = std::max(band * 0.25, band_floor);
        }
        ++iters;
    }

    const double t = f(s);
    return {t, s, iters, converged};
}

// Purity selector for random instances.
enum class Purity { Pure, Mixed };

namespace detail {

// (0, 1) uniform from the top 53 bits; never returns an endpoint.
inline double uniform_open(SplitMix64& rng) {
    return (static_cast<double>(rng.next() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace detail

// Deterministic random ensemble: splitmix64 generator (published constants,
// reproducible across platforms), priors from a normalized positive draw,
// directions uniform on the sphere. Pure instances put |r| = p; mixed ones
// scale |r| by a uniform factor.
inline Ensemble random_ensemble(std::uint64_t seed, std::size_t m, Purity purity) {
    detail::SplitMix64 rng(seed);
    std::vector<double> w(m);
    double sum = 0.0;
    for (auto& wi : w) {
        wi = detail::uniform_open(rng);
        sum += wi;
    }
    std::vector<WeightedState> states;
    states.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double p = w[i] / sum;
        const double zc = 2.0 * detail::uniform_open(rng) - 1.0;
        const double phi = 2.0 * std::numbers::pi * detail::uniform_open(rng);
        const double rho = std::sqrt(std::max(0.0, 1.0 - zc * zc));
        const Vec3 n{rho * std::cos(phi), rho * std::sin(phi), zc};
        const double radial = purity == Purity::Pure ? 1.0 : detail::uniform_open(rng);
        states.push_back({"s" + std::to_string(i), {p, (p * radial) * n}});
    }
    return Ensemble::from_states(std::move(states));
}

}  // namespace qsd
