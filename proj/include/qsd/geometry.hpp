#pragma once

// Ball picture of the discrimination problem. A feasible (t, s) is a ball of
// radius t around s containing every weighted-state ball (center r_x, radius
// p_x); the optimum is the smallest such ball and t equals the guessing
// probability. The equivalent scaled picture shifts radii so that the
// largest-prior state becomes a point: ball x gets radius p_max - p_x and
// the optimal center is the point minimizing the largest shifted reach.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bloch.hpp"
#include "detail/hull.hpp"
#include "detail/linalg.hpp"
#include "errors.hpp"
#include "vec3.hpp"

namespace qsd {

struct Ball {
    Vec3 center{};
    double radius = 0.0;
};

struct LabeledBall {
    std::string label;
    Ball ball;
};

struct ScaledProblem {
    double p_max = 0.0;
    std::vector<LabeledBall> balls;
};

// Scaled picture: every state becomes a ball of radius p_max - p_x around
// its Bloch vector. At least one ball (the max-prior state) has radius 0.
inline ScaledProblem scaled_balls(const Ensemble& ens) {
    ScaledProblem sp;
    sp.p_max = ens.max_prior();
    sp.balls.reserve(ens.size());
    for (const auto& ws : ens) {
        sp.balls.push_back({ws.label, {ws.op.r, std::abs(sp.p_max - ws.op.p)}});
    }
    return sp;
}

// f(s) = max_x (p_x + |s - r_x|): the smallest feasible t with center s.
// Convex, piecewise smooth.
inline double covering_objective(const Vec3& s, const Ensemble& ens) {
    double f = -1.0;
    for (const auto& ws : ens) {
        f = std::max(f, ws.op.p + norm(s - ws.op.r));
    }
    return f;
}

struct MinBallResult {
    double t = 0.0;
    Vec3 s{};
    int iterations = 0;
};

namespace detail {

// Deterministic 64-bit mix (splitmix64 constants) used for optional extra
// restart points; doubles come from the top 53 bits.
struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

// Log-sum-exp smoothing of the covering objective:
//   f_mu(s) = mu * log sum_x exp((p_x + d_x(s)) / mu)
// with each norm regularized as sqrt(|v|^2 + (1e-3 mu)^2) so f_mu is C^2
// everywhere. f <= f_mu <= f + mu log m, so driving mu down certifies the
// unsmoothed optimum.
struct SmoothedObjective {
    const Ensemble& ens;
    double mu;

    double value(const Vec3& s) const {
        double fmax = -1e300;
        for (const auto& ws : ens) fmax = std::max(fmax, term(s, ws));
        double acc = 0.0;
        for (const auto& ws : ens) acc += std::exp((term(s, ws) - fmax) / mu);
        return fmax + mu * std::log(acc);
    }

    void value_grad_hess(const Vec3& s, double& f, std::array<double, 3>& g,
                         std::array<std::array<double, 3>, 3>& h) const {
        double fmax = -1e300;
        for (const auto& ws : ens) fmax = std::max(fmax, term(s, ws));
        double wsum = 0.0;
        Vec3 gbar{};
        std::array<std::array<double, 3>, 3> curv{};
        std::array<std::array<double, 3>, 3> outer{};
        for (const auto& ws : ens) {
            const Vec3 v = s - ws.op.r;
            const double d = reg_norm(v);
            const double w = std::exp((ws.op.p + d - fmax) / mu);
            wsum += w;
            const Vec3 u = v / d;
            gbar += w * u;
            const double ux[3] = {u.x, u.y, u.z};
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) {
                    const double eye = (i == j) ? 1.0 : 0.0;
                    curv[i][j] += w * (eye - ux[i] * ux[j]) / d;
                    outer[i][j] += w * ux[i] * ux[j];
                }
            }
        }
        f = fmax + mu * std::log(wsum);
        const Vec3 gv = gbar / wsum;
        g = {gv.x, gv.y, gv.z};
        const double gx[3] = {gv.x, gv.y, gv.z};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                h[i][j] = curv[i][j] / wsum + (outer[i][j] / wsum - gx[i] * gx[j]) / mu;
            }
        }
    }

  private:
    double reg_norm(const Vec3& v) const {
        const double eps = 1e-3 * mu;
        return std::sqrt(norm2(v) + eps * eps);
    }
    double term(const Vec3& s, const WeightedState& ws) const {
        return ws.op.p + reg_norm(s - ws.op.r);
    }
};

}  // namespace detail

// Iterative minimizer of the covering objective: damped subgradient descent
// from every center and the centroid, a damped-Newton continuation on the
// log-sum-exp smoothing for a high-quality warm start, then an exact
// subgradient polish that certifies `tol` through the min-norm point of the
// active-direction hull. Deterministic for fixed inputs; `seed` only adds
// extra restart points.
inline MinBallResult min_covering_ball(const Ensemble& ens, double tol = kDefaultTol,
                                       int max_iter = 100000, std::uint64_t seed = 0) {
    const std::size_t m = ens.size();
    if (m == 1) {
        return {ens.op(0).p, ens.op(0).r, 0};
    }

    Vec3 centroid{};
    for (const auto& ws : ens) centroid += ws.op.r;
    centroid = centroid / static_cast<double>(m);
    double spread = 0.0;
    for (const auto& ws : ens) {
        spread = std::max(spread, norm(ws.op.r - centroid) + ws.op.p);
    }
    const double scale = std::max(spread, 1e-12);

    std::vector<Vec3> starts;
    starts.reserve(m + 4);
    for (const auto& ws : ens) starts.push_back(ws.op.r);
    starts.push_back(centroid);
    if (seed != 0) {
        detail::SplitMix64 rng(seed);
        for (int i = 0; i < 3; ++i) {
            starts.push_back(centroid + Vec3{(2.0 * rng.uniform() - 1.0) * scale,
                                             (2.0 * rng.uniform() - 1.0) * scale,
                                             (2.0 * rng.uniform() - 1.0) * scale});
        }
    }

    int iters = 0;
    Vec3 best{};
    double fbest = 1e300;
    for (const Vec3& s0 : starts) {
        Vec3 s = s0;
        double step = 0.5 * scale;
        for (int k = 0; k < 60 && iters < max_iter; ++k, ++iters) {
            // Subgradient of the active max term.
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
            s -= step * grad;
            step *= 0.85;
        }
        const double ftail = covering_objective(s, ens);
        if (ftail < fbest) {
            fbest = ftail;
            best = s;
        }
    }

    // Smoothed Newton continuation from the best point found. The softmax
    // weights amplify value rounding by 1/mu into the gradient, so below
    // mu ~ 1e-7 the gradient drowns in noise; the continuation therefore
    // only has to deliver a good warm start for the exact polish below.
    Vec3 s = best;
    const double diam = 4.0 * scale;  // bound on |s - optimum|
    const double mu_floor = 1e-7 * scale;
    const double grad_target = 1e-8;
    double grad_norm = 1e300;
    for (double mu = 1e-2 * scale;; mu *= 0.12) {
        mu = std::max(mu, mu_floor);
        detail::SmoothedObjective obj{ens, mu};
        double f;
        std::array<double, 3> g;
        std::array<std::array<double, 3>, 3> h;
        obj.value_grad_hess(s, f, g, h);
        for (int it = 0; it < 60 && iters < max_iter; ++it, ++iters) {
            grad_norm = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
            if (grad_norm <= grad_target) break;
            double lm = 1e-12 * (std::abs(h[0][0]) + std::abs(h[1][1]) + std::abs(h[2][2]) + 1.0);
            bool moved = false;
            for (int tries = 0; tries < 12 && !moved; ++tries) {
                auto hl = h;
                for (int i = 0; i < 3; ++i) hl[i][i] += lm;
                std::array<double, 3> d;
                if (detail::solve_sym3(hl, g, d)) {
                    double alpha = 1.0;
                    for (int bt = 0; bt < 8 && !moved; ++bt) {
                        const Vec3 cand{s.x - alpha * d[0], s.y - alpha * d[1],
                                        s.z - alpha * d[2]};
                        double fc;
                        std::array<double, 3> gc;
                        std::array<std::array<double, 3>, 3> hc;
                        obj.value_grad_hess(cand, fc, gc, hc);
                        const double gn =
                            std::sqrt(gc[0] * gc[0] + gc[1] * gc[1] + gc[2] * gc[2]);
                        // Near the minimum the value differences drown in
                        // rounding while the gradient is still informative;
                        // a clear gradient decrease is then accepted too.
                        if (fc < f || (fc <= f + 1e-12 * (std::abs(f) + 1.0) &&
                                       gn <= 0.9 * grad_norm)) {
                            s = cand;
                            f = fc;
                            g = gc;
                            h = hc;
                            moved = true;
                        }
                        alpha *= 0.5;
                    }
                }
                if (!moved) lm *= 10.0;
            }
            if (!moved) break;
        }
        grad_norm = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
        if (mu <= mu_floor || iters >= max_iter) break;
    }

    // Exact polish and certificate. Every state within `band` of the max is
    // band-active and its direction u_x = (s - r_x)/|s - r_x| is a
    // band-subgradient, so the min-norm point g of their convex hull gives
    // the rigorous bound f* >= f(s) - |g| diam - band. When the bound is
    // still too weak, g is either a genuine descent direction (exact line
    // search) or noise at the current resolution (sharpen the band). All
    // quantities are plain norms, so the loop works down to rounding level.
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double band = 1e-5 * scale;
    double certified = 1e300;
    for (int round = 0; round < 4000 && iters < max_iter; ++round, ++iters) {
        const double f = covering_objective(s, ens);
        std::vector<Vec3> dirs;
        for (const auto& ws : ens) {
            const Vec3 v = s - ws.op.r;
            const double d = norm(v);
            if (f - (ws.op.p + d) <= band) {
                dirs.push_back(d > 0.0 ? v / d : Vec3{});
            }
        }
        const auto mn = detail::min_norm_in_hull(dirs);
        certified = mn.norm * diam + band;
        if (certified <= 0.9 * tol) break;
        if (mn.norm * diam <= 0.25 * band) {
            band = std::max(0.25 * band, 1e-15 * scale);
            continue;
        }
        const Vec3 dir = mn.point / mn.norm;
        double lo = 0.0;
        double hi = scale;
        double x1 = hi - gr * (hi - lo);
        double x2 = lo + gr * (hi - lo);
        double f1 = covering_objective(s - x1 * dir, ens);
        double f2 = covering_objective(s - x2 * dir, ens);
        for (int ls = 0; ls < 120; ++ls) {
            if (f1 <= f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - gr * (hi - lo);
                f1 = covering_objective(s - x1 * dir, ens);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + gr * (hi - lo);
                f2 = covering_objective(s - x2 * dir, ens);
            }
        }
        const double alpha = 0.5 * (lo + hi);
        if (covering_objective(s - alpha * dir, ens) < f) {
            s -= alpha * dir;
        } else {
            band = std::max(0.25 * band, 1e-15 * scale);
        }
    }

    const double t = covering_objective(s, ens);
    if (!(certified <= tol) || iters >= max_iter) {
        throw ConvergenceFailureError("covering-ball minimizer could not certify tolerance " +
                                      std::to_string(tol));
    }
    return {t, s, iters};
}

}  // namespace qsd
