#pragma once

// Closed-form solution of the discrimination problem by nested case
// analysis. The optimal (t, s) is tangent to every "active" state ball:
// |s - r_x| = t - p_x. Squaring two tangency equalities and subtracting
// turns each pair into a hyperplane in (t, s) space (the quadratic terms
// cancel), so an active set of k states pins (t, s) to an affine subspace
// intersected with the cone (t - p_ref)^2 = |s - r_ref|^2. That reduces
// every case to a polynomial of degree <= 2 in one parameter; squaring
// introduces spurious branches (t - p_x < 0), removed by sign filters and
// direct substitution into the unsquared equalities.
//
// The nesting: a candidate solved on a subset equals the global optimum as
// soon as it covers every remaining state (it is feasible globally and
// optimal on a subproblem, and the optimum is unique). Singles are checked
// first, then pairs, triplets and the full quadruple; an optimal strategy
// never needs more than four outcomes, so ensembles larger than four states
// reduce to a sweep over 4-subsets keeping the feasible candidate with the
// largest trace.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bloch.hpp"
#include "detail/linalg.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "vec3.hpp"

namespace qsd {

enum class SolveCase { Trivial, Pair, Triplet, Quadruple, Numeric };

enum class Method { Analytic, Numeric };

inline const char* to_string(SolveCase c) {
    switch (c) {
        case SolveCase::Trivial: return "trivial";
        case SolveCase::Pair: return "pair";
        case SolveCase::Triplet: return "triplet";
        case SolveCase::Quadruple: return "quadruple";
        case SolveCase::Numeric: return "numeric";
    }
    return "?";
}

// Optimal (t, s) plus which input states are tangent-and-active. `active`
// holds indices into the argument order of the call that produced the
// result; solve_ensemble returns ensemble indices.
struct LagrangeResult {
    double t = 0.0;
    Vec3 s{};
    std::vector<std::size_t> active;
    SolveCase kind = SolveCase::Trivial;
    int iterations = 0;
};

inline std::vector<std::string> active_labels(const LagrangeResult& res, const Ensemble& ens) {
    std::vector<std::string> out;
    out.reserve(res.active.size());
    for (std::size_t i : res.active) out.push_back(ens.label(i));
    return out;
}

// sigma = (t, s) covers rho iff sigma - rho is PSD.
inline bool covers(double t, const Vec3& s, const BlochOperator& rho, double tol = kDefaultTol) {
    return loewner_geq({t, s}, rho, tol);
}

// Some state dominates every other state: guess it without measuring.
inline std::optional<LagrangeResult> case1_trivial(const Ensemble& ens,
                                                   double tol = kDefaultTol) {
    for (std::size_t i = 0; i < ens.size(); ++i) {
        bool all = true;
        for (std::size_t j = 0; j < ens.size(); ++j) {
            if (!loewner_geq(ens.op(i), ens.op(j), tol)) {
                all = false;
                break;
            }
        }
        if (all) {
            return LagrangeResult{ens.op(i).p, ens.op(i).r, {i}, SolveCase::Trivial, 0};
        }
    }
    return std::nullopt;
}

// The scaled interior ball of a pair is a single point exactly when the two
// balls overlap in at most one point.
inline bool pair_interior_unique(const Ball& a, const Ball& b, double tol = kDefaultTol) {
    return norm(a.center - b.center) >= a.radius + b.radius - tol;
}

namespace detail {

struct RawCandidate {
    double t = 0.0;
    Vec3 s{};
};

// Smallest ball covering two balls, valid only when neither contains the
// other: t = (p_a + p_b + |r_a - r_b|)/2 with s on the center segment,
// tangent to both.
inline std::optional<RawCandidate> pair_candidate(const BlochOperator& a,
                                                  const BlochOperator& b, double tol) {
    const double d = norm(b.r - a.r);
    if (d <= std::abs(a.p - b.p) + tol) return std::nullopt;
    const double t = 0.5 * (a.p + b.p + d);
    const Vec3 s = a.r + ((t - a.p) / d) * (b.r - a.r);
    return RawCandidate{t, s};
}

// Real roots of A tau^2 + B tau + C with graceful degree fall-through.
// Slightly negative discriminants (rounding of a tangent intersection)
// clamp to a double root.
inline std::vector<double> tau_roots(double A, double B, double C) {
    const double mag = std::max({std::abs(A), std::abs(B), std::abs(C)});
    if (mag == 0.0) return {};
    if (std::abs(A) <= 1e-13 * mag) {
        if (std::abs(B) <= 1e-13 * mag) return {};
        return {-C / B};
    }
    const double disc = B * B - 4.0 * A * C;
    const double dscale = std::max(B * B, std::abs(4.0 * A * C));
    if (disc < -1e-10 * dscale) return {};
    if (disc <= 1e-14 * dscale) return {-B / (2.0 * A)};
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (B + (B >= 0.0 ? sq : -sq));
    return {q / A, C / q};
}

}  // namespace detail

// Smallest covering ball of two state balls with neither dominating: the
// center sits on the segment between the Bloch vectors, tangent to both.
inline LagrangeResult solve_pair(const BlochOperator& a, const BlochOperator& b,
                                 double tol = kDefaultTol) {
    const auto cand = detail::pair_candidate(a, b, tol);
    if (!cand) {
        throw DegeneratePairError(
            "one state dominates the other; the pair construction is undefined");
    }
    return {cand->t, cand->s, {0, 1}, SolveCase::Pair, 0};
}

// All three states tangent: two focal-difference conditions (|s - r_a| -
// |s - r_x| = p_x - p_a) linearize in (x, y, u = |s - r_a|) after one
// squaring each; intersecting the resulting line with the cone
// u^2 = x^2 + y^2 gives at most two candidates. Collinear centers cannot
// need all three states and reduce to the best pair.
inline LagrangeResult solve_triplet(const BlochOperator& a, const BlochOperator& b,
                                    const BlochOperator& c, double tol = kDefaultTol) {
    const std::array<const BlochOperator*, 3> st{&a, &b, &c};
    double scale = 1.0;
    for (const auto* s : st) scale = std::max(scale, norm(s->r) + s->p);

    const Vec3 ab = b.r - a.r;
    const Vec3 ac = c.r - a.r;
    const double nb = norm(ab);
    Vec3 e1{}, e2{};
    double h = 0.0;
    bool collinear = nb <= 1e-12 * scale;
    if (!collinear) {
        e1 = ab / nb;
        const Vec3 perp = ac - dot(ac, e1) * e1;
        h = norm(perp);
        if (h <= 1e-10 * std::max(nb, norm(ac))) {
            collinear = true;
        } else {
            e2 = perp / h;
        }
    }

    if (collinear) {
        // Best covering pair; for centers on a line one always covers.
        std::optional<LagrangeResult> best;
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = i + 1; j < 3; ++j) {
                const auto cand = detail::pair_candidate(*st[i], *st[j], tol);
                if (!cand) continue;
                const std::size_t k = 3 - i - j;
                if (!covers(cand->t, cand->s, *st[k], tol)) continue;
                if (!best || cand->t > best->t) {
                    best = LagrangeResult{cand->t, cand->s, {i, j}, SolveCase::Pair, 0};
                }
            }
        }
        if (best) return *best;
        throw NoRealCandidateError("collinear triplet without a covering pair");
    }

    const double c1 = dot(ac, e1);
    const double c2 = h;
    const double dab = b.p - a.p;
    const double dac = c.p - a.p;

    std::array<std::array<double, qsd::detail::kMaxDim>, qsd::detail::kMaxDim> rows{};
    std::array<double, qsd::detail::kMaxDim> rhs{};
    rows[0] = {nb, 0.0, -dab, 0.0};
    rhs[0] = 0.5 * (nb * nb - dab * dab);
    rows[1] = {c1, c2, -dac, 0.0};
    rhs[1] = 0.5 * (c1 * c1 + c2 * c2 - dac * dac);
    const auto lin = qsd::detail::solve_small(2, 3, rows, rhs);
    if (lin.rank < 2 || lin.null_dim < 1) {
        throw DegenerateConfigurationError("triplet tangency system is rank deficient");
    }

    const auto& v0 = lin.particular;
    const auto& w = lin.null_basis[0];
    const double A = w[0] * w[0] + w[1] * w[1] - w[2] * w[2];
    const double B = 2.0 * (v0[0] * w[0] + v0[1] * w[1] - v0[2] * w[2]);
    const double C = v0[0] * v0[0] + v0[1] * v0[1] - v0[2] * v0[2];

    const double ftol = 1e-9 * scale + tol;
    const double rtol = 1e-7 * (1.0 + scale);
    std::optional<LagrangeResult> best;
    for (double tau : detail::tau_roots(A, B, C)) {
        const double x = v0[0] + tau * w[0];
        const double y = v0[1] + tau * w[1];
        const double u = v0[2] + tau * w[2];
        // Branch signs: u = |s - r_a| >= 0 and every |s - r_x| = u - d_ax >= 0.
        if (u < -ftol || u - dab < -ftol || u - dac < -ftol) continue;
        const double t = a.p + u;
        const Vec3 s = a.r + x * e1 + y * e2;
        bool ok = true;
        for (const auto* sx : st) {
            if (std::abs(norm(s - sx->r) - (t - sx->p)) > rtol) ok = false;
        }
        if (!ok) continue;
        if (!best || t < best->t) {
            best = LagrangeResult{t, s, {0, 1, 2}, SolveCase::Triplet, 0};
        }
    }
    if (!best) {
        throw NoRealCandidateError("no real triplet candidate satisfies the branch signs");
    }
    return *best;
}

namespace detail {

// Candidates for "all four tangent" on the affine solution set of the
// radical hyperplanes, intersected with the reference cone.
inline void quadruple_line_candidates(const std::array<const BlochOperator*, 4>& st,
                                      const std::array<double, qsd::detail::kMaxDim>& v0,
                                      const std::array<double, qsd::detail::kMaxDim>& w,
                                      double ftol, double rtol, double pmax,
                                      std::vector<RawCandidate>& out) {
    // Coordinates are (t, sx, sy, sz); shift by (p_0, r_0) for the cone form.
    const BlochOperator& a = *st[0];
    const double v0t = v0[0] - a.p;
    const Vec3 v0s = Vec3{v0[1], v0[2], v0[3]} - a.r;
    const double wt = w[0];
    const Vec3 ws{w[1], w[2], w[3]};
    const double A = norm2(ws) - wt * wt;
    const double B = 2.0 * (dot(v0s, ws) - v0t * wt);
    const double C = norm2(v0s) - v0t * v0t;
    for (double tau : tau_roots(A, B, C)) {
        const double t = v0[0] + tau * w[0];
        const Vec3 s{v0[1] + tau * w[1], v0[2] + tau * w[2], v0[3] + tau * w[3]};
        if (t < pmax - ftol) continue;
        bool ok = true;
        for (const auto* sx : st) {
            if (std::abs(norm(s - sx->r) - (t - sx->p)) > rtol) ok = false;
        }
        if (ok) out.push_back({t, s});
    }
}

}  // namespace detail

// All four states tangent. Three radical hyperplanes in (t, s) generically
// leave a line whose cone intersection has at most two real points. A rank
// drop (coplanar centers with matching priors, e.g. a square of four
// equiprobable states) leaves a plane; the optimum then lies in the centers'
// plane by reflection symmetry, so the same reduction is re-run in 2D.
inline LagrangeResult solve_quadruple(const BlochOperator& a, const BlochOperator& b,
                                      const BlochOperator& c, const BlochOperator& d,
                                      double tol = kDefaultTol) {
    const std::array<const BlochOperator*, 4> st{&a, &b, &c, &d};
    double scale = 1.0;
    double pmax = 0.0;
    for (const auto* s : st) {
        scale = std::max(scale, norm(s->r) + s->p);
        pmax = std::max(pmax, s->p);
    }
    const double ftol = 1e-9 * scale + tol;
    const double rtol = 1e-7 * (1.0 + scale);

    std::array<std::array<double, qsd::detail::kMaxDim>, qsd::detail::kMaxDim> rows{};
    std::array<double, qsd::detail::kMaxDim> rhs{};
    for (std::size_t k = 1; k < 4; ++k) {
        const Vec3 dr = st[k]->r - a.r;
        const double dp = st[k]->p - a.p;
        rows[k - 1] = {-2.0 * dp, 2.0 * dr.x, 2.0 * dr.y, 2.0 * dr.z};
        rhs[k - 1] = norm2(st[k]->r) - norm2(a.r) - st[k]->p * st[k]->p + a.p * a.p;
    }
    const auto lin = qsd::detail::solve_small(3, 4, rows, rhs);

    std::vector<detail::RawCandidate> cands;
    if (lin.rank == 3 && lin.consistent) {
        detail::quadruple_line_candidates(st, lin.particular, lin.null_basis[0], ftol, rtol,
                                          pmax, cands);
    }

    // Degenerate (or near-degenerate) configurations: re-run in the centers'
    // plane. Requires the four centers to be coplanar.
    if (lin.rank <= 2 || cands.empty()) {
        Vec3 e1{}, e2{};
        double n1 = 0.0;
        for (std::size_t k = 1; k < 4 && n1 <= 1e-12 * scale; ++k) {
            e1 = st[k]->r - a.r;
            n1 = norm(e1);
        }
        if (n1 <= 1e-12 * scale) {
            throw DegenerateConfigurationError("quadruple centers coincide");
        }
        e1 = e1 / n1;
        double n2 = 0.0;
        for (std::size_t k = 1; k < 4; ++k) {
            const Vec3 perp = (st[k]->r - a.r) - dot(st[k]->r - a.r, e1) * e1;
            if (norm(perp) > n2) {
                n2 = norm(perp);
                e2 = perp;
            }
        }
        if (n2 <= 1e-10 * scale) {
            throw DegenerateConfigurationError("quadruple centers are collinear");
        }
        e2 = e2 / n2;
        bool coplanar = true;
        const Vec3 nrm = cross(e1, e2);
        for (const auto* sx : st) {
            if (std::abs(dot(sx->r - a.r, nrm)) > 1e-6 * scale) coplanar = false;
        }
        if (coplanar) {
            std::array<std::array<double, qsd::detail::kMaxDim>, qsd::detail::kMaxDim> prow{};
            std::array<double, qsd::detail::kMaxDim> prhs{};
            for (std::size_t k = 1; k < 4; ++k) {
                const Vec3 dr = st[k]->r - a.r;
                const double cx = dot(dr, e1);
                const double cy = dot(dr, e2);
                const double dp = st[k]->p - a.p;
                prow[k - 1] = {cx, cy, -dp, 0.0};
                prhs[k - 1] = 0.5 * (cx * cx + cy * cy - dp * dp);
            }
            const auto plin = qsd::detail::solve_small(3, 3, prow, prhs);
            std::vector<double> taus;
            std::array<double, qsd::detail::kMaxDim> w{};
            if (plin.rank == 2 && plin.consistent && plin.null_dim >= 1) {
                w = plin.null_basis[0];
                const auto& v0 = plin.particular;
                const double A = w[0] * w[0] + w[1] * w[1] - w[2] * w[2];
                const double B = 2.0 * (v0[0] * w[0] + v0[1] * w[1] - v0[2] * w[2]);
                const double C = v0[0] * v0[0] + v0[1] * v0[1] - v0[2] * v0[2];
                taus = detail::tau_roots(A, B, C);
            } else if (plin.rank == 3) {
                taus = {0.0};  // unique point; cone residual checked below
            }
            for (double tau : taus) {
                const double x = plin.particular[0] + tau * w[0];
                const double y = plin.particular[1] + tau * w[1];
                const double u = plin.particular[2] + tau * w[2];
                if (u < -ftol) continue;
                const double t = a.p + u;
                if (t < pmax - ftol) continue;
                const Vec3 s = a.r + x * e1 + y * e2;
                bool ok = true;
                for (const auto* sx : st) {
                    if (std::abs(norm(s - sx->r) - (t - sx->p)) > rtol) ok = false;
                }
                if (ok) cands.push_back({t, s});
            }
        }
    }

    if (cands.empty()) {
        if (lin.rank <= 1) {
            throw DegenerateConfigurationError("quadruple tangency system is rank deficient");
        }
        throw NoRealCandidateError("no real quadruple candidate satisfies the branch signs");
    }
    const detail::RawCandidate* best = &cands[0];
    for (const auto& cand : cands) {
        if (cand.t < best->t) best = &cand;
    }
    return {best->t, best->s, {0, 1, 2, 3}, SolveCase::Quadruple, 0};
}

// Nested procedure for up to four states: first feasible candidate over
// subset sizes 1, 2, 3, 4. A subset is only solved with all members assumed
// active when no smaller subset of it covers it, which makes every computed
// candidate that subset's true optimum; global feasibility then certifies
// global optimality.
inline LagrangeResult solve_four(const Ensemble& ens, double tol = kDefaultTol) {
    const std::size_t n = ens.size();
    if (n < 1 || n > 4) {
        throw ValidationError("solve_four requires between one and four states");
    }

    if (auto triv = case1_trivial(ens, tol)) return *triv;

    const auto feasible = [&](double t, const Vec3& s) {
        for (std::size_t x = 0; x < n; ++x) {
            if (!covers(t, s, ens.op(x), tol)) return false;
        }
        return true;
    };
    const auto dominates = [&](std::size_t i, std::size_t j) {
        return loewner_geq(ens.op(i), ens.op(j), tol);
    };

    std::optional<LagrangeResult> best;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dominates(i, j) || dominates(j, i)) continue;
            const auto cand = detail::pair_candidate(ens.op(i), ens.op(j), tol);
            if (!cand || !feasible(cand->t, cand->s)) continue;
            if (!best || cand->t > best->t) {
                best = LagrangeResult{cand->t, cand->s, {i, j}, SolveCase::Pair, 0};
            }
        }
    }
    if (best) return *best;

    for (std::size_t i = 0; i + 2 < n; ++i) {
        for (std::size_t j = i + 1; j + 1 < n; ++j) {
            for (std::size_t k = j + 1; k < n; ++k) {
                const std::array<std::size_t, 3> tri{i, j, k};
                // Skip subsets whose own optimum uses fewer states: those
                // candidates were already examined.
                bool reduced = false;
                for (std::size_t x : tri) {
                    for (std::size_t y : tri) {
                        if (x != y && dominates(x, y)) reduced = true;
                    }
                }
                for (std::size_t a = 0; a < 3 && !reduced; ++a) {
                    for (std::size_t b = a + 1; b < 3; ++b) {
                        const auto cand =
                            detail::pair_candidate(ens.op(tri[a]), ens.op(tri[b]), tol);
                        const std::size_t third = tri[3 - a - b];
                        if (cand && covers(cand->t, cand->s, ens.op(third), tol)) {
                            reduced = true;
                        }
                    }
                }
                if (reduced) continue;
                LagrangeResult cand;
                try {
                    cand = solve_triplet(ens.op(i), ens.op(j), ens.op(k), tol);
                } catch (const Error&) {
                    continue;  // numerically borderline subset; others decide
                }
                for (auto& idx : cand.active) idx = tri[idx];
                if (!feasible(cand.t, cand.s)) continue;
                if (!best || cand.t > best->t) best = cand;
            }
        }
    }
    if (best) return *best;

    if (n == 4) {
        LagrangeResult cand = solve_quadruple(ens.op(0), ens.op(1), ens.op(2), ens.op(3), tol);
        if (!feasible(cand.t, cand.s)) {
            throw InternalInconsistencyError("quadruple candidate is not feasible");
        }
        return cand;
    }
    throw InternalInconsistencyError("nested case analysis found no candidate");
}

// Tangent states at a given (t, s).
inline std::vector<std::size_t> tangent_states(const Ensemble& ens, double t, const Vec3& s,
                                               double tang_tol) {
    std::vector<std::size_t> out;
    for (std::size_t x = 0; x < ens.size(); ++x) {
        const double gap = (t - ens.op(x).p) - norm(s - ens.op(x).r);
        if (std::abs(gap) <= tang_tol) out.push_back(x);
    }
    return out;
}

// Full solver. Analytic: nested case analysis, sweeping 4-subsets when the
// ensemble is larger (any feasible subset optimum is the global optimum, and
// the feasible candidate with the largest trace is kept; feasible ties must
// agree). Numeric: iterative covering-ball minimizer, active set detected by
// tangency.
inline LagrangeResult solve_ensemble(const Ensemble& ens, Method method,
                                     double tol = kDefaultTol) {
    const std::size_t n = ens.size();
    if (method == Method::Numeric) {
        const MinBallResult mb = min_covering_ball(ens, tol);
        double scale = 1.0;
        for (const auto& ws : ens) scale = std::max(scale, norm(ws.op.r) + ws.op.p);
        LagrangeResult res{mb.t, mb.s,
                           tangent_states(ens, mb.t, mb.s, std::max(1e-7, 10.0 * tol) * scale),
                           SolveCase::Numeric, mb.iterations};
        return res;
    }

    if (n <= 4) {
        LagrangeResult res = solve_four(ens, tol);
        res.iterations = 1;
        return res;
    }

    std::optional<LagrangeResult> best;
    int solves = 0;
    std::vector<std::size_t> idx{0, 1, 2, 3};
    std::vector<LagrangeResult> feasible_cands;
    for (idx[0] = 0; idx[0] < n; ++idx[0]) {
        for (idx[1] = idx[0] + 1; idx[1] < n; ++idx[1]) {
            for (idx[2] = idx[1] + 1; idx[2] < n; ++idx[2]) {
                for (idx[3] = idx[2] + 1; idx[3] < n; ++idx[3]) {
                    LagrangeResult cand;
                    try {
                        cand = solve_four(ens.subset(idx), tol);
                    } catch (const Error&) {
                        continue;  // degenerate subset; another one carries the optimum
                    }
                    ++solves;
                    for (auto& a : cand.active) a = idx[a];
                    bool ok = true;
                    for (std::size_t x = 0; x < n; ++x) {
                        if (!covers(cand.t, cand.s, ens.op(x), tol)) ok = false;
                    }
                    if (!ok) continue;
                    feasible_cands.push_back(cand);
                    if (!best || cand.t > best->t) best = cand;
                }
            }
        }
    }
    if (!best) {
        throw InternalInconsistencyError("no feasible 4-subset candidate found");
    }
    // Every feasible subset optimum equals the global optimum; candidates
    // tied on trace must therefore agree on the operator itself.
    double scale = 1.0;
    for (const auto& ws : ens) scale = std::max(scale, norm(ws.op.r) + ws.op.p);
    const double t_band = 1e-8 + 10.0 * tol;
    const double s_band = (1e-6 + 1e3 * tol) * scale;
    for (const auto& cand : feasible_cands) {
        if (best->t - cand.t <= t_band && norm(cand.s - best->s) > s_band) {
            throw InternalInconsistencyError(
                "tied maximal-trace subset candidates disagree on the optimal operator");
        }
    }
    best->iterations = solves;
    return *best;
}

}  // namespace qsd
