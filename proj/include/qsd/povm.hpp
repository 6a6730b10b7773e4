#pragma once

// Measurement extraction and verification. Once the optimal (t, s) is
// known, every usable outcome direction is pinned by a kernel condition:
// E^x can only be supported where (t, s) - rho_x vanishes, which for a
// tangent state is the ray along u_x = (r_x - s)/|r_x - s|. Outcome weights
// then solve the completeness conditions sum(mu) = 2, sum(mu u) = 0 with
// mu >= 0. The certificate re-checks feasibility, completeness,
// complementary slackness and the value match from scratch.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "analytic.hpp"
#include "bloch.hpp"
#include "errors.hpp"
#include "vec3.hpp"

namespace qsd {

struct PovmElement {
    std::string label;   // state this outcome guesses
    double weight = 0.0; // mu in E = mu/2 (I + u.sigma)
    Vec3 direction{};    // unit u
};

using Povm = std::vector<PovmElement>;

enum class StateClass { TrivialGuess, Guessable, NearlyGuessable, Unguessable };

inline const char* to_string(StateClass c) {
    switch (c) {
        case StateClass::TrivialGuess: return "trivial-guess";
        case StateClass::Guessable: return "guessable";
        case StateClass::NearlyGuessable: return "nearly-guessable";
        case StateClass::Unguessable: return "unguessable";
    }
    return "?";
}

struct KernelInfo {
    enum class Kind { None, Full, Ray } kind = Kind::None;
    Vec3 direction{};  // unit vector spanning the kernel ray (Ray only)
};

// Kernel of sigma - rho_x. Full means sigma equals the state (guess it
// outright); Ray means the state ball is tangent and only the projector
// along the returned direction can appear in its POVM element.
inline KernelInfo kernel_direction(const LagrangeResult& lag, const BlochOperator& op,
                                   double tol = 1e-7) {
    const double dp = lag.t - op.p;
    const Vec3 dr = lag.s - op.r;
    const double nr = norm(dr);
    if (std::abs(dp) <= tol && nr <= tol) return {KernelInfo::Kind::Full, {}};
    if (std::abs(dp - nr) <= tol && nr > tol) {
        return {KernelInfo::Kind::Ray, (-1.0 / nr) * dr};
    }
    return {KernelInfo::Kind::None, {}};
}

namespace detail {

inline Matrix2c mat_mul(const Matrix2c& a, const Matrix2c& b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

inline double frobenius(const Matrix2c& a) {
    double s = 0.0;
    for (const auto& e : a) s += std::norm(e);
    return std::sqrt(s);
}

// Visit index subsets of {0..n-1} of the given size in lexicographic
// order; f returns true to stop.
template <typename F>
bool for_each_subset(std::size_t n, std::size_t k, F&& f) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    if (k > n) return false;
    while (true) {
        if (f(idx)) return true;
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
        if (i == 0) return false;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

// Exact solve of the completeness system restricted to a support set.
// Returns the weights on the support if the system is solvable there with
// nonnegative weights.
inline std::optional<std::vector<double>> support_weights(const std::vector<Vec3>& dirs,
                                                          const std::vector<std::size_t>& sup) {
    const std::size_t k = sup.size();
    std::array<std::array<double, kMaxDim>, kMaxDim> a{};
    std::array<double, kMaxDim> b{2.0, 0.0, 0.0, 0.0};
    for (std::size_t c = 0; c < k; ++c) {
        const Vec3& u = dirs[sup[c]];
        a[0][c] = 1.0;
        a[1][c] = u.x;
        a[2][c] = u.y;
        a[3][c] = u.z;
    }
    const auto lin = solve_small(4, k, a, b);
    if (!lin.consistent) return std::nullopt;
    std::vector<double> mu(k);
    double comp_w = 0.0;
    Vec3 comp_u{};
    for (std::size_t c = 0; c < k; ++c) {
        if (lin.particular[c] < -1e-12) return std::nullopt;
        mu[c] = std::max(lin.particular[c], 0.0);
        comp_w += mu[c];
        comp_u += mu[c] * dirs[sup[c]];
    }
    if (std::abs(comp_w - 2.0) > 1e-9 || norm(comp_u) > 1e-9) return std::nullopt;
    return mu;
}

}  // namespace detail

// Nonnegative weights mu with sum(mu) = 2 and sum(mu u) = 0 on the given
// directions. Deterministic: supports are tried smallest first, in
// lexicographic order, and the first solvable one wins; directions outside
// that support get weight zero.
inline std::vector<double> solve_weights(const std::vector<Vec3>& dirs) {
    const std::size_t n = dirs.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 1; k <= std::min<std::size_t>(4, n); ++k) {
        bool found = detail::for_each_subset(n, k, [&](const std::vector<std::size_t>& sup) {
            const auto mu = detail::support_weights(dirs, sup);
            if (!mu) return false;
            for (std::size_t c = 0; c < k; ++c) out[sup[c]] = (*mu)[c];
            return true;
        });
        if (found) return out;
    }
    throw InfeasibleWeightsError("completeness conditions have no nonnegative solution");
}

// Optimal measurement. With a dominating state the identity splits into two
// antipodal projectors both guessing it. Otherwise each tangent state
// contributes its kernel-ray projector, weighted to satisfy completeness;
// the solver's active states are listed first so the weight search prefers
// them and extra tangent states end up with weight zero unless needed.
inline Povm optimal_povm(const LagrangeResult& lag, const Ensemble& ens,
                         double tang_tol = 1e-7) {
    for (std::size_t x = 0; x < ens.size(); ++x) {
        if (kernel_direction(lag, ens.op(x), tang_tol).kind == KernelInfo::Kind::Full) {
            return {{ens.label(x), 1.0, {0.0, 0.0, 1.0}},
                    {ens.label(x), 1.0, {0.0, 0.0, -1.0}}};
        }
    }
    std::vector<std::size_t> order;
    std::vector<Vec3> dirs;
    auto add = [&](std::size_t x) {
        if (std::find(order.begin(), order.end(), x) != order.end()) return;
        const auto ker = kernel_direction(lag, ens.op(x), tang_tol);
        if (ker.kind != KernelInfo::Kind::Ray) return;
        order.push_back(x);
        dirs.push_back(ker.direction);
    };
    for (std::size_t x : lag.active) add(x);
    for (std::size_t x = 0; x < ens.size(); ++x) add(x);
    if (dirs.empty()) {
        throw InfeasibleWeightsError("no tangent state to support a measurement");
    }
    const std::vector<double> mu = solve_weights(dirs);
    Povm povm;
    povm.reserve(order.size());
    for (std::size_t c = 0; c < order.size(); ++c) {
        povm.push_back({ens.label(order[c]), mu[c], dirs[c]});
    }
    return povm;
}

// Success probability of a measurement on an ensemble:
// sum over outcomes of mu/2 (p_x + u.r_x).
inline double guessing_probability(const Ensemble& ens, const Povm& povm,
                                   double tol = kDefaultTol) {
    double total_w = 0.0;
    Vec3 total_u{};
    double p = 0.0;
    for (const auto& el : povm) {
        const auto found = ens.find(el.label);
        if (!found) {
            throw ValidationError("POVM outcome label '" + el.label +
                                  "' does not name an ensemble state");
        }
        const std::size_t x = *found;
        if (el.weight < -tol) {
            throw ValidationError("POVM weights must be nonnegative");
        }
        if (std::abs(norm(el.direction) - 1.0) > 1e-6) {
            throw ValidationError("POVM directions must be unit vectors");
        }
        total_w += el.weight;
        total_u += el.weight * el.direction;
        p += 0.5 * el.weight * (ens.op(x).p + dot(el.direction, ens.op(x).r));
    }
    if (std::abs(total_w - 2.0) > tol || norm(total_u) > tol) {
        throw IncompletePovmError("POVM elements do not sum to the identity");
    }
    return p;
}

// Per-state taxonomy. A state is Unguessable when no optimal measurement
// can ever guess it, NearlyGuessable when its ball is tangent but every
// completeness-compatible weighting forces its weight to zero, Guessable
// when some optimal measurement guesses it with positive probability, and
// TrivialGuess when sigma equals the state itself.
inline std::vector<StateClass> classify(const LagrangeResult& lag, const Ensemble& ens,
                                        double tang_tol = 1e-7, double zero_tol = 1e-9) {
    const std::size_t n = ens.size();
    std::vector<StateClass> out(n, StateClass::Unguessable);
    std::vector<std::size_t> tangent;
    std::vector<Vec3> dirs;
    bool trivial = false;
    for (std::size_t x = 0; x < n; ++x) {
        const auto ker = kernel_direction(lag, ens.op(x), tang_tol);
        if (ker.kind == KernelInfo::Kind::Full) {
            out[x] = StateClass::TrivialGuess;
            trivial = true;
        } else if (ker.kind == KernelInfo::Kind::Ray) {
            tangent.push_back(x);
            dirs.push_back(ker.direction);
        }
    }
    if (trivial) {
        // The dominating state absorbs any remainder of the identity, so
        // every tangent state can be guessed with some positive weight.
        for (std::size_t x : tangent) out[x] = StateClass::Guessable;
        return out;
    }
    // Max weight each tangent state can take over all valid weightings: the
    // maximum of a linear functional over the completeness polytope, attained
    // at a basic solution, so scanning supports of size <= 4 is exact.
    std::vector<double> max_mu(tangent.size(), 0.0);
    bool any = false;
    const std::size_t m = tangent.size();
    for (std::size_t k = 1; k <= std::min<std::size_t>(4, m); ++k) {
        detail::for_each_subset(m, k, [&](const std::vector<std::size_t>& sup) {
            const auto mu = detail::support_weights(dirs, sup);
            if (mu) {
                any = true;
                for (std::size_t c = 0; c < k; ++c) {
                    max_mu[sup[c]] = std::max(max_mu[sup[c]], (*mu)[c]);
                }
            }
            return false;  // keep scanning, we need all vertices
        });
    }
    if (!any) {
        throw InfeasibleWeightsError("tangent directions admit no complete measurement");
    }
    for (std::size_t c = 0; c < m; ++c) {
        out[tangent[c]] =
            max_mu[c] > zero_tol ? StateClass::Guessable : StateClass::NearlyGuessable;
    }
    return out;
}

// Independent optimality certificate: (a) sigma - rho_x is PSD for every
// state, (b) the POVM sums to the identity, (c) every element annihilates
// its state's slack operator, (d) the measured success probability matches
// the trace of sigma. All residuals are reported; pass means all are within
// the tolerance.
struct CertificateReport {
    double feasibility = 0.0;         // worst PSD defect of sigma - rho_x
    double completeness_weight = 0.0; // |sum(mu) - 2|
    double completeness_vector = 0.0; // |sum(mu u)|
    double slackness = 0.0;           // worst Frobenius norm of E^x (sigma - rho_x)
    double gap = 0.0;                 // |success probability - t|
    double tolerance = 0.0;
    bool pass = false;
};

inline CertificateReport verify_certificate(const Ensemble& ens, const LagrangeResult& lag,
                                            const Povm& povm, double tol = kDefaultTol) {
    CertificateReport rep;
    rep.tolerance = tol;
    for (const auto& ws : ens) {
        const double dp = lag.t - ws.op.p;
        const double nr = norm(lag.s - ws.op.r);
        rep.feasibility = std::max({rep.feasibility, -dp, nr - dp});
    }
    rep.feasibility = std::max(rep.feasibility, 0.0);

    double total_w = 0.0;
    Vec3 total_u{};
    double prob = 0.0;
    for (const auto& el : povm) {
        const auto found = ens.find(el.label);
        if (!found) {
            throw ValidationError("POVM outcome label '" + el.label +
                                  "' does not name an ensemble state");
        }
        const std::size_t x = *found;
        total_w += el.weight;
        total_u += el.weight * el.direction;
        prob += 0.5 * el.weight * (ens.op(x).p + dot(el.direction, ens.op(x).r));

        const Matrix2c e = to_matrix({el.weight, el.weight * el.direction});
        const Matrix2c slack = to_matrix({lag.t - ens.op(x).p, lag.s - ens.op(x).r});
        rep.slackness = std::max(rep.slackness, detail::frobenius(detail::mat_mul(e, slack)));
    }
    rep.completeness_weight = std::abs(total_w - 2.0);
    rep.completeness_vector = norm(total_u);
    rep.gap = std::abs(prob - lag.t);
    rep.pass = rep.feasibility <= tol && rep.completeness_weight <= tol &&
               rep.completeness_vector <= tol && rep.slackness <= tol && rep.gap <= tol;
    return rep;
}

}  // namespace qsd
