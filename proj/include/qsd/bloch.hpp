#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "vec3.hpp"

namespace qsd {

// Default tolerance for PSD / Hermiticity / feasibility checks. Every check
// takes the tolerance as a parameter; this is only the default value.
inline constexpr double kDefaultTol = 1e-9;

// Hermitian 2x2 operator in Bloch form: A = (p*I + r . sigma) / 2 with
// p = Tr A and r = Tr(A sigma_vec), sigma_vec the standard Pauli triple
// (sigma_x, sigma_y, sigma_z). Sub-normalized operators (p != 1) are
// first-class; a prior-weighted state q_x * rho_x is stored directly as one
// of these.
struct BlochOperator {
    double p = 0.0;
    Vec3 r{};
};

inline BlochOperator operator+(const BlochOperator& a, const BlochOperator& b) {
    return {a.p + b.p, a.r + b.r};
}
inline BlochOperator operator-(const BlochOperator& a, const BlochOperator& b) {
    return {a.p - b.p, a.r - b.r};
}
inline BlochOperator operator*(double c, const BlochOperator& a) { return {c * a.p, c * a.r}; }

// Row-major 2x2 complex matrix: {a11, a12, a21, a22}.
using Matrix2c = std::array<std::complex<double>, 4>;

// Largest |A - A^dagger| entry; zero exactly when A is Hermitian.
inline double hermiticity_defect(const Matrix2c& m) {
    double d = std::abs(m[0].imag());
    d = std::max(d, std::abs(m[3].imag()));
    d = std::max(d, std::abs(m[1] - std::conj(m[2])));
    return d;
}

// Bloch parametrization of a Hermitian matrix. Throws NonHermitianError when
// the anti-Hermitian part exceeds tol.
inline BlochOperator from_matrix(const Matrix2c& m, double tol = kDefaultTol) {
    if (!(hermiticity_defect(m) <= tol)) {
        throw NonHermitianError("matrix is not Hermitian within tolerance");
    }
    BlochOperator op;
    op.p = m[0].real() + m[3].real();
    op.r = {2.0 * m[1].real(), 2.0 * m[2].imag(), m[0].real() - m[3].real()};
    return op;
}

inline Matrix2c to_matrix(const BlochOperator& op) {
    const std::complex<double> i(0.0, 1.0);
    return {0.5 * std::complex<double>(op.p + op.r.z),
            0.5 * (op.r.x - i * op.r.y),
            0.5 * (op.r.x + i * op.r.y),
            0.5 * std::complex<double>(op.p - op.r.z)};
}

// PSD test in Bloch form: both eigenvalues (p +- |r|)/2 are nonnegative
// exactly when p >= 0 and |r| <= p.
inline bool is_psd(const BlochOperator& op, double tol = kDefaultTol) {
    return op.p >= -tol && norm(op.r) <= op.p + tol;
}

// Loewner order test: sigma >= rho iff sigma - rho is PSD.
inline bool loewner_geq(const BlochOperator& sigma, const BlochOperator& rho,
                        double tol = kDefaultTol) {
    return is_psd(sigma - rho, tol);
}

struct WeightedState {
    std::string label;
    BlochOperator op;  // prior-weighted: q_x * rho_x, so p = q_x for normalized rho_x
};

// Immutable, validated collection of prior-weighted states. from_states
// enforces the full problem invariants; from_states_unnormalized skips the
// sum-to-one check so that sub-ensembles (conditioned subproblems, state
// removal experiments) can reuse the same type. The solvers never rely on
// the priors summing to one.
class Ensemble {
  public:
    static Ensemble from_states(std::vector<WeightedState> states, double tol = kDefaultTol) {
        validate_members(states, tol);
        double sum = 0.0;
        for (const auto& s : states) sum += s.op.p;
        if (!(std::abs(sum - 1.0) <= tol)) {
            throw ValidationError("ensemble priors must sum to 1 (got " + std::to_string(sum) +
                                  ")");
        }
        return Ensemble(std::move(states));
    }

    static Ensemble from_states_unnormalized(std::vector<WeightedState> states,
                                             double tol = kDefaultTol) {
        validate_members(states, tol);
        return Ensemble(std::move(states));
    }

    std::size_t size() const { return states_.size(); }
    const WeightedState& operator[](std::size_t i) const { return states_[i]; }
    const std::string& label(std::size_t i) const { return states_[i].label; }
    const BlochOperator& op(std::size_t i) const { return states_[i].op; }
    auto begin() const { return states_.begin(); }
    auto end() const { return states_.end(); }

    std::optional<std::size_t> find(const std::string& label) const {
        for (std::size_t i = 0; i < states_.size(); ++i) {
            if (states_[i].label == label) return i;
        }
        return std::nullopt;
    }

    std::size_t max_prior_index() const {
        std::size_t best = 0;
        for (std::size_t i = 1; i < states_.size(); ++i) {
            if (states_[i].op.p > states_[best].op.p) best = i;
        }
        return best;
    }
    double max_prior() const { return states_[max_prior_index()].op.p; }

    // Sub-ensemble with the original labels; priors are left as-is.
    Ensemble subset(const std::vector<std::size_t>& indices) const {
        std::vector<WeightedState> sub;
        sub.reserve(indices.size());
        for (std::size_t i : indices) sub.push_back(states_[i]);
        return Ensemble(std::move(sub));
    }

  private:
    explicit Ensemble(std::vector<WeightedState> states) : states_(std::move(states)) {}

    static void validate_members(const std::vector<WeightedState>& states, double tol) {
        if (states.empty()) {
            throw ValidationError("ensemble must contain at least one state");
        }
        for (std::size_t i = 0; i < states.size(); ++i) {
            const auto& s = states[i];
            if (s.label.empty()) {
                throw ValidationError("state labels must be nonempty");
            }
            if (!std::isfinite(s.op.p) || !finite(s.op.r)) {
                throw ValidationError("state '" + s.label + "' has non-finite components");
            }
            if (!is_psd(s.op, tol)) {
                throw ValidationError("state '" + s.label +
                                      "' is not positive semidefinite (needs p >= 0, |r| <= p)");
            }
            for (std::size_t j = i + 1; j < states.size(); ++j) {
                if (states[j].label == s.label) {
                    throw ValidationError("duplicate state label '" + s.label + "'");
                }
            }
        }
    }

    std::vector<WeightedState> states_;
};

}  // namespace qsd
