#pragma once

#include <stdexcept>
#include <string>

namespace qsd {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input matrix is not Hermitian within tolerance.
struct NonHermitianError : Error {
    using Error::Error;
};

// Malformed ensemble, problem file or POVM description.
struct ValidationError : Error {
    using Error::Error;
};

// Leading polynomial coefficient is (numerically) zero; caller must reduce
// the degree instead.
struct DegenerateLeadingCoefficientError : Error {
    using Error::Error;
};

// solve_pair called with one operator dominating the other.
struct DegeneratePairError : Error {
    using Error::Error;
};

// An equal-distance system has no real solution compatible with the branch
// signs. Signals an inconsistent call into the case solvers.
struct NoRealCandidateError : Error {
    using Error::Error;
};

// Center configuration too degenerate for the requested case solver.
struct DegenerateConfigurationError : Error {
    using Error::Error;
};

// Iterative minimizer exhausted its budget before certifying the tolerance.
struct ConvergenceFailureError : Error {
    using Error::Error;
};

// No nonnegative weight assignment completes the measurement.
struct InfeasibleWeightsError : Error {
    using Error::Error;
};

// POVM elements do not sum to the identity within tolerance.
struct IncompletePovmError : Error {
    using Error::Error;
};

// Two redundant computations that must agree did not. Indicates a bug, not
// a bad input.
struct InternalInconsistencyError : Error {
    using Error::Error;
};

}  // namespace qsd
