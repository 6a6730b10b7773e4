#pragma once

// Single include pulling in the whole solver: Bloch-sphere state handling,
// covering-ball geometry, the closed-form case analysis, measurement
// synthesis with certificates, the independent numeric oracle, and problem
// and report serialization.

#include "analytic.hpp"
#include "bloch.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "oracle.hpp"
#include "poly.hpp"
#include "povm.hpp"
#include "problem_io.hpp"
#include "report.hpp"
#include "vec3.hpp"
