#pragma once

// Error taxonomy shared by the whole library.  Numerical routines throw on
// hard failure; diagnostic routines (circle fits, horseshoe checks) report
// soft outcomes through their result structs instead.

#include <stdexcept>
#include <string>

namespace hetlab {

// Base for anything that went wrong while crunching numbers (as opposed to
// bad arguments, which use std::invalid_argument).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Newton or fixed-point iteration ran out of budget.
struct NonConvergence : NumericalError {
    using NumericalError::NumericalError;
};

// Trajectory norm blew past the divergence guard.
struct Divergence : NumericalError {
    using NumericalError::NumericalError;
};

// Adaptive step size collapsed below the representable floor.
struct StepUnderflow : NumericalError {
    using NumericalError::NumericalError;
};

// Equilibrium lacks the one-expanding/one-contracting structure needed for
// node rates.
struct NotASaddle : NumericalError {
    using NumericalError::NumericalError;
};

// Annulus-map input sits on the stable manifold (radial coordinate <= 0);
// it never reaches the exit wall.
struct OnStableManifold : std::domain_error {
    using std::domain_error::domain_error;
};

// Annulus-map input leaves the configured wall heights.
struct BlockOverflow : std::domain_error {
    using std::domain_error::domain_error;
};

// A window that must be monotone for the analysis is not.
struct NotMonotone : std::domain_error {
    using std::domain_error::domain_error;
};

// No monotone-decreasing forcing window exists (e.g. constant profile).
struct NoWindow : std::domain_error {
    using std::domain_error::domain_error;
};

// Requested object (equilibrium, orbit, ...) was not found.
struct NotFound : NumericalError {
    using NumericalError::NumericalError;
};

// A routine that builds on a verified construction was handed a failed
// verification report.
struct VerificationFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace hetlab
