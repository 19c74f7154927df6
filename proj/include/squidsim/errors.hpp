// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace squidsim {

/// Potential has fewer than two stationary minima in the scanned window.
struct NoDoubleWell : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dense symmetric eigensolver did not converge.
struct ConvergenceFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// No mass value in the scan range met the calibration targets.
struct CalibrationFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Noise trace too short for the requested statistic.
struct TooShort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Propagator cache and noise trace were built with different time steps.
struct StepMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Nonlinear fit exceeded its iteration budget.
struct FitDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Damped-cosine fit needs at least four visible extrema.
struct TooFewOscillations : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Closed-form damped solution requested outside the underdamped regime.
struct Overdamped : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Config file missing or not parseable as JSON.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Config value rejected; message names the offending field path.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
    ValidationError(const std::string& field, const std::string& msg)
        : std::runtime_error(field + ": " + msg), field_path(field) {}
    std::string field_path;
};

}  // namespace squidsim
