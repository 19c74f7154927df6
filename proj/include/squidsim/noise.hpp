// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "squidsim/errors.hpp"
#include "squidsim/rng.hpp"

namespace squidsim {

/// Random telegraph flux noise: pulses of magnitude +-delta whose sign
/// flips at rate omega_c/2, giving autocorrelation delta^2 exp(-omega_c |t|)
/// and correlation integral delta^2 / omega_c.
struct NoiseParams {
    double delta = 0.0;     ///< pulse magnitude (flux units)
    double omega_c = 0.05;  ///< noise frequency (inverse time)
    double dt = 0.5;        ///< sampling step
    std::int64_t n_steps = 0;

    void validate() const {
        if (!(delta >= 0.0)) throw std::invalid_argument("NoiseParams: delta must be >= 0");
        if (!(omega_c > 0.0)) throw std::invalid_argument("NoiseParams: omega_c must be > 0");
        if (!(dt > 0.0)) throw std::invalid_argument("NoiseParams: dt must be > 0");
        if (omega_c * dt > 0.2)
            throw std::invalid_argument(
                "NoiseParams: omega_c * dt > 0.2; the grid does not resolve the noise "
                "correlation time, reduce dt");
        if (n_steps < 1) throw std::invalid_argument("NoiseParams: n_steps must be >= 1");
    }
};

struct NoiseTrace {
    NoiseParams params;
    std::vector<double> values;  ///< each entry in {+delta, -delta}, or 0 when delta = 0
    std::uint64_t seed = 0;
};

/// Sample one telegraph realization. Deterministic given (params, seed):
/// draw 0 picks the initial sign with equal probability, and each later draw
/// flips the sign with probability p = 1 - exp(-omega_c dt / 2).
inline NoiseTrace telegraph_trace(const NoiseParams& params, std::uint64_t seed) {
    params.validate();
    NoiseTrace trace;
    trace.params = params;
    trace.seed = seed;
    trace.values.assign(static_cast<std::size_t>(params.n_steps), 0.0);
    if (params.delta == 0.0) return trace;

    Rng gen(seed);
    const double p_flip = 1.0 - std::exp(-0.5 * params.omega_c * params.dt);
    double sign = uniform01(gen) < 0.5 ? 1.0 : -1.0;
    trace.values[0] = sign * params.delta;
    for (std::int64_t k = 1; k < params.n_steps; ++k) {
        if (uniform01(gen) < p_flip) sign = -sign;
        trace.values[static_cast<std::size_t>(k)] = sign * params.delta;
    }
    return trace;
}

struct AutocorrEstimate {
    double integral = 0.0;  ///< one-sided trapezoid of C(k dt), flux^2 * time
    int n_lags = 0;         ///< number of C(k) terms used, counting k = 0
    bool nonstationary = false;  ///< C never dropped below delta^2/100 within n/2 lags
};

/// Estimate the one-sided correlation integral of a trace:
///   dt * ( C(0)/2 + sum_{k>=1} C(k) ),  C(k) = mean_t v(t) v(t + k dt),
/// summing lags until C drops below delta^2/100 (or n/2 lags, flagged
/// nonstationary). For a calibrated telegraph trace this approaches
/// delta^2 / omega_c.
inline AutocorrEstimate autocorr_integral(const NoiseTrace& trace) {
    const auto n = static_cast<std::int64_t>(trace.values.size());
    const double min_len = 10.0 / (trace.params.omega_c * trace.params.dt);
    if (static_cast<double>(n) < min_len)
        throw TooShort("autocorr_integral: trace length " + std::to_string(n) +
                       " < 10/(omega_c dt) = " + std::to_string(min_len));

    const Eigen::Map<const Eigen::VectorXd> v(trace.values.data(), n);
    const double delta_eff = v.cwiseAbs().maxCoeff();
    AutocorrEstimate est;
    if (delta_eff == 0.0) return est;

    const double threshold = delta_eff * delta_eff / 100.0;
    const std::int64_t k_max = n / 2;
    const double c0 = v.squaredNorm() / static_cast<double>(n);
    double sum = 0.5 * c0;
    est.n_lags = 1;
    est.nonstationary = true;
    for (std::int64_t k = 1; k <= k_max; ++k) {
        const double ck = v.head(n - k).dot(v.tail(n - k)) / static_cast<double>(n - k);
        sum += ck;
        ++est.n_lags;
        if (ck < threshold) {
            est.nonstationary = false;
            break;
        }
    }
    est.integral = trace.params.dt * sum;
    return est;
}

/// Number of sign changes in a trace; Binomial(n-1, p_flip) for a telegraph
/// process.
inline std::int64_t count_flips(const NoiseTrace& trace) {
    std::int64_t flips = 0;
    for (std::size_t k = 1; k < trace.values.size(); ++k)
        if (trace.values[k] != trace.values[k - 1]) ++flips;
    return flips;
}

}  // namespace squidsim
