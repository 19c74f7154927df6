// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>

#include <squidsim/errors.hpp>
#include <squidsim/noise.hpp>

using namespace squidsim;
using Catch::Approx;

namespace {
NoiseParams paper_noise(std::int64_t n) {
    NoiseParams p;
    p.delta = 0.00032;
    p.omega_c = 0.05;
    p.dt = 0.5;
    p.n_steps = n;
    return p;
}
}  // namespace

TEST_CASE("zero amplitude gives a silent trace", "[noise]") {
    NoiseParams p = paper_noise(1000);
    p.delta = 0.0;
    const NoiseTrace t = telegraph_trace(p, 42);
    for (double v : t.values) CHECK(v == 0.0);
    CHECK(count_flips(t) == 0);
    CHECK(autocorr_integral(t).integral == 0.0);
}

TEST_CASE("trace values are two-sided and seed-stable", "[noise]") {
    const NoiseParams p = paper_noise(5000);
    const NoiseTrace a = telegraph_trace(p, 7);
    const NoiseTrace b = telegraph_trace(p, 7);
    const NoiseTrace c = telegraph_trace(p, 8);
    REQUIRE(a.values.size() == 5000);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
    for (double v : a.values) CHECK(std::abs(v) == p.delta);
}

TEST_CASE("grid must resolve the correlation time", "[noise]") {
    NoiseParams p = paper_noise(100);
    p.dt = 5.0;  // omega_c dt = 0.25
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("sample mean is consistent with a zero-mean process", "[noise]") {
    const NoiseParams p = paper_noise(1000000);
    const NoiseTrace t = telegraph_trace(p, 11);
    double mean = 0.0;
    for (double v : t.values) mean += v;
    mean /= static_cast<double>(t.values.size());
    const double bound =
        5.0 * p.delta / std::sqrt(static_cast<double>(p.n_steps) * p.omega_c * p.dt);
    CHECK(std::abs(mean) <= bound);
}

TEST_CASE("correlation integral calibrates to delta^2 / omega_c", "[noise]") {
    const NoiseParams p = paper_noise(1000000);
    const NoiseTrace t = telegraph_trace(p, 11);
    const AutocorrEstimate est = autocorr_integral(t);
    CHECK_FALSE(est.nonstationary);
    CHECK(est.integral == Approx(p.delta * p.delta / p.omega_c).epsilon(0.10));
}

TEST_CASE("flip count follows the binomial expectation", "[noise]") {
    const NoiseParams p = paper_noise(1000000);
    const NoiseTrace t = telegraph_trace(p, 11);
    const double p_flip = 1.0 - std::exp(-0.5 * p.omega_c * p.dt);
    const double mean = static_cast<double>(p.n_steps - 1) * p_flip;
    const double sd = std::sqrt(mean * (1.0 - p_flip));
    CHECK(std::abs(static_cast<double>(count_flips(t)) - mean) <= 5.0 * sd);
}

TEST_CASE("constant trace integrates to the degenerate closed form", "[noise]") {
    NoiseTrace t;
    t.params = paper_noise(1000);
    t.values.assign(1000, t.params.delta);
    const AutocorrEstimate est = autocorr_integral(t);
    CHECK(est.nonstationary);
    const double expect =
        t.params.dt * t.params.delta * t.params.delta * (est.n_lags - 0.5);
    CHECK(est.integral == Approx(expect).epsilon(1e-12));
    CHECK(est.n_lags == 501);
}

TEST_CASE("correlation estimate needs a long enough trace", "[noise]") {
    const NoiseParams p = paper_noise(100);  // below 10/(omega_c dt) = 400
    const NoiseTrace t = telegraph_trace(p, 3);
    CHECK_THROWS_AS(autocorr_integral(t), TooShort);
}
