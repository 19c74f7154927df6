// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "squidsim/errors.hpp"
#include "squidsim/noise.hpp"
#include "squidsim/potential.hpp"
#include "squidsim/spectrum.hpp"

namespace squidsim {

/// Exact one-step propagator exp(-i H dt) from the eigendecomposition of H.
inline Eigen::MatrixXcd build_propagator(const Eigen::MatrixXd& h, double dt) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success)
        throw ConvergenceFailure("build_propagator: eigensolve failed");
    const auto& w = es.eigenvectors();
    Eigen::VectorXcd phases(h.rows());
    for (Eigen::Index i = 0; i < h.rows(); ++i)
        phases[i] = std::exp(std::complex<double>(0.0, -es.eigenvalues()[i] * dt));
    return (w.cast<std::complex<double>>() * phases.asDiagonal()) *
           w.transpose().cast<std::complex<double>>();
}

/// The telegraph noise takes exactly two values around the base flux, so a
/// whole realization needs only two exact propagators. This replaces generic
/// time stepping with one unitary application per step.
struct PropagatorCache {
    Eigen::MatrixXcd u_plus;   ///< exp(-i H(phi_ext + delta) dt)
    Eigen::MatrixXcd u_minus;  ///< exp(-i H(phi_ext - delta) dt)
    Eigen::MatrixXcd u_zero;   ///< exp(-i H(phi_ext) dt)
    double dt = 0.0;
    double delta = 0.0;
};

inline PropagatorCache build_propagator_cache(const BasisRep& basis, const HamiltonianParams& p,
                                              double delta, double dt) {
    PropagatorCache c;
    c.dt = dt;
    c.delta = delta;
    c.u_zero = build_propagator(build_hamiltonian(basis, p, p.phi_ext), dt);
    if (delta != 0.0) {
        c.u_plus = build_propagator(build_hamiltonian(basis, p, p.phi_ext + delta), dt);
        c.u_minus = build_propagator(build_hamiltonian(basis, p, p.phi_ext - delta), dt);
    } else {
        c.u_plus = c.u_zero;
        c.u_minus = c.u_zero;
    }
    return c;
}

/// Max deviation of U from unitarity, max |(U^dag U - I)_ij|.
inline double unitarity_defect(const Eigen::MatrixXcd& u) {
    return (u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols()))
        .cwiseAbs()
        .maxCoeff();
}

/// Qubit-frame samples of one evolution, plus the full final state and
/// optional intermediate snapshots.
struct SampledEvolution {
    std::vector<double> times;
    std::vector<QubitSample> samples;
    std::vector<Eigen::VectorXcd> snapshots;  ///< filled only when requested
    Eigen::VectorXcd final_state;
    double final_norm = 1.0;
};

/// Evolve psi0 through one noise realization, applying the cached +delta or
/// -delta propagator per step and projecting onto the qubit frame at step 0,
/// every sample_every steps, and at the final step.
inline SampledEvolution evolve_realization(const PropagatorCache& cache, const QubitFrame& frame,
                                           const Eigen::VectorXcd& psi0, const NoiseTrace& trace,
                                           std::int64_t sample_every, bool keep_snapshots = false) {
    if (trace.params.dt != cache.dt)
        throw StepMismatch("evolve_realization: trace dt != propagator dt");
    if (sample_every < 1) throw std::invalid_argument("evolve_realization: sample_every >= 1");
    if (std::abs(psi0.norm() - 1.0) > 1e-8)
        throw std::invalid_argument("evolve_realization: psi0 is not normalized");

    const auto n_steps = static_cast<std::int64_t>(trace.values.size());
    SampledEvolution out;
    out.times.reserve(static_cast<std::size_t>(n_steps / sample_every + 2));
    out.samples.reserve(out.times.capacity());

    Eigen::VectorXcd psi = psi0, tmp(psi0.size());
    auto record = [&](std::int64_t k) {
        out.times.push_back(static_cast<double>(k) * cache.dt);
        out.samples.push_back(project_to_qubit(psi, frame));
        if (keep_snapshots) out.snapshots.push_back(psi);
    };

    record(0);
    for (std::int64_t k = 1; k <= n_steps; ++k) {
        const double v = trace.values[static_cast<std::size_t>(k - 1)];
        const Eigen::MatrixXcd& u =
            v > 0.0 ? cache.u_plus : (v < 0.0 ? cache.u_minus : cache.u_zero);
        tmp.noalias() = u * psi;
        psi.swap(tmp);
        if (k % sample_every == 0 || k == n_steps) record(k);
    }
    out.final_state = psi;
    out.final_norm = psi.norm();
    return out;
}

/// Noiseless evolution under a piecewise-constant phi_ext schedule of
/// (value, duration) segments, sampled in the symmetric-point qubit frame.
/// One dt-step propagator is cached per distinct value; a fractional segment
/// leftover gets an exact propagator of its own.
inline SampledEvolution evolve_schedule(const HamiltonianParams& params, const BasisRep& basis,
                                        const std::vector<std::pair<double, double>>& schedule,
                                        const Eigen::VectorXcd& psi0, double dt = 0.5,
                                        std::int64_t sample_every = 1,
                                        bool keep_snapshots = false) {
    if (!(dt > 0.0)) throw std::invalid_argument("evolve_schedule: dt must be > 0");
    if (sample_every < 1) throw std::invalid_argument("evolve_schedule: sample_every >= 1");
    if (std::abs(psi0.norm() - 1.0) > 1e-8)
        throw std::invalid_argument("evolve_schedule: psi0 is not normalized");
    for (const auto& seg : schedule)
        if (!(seg.second > 0.0))
            throw std::invalid_argument("evolve_schedule: segment durations must be > 0");

    HamiltonianParams sym = params;
    sym.phi_ext = 0.0;
    const QubitFrame frame = make_qubit_frame(sym, basis);

    std::map<double, Eigen::MatrixXcd> step_props;
    auto step_prop = [&](double x) -> const Eigen::MatrixXcd& {
        auto it = step_props.find(x);
        if (it == step_props.end())
            it = step_props.emplace(x, build_propagator(build_hamiltonian(basis, params, x), dt))
                     .first;
        return it->second;
    };

    SampledEvolution out;
    Eigen::VectorXcd psi = psi0, tmp(psi0.size());
    std::int64_t k = 0;       // whole dt steps taken
    double extra = 0.0;       // accumulated fractional-segment time
    bool recorded = false;

    auto record = [&] {
        out.times.push_back(static_cast<double>(k) * dt + extra);
        out.samples.push_back(project_to_qubit(psi, frame));
        if (keep_snapshots) out.snapshots.push_back(psi);
        recorded = true;
    };

    record();
    for (const auto& [x, duration] : schedule) {
        const auto n_whole = static_cast<std::int64_t>(std::floor(duration / dt + 1e-12));
        const double remainder = duration - static_cast<double>(n_whole) * dt;
        const Eigen::MatrixXcd& u = step_prop(x);
        for (std::int64_t i = 0; i < n_whole; ++i) {
            tmp.noalias() = u * psi;
            psi.swap(tmp);
            ++k;
            recorded = false;
            if (k % sample_every == 0) record();
        }
        if (remainder > 1e-12 * dt) {
            const Eigen::MatrixXcd ur =
                build_propagator(build_hamiltonian(basis, params, x), remainder);
            tmp.noalias() = ur * psi;
            psi.swap(tmp);
            extra += remainder;
            recorded = false;
        }
        if (!recorded) record();
    }
    out.final_state = psi;
    out.final_norm = psi.norm();
    return out;
}

}  // namespace squidsim
