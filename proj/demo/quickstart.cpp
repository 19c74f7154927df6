// SPDX-License-Identifier: Apache-2.0
//
// Minimal end-to-end walk: build the double well, inspect the qubit frame,
// run a small noisy ensemble, and compare the fitted decay rate with the
// closed-form prediction.

#include <iostream>

#include <squidsim/squidsim.hpp>

int main() {
    using namespace squidsim;

    HamiltonianParams p;  // committed calibration
    const BasisRep basis = build_basis(p, 96);
    const QubitFrame frame = make_qubit_frame(p, basis);

    std::cout << "double well: phi_c = " << frame.phi_c << ", splitting V_x = " << frame.v_x
              << ", isolation = " << frame.isolation << "\n";

    NoiseParams noise;
    noise.delta = 0.00032;
    noise.omega_c = 0.05;
    noise.dt = 0.5;

    const double d_pred = predict_D(p.v0 * frame.phi_c, noise.delta, noise.omega_c);
    std::cout << "predicted dephasing rate D = " << d_pred << "\n";

    EnsembleConfig cfg;
    cfg.hamiltonian = p;
    cfg.noise = noise;
    cfg.n_basis = 96;
    cfg.n_realizations = 60;  // small on purpose; the CLI default is 400
    cfg.total_time = 3.0 / d_pred;
    cfg.sample_every = 16;
    cfg.initial_state = InitialState::energy_level(0);

    std::cout << "running " << cfg.n_realizations << " realizations...\n";
    const PolarizationTrace trace = run_ensemble(cfg);

    const FitResult fit = fit_exponential(trace.times, trace.rho11_energy);
    std::cout << "fitted D = " << fit.params.at("D") << " (converged: " << fit.converged
              << ", max leakage " << trace.max_leakage << ")\n";
    std::cout << "ratio fitted/predicted = " << fit.params.at("D") / d_pred << "\n";
    return 0;
}
