// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <exception>
#include <stdexcept>
#include <thread>
#include <vector>

#include "squidsim/noise.hpp"
#include "squidsim/potential.hpp"
#include "squidsim/propagate.hpp"
#include "squidsim/rng.hpp"
#include "squidsim/spectrum.hpp"

namespace squidsim {

struct InitialState {
    enum class Kind { energy, localized, qubit };
    Kind kind = Kind::energy;
    int index = 0;   ///< energy eigenstate, 0-based
    bool left = true;
    std::complex<double> c1{1.0, 0.0};  ///< coefficient on state1 (qubit kind)
    std::complex<double> c2{0.0, 0.0};  ///< coefficient on state2

    static InitialState energy_level(int k) {
        InitialState s;
        s.kind = Kind::energy;
        s.index = k;
        return s;
    }
    static InitialState localized(bool left_well) {
        InitialState s;
        s.kind = Kind::localized;
        s.left = left_well;
        return s;
    }
    static InitialState qubit(std::complex<double> c1, std::complex<double> c2) {
        InitialState s;
        s.kind = Kind::qubit;
        s.c1 = c1;
        s.c2 = c2;
        return s;
    }
};

inline Eigen::VectorXcd build_initial_state(const InitialState& s, const QubitFrame& frame) {
    switch (s.kind) {
        case InitialState::Kind::energy: {
            if (s.index < 0 || s.index >= frame.spectrum.states.cols())
                throw std::invalid_argument("build_initial_state: energy index out of range");
            return frame.spectrum.states.col(s.index).cast<std::complex<double>>();
        }
        case InitialState::Kind::localized:
            return (s.left ? frame.l_state : frame.r_state).cast<std::complex<double>>();
        case InitialState::Kind::qubit: {
            Eigen::VectorXcd psi = s.c1 * frame.state1.cast<std::complex<double>>() +
                                   s.c2 * frame.state2.cast<std::complex<double>>();
            const double nrm = psi.norm();
            if (nrm < 1e-12)
                throw std::invalid_argument("build_initial_state: zero qubit coefficients");
            return psi / nrm;
        }
    }
    throw std::invalid_argument("build_initial_state: unknown kind");
}

struct EnsembleConfig {
    std::int64_t n_realizations = 400;
    std::uint64_t master_seed = 1;
    HamiltonianParams hamiltonian;
    NoiseParams noise;  ///< n_steps is derived from total_time, not read
    InitialState initial_state;
    double total_time = 0.0;
    std::int64_t sample_every = 1;
    int n_basis = 128;
    int n_workers = 0;  ///< 0 picks hardware concurrency
    bool accumulate_full_rho = false;

    void validate() const {
        if (n_realizations < 1)
            throw std::invalid_argument("EnsembleConfig: n_realizations must be >= 1");
        if (!(total_time > 0.0))
            throw std::invalid_argument("EnsembleConfig: total_time must be > 0");
        if (sample_every < 1)
            throw std::invalid_argument("EnsembleConfig: sample_every must be >= 1");
        if (n_basis < 8) throw std::invalid_argument("EnsembleConfig: n_basis must be >= 8");
        hamiltonian.validate();
        NoiseParams np = noise;
        np.n_steps = 1;
        np.validate();
    }

    std::int64_t n_steps() const {
        const auto n = static_cast<std::int64_t>(std::llround(total_time / noise.dt));
        return std::max<std::int64_t>(n, 1);
    }
};

/// Ensemble average over realizations: times, the averaged 2x2 block in the
/// (L, R) basis, its polarization vector, leakage out of the qubit pair, and
/// the ground-level population 1/2 (1 + P_x) with its standard error.
struct PolarizationTrace {
    std::vector<double> times;
    std::vector<Eigen::Matrix2cd> rho2_avg;
    std::vector<Eigen::Vector3d> p_vec;
    std::vector<double> leakage_avg;
    std::vector<double> rho11_energy;
    std::vector<double> stderr_rho11;
    std::vector<std::uint64_t> seeds;
    std::int64_t n_realizations = 0;
    double max_leakage = 0.0;
    bool leakage_warning = false;  ///< any leakage_avg sample > 0.05
    std::vector<std::size_t> full_rho_indices;
    std::vector<Eigen::MatrixXcd> full_rho;  ///< diagnostic, opt-in
};

namespace detail {

inline std::vector<std::int64_t> sample_indices(std::int64_t n_steps, std::int64_t sample_every) {
    std::vector<std::int64_t> ks{0};
    for (std::int64_t k = sample_every; k < n_steps; k += sample_every) ks.push_back(k);
    ks.push_back(n_steps);
    return ks;
}

// at most nine snapshot slots for the full-density diagnostic
inline std::vector<std::size_t> full_rho_subset(std::size_t n_samples) {
    const std::size_t want = std::min<std::size_t>(n_samples, 9);
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < want; ++j) {
        const std::size_t i =
            want == 1 ? 0 : j * (n_samples - 1) / (want - 1);
        if (idx.empty() || idx.back() != i) idx.push_back(i);
    }
    return idx;
}

struct RealizationRecord {
    std::vector<Eigen::Matrix2cd> rho;
    std::vector<double> leakage;
    std::vector<double> x;  // per-sample 1/2 (1 + P_x)
    std::vector<Eigen::VectorXcd> snaps;
};

}  // namespace detail

/// Run N independent telegraph realizations and fold their qubit samples in
/// realization-index order, so the result is identical for any worker count.
inline PolarizationTrace run_ensemble(const EnsembleConfig& config) {
    config.validate();

    const BasisRep basis = build_basis(config.hamiltonian, config.n_basis);
    const QubitFrame frame = make_qubit_frame(config.hamiltonian, basis);
    const Eigen::VectorXcd psi0 = build_initial_state(config.initial_state, frame);

    NoiseParams np = config.noise;
    np.n_steps = config.n_steps();
    np.validate();
    const PropagatorCache cache = build_propagator_cache(basis, config.hamiltonian, np.delta, np.dt);

    const std::int64_t n = config.n_realizations;
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(n));
    for (std::int64_t a = 0; a < n; ++a)
        seeds[static_cast<std::size_t>(a)] = derive_seed(config.master_seed, static_cast<std::uint64_t>(a));

    const std::vector<std::int64_t> ks = detail::sample_indices(np.n_steps, config.sample_every);
    const std::size_t m = ks.size();
    const std::vector<std::size_t> full_idx =
        config.accumulate_full_rho ? detail::full_rho_subset(m) : std::vector<std::size_t>{};

    std::vector<detail::RealizationRecord> slots(static_cast<std::size_t>(n));
    std::atomic<std::int64_t> next{0};

    auto work = [&](std::exception_ptr& err) {
        try {
            for (;;) {
                const std::int64_t a = next.fetch_add(1, std::memory_order_relaxed);
                if (a >= n) break;
                const NoiseTrace tr = telegraph_trace(np, seeds[static_cast<std::size_t>(a)]);
                const SampledEvolution ev = evolve_realization(
                    cache, frame, psi0, tr, config.sample_every, config.accumulate_full_rho);
                if (ev.samples.size() != m)
                    throw std::logic_error("run_ensemble: sample count mismatch");
                auto& rec = slots[static_cast<std::size_t>(a)];
                rec.rho.reserve(m);
                rec.leakage.reserve(m);
                rec.x.reserve(m);
                for (const QubitSample& s : ev.samples) {
                    rec.rho.push_back(s.rho);
                    rec.leakage.push_back(s.leakage);
                    rec.x.push_back(0.5 * (1.0 + 2.0 * std::real(s.rho(0, 1))));
                }
                for (std::size_t i : full_idx) rec.snaps.push_back(ev.snapshots[i]);
            }
        } catch (...) {
            err = std::current_exception();
        }
    };

    int workers = config.n_workers > 0
                      ? config.n_workers
                      : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp<int>(workers, 1, static_cast<int>(std::min<std::int64_t>(n, 256)));

    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(workers));
    if (workers == 1) {
        work(errs[0]);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] { work(errs[static_cast<std::size_t>(w)]); });
        for (auto& th : pool) th.join();
    }
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);

    PolarizationTrace out;
    out.n_realizations = n;
    out.seeds = std::move(seeds);
    out.times.reserve(m);
    for (std::int64_t k : ks) out.times.push_back(static_cast<double>(k) * np.dt);
    out.rho2_avg.assign(m, Eigen::Matrix2cd::Zero());
    out.leakage_avg.assign(m, 0.0);
    out.rho11_energy.resize(m);
    out.stderr_rho11.resize(m);
    out.p_vec.resize(m);

    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < m; ++i) {
        double sum_x = 0.0, sum_x2 = 0.0;
        for (std::int64_t a = 0; a < n; ++a) {
            const auto& rec = slots[static_cast<std::size_t>(a)];
            out.rho2_avg[i] += rec.rho[i];
            out.leakage_avg[i] += rec.leakage[i];
            sum_x += rec.x[i];
            sum_x2 += rec.x[i] * rec.x[i];
        }
        out.rho2_avg[i] *= inv_n;
        out.leakage_avg[i] *= inv_n;
        out.p_vec[i] = polarization(out.rho2_avg[i]);
        out.rho11_energy[i] = 0.5 * (1.0 + out.p_vec[i].x());
        if (n > 1) {
            const double mean = sum_x * inv_n;
            const double var =
                std::max(0.0, (sum_x2 - static_cast<double>(n) * mean * mean) /
                                  static_cast<double>(n - 1));
            out.stderr_rho11[i] = std::sqrt(var * inv_n);
        } else {
            out.stderr_rho11[i] = 0.0;
        }
    }
    out.max_leakage = m ? *std::max_element(out.leakage_avg.begin(), out.leakage_avg.end()) : 0.0;
    out.leakage_warning = out.max_leakage > 0.05;

    if (config.accumulate_full_rho) {
        out.full_rho_indices = full_idx;
        out.full_rho.reserve(full_idx.size());
        for (std::size_t j = 0; j < full_idx.size(); ++j) {
            Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(basis.n_basis, basis.n_basis);
            for (std::int64_t a = 0; a < n; ++a) {
                const auto& v = slots[static_cast<std::size_t>(a)].snaps[j];
                acc.noalias() += v * v.adjoint();
            }
            out.full_rho.push_back(acc * inv_n);
        }
    }
    return out;
}

/// Purity of the renormalized qubit block, in [1/2, 1].
inline double purity(const PolarizationTrace& trace, std::size_t t_index) {
    const Eigen::Matrix2cd& r = trace.rho2_avg.at(t_index);
    const double tr = std::real(r.trace());
    if (!(tr > 0.0)) throw std::invalid_argument("purity: qubit block has no weight");
    const Eigen::Vector3d p = polarization(Eigen::Matrix2cd(r / tr));
    return 0.5 * (1.0 + p.squaredNorm());
}

}  // namespace squidsim
