// SPDX-License-Identifier: Apache-2.0
//
// Single entry point: spectrum, calibrate, noise, ensemble, bloch, predict-d,
// fit, and the reproduce-fig2 / reproduce-fig3 experiment compositions.
// Exit codes: 0 ok, 1 usage or config, 2 numerical failure, 3 tolerance
// failure (reproduce-* only).

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <squidsim/squidsim.hpp>

namespace fs = std::filesystem;
using namespace squidsim;

namespace {

struct Common {
    std::string config_path;
    std::string output_dir;
    int workers = 0;
};

void add_common(CLI::App* cmd, Common& c, bool with_workers = false) {
    cmd->add_option("--config", c.config_path, "JSON config (committed defaults when absent)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--output-dir", c.output_dir,
                    "output directory (overrides SQUIDSIM_OUTPUT_DIR and config)");
    if (with_workers)
        cmd->add_option("--workers", c.workers, "worker threads, 0 = hardware concurrency");
}

RunConfig load_or_default(const Common& c) {
    return c.config_path.empty() ? RunConfig{} : load_config(c.config_path);
}

fs::path resolve_output_dir(const Common& c, const RunConfig& cfg) {
    if (!c.output_dir.empty()) return c.output_dir;
    if (const char* env = std::getenv("SQUIDSIM_OUTPUT_DIR"); env && *env) return env;
    return cfg.output_directory;
}

struct Workbench {
    RunConfig cfg;
    BasisRep basis;
    QubitFrame frame;
    double d_pred = 0.0;
};

Workbench make_workbench(RunConfig cfg) {
    Workbench w{std::move(cfg), {}, {}, 0.0};
    w.basis = build_basis(w.cfg.hamiltonian, w.cfg.n_basis);
    w.frame = make_qubit_frame(w.cfg.hamiltonian, w.basis);
    w.d_pred = predict_D(w.cfg.hamiltonian.v0 * w.frame.phi_c, w.cfg.noise.delta,
                         w.cfg.noise.omega_c);
    return w;
}

PolarizationTrace run_and_write(const Workbench& w, const ResolvedTimes& t, int workers,
                                bool full_rho, const fs::path& dir, const std::string& stem) {
    const EnsembleConfig ec = to_ensemble_config(w.cfg, t, workers, full_rho);
    const PolarizationTrace tr = run_ensemble(ec);
    fs::create_directories(dir);
    write_csv_file((dir / (stem + ".csv")).string(), ensemble_table(tr));
    write_json_file((dir / (stem + ".json")).string(),
                    ensemble_sidecar(w.cfg, t, w.frame, w.d_pred, tr));
    if (tr.leakage_warning)
        std::cerr << "warning: leakage reached " << tr.max_leakage
                  << "; qubit projection is losing weight\n";
    return tr;
}

void append_check(ComparisonReport& rep, CheckRow row) {
    rep.checks.push_back(std::move(row));
    rep.all_pass = true;
    for (const auto& c : rep.checks) rep.all_pass = rep.all_pass && c.pass;
}

int finish_report(const ComparisonReport& rep, const fs::path& dir) {
    fs::create_directories(dir);
    write_json_file((dir / "report.json").string(), rep.to_json());
    write_text_file((dir / "report.txt").string(), rep.to_text());
    std::cout << rep.to_text();
    return rep.all_pass ? 0 : 3;
}

int cmd_spectrum(const Common& co, int levels) {
    const RunConfig cfg = load_or_default(co);
    const fs::path dir = resolve_output_dir(co, cfg);
    const BasisRep basis = build_basis(cfg.hamiltonian, cfg.n_basis);
    const int k = std::min(levels, cfg.n_basis);
    const SpectrumResult spec = eigensystem(basis.h_matrix, k);

    fs::create_directories(dir);
    const fs::path out = dir / "spectrum.csv";
    write_csv_file(out.string(), spectrum_table(spec.energies));

    std::cout << "levels at phi_ext = " << cfg.hamiltonian.phi_ext << ":\n";
    for (Eigen::Index i = 0; i < spec.energies.size(); ++i)
        std::cout << "  E" << i + 1 << " = " << format_g17(spec.energies[i]) << "\n";
    if (cfg.hamiltonian.phi_ext == 0.0) {
        const QubitFrame f = make_qubit_frame(cfg.hamiltonian, basis);
        std::cout << "v_x = " << f.v_x << "  isolation = " << f.isolation
                  << "  phi_c = " << f.phi_c << "\n";
        if (f.poor_isolation)
            std::cerr << "warning: isolation below 20; not a clean two-level system\n";
    }
    std::cout << "wrote " << out.string() << "\n";
    return 0;
}

int cmd_calibrate(const Common& co, CalibrationTargets targets) {
    const RunConfig cfg = load_or_default(co);
    const fs::path dir = resolve_output_dir(co, cfg);
    targets.n_basis = cfg.n_basis;
    const CalibrationResult res =
        calibrate_mu(cfg.hamiltonian.beta, cfg.hamiltonian.v0, targets);

    Table t;
    {
        std::vector<double> mu, vx, iso, ok;
        for (const auto& row : res.scan) {
            mu.push_back(row.mu);
            vx.push_back(row.v_x);
            iso.push_back(row.isolation);
            ok.push_back(row.qualifies ? 1.0 : 0.0);
        }
        t.add("mu", mu);
        t.add("v_x", vx);
        t.add("isolation", iso);
        t.add("qualifies", ok);
    }
    fs::create_directories(dir);
    const fs::path out = dir / "calibration.csv";
    write_csv_file(out.string(), t);
    std::cout << "calibrated mu = " << format_g17(res.mu) << "\n";
    std::cout << "wrote " << out.string() << "\n";
    return 0;
}

int cmd_noise(const Common& co, std::int64_t steps, std::uint64_t seed, bool seed_given) {
    const RunConfig cfg = load_or_default(co);
    const fs::path dir = resolve_output_dir(co, cfg);
    NoiseParams np = cfg.noise;
    np.n_steps = steps;
    np.validate();
    const NoiseTrace tr = telegraph_trace(np, seed_given ? seed : cfg.master_seed);

    fs::create_directories(dir);
    const fs::path out = dir / "noise.csv";
    write_csv_file(out.string(), noise_table(tr));

    const AutocorrEstimate est = autocorr_integral(tr);
    const double expected = np.delta * np.delta / np.omega_c;
    const auto flips = count_flips(tr);
    const double p_flip = 1.0 - std::exp(-0.5 * np.omega_c * np.dt);
    const double flips_mean = static_cast<double>(np.n_steps - 1) * p_flip;
    const double flips_sd = std::sqrt(flips_mean * (1.0 - p_flip));
    std::cout << "correlation integral = " << est.integral << " (delta^2/omega_c = "
              << expected << ", " << est.n_lags << " lags)\n";
    std::cout << "flips = " << flips << " (expected " << flips_mean << " +- " << flips_sd
              << ")\n";
    if (est.nonstationary)
        std::cerr << "warning: correlation did not decay within half the trace\n";
    std::cout << "wrote " << out.string() << "\n";
    return 0;
}

int cmd_ensemble(const Common& co, bool full_rho) {
    const Workbench w = make_workbench(load_or_default(co));
    const fs::path dir = resolve_output_dir(co, w.cfg);
    const ResolvedTimes t = resolve_times(w.cfg, w.d_pred);
    const PolarizationTrace tr = run_and_write(w, t, co.workers, full_rho, dir, "ensemble");
    std::cout << "n = " << tr.n_realizations << ", samples = " << tr.times.size()
              << ", total_time = " << t.total_time << "\n";
    std::cout << "rho11_energy endpoint = " << tr.rho11_energy.back() << " (stderr "
              << tr.stderr_rho11.back() << "), max leakage = " << tr.max_leakage << "\n";
    std::cout << "wrote " << (dir / "ensemble.csv").string() << "\n";
    return 0;
}

int cmd_bloch(const Common& co, double vx, bool vx_given, double d, bool d_given,
              double total_time, bool t_given, std::int64_t points) {
    const RunConfig cfg = load_or_default(co);
    const fs::path dir = resolve_output_dir(co, cfg);
    if (!vx_given || !d_given) {
        const Workbench w = make_workbench(cfg);
        if (!vx_given) vx = w.frame.v_x;
        if (!d_given) d = w.d_pred;
    }
    if (points < 2) throw std::invalid_argument("bloch: --points must be >= 2");
    const double T = t_given ? total_time : (d > 0.0 ? 3.0 / d : 10.0 / vx);
    if (!(T > 0.0)) throw std::invalid_argument("bloch: total time must be > 0");

    std::vector<double> times(static_cast<std::size_t>(points) + 1);
    for (std::size_t i = 0; i < times.size(); ++i)
        times[i] = T * static_cast<double>(i) / static_cast<double>(points);
    BlochParams bp;
    bp.v = Eigen::Vector3d(vx, 0.0, 0.0);
    bp.d = d;
    const BlochTrajectory traj = integrate_bloch(Eigen::Vector3d(0, 0, 1), bp, times);

    fs::create_directories(dir);
    const fs::path out = dir / "bloch.csv";
    write_csv_file(out.string(), bloch_table(traj));
    std::cout << "wrote " << out.string() << " (v_x = " << vx << ", d = " << d << ")\n";
    return 0;
}

int cmd_predict_d(const Common& co, double v0_phi_c, bool vpc_given, double delta,
                  bool delta_given, double omega_c, bool omega_given, int digits) {
    const RunConfig cfg = load_or_default(co);
    if (!delta_given) delta = cfg.noise.delta;
    if (!omega_given) omega_c = cfg.noise.omega_c;
    if (!vpc_given) {
        const Workbench w = make_workbench(cfg);
        v0_phi_c = w.cfg.hamiltonian.v0 * w.frame.phi_c;
    }
    const double d = predict_D(v0_phi_c, delta, omega_c);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, d);
    std::cout << buf << "\n";
    return 0;
}

int cmd_fit(const Common& co, const std::string& input, const std::string& model) {
    const Workbench w = make_workbench(load_or_default(co));
    const fs::path dir = resolve_output_dir(co, w.cfg);
    const Table tbl = read_csv_file(input);

    // Unweighted on purpose: the early samples have near-zero Monte Carlo
    // stderr but the single-exponential model is wrong there (the decay only
    // becomes exponential past ~1/omega_c), so stderr weighting lets the
    // transient dominate and biases D down by up to a factor of two.
    FitResult fit;
    if (model == "exponential") {
        fit = fit_exponential(tbl.col("time"), tbl.col("rho11_energy"));
    } else {
        fit = fit_damped_cosine(tbl.col("time"), tbl.col("p_z"));
    }
    if (fit.degenerate) std::cerr << "warning: " << fit.warning << "\n";

    double max_leak = 0.0;
    if (tbl.has("leakage")) {
        const auto& lk = tbl.col("leakage");
        max_leak = *std::max_element(lk.begin(), lk.end());
    }
    const ComparisonReport rep =
        compare_report(fit, w.d_pred, w.frame, max_leak, w.cfg.tolerances, w.cfg.to_json());
    fs::create_directories(dir);
    write_json_file((dir / "fit.json").string(), rep.to_json());
    std::cout << rep.to_text();
    std::cout << "wrote " << (dir / "fit.json").string() << "\n";
    return 0;
}

int cmd_fig2(const Common& co) {
    RunConfig cfg = load_or_default(co);
    cfg.initial_state = InitialState::energy_level(0);
    const Workbench w = make_workbench(std::move(cfg));
    const fs::path dir = resolve_output_dir(co, w.cfg) / "fig2";
    const ResolvedTimes t = resolve_times(w.cfg, w.d_pred);
    const PolarizationTrace tr = run_and_write(w, t, co.workers, false, dir, "ensemble");

    const FitResult fit = fit_exponential(tr.times, tr.rho11_energy);
    if (fit.degenerate) std::cerr << "warning: " << fit.warning << "\n";
    ComparisonReport rep =
        compare_report(fit, w.d_pred, w.frame, tr.max_leakage, w.cfg.tolerances, w.cfg.to_json());

    const double endpoint = tr.rho11_energy.back();
    append_check(rep, CheckRow{"endpoint_rho11", endpoint, 0.5, std::abs(endpoint - 0.5),
                               w.cfg.tolerances.endpoint_tol,
                               std::abs(endpoint - 0.5) <= w.cfg.tolerances.endpoint_tol});
    return finish_report(rep, dir);
}

int cmd_fig3(const Common& co) {
    RunConfig cfg = load_or_default(co);
    cfg.initial_state = InitialState::localized(true);
    const Workbench w = make_workbench(std::move(cfg));
    const fs::path dir = resolve_output_dir(co, w.cfg) / "fig3";
    const ResolvedTimes t = resolve_times(w.cfg, w.d_pred);
    const PolarizationTrace tr = run_and_write(w, t, co.workers, false, dir, "ensemble");

    std::vector<double> pz_sim(tr.times.size());
    for (std::size_t i = 0; i < pz_sim.size(); ++i) pz_sim[i] = tr.p_vec[i].z();
    const FitResult fit = fit_damped_cosine(tr.times, pz_sim);
    ComparisonReport rep =
        compare_report(fit, w.d_pred, w.frame, tr.max_leakage, w.cfg.tolerances, w.cfg.to_json());

    BlochParams bp;
    bp.v = Eigen::Vector3d(w.frame.v_x, 0.0, 0.0);
    bp.d = w.d_pred;
    const BlochTrajectory ref = integrate_bloch(Eigen::Vector3d(0, 0, 1), bp, tr.times);
    std::vector<double> pz_ref(ref.p.size());
    for (std::size_t i = 0; i < pz_ref.size(); ++i) pz_ref[i] = ref.p[i].z();
    write_csv_file((dir / "bloch_reference.csv").string(), bloch_table(ref));

    const double rms = rms_deviation(pz_sim, pz_ref);
    append_check(rep, CheckRow{"pz_rms_vs_bloch", rms, 0.0, rms, w.cfg.tolerances.pz_rms_tol,
                               rms <= w.cfg.tolerances.pz_rms_tol});
    return finish_report(rep, dir);
}

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rf-SQUID flux qubit dephasing simulator"};
    app.set_version_flag("--version", "squidsim 0.1.0");
    app.require_subcommand(1);

    Common c_spectrum, c_calibrate, c_noise, c_ensemble, c_bloch, c_predict, c_fit, c_fig2,
        c_fig3;

    auto* sp = app.add_subcommand("spectrum", "lowest levels of the double-well Hamiltonian");
    int levels = 8;
    add_common(sp, c_spectrum);
    sp->add_option("--levels", levels, "number of levels to emit")->check(CLI::Range(1, 1024));

    auto* ca = app.add_subcommand("calibrate", "scan mu for a well-isolated qubit doublet");
    CalibrationTargets targets;
    add_common(ca, c_calibrate);
    ca->add_option("--mu-min", targets.mu_min, "scan lower bound");
    ca->add_option("--mu-max", targets.mu_max, "scan upper bound");
    ca->add_option("--points", targets.n_scan, "scan points")->check(CLI::Range(2, 100000));
    ca->add_option("--iso-min", targets.isolation_min, "required (E3-E2)/(E2-E1)");
    ca->add_option("--vx-min", targets.vx_min, "required minimum splitting");
    ca->add_option("--vx-max", targets.vx_max, "required maximum splitting");

    auto* no = app.add_subcommand("noise", "sample one telegraph trace and its statistics");
    std::int64_t noise_steps = 100000;
    std::uint64_t noise_seed = 0;
    add_common(no, c_noise);
    no->add_option("--steps", noise_steps, "trace length")->check(CLI::PositiveNumber);
    auto* seed_opt = no->add_option("--seed", noise_seed, "seed (default: master_seed)");

    auto* en = app.add_subcommand("ensemble", "average N noisy realizations");
    bool full_rho = false;
    add_common(en, c_ensemble, true);
    en->add_flag("--full-rho", full_rho, "accumulate full density snapshots (diagnostic)");

    auto* bl = app.add_subcommand("bloch", "integrate the damped two-level equation");
    double bl_vx = 0.0, bl_d = 0.0, bl_time = 0.0;
    std::int64_t bl_points = 500;
    add_common(bl, c_bloch);
    auto* o_vx = bl->add_option("--vx", bl_vx, "precession rate (default: frame splitting)");
    auto* o_d = bl->add_option("--d", bl_d, "damping rate (default: predicted D)");
    auto* o_t = bl->add_option("--total-time", bl_time, "duration (default: 3/d)");
    bl->add_option("--points", bl_points, "output points")->check(CLI::Range(2, 10000000));

    auto* pd = app.add_subcommand("predict-d", "dephasing rate 4 (V0 phi_c)^2 delta^2 / omega_c");
    double pd_vpc = 0.0, pd_delta = 0.0, pd_omega = 0.0;
    int pd_digits = 3;
    add_common(pd, c_predict);
    auto* o_vpc =
        pd->add_option("--v0-phi-c", pd_vpc, "V0*phi_c product (default: measured from config)");
    auto* o_delta = pd->add_option("--delta", pd_delta, "noise amplitude");
    auto* o_omega = pd->add_option("--omega-c", pd_omega, "noise frequency");
    pd->add_option("--digits", pd_digits, "significant digits")->check(CLI::Range(1, 17));

    auto* ft = app.add_subcommand("fit", "fit a decay law to an ensemble CSV");
    std::string fit_input, fit_model = "exponential";
    add_common(ft, c_fit);
    ft->add_option("--input", fit_input, "ensemble CSV path")
        ->required()
        ->check(CLI::ExistingFile);
    ft->add_option("--model", fit_model, "exponential | damped-cosine")
        ->check(CLI::IsMember({"exponential", "damped-cosine"}));

    auto* f2 = app.add_subcommand("reproduce-fig2", "dephasing experiment and rate comparison");
    add_common(f2, c_fig2, true);
    auto* f3 = app.add_subcommand("reproduce-fig3", "damped oscillation experiment");
    add_common(f3, c_fig3, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (sp->parsed()) return run_guarded([&] { return cmd_spectrum(c_spectrum, levels); });
    if (ca->parsed()) return run_guarded([&] { return cmd_calibrate(c_calibrate, targets); });
    if (no->parsed())
        return run_guarded(
            [&] { return cmd_noise(c_noise, noise_steps, noise_seed, seed_opt->count() > 0); });
    if (en->parsed()) return run_guarded([&] { return cmd_ensemble(c_ensemble, full_rho); });
    if (bl->parsed())
        return run_guarded([&] {
            return cmd_bloch(c_bloch, bl_vx, o_vx->count() > 0, bl_d, o_d->count() > 0, bl_time,
                             o_t->count() > 0, bl_points);
        });
    if (pd->parsed())
        return run_guarded([&] {
            return cmd_predict_d(c_predict, pd_vpc, o_vpc->count() > 0, pd_delta,
                                 o_delta->count() > 0, pd_omega, o_omega->count() > 0, pd_digits);
        });
    if (ft->parsed()) return run_guarded([&] { return cmd_fit(c_fit, fit_input, fit_model); });
    if (f2->parsed()) return run_guarded([&] { return cmd_fig2(c_fig2); });
    if (f3->parsed()) return run_guarded([&] { return cmd_fig3(c_fig3); });
    return 1;
}
