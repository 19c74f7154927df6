// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "squidsim/analysis.hpp"
#include "squidsim/ensemble.hpp"
#include "squidsim/errors.hpp"
#include "squidsim/noise.hpp"
#include "squidsim/potential.hpp"

namespace squidsim {

/// Committed defaults. beta and the noise numbers follow the reference
/// experiment; v0 is pinned so that v0 times the classical well position
/// (1.00376254017807 for beta = 1.19) equals 14.149; mu was calibrated so
/// the tunneling doublet is split by ~0.011 with the next level 36x further.
namespace defaults {
inline constexpr double mu = 13.5;
inline constexpr double beta = 1.19;
inline constexpr double v0 = 14.0959633714662;
inline constexpr double phi_ext = 0.0;
inline constexpr int n_basis = 128;
inline constexpr double delta = 0.00032;
inline constexpr double omega_c = 0.05;
inline constexpr double dt = 0.5;
inline constexpr std::int64_t n_realizations = 400;
inline constexpr std::uint64_t master_seed = 1;
inline constexpr int config_version = 1;
}  // namespace defaults

struct RunConfig {
    int config_version = defaults::config_version;
    HamiltonianParams hamiltonian{defaults::mu, defaults::beta, defaults::v0,
                                  defaults::phi_ext};
    int n_basis = defaults::n_basis;
    NoiseParams noise{defaults::delta, defaults::omega_c, defaults::dt, 0};
    std::int64_t n_realizations = defaults::n_realizations;
    std::uint64_t master_seed = defaults::master_seed;
    std::optional<double> total_time;        ///< absent: 3 / predicted D
    std::optional<std::int64_t> sample_every;  ///< absent: ~500 output points
    InitialState initial_state;
    Tolerances tolerances;
    std::string output_directory = "out";
    std::vector<std::string> formats{"csv", "json"};
    std::vector<std::string> defaulted;  ///< dotted paths filled from defaults

    nlohmann::json to_json() const;
};

struct ResolvedTimes {
    double total_time = 0.0;
    std::int64_t n_steps = 0;
    std::int64_t sample_every = 1;
};

inline ResolvedTimes resolve_times(const RunConfig& c, double d_pred) {
    ResolvedTimes r;
    if (c.total_time) {
        r.total_time = *c.total_time;
    } else {
        if (!(d_pred > 0.0))
            throw ValidationError("ensemble.total_time",
                                  "required when the predicted rate is zero");
        r.total_time = 3.0 / d_pred;
    }
    r.n_steps = std::max<std::int64_t>(1, std::llround(r.total_time / c.noise.dt));
    r.sample_every = c.sample_every ? *c.sample_every
                                    : std::max<std::int64_t>(1, r.n_steps / 500);
    return r;
}

inline EnsembleConfig to_ensemble_config(const RunConfig& c, const ResolvedTimes& t,
                                         int n_workers = 0,
                                         bool accumulate_full_rho = false) {
    EnsembleConfig ec;
    ec.n_realizations = c.n_realizations;
    ec.master_seed = c.master_seed;
    ec.hamiltonian = c.hamiltonian;
    ec.noise = c.noise;
    ec.initial_state = c.initial_state;
    ec.total_time = t.total_time;
    ec.sample_every = t.sample_every;
    ec.n_basis = c.n_basis;
    ec.n_workers = n_workers;
    ec.accumulate_full_rho = accumulate_full_rho;
    return ec;
}

namespace detail {

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t prev = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t cur = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1,
                               prev + (a[i - 1] == b[j - 1] ? 0 : 1)});
            prev = cur;
        }
    }
    return row[b.size()];
}

inline void reject_unknown_keys(const nlohmann::json& obj,
                                const std::vector<std::string>& allowed,
                                const std::string& prefix) {
    for (const auto& item : obj.items()) {
        const std::string& key = item.key();
        if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
        std::string best;
        std::size_t best_d = 3;
        for (const auto& cand : allowed) {
            const std::size_t d = edit_distance(key, cand);
            if (d < best_d) {
                best_d = d;
                best = cand;
            }
        }
        const std::string path = prefix.empty() ? key : prefix + "." + key;
        std::string msg = "unknown key";
        if (!best.empty()) msg += "; did you mean \"" + best + "\"?";
        throw ValidationError(path, msg);
    }
}

inline double get_num(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number()) throw ValidationError(path, "expected a number");
    return j.get<double>();
}

inline std::int64_t get_int(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number_integer() && !j.is_number_unsigned())
        throw ValidationError(path, "expected an integer");
    return j.get<std::int64_t>();
}

inline std::uint64_t get_uint(const nlohmann::json& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(j.get<std::int64_t>());
    throw ValidationError(path, "expected a non-negative integer");
}

inline std::string get_str(const nlohmann::json& j, const std::string& path) {
    if (!j.is_string()) throw ValidationError(path, "expected a string");
    return j.get<std::string>();
}

inline std::complex<double> get_complex(const nlohmann::json& j, const std::string& path) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw ValidationError(path, "expected a number or [re, im] pair");
}

inline InitialState parse_initial_state(const nlohmann::json& j, const std::string& prefix) {
    if (!j.is_object()) throw ValidationError(prefix, "expected an object with a \"kind\" key");
    reject_unknown_keys(j, {"kind", "index", "well", "c1", "c2"}, prefix);
    if (!j.contains("kind")) throw ValidationError(prefix + ".kind", "required");
    const std::string kind = get_str(j.at("kind"), prefix + ".kind");
    if (kind == "energy") {
        InitialState s = InitialState::energy_level(0);
        if (j.contains("index"))
            s.index = static_cast<int>(get_int(j.at("index"), prefix + ".index"));
        if (s.index < 0) throw ValidationError(prefix + ".index", "must be >= 0");
        return s;
    }
    if (kind == "localized") {
        if (!j.contains("well")) throw ValidationError(prefix + ".well", "required");
        const std::string well = get_str(j.at("well"), prefix + ".well");
        if (well != "L" && well != "R")
            throw ValidationError(prefix + ".well", "must be \"L\" or \"R\"");
        return InitialState::localized(well == "L");
    }
    if (kind == "qubit") {
        if (!j.contains("c1") || !j.contains("c2"))
            throw ValidationError(prefix, "qubit kind needs c1 and c2");
        return InitialState::qubit(get_complex(j.at("c1"), prefix + ".c1"),
                                   get_complex(j.at("c2"), prefix + ".c2"));
    }
    throw ValidationError(prefix + ".kind", "must be \"energy\", \"localized\" or \"qubit\"");
}

}  // namespace detail

inline nlohmann::json initial_state_to_json(const InitialState& s) {
    switch (s.kind) {
        case InitialState::Kind::energy:
            return {{"kind", "energy"}, {"index", s.index}};
        case InitialState::Kind::localized:
            return {{"kind", "localized"}, {"well", s.left ? "L" : "R"}};
        case InitialState::Kind::qubit:
            return {{"kind", "qubit"},
                    {"c1", {s.c1.real(), s.c1.imag()}},
                    {"c2", {s.c2.real(), s.c2.imag()}}};
    }
    return {};
}

inline nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["config_version"] = config_version;
    j["hamiltonian"] = {{"mu", hamiltonian.mu},
                        {"beta", hamiltonian.beta},
                        {"v0", hamiltonian.v0},
                        {"phi_ext", hamiltonian.phi_ext}};
    j["basis"] = {{"n_basis", n_basis}};
    j["noise"] = {{"delta", noise.delta}, {"omega_c", noise.omega_c}, {"dt", noise.dt}};
    j["ensemble"] = {{"n_realizations", n_realizations},
                     {"master_seed", master_seed},
                     {"initial_state", initial_state_to_json(initial_state)}};
    if (total_time)
        j["ensemble"]["total_time"] = *total_time;
    else
        j["ensemble"]["total_time"] = nullptr;
    if (sample_every)
        j["ensemble"]["sample_every"] = *sample_every;
    else
        j["ensemble"]["sample_every"] = nullptr;
    j["analysis"] = {{"tolerances",
                      {{"d_rel_tol", tolerances.d_rel_tol},
                       {"omega_rel_tol", tolerances.omega_rel_tol},
                       {"gamma_rel_tol", tolerances.gamma_rel_tol},
                       {"endpoint_tol", tolerances.endpoint_tol},
                       {"leakage_max", tolerances.leakage_max},
                       {"pz_rms_tol", tolerances.pz_rms_tol}}}};
    j["output"] = {{"directory", output_directory}, {"formats", formats}};
    if (!defaulted.empty()) j["defaulted"] = defaulted;
    return j;
}

/// Parse and validate a config document. Absent keys take the committed
/// defaults and are listed in .defaulted; unknown keys are rejected with a
/// nearest-name suggestion.
inline RunConfig parse_config(const nlohmann::json& doc, const std::string& origin) {
    if (!doc.is_object()) throw ParseError(origin + ": top level must be a JSON object");
    RunConfig c;
    detail::reject_unknown_keys(
        doc, {"config_version", "hamiltonian", "basis", "noise", "ensemble", "analysis", "output"},
        "");

    auto mark = [&](const char* path, bool present) {
        if (!present) c.defaulted.emplace_back(path);
    };

    if (doc.contains("config_version")) {
        c.config_version =
            static_cast<int>(detail::get_int(doc.at("config_version"), "config_version"));
        if (c.config_version != defaults::config_version)
            throw ValidationError("config_version", "unsupported version");
    } else {
        mark("config_version", false);
    }

    {
        const bool present = doc.contains("hamiltonian");
        const nlohmann::json h = present ? doc.at("hamiltonian") : nlohmann::json::object();
        if (!h.is_object()) throw ValidationError("hamiltonian", "expected an object");
        detail::reject_unknown_keys(h, {"mu", "beta", "v0", "phi_ext"}, "hamiltonian");
        if (h.contains("mu"))
            c.hamiltonian.mu = detail::get_num(h.at("mu"), "hamiltonian.mu");
        else
            mark("hamiltonian.mu", false);
        if (h.contains("beta"))
            c.hamiltonian.beta = detail::get_num(h.at("beta"), "hamiltonian.beta");
        else
            mark("hamiltonian.beta", false);
        if (h.contains("v0"))
            c.hamiltonian.v0 = detail::get_num(h.at("v0"), "hamiltonian.v0");
        else
            mark("hamiltonian.v0", false);
        if (h.contains("phi_ext"))
            c.hamiltonian.phi_ext = detail::get_num(h.at("phi_ext"), "hamiltonian.phi_ext");
        else
            mark("hamiltonian.phi_ext", false);
        if (!(c.hamiltonian.mu > 0.0)) throw ValidationError("hamiltonian.mu", "must be > 0");
        if (!(c.hamiltonian.v0 > 0.0)) throw ValidationError("hamiltonian.v0", "must be > 0");
        if (!(c.hamiltonian.beta >= 0.0))
            throw ValidationError("hamiltonian.beta", "must be >= 0");
        if (!std::isfinite(c.hamiltonian.phi_ext))
            throw ValidationError("hamiltonian.phi_ext", "must be finite");
    }

    {
        const bool present = doc.contains("basis");
        const nlohmann::json b = present ? doc.at("basis") : nlohmann::json::object();
        if (!b.is_object()) throw ValidationError("basis", "expected an object");
        detail::reject_unknown_keys(b, {"n_basis"}, "basis");
        if (b.contains("n_basis"))
            c.n_basis = static_cast<int>(detail::get_int(b.at("n_basis"), "basis.n_basis"));
        else
            mark("basis.n_basis", false);
        if (c.n_basis < 8) throw ValidationError("basis.n_basis", "must be >= 8");
    }

    {
        const bool present = doc.contains("noise");
        const nlohmann::json nj = present ? doc.at("noise") : nlohmann::json::object();
        if (!nj.is_object()) throw ValidationError("noise", "expected an object");
        detail::reject_unknown_keys(nj, {"delta", "omega_c", "dt"}, "noise");
        if (nj.contains("delta"))
            c.noise.delta = detail::get_num(nj.at("delta"), "noise.delta");
        else
            mark("noise.delta", false);
        if (nj.contains("omega_c"))
            c.noise.omega_c = detail::get_num(nj.at("omega_c"), "noise.omega_c");
        else
            mark("noise.omega_c", false);
        if (nj.contains("dt"))
            c.noise.dt = detail::get_num(nj.at("dt"), "noise.dt");
        else
            mark("noise.dt", false);
        if (!(c.noise.delta >= 0.0)) throw ValidationError("noise.delta", "must be >= 0");
        if (!(c.noise.omega_c > 0.0)) throw ValidationError("noise.omega_c", "must be > 0");
        if (!(c.noise.dt > 0.0)) throw ValidationError("noise.dt", "must be > 0");
        if (c.noise.omega_c * c.noise.dt > 0.2)
            throw ValidationError("noise.dt", "omega_c * dt must be <= 0.2");
    }

    {
        const bool present = doc.contains("ensemble");
        const nlohmann::json e = present ? doc.at("ensemble") : nlohmann::json::object();
        if (!e.is_object()) throw ValidationError("ensemble", "expected an object");
        detail::reject_unknown_keys(
            e, {"n_realizations", "master_seed", "total_time", "sample_every", "initial_state"},
            "ensemble");
        if (e.contains("n_realizations"))
            c.n_realizations = detail::get_int(e.at("n_realizations"), "ensemble.n_realizations");
        else
            mark("ensemble.n_realizations", false);
        if (c.n_realizations < 1)
            throw ValidationError("ensemble.n_realizations", "must be >= 1");
        if (e.contains("master_seed"))
            c.master_seed = detail::get_uint(e.at("master_seed"), "ensemble.master_seed");
        else
            mark("ensemble.master_seed", false);
        if (e.contains("total_time") && !e.at("total_time").is_null()) {
            c.total_time = detail::get_num(e.at("total_time"), "ensemble.total_time");
            if (!(*c.total_time > 0.0))
                throw ValidationError("ensemble.total_time", "must be > 0");
        } else {
            mark("ensemble.total_time", false);
        }
        if (e.contains("sample_every") && !e.at("sample_every").is_null()) {
            c.sample_every = detail::get_int(e.at("sample_every"), "ensemble.sample_every");
            if (*c.sample_every < 1)
                throw ValidationError("ensemble.sample_every", "must be >= 1");
        } else {
            mark("ensemble.sample_every", false);
        }
        if (e.contains("initial_state"))
            c.initial_state =
                detail::parse_initial_state(e.at("initial_state"), "ensemble.initial_state");
        else
            mark("ensemble.initial_state", false);
    }

    {
        const bool present = doc.contains("analysis");
        const nlohmann::json a = present ? doc.at("analysis") : nlohmann::json::object();
        if (!a.is_object()) throw ValidationError("analysis", "expected an object");
        detail::reject_unknown_keys(a, {"tolerances"}, "analysis");
        const nlohmann::json t =
            a.contains("tolerances") ? a.at("tolerances") : nlohmann::json::object();
        if (!t.is_object()) throw ValidationError("analysis.tolerances", "expected an object");
        detail::reject_unknown_keys(t,
                                    {"d_rel_tol", "omega_rel_tol", "gamma_rel_tol",
                                     "endpoint_tol", "leakage_max", "pz_rms_tol"},
                                    "analysis.tolerances");
        auto tol_field = [&](const char* key, double& slot) {
            const std::string path = std::string("analysis.tolerances.") + key;
            if (t.contains(key)) {
                slot = detail::get_num(t.at(key), path);
                if (!(slot > 0.0)) throw ValidationError(path, "must be > 0");
            } else {
                c.defaulted.push_back(path);
            }
        };
        tol_field("d_rel_tol", c.tolerances.d_rel_tol);
        tol_field("omega_rel_tol", c.tolerances.omega_rel_tol);
        tol_field("gamma_rel_tol", c.tolerances.gamma_rel_tol);
        tol_field("endpoint_tol", c.tolerances.endpoint_tol);
        tol_field("leakage_max", c.tolerances.leakage_max);
        tol_field("pz_rms_tol", c.tolerances.pz_rms_tol);
    }

    {
        const bool present = doc.contains("output");
        const nlohmann::json o = present ? doc.at("output") : nlohmann::json::object();
        if (!o.is_object()) throw ValidationError("output", "expected an object");
        detail::reject_unknown_keys(o, {"directory", "formats"}, "output");
        if (o.contains("directory")) {
            c.output_directory = detail::get_str(o.at("directory"), "output.directory");
            if (c.output_directory.empty())
                throw ValidationError("output.directory", "must not be empty");
        } else {
            mark("output.directory", false);
        }
        if (o.contains("formats")) {
            if (!o.at("formats").is_array())
                throw ValidationError("output.formats", "expected an array");
            c.formats.clear();
            for (const auto& f : o.at("formats")) {
                const std::string s = detail::get_str(f, "output.formats");
                if (s != "csv" && s != "json")
                    throw ValidationError("output.formats", "entries must be \"csv\" or \"json\"");
                c.formats.push_back(s);
            }
            if (c.formats.empty())
                throw ValidationError("output.formats", "must not be empty");
        } else {
            mark("output.formats", false);
        }
    }

    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open config: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    return parse_config(doc, path);
}

}  // namespace squidsim
