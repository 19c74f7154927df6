// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "squidsim/bloch.hpp"
#include "squidsim/config.hpp"
#include "squidsim/csv.hpp"
#include "squidsim/ensemble.hpp"
#include "squidsim/noise.hpp"
#include "squidsim/spectrum.hpp"

namespace squidsim {

inline Table ensemble_table(const PolarizationTrace& tr) {
    const std::size_t m = tr.times.size();
    std::vector<double> px(m), py(m), pz(m);
    for (std::size_t i = 0; i < m; ++i) {
        px[i] = tr.p_vec[i].x();
        py[i] = tr.p_vec[i].y();
        pz[i] = tr.p_vec[i].z();
    }
    Table t;
    t.add("time", tr.times);
    t.add("rho11_energy", tr.rho11_energy);
    t.add("p_x", std::move(px));
    t.add("p_y", std::move(py));
    t.add("p_z", std::move(pz));
    t.add("leakage", tr.leakage_avg);
    t.add("stderr_rho11", tr.stderr_rho11);
    return t;
}

inline Table bloch_table(const BlochTrajectory& tr) {
    const std::size_t m = tr.times.size();
    std::vector<double> px(m), py(m), pz(m);
    for (std::size_t i = 0; i < m; ++i) {
        px[i] = tr.p[i].x();
        py[i] = tr.p[i].y();
        pz[i] = tr.p[i].z();
    }
    Table t;
    t.add("time", tr.times);
    t.add("p_x", std::move(px));
    t.add("p_y", std::move(py));
    t.add("p_z", std::move(pz));
    return t;
}

inline Table spectrum_table(const Eigen::VectorXd& energies) {
    std::vector<double> idx(static_cast<std::size_t>(energies.size())),
        e(static_cast<std::size_t>(energies.size()));
    for (Eigen::Index i = 0; i < energies.size(); ++i) {
        idx[static_cast<std::size_t>(i)] = static_cast<double>(i);
        e[static_cast<std::size_t>(i)] = energies[i];
    }
    Table t;
    t.add("level_index", std::move(idx));
    t.add("energy", std::move(e));
    return t;
}

inline Table noise_table(const NoiseTrace& tr) {
    const std::size_t m = tr.values.size();
    std::vector<double> time(m);
    for (std::size_t i = 0; i < m; ++i) time[i] = static_cast<double>(i) * tr.params.dt;
    Table t;
    t.add("time", std::move(time));
    t.add("value", tr.values);
    return t;
}

inline nlohmann::json frame_summary(const QubitFrame& frame) {
    return {{"v_x", frame.v_x},
            {"phi_c", frame.phi_c},
            {"isolation", frame.isolation},
            {"poor_isolation", frame.poor_isolation},
            {"e1", frame.e1},
            {"e2", frame.e2}};
}

/// Everything needed to regenerate an ensemble CSV bit for bit.
inline nlohmann::json ensemble_sidecar(const RunConfig& config, const ResolvedTimes& times,
                                       const QubitFrame& frame, double d_pred,
                                       const PolarizationTrace& trace) {
    nlohmann::json j;
    j["config"] = config.to_json();
    j["resolved"] = {{"total_time", times.total_time},
                     {"n_steps", times.n_steps},
                     {"sample_every", times.sample_every}};
    j["frame"] = frame_summary(frame);
    j["d_pred"] = d_pred;
    j["n_realizations"] = trace.n_realizations;
    j["seeds"] = trace.seeds;
    j["max_leakage"] = trace.max_leakage;
    j["leakage_warning"] = trace.leakage_warning;
    if (!trace.full_rho.empty()) {
        nlohmann::json arr = nlohmann::json::array();
        for (std::size_t k = 0; k < trace.full_rho.size(); ++k) {
            const auto& m = trace.full_rho[k];
            const std::size_t idx = trace.full_rho_indices[k];
            arr.push_back({{"sample_index", idx},
                           {"time", trace.times[idx]},
                           {"trace", std::real(m.trace())},
                           {"purity", std::real((m * m).trace())}});
        }
        j["full_rho"] = arr;
    }
    return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << content;
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

}  // namespace squidsim
