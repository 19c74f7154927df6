// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "squidsim/errors.hpp"

namespace squidsim {

/// Dephasing rate D = 4 (V0 phi_c)^2 Delta^2 / omega_c.
inline double predict_D(double v0_phi_c, double delta, double omega_c) {
    if (!(omega_c > 0.0)) throw std::invalid_argument("predict_D: omega_c must be > 0");
    const double a = v0_phi_c * delta;
    return 4.0 * a * a / omega_c;
}

struct BlochParams {
    Eigen::Vector3d v = Eigen::Vector3d::Zero();  ///< internal Hamiltonian axis
    double d = 0.0;                               ///< transverse damping rate
};

struct BlochTrajectory {
    std::vector<double> times;
    std::vector<Eigen::Vector3d> p;
};

namespace detail {

inline Eigen::Vector3d bloch_rhs(const Eigen::Vector3d& p, const BlochParams& bp) {
    Eigen::Vector3d out = p.cross(bp.v);
    out.x() -= bp.d * p.x();
    out.y() -= bp.d * p.y();
    return out;
}

inline Eigen::Vector3d rk4_step(const Eigen::Vector3d& p, double h, const BlochParams& bp) {
    const Eigen::Vector3d k1 = bloch_rhs(p, bp);
    const Eigen::Vector3d k2 = bloch_rhs(p + 0.5 * h * k1, bp);
    const Eigen::Vector3d k3 = bloch_rhs(p + 0.5 * h * k2, bp);
    const Eigen::Vector3d k4 = bloch_rhs(p + h * k3, bp);
    return p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

/// Fixed-step RK4 on dP/dt = P x V - D (P_x, P_y, 0), sampled on the given
/// grid. Substeps between grid points are sized well below the fastest scale
/// so analytic comparisons hold to 1e-8.
inline BlochTrajectory integrate_bloch(const Eigen::Vector3d& p0, const BlochParams& params,
                                       const std::vector<double>& times) {
    if (params.d < 0.0) throw std::invalid_argument("integrate_bloch: d must be >= 0");
    if (times.empty()) throw std::invalid_argument("integrate_bloch: empty time grid");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("integrate_bloch: time grid must increase");

    const double scale = std::max({params.v.norm(), params.d, 1e-300});
    const double h_max = 0.005 / scale;

    BlochTrajectory traj;
    traj.times = times;
    traj.p.reserve(times.size());

    Eigen::Vector3d p = p0;
    double t = times.front();
    if (t != 0.0) {
        // grid may start past zero; integrate quietly up to it
        const auto n = static_cast<std::int64_t>(std::ceil(t / h_max));
        const double h = t / static_cast<double>(std::max<std::int64_t>(n, 1));
        for (std::int64_t i = 0; i < n; ++i) p = detail::rk4_step(p, h, params);
    }
    traj.p.push_back(p);
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double span = times[i] - times[i - 1];
        const auto n = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(span / h_max)));
        const double h = span / static_cast<double>(n);
        for (std::int64_t k = 0; k < n; ++k) p = detail::rk4_step(p, h, params);
        traj.p.push_back(p);
    }
    return traj;
}

/// Analytic solution for p0 = +z, V = (v_x, 0, 0), transverse damping d:
/// the (P_y, P_z) pair has eigenvalues -d/2 +- i*sqrt(v_x^2 - d^2/4).
inline BlochTrajectory closed_form_damped(double v_x, double d, const std::vector<double>& times) {
    if (d < 0.0) throw std::invalid_argument("closed_form_damped: d must be >= 0");
    if (!(v_x > d / 2.0))
        throw Overdamped("closed_form_damped: need v_x > d/2 for oscillatory solution");
    const double gamma = 0.5 * d;
    const double omega = std::sqrt(v_x * v_x - gamma * gamma);

    BlochTrajectory traj;
    traj.times = times;
    traj.p.reserve(times.size());
    for (double t : times) {
        const double env = std::exp(-gamma * t);
        const double c = std::cos(omega * t);
        const double s = std::sin(omega * t);
        Eigen::Vector3d p;
        p.x() = 0.0;
        p.y() = env * (v_x / omega) * s;
        p.z() = env * (c + (gamma / omega) * s);
        traj.p.push_back(p);
    }
    return traj;
}

}  // namespace squidsim
