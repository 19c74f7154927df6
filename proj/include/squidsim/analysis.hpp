// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "squidsim/errors.hpp"
#include "squidsim/spectrum.hpp"

namespace squidsim {

struct FitResult {
    enum class Model { exponential, damped_cosine };
    Model model = Model::exponential;
    std::map<std::string, double> params;
    double rms_residual = 0.0;
    bool converged = false;
    bool degenerate = false;  ///< decay rate not identifiable from this series
    std::string warning;
};

struct Tolerances {
    double d_rel_tol = 0.20;
    double omega_rel_tol = 0.05;
    double gamma_rel_tol = 0.25;
    double endpoint_tol = 0.02;
    double leakage_max = 0.01;
    double pz_rms_tol = 0.05;
};

namespace detail {

// residuals r(theta) and Jacobian dr/dtheta, written into the out-params
using LmEval = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd&)>;

/// Marquardt-scaled damping, multiplicative lambda schedule. Convergence is
/// a relative step test against per-parameter floor scales.
inline bool levenberg_marquardt(Eigen::VectorXd& theta, const LmEval& eval,
                                const Eigen::VectorXd& scale_floor, int max_iter = 200,
                                double rel_tol = 1e-10) {
    const auto n_par = theta.size();
    Eigen::VectorXd r, r_new;
    Eigen::MatrixXd j, j_new;
    eval(theta, r, j);
    double cost = r.squaredNorm();
    double lambda = 1e-3;

    for (int iter = 0; iter < max_iter; ++iter) {
        Eigen::MatrixXd a = j.transpose() * j;
        const Eigen::VectorXd g = j.transpose() * r;
        for (Eigen::Index k = 0; k < n_par; ++k)
            a(k, k) += lambda * std::max(a(k, k), 1e-300);
        const Eigen::VectorXd delta = a.ldlt().solve(-g);
        const Eigen::VectorXd theta_new = theta + delta;
        eval(theta_new, r_new, j_new);
        const double cost_new = r_new.squaredNorm();
        if (std::isfinite(cost_new) && cost_new <= cost) {
            theta = theta_new;
            r.swap(r_new);
            j.swap(j_new);
            cost = cost_new;
            lambda = std::max(lambda * 0.3, 1e-12);
            bool small = true;
            for (Eigen::Index k = 0; k < n_par; ++k)
                small = small &&
                        std::abs(delta[k]) <= rel_tol * std::max(std::abs(theta[k]), scale_floor[k]);
            if (small) return true;
        } else {
            lambda *= 10.0;
            if (lambda > 1e14) return false;
        }
    }
    return false;
}

inline double safe_exp(double x) { return std::exp(std::clamp(x, -700.0, 700.0)); }

inline void check_grid(const std::vector<double>& times, std::size_t n_values,
                       const char* who) {
    if (times.size() != n_values)
        throw std::invalid_argument(std::string(who) + ": times/values length mismatch");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument(std::string(who) + ": time grid must increase");
}

}  // namespace detail

/// Weighted fit of rho11(t) to 1/2 (1 + A e^{-D t}). The stderr series, if
/// given, supplies inverse weights; zero entries fall back to the smallest
/// positive one.
inline FitResult fit_exponential(const std::vector<double>& times,
                                 const std::vector<double>& rho11,
                                 const std::vector<double>& stderr_rho11 = {}) {
    detail::check_grid(times, rho11.size(), "fit_exponential");
    const std::size_t n = times.size();
    if (n < 10) throw std::invalid_argument("fit_exponential: need at least 10 points");
    for (double v : rho11)
        if (!(v >= -1e-8 && v <= 1.0 + 1e-8))
            throw std::invalid_argument("fit_exponential: rho11 values must lie in [0, 1]");
    if (!stderr_rho11.empty() && stderr_rho11.size() != n)
        throw std::invalid_argument("fit_exponential: stderr length mismatch");

    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = 2.0 * rho11[i] - 1.0;

    std::vector<double> w(n, 1.0);
    if (!stderr_rho11.empty()) {
        double floor = 0.0;
        for (double s : stderr_rho11)
            if (s > 0.0 && (floor == 0.0 || s < floor)) floor = s;
        if (floor > 0.0)
            for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::max(stderr_rho11[i], floor);
    }

    FitResult fit;
    fit.model = FitResult::Model::exponential;

    double y_max = 0.0;
    for (double v : y) y_max = std::max(y_max, std::abs(v));
    if (y_max < 0.01) {
        fit.degenerate = true;
        fit.warning = "series is flat at 1/2; decay rate unidentifiable";
        fit.params["A"] = 0.0;
        fit.params["D"] = 0.0;
        return fit;
    }

    // log-slope of the first half seeds (A, D)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < n / 2; ++i) {
        if (std::abs(y[i]) < 1e-12) continue;
        const double ly = std::log(std::abs(y[i]));
        sx += times[i];
        sy += ly;
        sxx += times[i] * times[i];
        sxy += times[i] * ly;
        ++cnt;
    }
    const double t_span = times.back() - times.front();
    double d0 = 1.0 / std::max(t_span, 1e-300), a0 = y.front();
    if (cnt >= 3) {
        const double den = cnt * sxx - sx * sx;
        if (std::abs(den) > 0.0) {
            const double slope = (cnt * sxy - sx * sy) / den;
            if (slope < 0.0) d0 = -slope;
            const double sign = y[0] >= 0.0 ? 1.0 : -1.0;
            a0 = sign * detail::safe_exp((sy - slope * sx) / cnt);
        }
    }

    auto eval = [&](const Eigen::VectorXd& th, Eigen::VectorXd& r, Eigen::MatrixXd& j) {
        const double a = th[0], d = th[1];
        r.resize(static_cast<Eigen::Index>(n));
        j.resize(static_cast<Eigen::Index>(n), 2);
        for (std::size_t i = 0; i < n; ++i) {
            const double e = detail::safe_exp(-d * times[i]);
            const auto k = static_cast<Eigen::Index>(i);
            r[k] = w[i] * (a * e - y[i]);
            j(k, 0) = w[i] * e;
            j(k, 1) = -w[i] * a * times[i] * e;
        }
    };

    Eigen::VectorXd theta(2);
    theta << a0, d0;
    Eigen::VectorXd floors(2);
    floors << 1.0, 1.0 / std::max(t_span, 1e-300);
    fit.converged = detail::levenberg_marquardt(theta, eval, floors);
    if (!fit.converged) throw FitDiverged("fit_exponential: no convergence in 200 iterations");

    fit.params["A"] = theta[0];
    fit.params["D"] = theta[1];
    if (theta[1] < 0.0) {
        fit.converged = false;
        fit.warning = "fitted rate is negative; series does not decay";
    }

    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = theta[0] * detail::safe_exp(-theta[1] * times[i]) - y[i];
        ss += e * e;
    }
    fit.rms_residual = std::sqrt(ss / static_cast<double>(n));

    // a sign change while fewer than 3 e-foldings are on record means the
    // tail is noise-dominated; flag it but keep the fit
    for (std::size_t i = 1; i < n; ++i) {
        if (y[i] * y[0] < 0.0) {
            if (fit.params["D"] * times[i] < 3.0) {
                fit.degenerate = true;
                fit.warning = "series crosses 1/2 before three e-foldings of data";
            }
            break;
        }
    }
    return fit;
}

/// Fit P_z(t) to the closed form e^{-g t}(cos(W t) + (g/W) sin(W t)).
inline FitResult fit_damped_cosine(const std::vector<double>& times,
                                   const std::vector<double>& pz) {
    detail::check_grid(times, pz.size(), "fit_damped_cosine");
    const std::size_t n = times.size();
    if (n < 16) throw std::invalid_argument("fit_damped_cosine: need at least 16 points");

    // light smoothing so crossing/extremum counts reflect the oscillation,
    // not per-sample Monte Carlo jitter
    const std::size_t half = std::min<std::size_t>(2, n / 8);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(n - 1, i + half);
        double acc = 0.0;
        for (std::size_t k = lo; k <= hi; ++k) acc += pz[k];
        s[i] = acc / static_cast<double>(hi - lo + 1);
    }

    std::vector<double> crossings;
    for (std::size_t i = 1; i < n; ++i) {
        if (s[i - 1] == 0.0) continue;
        if (s[i - 1] * s[i] < 0.0) {
            const double frac = s[i - 1] / (s[i - 1] - s[i]);
            crossings.push_back(times[i - 1] + frac * (times[i] - times[i - 1]));
        }
    }
    if (crossings.size() < 4)
        throw TooFewOscillations("fit_damped_cosine: need at least 4 visible extrema");

    const double half_period =
        (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
    const double omega0 = M_PI / half_period;

    // extremum magnitude between consecutive crossings gives the envelope
    double gx = 0, gy = 0, gxx = 0, gxy = 0;
    std::size_t gcnt = 0;
    std::size_t start = 0;
    for (std::size_t c = 0; c + 1 < crossings.size(); ++c) {
        double best = 0.0, t_best = 0.0;
        for (std::size_t i = start; i < n && times[i] < crossings[c + 1]; ++i) {
            if (times[i] <= crossings[c]) {
                start = i;
                continue;
            }
            if (std::abs(s[i]) > best) {
                best = std::abs(s[i]);
                t_best = times[i];
            }
        }
        if (best > 1e-12) {
            const double lv = std::log(best);
            gx += t_best;
            gy += lv;
            gxx += t_best * t_best;
            gxy += t_best * lv;
            ++gcnt;
        }
    }
    double gamma0 = 0.0;
    if (gcnt >= 2) {
        const double den = gcnt * gxx - gx * gx;
        if (std::abs(den) > 0.0) gamma0 = std::max(0.0, -(gcnt * gxy - gx * gy) / den);
    }

    auto eval = [&](const Eigen::VectorXd& th, Eigen::VectorXd& r, Eigen::MatrixXd& j) {
        const double g = th[0], om = th[1];
        r.resize(static_cast<Eigen::Index>(n));
        j.resize(static_cast<Eigen::Index>(n), 2);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = times[i];
            const double env = detail::safe_exp(-g * t);
            const double c = std::cos(om * t), sn = std::sin(om * t);
            const double f = env * (c + (g / om) * sn);
            const auto k = static_cast<Eigen::Index>(i);
            r[k] = f - pz[i];
            j(k, 0) = -t * f + env * sn / om;
            j(k, 1) = env * (-t * sn + (g * t / om) * c - (g / (om * om)) * sn);
        }
    };

    Eigen::VectorXd theta(2);
    theta << gamma0, omega0;
    Eigen::VectorXd floors(2);
    floors << omega0, omega0;

    FitResult fit;
    fit.model = FitResult::Model::damped_cosine;
    fit.converged = detail::levenberg_marquardt(theta, eval, floors);
    if (!fit.converged) throw FitDiverged("fit_damped_cosine: no convergence in 200 iterations");

    double gamma = theta[0];
    if (gamma < 0.0 && gamma > -1e-8 * theta[1]) gamma = 0.0;
    if (gamma < 0.0) {
        fit.converged = false;
        fit.warning = "fitted envelope rate is negative";
    }
    fit.params["gamma"] = gamma;
    fit.params["omega"] = theta[1];
    fit.params["phase"] = 0.0;
    fit.params["amplitude"] = 1.0;

    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double env = detail::safe_exp(-gamma * times[i]);
        const double f =
            env * (std::cos(theta[1] * times[i]) + (gamma / theta[1]) * std::sin(theta[1] * times[i]));
        const double e = f - pz[i];
        ss += e * e;
    }
    fit.rms_residual = std::sqrt(ss / static_cast<double>(n));
    return fit;
}

inline double rms_deviation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("rms_deviation: size mismatch");
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(ss / static_cast<double>(a.size()));
}

struct CheckRow {
    std::string name;
    double value = 0.0;
    double reference = 0.0;
    double deviation = 0.0;  ///< relative where reference != 0, absolute otherwise
    double tolerance = 0.0;
    bool pass = false;
};

struct ComparisonReport {
    std::string experiment;
    double d_pred = 0.0;
    std::vector<CheckRow> checks;
    bool all_pass = false;
    nlohmann::json config_echo;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["experiment"] = experiment;
        j["d_pred"] = d_pred;
        j["all_pass"] = all_pass;
        j["checks"] = nlohmann::json::array();
        for (const auto& c : checks)
            j["checks"].push_back({{"name", c.name},
                                   {"value", c.value},
                                   {"reference", c.reference},
                                   {"deviation", c.deviation},
                                   {"tolerance", c.tolerance},
                                   {"pass", c.pass}});
        if (!config_echo.is_null()) j["config"] = config_echo;
        return j;
    }

    std::string to_text() const {
        std::string out = experiment + ": d_pred = " + std::to_string(d_pred) + "\n";
        for (const auto& c : checks) {
            out += "  " + c.name + ": " + std::to_string(c.value) + " vs " +
                   std::to_string(c.reference) + " (dev " + std::to_string(c.deviation) +
                   ", tol " + std::to_string(c.tolerance) + ") " + (c.pass ? "ok" : "FAIL") +
                   "\n";
        }
        out += all_pass ? "all checks passed\n" : "some checks FAILED\n";
        return out;
    }
};

namespace detail {

inline CheckRow rel_check(const std::string& name, double value, double reference,
                          double tol) {
    CheckRow c{name, value, reference, 0.0, tol, false};
    c.deviation = reference != 0.0 ? std::abs(value - reference) / std::abs(reference)
                                   : std::abs(value);
    c.pass = c.deviation <= tol;
    return c;
}

}  // namespace detail

/// Assemble the simulation-vs-prediction report for a converged fit.
inline ComparisonReport compare_report(const FitResult& fit, double predicted_d,
                                       const QubitFrame& frame, double max_leakage,
                                       const Tolerances& tol = {},
                                       nlohmann::json config_echo = {}) {
    if (!fit.converged)
        throw std::invalid_argument("compare_report: fit did not converge");

    ComparisonReport rep;
    rep.d_pred = predicted_d;
    rep.config_echo = std::move(config_echo);

    if (fit.model == FitResult::Model::exponential) {
        rep.experiment = "dephasing";
        rep.checks.push_back(
            detail::rel_check("d_hat_vs_pred", fit.params.at("D"), predicted_d, tol.d_rel_tol));
    } else {
        rep.experiment = "damped_oscillation";
        rep.checks.push_back(
            detail::rel_check("omega_vs_vx", fit.params.at("omega"), frame.v_x, tol.omega_rel_tol));
        rep.checks.push_back(detail::rel_check("gamma_vs_half_d", fit.params.at("gamma"),
                                               0.5 * predicted_d, tol.gamma_rel_tol));
    }
    CheckRow leak{"max_leakage", max_leakage, 0.0, max_leakage, tol.leakage_max,
                  max_leakage <= tol.leakage_max};
    rep.checks.push_back(leak);
    CheckRow iso{"isolation", frame.isolation, 20.0, frame.isolation, 20.0,
                 frame.isolation >= 20.0};
    rep.checks.push_back(iso);

    rep.all_pass = true;
    for (const auto& c : rep.checks) rep.all_pass = rep.all_pass && c.pass;
    return rep;
}

}  // namespace squidsim
