// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "squidsim/errors.hpp"
#include "squidsim/potential.hpp"

namespace squidsim {

struct SpectrumResult {
    Eigen::VectorXd energies;  ///< lowest k eigenvalues, ascending
    Eigen::MatrixXd states;    ///< columns are the matching orthonormal eigenvectors
    bool near_degenerate = false;  ///< some gap below 1e-12 (ties kept in index order)
};

/// Lowest-k eigenpairs of a real symmetric matrix.
inline SpectrumResult eigensystem(const Eigen::MatrixXd& h, int k) {
    if (k < 1 || k > h.rows()) throw std::invalid_argument("eigensystem: bad k");
    if (h.rows() != h.cols() || hermiticity_defect(h) > 1e-10 * std::max(1.0, h.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("eigensystem: matrix is not symmetric");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success)
        throw ConvergenceFailure("eigensystem: dense symmetric solver did not converge");

    SpectrumResult r;
    r.energies = es.eigenvalues().head(k);
    r.states = es.eigenvectors().leftCols(k);
    for (int i = 0; i + 1 < k; ++i)
        if (r.energies[i + 1] - r.energies[i] < 1e-12) r.near_degenerate = true;
    return r;
}

/// The fixed two-level frame built from the lowest doublet at phi_ext = 0.
///
/// Axis convention: +x is the ground energy eigenstate, +z the left
/// (negative-phi) localized state, y completes a right-handed triad. The
/// probability of finding |L> is (1 + P_z)/2 and the probability of finding
/// the ground eigenstate is (1 + P_x)/2.
struct QubitFrame {
    double e1 = 0.0, e2 = 0.0;
    double v_x = 0.0;          ///< tunneling splitting E2 - E1
    Eigen::VectorXd state1, state2;  ///< phase-fixed doublet eigenvectors
    Eigen::VectorXd l_state, r_state;  ///< localized combinations (|E1> -+ |E2>)/sqrt(2)
    double phi_c = 0.0;        ///< <R|phi|R>, positive by convention
    double isolation = 0.0;    ///< (E3 - E2)/(E2 - E1)
    bool poor_isolation = false;  ///< isolation < 20 (warning, not an error)
    SpectrumResult spectrum;   ///< the lowest four eigenpairs used to build the frame
};

/// Build the two-level frame from the symmetric (phi_ext = 0) Hamiltonian.
///
/// Eigenvector global signs are fixed deterministically (largest-magnitude
/// coefficient positive); |R> = (|E1> + |E2>)/sqrt(2) with <R|phi|R> > 0,
/// flipping the sign of state2 when needed.
inline QubitFrame make_qubit_frame(const HamiltonianParams& p, const BasisRep& basis) {
    p.validate();
    if (p.phi_ext != 0.0)
        throw std::invalid_argument("make_qubit_frame: frame is defined at phi_ext = 0");

    const Eigen::MatrixXd h = build_hamiltonian(basis, p, 0.0);
    SpectrumResult sp = eigensystem(h, 4);

    for (int j = 0; j < sp.states.cols(); ++j) {
        int imax = 0;
        sp.states.col(j).cwiseAbs().maxCoeff(&imax);
        if (sp.states(imax, j) < 0.0) sp.states.col(j) = -sp.states.col(j);
    }

    QubitFrame f;
    f.e1 = sp.energies[0];
    f.e2 = sp.energies[1];
    f.v_x = f.e2 - f.e1;
    f.state1 = sp.states.col(0);
    f.state2 = sp.states.col(1);

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Eigen::VectorXd r = inv_sqrt2 * (f.state1 + f.state2);
    if (r.dot(basis.phi_matrix * r) < 0.0) {
        f.state2 = -f.state2;
        sp.states.col(1) = f.state2;
        r = inv_sqrt2 * (f.state1 + f.state2);
    }
    f.r_state = r;
    f.l_state = inv_sqrt2 * (f.state1 - f.state2);
    f.phi_c = r.dot(basis.phi_matrix * r);
    f.isolation = (sp.energies[2] - sp.energies[1]) / f.v_x;
    f.poor_isolation = f.isolation < 20.0;
    f.spectrum = std::move(sp);
    return f;
}

/// One wavefunction's contribution to the two-level density matrix, in the
/// localized (L, R) basis, plus the weight left outside the doublet.
struct QubitSample {
    Eigen::Matrix2cd rho;  ///< outer product of (<L|psi>, <R|psi>)
    double leakage;        ///< 1 - |<L|psi>|^2 - |<R|psi>|^2
};

inline QubitSample project_to_qubit(const Eigen::VectorXcd& psi, const QubitFrame& frame) {
    if (std::abs(psi.norm() - 1.0) > 1e-8)
        throw std::invalid_argument("project_to_qubit: psi is not normalized");
    const std::complex<double> a = frame.l_state.cast<std::complex<double>>().dot(psi);
    const std::complex<double> b = frame.r_state.cast<std::complex<double>>().dot(psi);
    QubitSample s;
    s.rho(0, 0) = a * std::conj(a);
    s.rho(0, 1) = a * std::conj(b);
    s.rho(1, 0) = b * std::conj(a);
    s.rho(1, 1) = b * std::conj(b);
    s.leakage = 1.0 - std::norm(a) - std::norm(b);
    return s;
}

/// Polarization vector of a 2x2 Hermitian block: P_i = Tr(rho sigma_i).
inline Eigen::Vector3d polarization(const Eigen::Matrix2cd& rho) {
    return {2.0 * rho(0, 1).real(), -2.0 * rho(0, 1).imag(),
            rho(0, 0).real() - rho(1, 1).real()};
}

struct CalibrationTargets {
    double isolation_min = 20.0;
    double vx_min = 0.01;
    double vx_max = 0.05;
    double mu_min = 5.0;
    double mu_max = 200.0;
    int n_scan = 49;
    int n_basis = 128;
};

struct CalibrationRow {
    double mu;
    double v_x;
    double isolation;
    bool qualifies;
};

struct CalibrationResult {
    double mu = 0.0;
    std::vector<CalibrationRow> scan;  ///< full scan table, ascending in mu
};

/// Scan mu over a log grid and return the smallest value whose frame meets
/// the isolation and splitting targets. The published device parameters do
/// not pin mu, so the committed default comes from this routine.
inline CalibrationResult calibrate_mu(double beta, double v0, const CalibrationTargets& t) {
    if (!(beta > 1.0))
        throw std::invalid_argument("calibrate_mu: beta must be > 1 (double-well regime)");
    if (!(t.mu_min > 0.0) || !(t.mu_max > t.mu_min) || t.n_scan < 2)
        throw std::invalid_argument("calibrate_mu: bad scan range");

    CalibrationResult result;
    const double log_lo = std::log(t.mu_min), log_hi = std::log(t.mu_max);
    bool found = false;
    for (int i = 0; i < t.n_scan; ++i) {
        HamiltonianParams p;
        p.mu = std::exp(log_lo + (log_hi - log_lo) * i / (t.n_scan - 1));
        p.beta = beta;
        p.v0 = v0;
        p.phi_ext = 0.0;
        const BasisRep basis = build_basis(p, t.n_basis);
        const QubitFrame f = make_qubit_frame(p, basis);
        CalibrationRow row{p.mu, f.v_x, f.isolation,
                           f.isolation >= t.isolation_min && f.v_x >= t.vx_min &&
                               f.v_x <= t.vx_max};
        if (row.qualifies && !found) {
            result.mu = row.mu;
            found = true;
        }
        result.scan.push_back(row);
    }
    if (!found)
        throw CalibrationFailed("calibrate_mu: no mu in [" + std::to_string(t.mu_min) + ", " +
                                std::to_string(t.mu_max) + "] meets the targets");
    return result;
}

}  // namespace squidsim
