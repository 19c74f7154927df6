// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "squidsim/errors.hpp"

namespace squidsim {

// Units: hbar = 1 throughout, so time is measured in 1/energy and the flux
// coordinate phi is dimensionless.

/// Physical parameters of the rf-SQUID Hamiltonian
///   H = -(1/2 mu) d^2/dphi^2 + V0 [ (phi - phi_ext)^2 / 2 + beta cos(phi) ].
struct HamiltonianParams {
    double mu = 13.5;      ///< effective mass of the flux coordinate
    double beta = 1.19;    ///< junction parameter; beta > 1 gives a double well
    double v0 = 14.0959633714662;  ///< scale; v0 * phi_c_classical = 14.149
    double phi_ext = 0.0;  ///< base external flux bias

    void validate() const {
        if (!(mu > 0.0)) throw std::invalid_argument("HamiltonianParams: mu must be > 0");
        if (!(v0 > 0.0)) throw std::invalid_argument("HamiltonianParams: v0 must be > 0");
    }

    /// beta <= 1 collapses the two wells into one; flagged, not fatal.
    bool double_well_regime() const { return beta > 1.0; }
};

/// Potential energy V(phi) at external flux phi_ext.
inline double potential_value(const HamiltonianParams& p, double phi, double phi_ext) {
    const double d = phi - phi_ext;
    return p.v0 * (0.5 * d * d + p.beta * std::cos(phi));
}

inline double potential_value(const HamiltonianParams& p, double phi) {
    return potential_value(p, phi, p.phi_ext);
}

struct WellInfo {
    double phi_c;      ///< positive-side minimum location
    double barrier;    ///< V(top) - V(phi_c)
    double phi_minus;  ///< negative-side minimum location
    double phi_top;    ///< barrier top between the two minima
};

namespace detail {

// Bisection for the single sign change of f in [a, b]. Function-value
// minimization stalls near sqrt(eps); the root of the derivative does not.
template <typename F>
double bisect_sign_change(F&& f, double a, double b) {
    double fa = f(a);
    for (int it = 0; it < 200 && (b - a) > 1e-15; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if ((fa < 0.0) == (fm < 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

/// Locate the two potential minima and the barrier between them.
/// Scans phi in [-pi, pi] and refines each stationary point.
/// Throws NoDoubleWell when fewer than two local minima exist.
inline WellInfo well_minima(const HamiltonianParams& p) {
    p.validate();
    constexpr int kScan = 4001;
    const double lo = -M_PI, hi = M_PI;
    const double h = (hi - lo) / (kScan - 1);
    auto U = [&](double phi) { return potential_value(p, phi); };
    auto dU = [&](double phi) { return p.v0 * ((phi - p.phi_ext) - p.beta * std::sin(phi)); };

    std::vector<double> minima;
    for (int i = 1; i + 1 < kScan; ++i) {
        const double x0 = lo + (i - 1) * h, x1 = lo + i * h, x2 = lo + (i + 1) * h;
        if (U(x1) < U(x0) && U(x1) < U(x2))
            minima.push_back(detail::bisect_sign_change(dU, x0, x2));
    }
    if (minima.size() < 2)
        throw NoDoubleWell("well_minima: found " + std::to_string(minima.size()) +
                           " local minimum(a) in [-pi, pi]; need two (beta > 1 and small phi_ext)");

    // Deepest minimum on each side of the barrier region; with two minima this
    // is simply the pair, ordered by position.
    double phi_minus = minima.front(), phi_plus = minima.back();
    // dU > 0 just past the left minimum, < 0 just before the right one
    const double phi_top = detail::bisect_sign_change(dU, phi_minus + h, phi_plus - h);

    WellInfo w;
    w.phi_minus = phi_minus;
    w.phi_c = phi_plus;
    w.phi_top = phi_top;
    w.barrier = U(phi_top) - U(phi_plus);
    return w;
}

/// Operator matrices in a truncated harmonic-oscillator basis with frequency
/// omega_b = sqrt(V0/mu), the curvature of the quadratic backbone of V.
struct BasisRep {
    int n_basis = 0;
    double omega_b = 0.0;
    double mu = 0.0;  // parameters the basis was built with
    double v0 = 0.0;
    Eigen::MatrixXd phi_matrix;      ///< flux operator, tridiagonal with zero diagonal
    Eigen::MatrixXd phi_sq_matrix;   ///< phi_matrix * phi_matrix
    Eigen::MatrixXd kinetic_matrix;  ///< -(1/2 mu) d^2/dphi^2
    Eigen::MatrixXd cos_matrix;      ///< cos(phi) via spectral decomposition of phi
    Eigen::MatrixXd h_matrix;        ///< Hamiltonian assembled at the params' phi_ext
};

inline Eigen::MatrixXd build_hamiltonian(const BasisRep& basis, const HamiltonianParams& p,
                                         double phi_ext_effective);

/// Build ladder-operator matrices for phi and the kinetic term, and cos(phi)
/// as a function of the operator: diagonalize phi, apply cos to its
/// eigenvalues, rotate back. Robust under truncation.
inline BasisRep build_basis(const HamiltonianParams& p, int n_basis) {
    p.validate();
    if (n_basis < 8) throw std::invalid_argument("build_basis: n_basis must be >= 8");

    BasisRep b;
    b.n_basis = n_basis;
    b.mu = p.mu;
    b.v0 = p.v0;
    b.omega_b = std::sqrt(p.v0 / p.mu);

    const int n = n_basis;
    const double x0 = 1.0 / std::sqrt(2.0 * p.mu * b.omega_b);  // phi = x0 (a + a†)

    b.phi_matrix = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) {
        const double v = x0 * std::sqrt(static_cast<double>(i + 1));
        b.phi_matrix(i, i + 1) = v;
        b.phi_matrix(i + 1, i) = v;
    }

    // p^2/2mu = (omega_b/4) (2n+1 - a^2 - a†^2)
    b.kinetic_matrix = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) b.kinetic_matrix(i, i) = 0.25 * b.omega_b * (2.0 * i + 1.0);
    for (int i = 0; i + 2 < n; ++i) {
        const double v =
            -0.25 * b.omega_b * std::sqrt(static_cast<double>((i + 1)) * (i + 2));
        b.kinetic_matrix(i, i + 2) = v;
        b.kinetic_matrix(i + 2, i) = v;
    }

    b.phi_sq_matrix = b.phi_matrix * b.phi_matrix;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.phi_matrix);
    if (es.info() != Eigen::Success)
        throw ConvergenceFailure("build_basis: eigensolve of phi operator failed");
    const Eigen::VectorXd cos_eval = es.eigenvalues().array().cos();
    Eigen::MatrixXd c = es.eigenvectors() * cos_eval.asDiagonal() * es.eigenvectors().transpose();
    b.cos_matrix = 0.5 * (c + c.transpose());

    b.h_matrix = build_hamiltonian(b, p, p.phi_ext);
    return b;
}

/// Assemble H at an effective external flux x:
///   H = kinetic + V0 [ phi^2/2 - x phi + x^2/2 + beta cos(phi) ].
/// Only the terms linear and constant in x change with the noise, so the
/// x-independent part could be cached; assembly is cheap next to the
/// propagator eigendecompositions, so it is recomputed here.
inline Eigen::MatrixXd build_hamiltonian(const BasisRep& basis, const HamiltonianParams& p,
                                         double phi_ext_effective) {
    p.validate();
    if (basis.n_basis < 8) throw std::invalid_argument("build_hamiltonian: basis not built");
    if (basis.mu != p.mu || basis.v0 != p.v0)
        throw std::invalid_argument("build_hamiltonian: basis was built with different mu/v0");

    const double x = phi_ext_effective;
    Eigen::MatrixXd h = basis.kinetic_matrix +
                        p.v0 * (0.5 * basis.phi_sq_matrix + p.beta * basis.cos_matrix) -
                        (p.v0 * x) * basis.phi_matrix;
    h.diagonal().array() += 0.5 * p.v0 * x * x;
    return h;
}

/// Max elementwise asymmetry; 0 for an exactly Hermitian real matrix.
inline double hermiticity_defect(const Eigen::MatrixXd& m) {
    return (m - m.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace squidsim
