// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include <squidsim/errors.hpp>
#include <squidsim/potential.hpp>

#include "oracles.hpp"

using namespace squidsim;
using Catch::Approx;

TEST_CASE("potential at the origin and under reflection", "[potential]") {
    HamiltonianParams p;
    CHECK(potential_value(p, 0.0) == Approx(p.v0 * p.beta).epsilon(1e-15));
    for (double phi = -3.0; phi <= 3.0; phi += 0.37)
        CHECK(potential_value(p, phi) == Approx(potential_value(p, -phi)).margin(1e-12));
}

TEST_CASE("external flux shifts the quadratic term only", "[potential]") {
    HamiltonianParams p;
    const double phi = 0.7, x = 0.013;
    const double expect = p.v0 * (0.5 * (phi - x) * (phi - x) + p.beta * std::cos(phi));
    CHECK(potential_value(p, phi, x) == Approx(expect).epsilon(1e-15));
}

TEST_CASE("well minima agree with the stationarity root", "[potential]") {
    HamiltonianParams p;
    p.v0 = 14.15;
    const WellInfo w = well_minima(p);
    const double root =
        oracle::bisect([&](double x) { return x - p.beta * std::sin(x); }, 0.5, 1.5);
    CHECK(w.phi_c == Approx(root).epsilon(1e-9));
    CHECK(w.phi_minus == Approx(-root).epsilon(1e-9));
    CHECK(w.phi_top == Approx(0.0).margin(1e-9));
    CHECK(root == Approx(1.00376254).epsilon(1e-7));

    const double barrier = p.v0 * (p.beta - (0.5 * root * root + p.beta * std::cos(root)));
    CHECK(w.barrier == Approx(barrier).epsilon(1e-8));
    CHECK(w.barrier == Approx(0.665).epsilon(0.01));
}

TEST_CASE("no double well below the critical beta", "[potential]") {
    HamiltonianParams p;
    p.beta = 0.5;
    CHECK_THROWS_AS(well_minima(p), NoDoubleWell);
}

TEST_CASE("oscillator-basis matrix elements", "[potential]") {
    HamiltonianParams p;
    const BasisRep b = build_basis(p, 64);
    CHECK(b.omega_b == Approx(std::sqrt(p.v0 / p.mu)).epsilon(1e-15));

    for (int i = 0; i < 10; ++i) {
        CHECK(b.phi_matrix(i, i + 1) ==
              Approx(std::sqrt((i + 1) / (2.0 * p.mu * b.omega_b))).epsilon(1e-13));
        CHECK(b.phi_matrix(i, i) == 0.0);
        CHECK(b.kinetic_matrix(i, i) == Approx(0.25 * b.omega_b * (2 * i + 1)).epsilon(1e-13));
        CHECK(b.kinetic_matrix(i, i + 2) ==
              Approx(-0.25 * b.omega_b * std::sqrt((i + 1.0) * (i + 2.0))).epsilon(1e-13));
        CHECK(b.kinetic_matrix(i, i + 1) == 0.0);
    }
    CHECK((b.phi_sq_matrix - b.phi_matrix * b.phi_matrix).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cos matrix is symmetric with spectrum inside [-1, 1]", "[potential]") {
    HamiltonianParams p;
    const BasisRep b = build_basis(p, 64);
    CHECK((b.cos_matrix - b.cos_matrix.transpose()).cwiseAbs().maxCoeff() < 1e-13);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.cos_matrix);
    CHECK(es.eigenvalues().minCoeff() >= -1.0 - 1e-9);
    CHECK(es.eigenvalues().maxCoeff() <= 1.0 + 1e-9);
}

TEST_CASE("cos matrix block is stable under truncation growth", "[potential]") {
    HamiltonianParams p;
    const BasisRep b8 = build_basis(p, 8);
    const BasisRep b16 = build_basis(p, 16);
    CHECK((b8.cos_matrix.topLeftCorner(4, 4) - b16.cos_matrix.topLeftCorner(4, 4))
              .cwiseAbs()
              .maxCoeff() < 1e-6);
}

TEST_CASE("hamiltonian assembly is hermitian and linear in the flux", "[potential]") {
    HamiltonianParams p;
    const BasisRep b = build_basis(p, 32);
    CHECK(hermiticity_defect(b.h_matrix) == 0.0);

    const double e = 0.01, d = 0.003;
    const Eigen::MatrixXd h0 = build_hamiltonian(b, p, e);
    const Eigen::MatrixXd h1 = build_hamiltonian(b, p, e + d);
    const Eigen::MatrixXd expect =
        h0 - p.v0 * d * b.phi_matrix +
        p.v0 * d * (e + 0.5 * d) * Eigen::MatrixXd::Identity(32, 32);
    CHECK((h1 - expect).cwiseAbs().maxCoeff() < 1e-12 * b.h_matrix.cwiseAbs().maxCoeff());
}

TEST_CASE("basis rejects mismatched parameters", "[potential]") {
    HamiltonianParams p;
    const BasisRep b = build_basis(p, 16);
    HamiltonianParams q = p;
    q.mu = p.mu * 2.0;
    CHECK_THROWS_AS(build_hamiltonian(b, q, 0.0), std::invalid_argument);
}
