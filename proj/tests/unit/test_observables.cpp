#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qnet/error.hpp"
#include "qnet/observables.hpp"
#include "support.hpp"

using namespace qnet;
using qnet::testing::grid;
using qnet::testing::make_preset;
using qnet::testing::random_density;
using qnet::testing::random_hermitian;

TEST(Population, BoundedByTheSiteDimension) {
    const ProductBasis basis({SiteDescriptor::qubit("q"), SiteDescriptor::spin("bat", 4)});
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix rho = random_density(rng, 8);
        const double nq = population(basis, rho, "q");
        const double nb = population(basis, rho, "bat");
        EXPECT_GE(nq, 0.0);
        EXPECT_LE(nq, 1.0);
        EXPECT_GE(nb, 0.0);
        EXPECT_LE(nb, 3.0);
    }
    const Matrix top = DensityMatrix::from_pure(basis_state(basis, {1, 3})).matrix();
    EXPECT_DOUBLE_EQ(population(basis, top, "bat"), 3.0);
    EXPECT_THROW(population(basis, top, "x"), ValidationError);
}

TEST(PurityRate, MatchesNumericalDerivative) {
    const auto p = make_preset("hop_transfer");
    const auto basis = p.spec.basis();
    const LindbladGenerator gen(p.spec, basis);
    const auto traj = propagate(p.spec, p.initial, grid(4.0, 4001, 1e-3));
    for (std::size_t k : {500u, 1500u, 3000u}) {
        const double numeric = (traj.purity[k + 1] - traj.purity[k - 1]) / (traj.times[k + 1] - traj.times[k - 1]);
        const auto pr = purity_and_rate(traj.snapshots[k], gen);
        EXPECT_NEAR(pr.purity, traj.purity[k], 1e-12);
        EXPECT_NEAR(pr.rate, numeric, 1e-6);
        EXPECT_NEAR(traj.purity_rate[k], pr.rate, 1e-12);
    }
}

TEST(Eigenbasis, AscendingAndOrthonormal) {
    std::mt19937_64 rng(32);
    const Matrix h = random_hermitian(rng, 6);
    const Eigenbasis eb(h);
    ASSERT_EQ(eb.size(), 6u);
    for (Eigen::Index k = 1; k < 6; ++k) EXPECT_LE(eb.energies()(k - 1), eb.energies()(k));
    EXPECT_LT(max_abs(eb.vectors().adjoint() * eb.vectors() - Matrix::Identity(6, 6)), 1e-12);
    EXPECT_LT(max_abs(h * eb.vectors() - eb.vectors() * eb.energies().cast<Complex>().asDiagonal()), 1e-11);
    const Matrix rho = random_density(rng, 6);
    const Complex direct = eb.vectors().col(1).adjoint() * rho * eb.vectors().col(4);
    EXPECT_LT(std::abs(eb.element(rho, 1, 4) - direct), 1e-14);
    EXPECT_LT(std::abs(eigenbasis_element(rho, h, 1, 4) - direct), 1e-12);
    EXPECT_THROW(eb.element(rho, 6, 0), ValidationError);
}

TEST(Eigenbasis, DegenerateClustersAreReproducible) {
    // H = diag(1, 1, 2) rotated so the degenerate pair is not axis aligned
    Matrix h = Matrix::Zero(3, 3);
    h(0, 0) = 1.5;
    h(1, 1) = 1.5;
    h(0, 1) = h(1, 0) = 0.5;
    h(2, 2) = 1.0;
    const Eigenbasis a(h);
    const Eigenbasis b{Matrix(h)};
    EXPECT_NEAR(a.energies()(0), 1.0, 1e-14);
    EXPECT_NEAR(a.energies()(1), 1.0, 1e-14);
    EXPECT_EQ(max_abs(a.vectors() - b.vectors()), 0.0);
    // Gram-Schmidt against unit vectors: the first vector has a real positive leading entry
    EXPECT_GT(a.vectors()(0, 0).real(), 0.0);
    EXPECT_EQ(a.vectors()(0, 0).imag(), 0.0);
}

TEST(Unitary, EvolutionAndDistance) {
    std::mt19937_64 rng(33);
    const Matrix h = random_hermitian(rng, 4);
    const Matrix rho = random_density(rng, 4);
    const Matrix forward = unitary_evolve(h, rho, 1.3);
    EXPECT_LT(max_abs(back_evolve(h, forward, 1.3) - rho), 1e-12);
    EXPECT_LT(unitarity_distance(forward, rho, h, 1.3), 1e-12);
    EXPECT_NEAR(operator_distance(rho, rho), 0.0, 1e-15);
    const Matrix shifted = rho + 0.25 * Matrix::Identity(4, 4);
    EXPECT_NEAR(operator_distance(shifted, rho), 0.25, 1e-12);
    EXPECT_NEAR(std::abs(purity_and_rate(forward, LindbladGenerator(h, {})).rate), 0.0, 1e-12);
    EXPECT_LT(max_abs(Eigenbasis(h).evolve(rho, 1.3) - forward), 1e-12);
}

TEST(PartialTrace, ProductStatesFactorize) {
    const ProductBasis basis({SiteDescriptor::qubit("a"), SiteDescriptor::spin("b", 3), SiteDescriptor::qubit("c")});
    std::mt19937_64 rng(34);
    const Matrix ra = random_density(rng, 2), rb = random_density(rng, 3), rc = random_density(rng, 2);
    const Matrix rho = kron(kron(ra, rb), rc);
    EXPECT_LT(max_abs(partial_trace(basis, rho, {"b"}) - rb), 1e-14);
    EXPECT_LT(max_abs(partial_trace(basis, rho, {"a", "c"}) - kron(ra, rc)), 1e-14);
    EXPECT_LT(max_abs(partial_trace(basis, rho, {"c", "a"}) - kron(ra, rc)), 1e-14);
    EXPECT_EQ(reduced_basis(basis, {"c", "b"}).site(0).label, "b");
    EXPECT_THROW(partial_trace(basis, rho, {}), ValidationError);
    EXPECT_THROW(partial_trace(basis, rho, {"a", "a"}), ValidationError);
}

TEST(ExponentialFit, RecoversRateAndAmplitude) {
    std::vector<double> t, v;
    for (int k = 0; k < 50; ++k) {
        t.push_back(0.2 * k);
        v.push_back(3.0 * std::exp(-0.7 * t.back()));
    }
    v.push_back(0.0);
    t.push_back(10.0);
    const auto fit = fit_exponential_decay(t, v);
    EXPECT_NEAR(fit.rate, 0.7, 1e-12);
    EXPECT_NEAR(fit.amplitude, 3.0, 1e-11);
    EXPECT_EQ(fit.points, 50u);
    EXPECT_LT(fit.log_rms, 1e-12);
    EXPECT_THROW(fit_exponential_decay({0.0}, {1.0}), ValidationError);
    EXPECT_THROW(fit_exponential_decay({0.0, 1.0}, {1.0}), ValidationError);
}

TEST(InteractionResidual, VanishesOnStatesInsideEigenspaces) {
    const auto p = make_preset("hop_transfer");
    const auto basis = p.spec.basis();
    const LindbladGenerator gen(p.spec, basis);
    // |0,0,1> and |0,0,0> are dark for the transfer s2 -> s3
    const Matrix dark = DensityMatrix::from_pure(basis_state(basis, {0, 0, 1})).matrix();
    EXPECT_LT(interaction_picture_residual(gen, dark, 2.0), 1e-14);
    EXPECT_GT(interaction_picture_residual(gen, p.initial.matrix(), 0.0), 1e-3);
}

TEST(HopTransfer, DistanceDecaysAtGammaAndCoherenceSettlesOnACircle) {
    const double J = 2.0, gamma = 1.0;
    const auto p = make_preset("hop_transfer", {{"J", J}, {"gamma", gamma}});
    const auto basis = p.spec.basis();
    const Matrix h = build_hamiltonian(p.spec, basis);
    const auto traj = propagate(p.spec, p.initial, grid(12.0 / gamma, 121));
    // reference state from the last snapshot, carried back under H alone
    const Matrix tilde = back_evolve(h, traj.snapshots.back(), traj.times.back());
    EXPECT_LT(interaction_picture_residual(LindbladGenerator(p.spec, basis), tilde, traj.times.back()), 1e-4);

    std::vector<double> t, d;
    for (std::size_t k = 0; k < traj.times.size() && traj.times[k] <= 5.0 / gamma + 1e-12; ++k) {
        t.push_back(traj.times[k]);
        d.push_back(unitarity_distance(traj.snapshots[k], tilde, h, traj.times[k]));
    }
    EXPECT_NEAR(fit_exponential_decay(t, d).rate, gamma, 0.01 * gamma);

    Vector plus = Vector::Zero(4), minus = Vector::Zero(4);
    plus(2) = plus(1) = minus(2) = 1.0 / std::sqrt(2.0);  // |1,0> and |0,1> of (s1, s2)
    minus(1) = -plus(1);
    const std::size_t k10 = 100;  // t = 10 / gamma
    ASSERT_NEAR(traj.times[k10], 10.0 / gamma, 1e-12);
    const Matrix r12 = partial_trace(basis, traj.snapshots[k10], {"s1", "s2"});
    const Complex c = minus.adjoint() * r12 * plus;
    EXPECT_NEAR(std::abs(c), gamma / (2.0 * std::sqrt(J * J + gamma * gamma)), 1e-4);
}
