#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qnet/dynamics.hpp"
#include "qnet/error.hpp"
#include "support.hpp"

using namespace qnet;
using qnet::testing::grid;
using qnet::testing::make_preset;
using qnet::testing::random_density;
using qnet::testing::random_hermitian;
using qnet::testing::random_matrix;

namespace {

NetworkSpec mixed_network() {
    NetworkSpec spec;
    spec.sites = {SiteDescriptor::qubit("a"), SiteDescriptor::spin("b", 3), SiteDescriptor::qubit("c")};
    spec.hoppings = {{"a", "b", 0.8}, {"b", "c", 0.5}};
    spec.onsite_energies = {{"c", -0.3}};
    spec.jumps = {Transfer{"a", "b", 0.2}, Injection{"a", 0.1}, Extraction{"c", 0.25}, Dissipation{"b", 0.05},
                  Dephasing{"c", 0.15}};
    return spec;
}

std::size_t idx(const ProductBasis& b, std::vector<int> occ) { return b.flat_index(occ); }

}  // namespace

TEST(LindbladGenerator, OutputIsTracelessAndHermitian) {
    const auto spec = mixed_network();
    const auto basis = spec.basis();
    const LindbladGenerator gen(spec, basis);
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix rho = random_density(rng, 12);
        const Matrix out = lindblad_apply(gen, rho);
        EXPECT_LT(std::abs(out.trace()), 1e-12);
        EXPECT_LT(hermiticity_error(out), 1e-12);
        EXPECT_LT(max_abs(gen.apply_hermitian(rho) - out), 1e-12);
    }
}

TEST(LindbladGenerator, MatchesTheTextbookFormOnArbitraryInput) {
    const auto spec = mixed_network();
    const auto basis = spec.basis();
    const LindbladGenerator gen(spec, basis);
    const Matrix h = build_hamiltonian(spec, basis);
    const auto L = build_jump_operators(spec, basis);
    std::mt19937_64 rng(12);
    const Matrix x = random_matrix(rng, 12);
    Matrix expected = -kI * (h * x - x * h);
    Matrix diss = Matrix::Zero(12, 12);
    for (const auto& l : L) {
        const Matrix ll = l.adjoint() * l;
        diss += l * x * l.adjoint() - 0.5 * (ll * x + x * ll);
        EXPECT_LT(max_abs(dissipator_term(l, x) - (l * x * l.adjoint() - 0.5 * (ll * x + x * ll))), 1e-13);
    }
    expected += diss;
    EXPECT_LT(max_abs(gen.apply(x) - expected), 1e-12);
    EXPECT_LT(max_abs(gen.dissipator(x) - diss), 1e-12);
}

TEST(LindbladGenerator, NoJumpsIsACommutator) {
    std::mt19937_64 rng(13);
    const Matrix h = random_hermitian(rng, 5);
    const LindbladGenerator gen(h, {});
    const Matrix rho = random_density(rng, 5);
    EXPECT_LT(max_abs(gen.apply(rho) + kI * (h * rho - rho * h)), 1e-13);
    EXPECT_LT(max_abs(gen.apply(h)), 1e-13);
}

TEST(LindbladGenerator, RejectsInconsistentOperators) {
    Matrix nonherm = Matrix::Zero(2, 2);
    nonherm(0, 1) = 1.0;
    EXPECT_THROW(LindbladGenerator(nonherm, {}), ValidationError);
    EXPECT_THROW(LindbladGenerator(Matrix::Identity(2, 2), {Matrix::Identity(3, 3)}), ValidationError);
    const LindbladGenerator gen(Matrix::Identity(2, 2), {});
    EXPECT_THROW(gen.apply(Matrix::Identity(3, 3)), ValidationError);
}

TEST(Propagation, TwoSiteTransferClosedForm) {
    for (double gamma : {0.1, 1.0}) {
        const auto p = make_preset("two_site_transfer", {{"gamma", gamma}});
        const auto basis = p.spec.basis();
        // (|10> + |01>)/sqrt(2)
        Matrix rho = Matrix::Zero(4, 4);
        const auto i10 = static_cast<Eigen::Index>(idx(basis, {1, 0}));
        const auto i01 = static_cast<Eigen::Index>(idx(basis, {0, 1}));
        rho(i10, i10) = rho(i01, i01) = rho(i10, i01) = rho(i01, i10) = 0.5;
        auto cfg = grid(10.0, 21);
        cfg.coherences = {{static_cast<std::size_t>(i10), static_cast<std::size_t>(i01)}};
        const auto traj = propagate(p.spec, DensityMatrix(rho), cfg);
        for (std::size_t k = 0; k < traj.times.size(); ++k) {
            const double t = traj.times[k];
            EXPECT_NEAR(traj.populations[k][0], 0.5 * std::exp(-gamma * t), 1e-9);
            EXPECT_NEAR(traj.populations[k][1], 1.0 - 0.5 * std::exp(-gamma * t), 1e-9);
            EXPECT_NEAR(std::abs(traj.coherence_values[k][0] - 0.5 * std::exp(-0.5 * gamma * t)), 0.0, 1e-9);
        }
    }
}

TEST(Propagation, TransferOnlyConservesNumber) {
    const auto p = make_preset("hop_transfer", {{"gamma", 0.7}});
    const auto traj = propagate(p.spec, p.initial, grid(8.0, 17));
    for (double n : traj.total_number()) EXPECT_NEAR(n, 2.0, 1e-10);
    for (double tr : traj.trace) EXPECT_NEAR(tr, 1.0, 1e-12);
    EXPECT_LE(traj.invariants.max_trace_error, 1e-12);
    EXPECT_FALSE(traj.number_sector_used);
}

TEST(Propagation, RungeKuttaMatchesExactExponential) {
    const auto spec = mixed_network();
    const auto basis = spec.basis();
    std::mt19937_64 rng(14);
    const DensityMatrix rho0(random_density(rng, 12));
    const auto rk = propagate(spec, rho0, grid(6.0, 13));
    const auto ex = propagate(spec, rho0, grid(6.0, 13, 1e-3, PropagationMethod::superoperator_expm));
    ASSERT_EQ(rk.snapshots.size(), ex.snapshots.size());
    for (std::size_t k = 0; k < rk.snapshots.size(); ++k) EXPECT_LT(max_abs(rk.snapshots[k] - ex.snapshots[k]), 1e-10);
}

TEST(Propagation, ObserverSeesEverySample) {
    const auto p = make_preset("two_site_pump");
    std::vector<double> seen;
    propagate(p.spec, p.initial, grid(1.0, 6), [&](std::size_t k, double t, const Matrix& rho) {
        EXPECT_EQ(k, seen.size());
        EXPECT_EQ(rho.rows(), 4);
        seen.push_back(t);
    });
    ASSERT_EQ(seen.size(), 6u);
    EXPECT_DOUBLE_EQ(seen.back(), 1.0);
}

TEST(Propagation, GridAndStepValidation) {
    const auto p = make_preset("two_site_pump");
    auto cfg = grid(1.0, 3);
    cfg.times = {0.1, 0.5};
    EXPECT_THROW(propagate(p.spec, p.initial, cfg), ValidationError);
    cfg.times = {0.0, 0.5, 0.5};
    EXPECT_THROW(propagate(p.spec, p.initial, cfg), ValidationError);
    cfg = grid(1.0, 3);
    cfg.dt = 0.0;
    EXPECT_THROW(propagate(p.spec, p.initial, cfg), ValidationError);
    cfg = grid(1.0, 3);
    cfg.coherences = {{0, 4}};
    EXPECT_THROW(propagate(p.spec, p.initial, cfg), ValidationError);
    const auto other = make_preset("three_site_pump");
    EXPECT_THROW(propagate(p.spec, other.initial, grid(1.0, 3)), ValidationError);
    const auto traj = propagate(p.spec, p.initial, grid(1.0, 3));
    EXPECT_THROW(traj.population("nowhere"), ValidationError);
}

TEST(Propagation, CoarseStepRaisesInvariantViolation) {
    const auto p = make_preset("hop_transfer", {{"gamma", 40.0}});
    auto cfg = grid(5.0, 6, 0.25);
    EXPECT_THROW(propagate(p.spec, p.initial, cfg), InvariantViolation);
    cfg.check_invariants = false;
    const auto traj = propagate(p.spec, p.initial, cfg);
    EXPECT_FALSE(traj.invariants.ok(cfg));
}

TEST(SectorFilter, MatchesFullPropagationWithTransfersOnly) {
    const auto p = make_preset("lh1_ring", {{"N", 3}, {"battery_dimension", 3}, {"n", 2}, {"gamma_b", 0.4}},
                               {{"units", "natural"}});
    auto cfg = grid(4.0, 9);
    const auto full = propagate(p.spec, p.initial, cfg);
    cfg.number_sector_filter = true;
    const auto filtered = propagate(p.spec, p.initial, cfg);
    EXPECT_TRUE(filtered.number_sector_used);
    ASSERT_EQ(full.snapshots.size(), filtered.snapshots.size());
    for (std::size_t k = 0; k < full.snapshots.size(); ++k) {
        EXPECT_LT(max_abs(full.snapshots[k] - filtered.snapshots[k]), 1e-10);
        for (std::size_t s = 0; s < full.site_labels.size(); ++s)
            EXPECT_NEAR(full.populations[k][s], filtered.populations[k][s], 1e-10);
        EXPECT_NEAR(full.purity[k], filtered.purity[k], 1e-10);
    }
}

TEST(SectorFilter, FollowsNumberChangingJumpsAcrossBlocks) {
    const auto p = make_preset("lh1_ring", {{"N", 3}, {"battery_dimension", 0}, {"n", 2}, {"gamma_diss", 0.2},
                                            {"gamma_deph", 0.1}},
                               {{"units", "natural"}});
    auto cfg = grid(4.0, 9);
    const auto full = propagate(p.spec, p.initial, cfg);
    cfg.number_sector_filter = true;
    const auto filtered = propagate(p.spec, p.initial, cfg);
    EXPECT_TRUE(filtered.number_sector_used);
    for (std::size_t k = 0; k < full.snapshots.size(); ++k)
        EXPECT_LT(max_abs(full.snapshots[k] - filtered.snapshots[k]), 1e-10);
    EXPECT_LT(filtered.total_number().back(), 2.0 - 1e-3);
}

TEST(SectorFilter, PumpFromAMixtureOfSectors) {
    const auto p = make_preset("three_site_pump");
    const auto basis = p.spec.basis();
    RealVector w(8);
    w << 0.3, 0.1, 0.05, 0.15, 0.1, 0.1, 0.1, 0.1;
    const DensityMatrix rho0{Matrix(w.cast<Complex>().asDiagonal())};
    auto cfg = grid(3.0, 7);
    const auto full = propagate(p.spec, rho0, cfg);
    cfg.number_sector_filter = true;
    const auto filtered = propagate(p.spec, rho0, cfg);
    EXPECT_TRUE(filtered.number_sector_used);
    for (std::size_t k = 0; k < full.snapshots.size(); ++k)
        EXPECT_LT(max_abs(full.snapshots[k] - filtered.snapshots[k]), 1e-10);
}

TEST(SectorFilter, FallsBackForCoherentSuperpositionsOfSectors) {
    const auto p = make_preset("two_site_pump");
    Matrix rho = Matrix::Constant(4, 4, 0.25);
    auto cfg = grid(1.0, 3);
    cfg.number_sector_filter = true;
    const auto traj = propagate(p.spec, DensityMatrix(rho), cfg);
    EXPECT_FALSE(traj.number_sector_used);
}
