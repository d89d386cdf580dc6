#include <gtest/gtest.h>

#include <cmath>

#include "qnet/error.hpp"
#include "qnet/hilbert.hpp"

using namespace qnet;

namespace {

ProductBasis qubit_spin_qubit() {
    return ProductBasis({SiteDescriptor::qubit("a"), SiteDescriptor::spin("b", 3), SiteDescriptor::qubit("c")});
}

}  // namespace

TEST(ProductBasis, MixedRadixFirstSiteMostSignificant) {
    const auto basis = qubit_spin_qubit();
    EXPECT_EQ(basis.dimension(), 12u);
    const std::vector<int> occ{1, 2, 0};
    EXPECT_EQ(basis.flat_index(occ), 1u * 6 + 2u * 2 + 0u);
    for (std::size_t i = 0; i < basis.dimension(); ++i) {
        const auto o = basis.occupations(i);
        EXPECT_EQ(basis.flat_index(o), i);
        EXPECT_EQ(basis.total_number(i), o[0] + o[1] + o[2]);
        for (std::size_t s = 0; s < 3; ++s) EXPECT_EQ(basis.occupation(i, s), o[s]);
    }
}

TEST(ProductBasis, RejectsBadSites) {
    EXPECT_THROW(ProductBasis({}), ValidationError);
    EXPECT_THROW(ProductBasis({SiteDescriptor::qubit("a"), SiteDescriptor::qubit("a")}), ValidationError);
    EXPECT_THROW(ProductBasis({SiteDescriptor::spin("s", 1)}), ValidationError);
    EXPECT_THROW(ProductBasis({SiteDescriptor{"q", SiteKind::qubit, 3}}), ValidationError);
    const auto basis = qubit_spin_qubit();
    EXPECT_THROW(basis.site_index("zz"), ValidationError);
    EXPECT_THROW(basis.flat_index(std::vector<int>{0, 3, 0}), ValidationError);
    EXPECT_THROW(basis.flat_index(std::vector<int>{0, 1}), ValidationError);
}

TEST(LocalOperator, RaiseMatchesSpinLadder) {
    for (int d : {2, 3, 4, 5}) {
        const auto site = SiteDescriptor::spin("s", d);
        const double s = site.spin_value();
        const Matrix up = local_operator(site, OpKind::raise);
        const Matrix down = local_operator(site, OpKind::lower);
        EXPECT_LT(max_abs(down - up.adjoint()), 1e-15);
        for (int eta = 0; eta + 1 < d; ++eta)
            EXPECT_NEAR(up(eta + 1, eta).real(), std::sqrt((eta + 1) * (2 * s - eta)), 1e-14);
        const Matrix n = local_operator(site, OpKind::number);
        const Matrix sz = local_operator(site, OpKind::sz);
        for (int eta = 0; eta < d; ++eta) {
            EXPECT_DOUBLE_EQ(n(eta, eta).real(), eta);
            EXPECT_DOUBLE_EQ(sz(eta, eta).real(), eta - s);
        }
    }
}

TEST(LocalOperator, QubitSzIsPauli) {
    const auto q = SiteDescriptor::qubit("q");
    const Matrix sz = local_operator(q, OpKind::sz);
    const Matrix n = local_operator(q, OpKind::number);
    EXPECT_DOUBLE_EQ(sz(1, 1).real(), 1.0);
    EXPECT_DOUBLE_EQ(sz(0, 0).real(), -1.0);
    EXPECT_LT(max_abs(n - 0.5 * (sz + Matrix::Identity(2, 2))), 1e-15);
    EXPECT_EQ(max_abs(local_operator(q, OpKind::identity) - Matrix::Identity(2, 2)), 0.0);
}

TEST(Embedding, PlacesOperatorOnItsFactor) {
    const auto basis = qubit_spin_qubit();
    const Matrix nb = embed_site_operator(basis, "b", OpKind::number);
    for (std::size_t i = 0; i < basis.dimension(); ++i)
        EXPECT_DOUBLE_EQ(nb(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real(), basis.occupation(i, 1));
    EXPECT_LT(max_abs(nb - nb.adjoint()), 1e-15);

    // lower_a lowers only the first digit
    const Matrix la = embed_site_operator(basis, "a", OpKind::lower);
    const auto from = basis.flat_index(std::vector<int>{1, 2, 1});
    const auto to = basis.flat_index(std::vector<int>{0, 2, 1});
    EXPECT_DOUBLE_EQ(la(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from)).real(), 1.0);
    EXPECT_DOUBLE_EQ(la.cwiseAbs().sum(), 6.0);

    const Matrix sparse = Matrix(embed_site_operator_sparse(basis, "c", OpKind::raise));
    EXPECT_LT(max_abs(sparse - embed_site_operator(basis, "c", OpKind::raise)), 1e-15);

    const Matrix total = Matrix(total_number_operator(basis));
    Matrix sum = Matrix::Zero(12, 12);
    for (const auto& s : basis.sites()) sum += embed_site_operator(basis, s.label, OpKind::number);
    EXPECT_LT(max_abs(total - sum), 1e-15);
}

TEST(States, BasisStateAndDensityValidation) {
    const auto basis = qubit_spin_qubit();
    const auto psi = basis_state(basis, {1, 1, 0});
    EXPECT_EQ(psi.dimension(), 12u);
    EXPECT_DOUBLE_EQ(std::abs(psi.amplitudes()(static_cast<Eigen::Index>(basis.flat_index(std::vector<int>{1, 1, 0})))), 1.0);

    EXPECT_THROW(PureState(Vector::Constant(2, 1.0)), ValidationError);
    Matrix bad = Matrix::Identity(2, 2);
    EXPECT_THROW(DensityMatrix{bad}, ValidationError);  // trace 2
    Matrix nonherm = 0.5 * Matrix::Identity(2, 2);
    nonherm(0, 1) = 0.1;
    EXPECT_THROW(DensityMatrix{nonherm}, ValidationError);
    Matrix negative = Matrix::Zero(2, 2);
    negative(0, 0) = 1.5;
    negative(1, 1) = -0.5;
    EXPECT_THROW(DensityMatrix{negative}, ValidationError);
    EXPECT_NO_THROW(DensityMatrix(0.5 * Matrix::Identity(2, 2)));
}

TEST(States, DickeStateIsNormalizedAndSymmetric) {
    std::vector<SiteDescriptor> sites;
    for (int j = 1; j <= 4; ++j) sites.push_back(SiteDescriptor::qubit("r" + std::to_string(j)));
    sites.push_back(SiteDescriptor::qubit("c"));
    const ProductBasis basis(sites);
    const std::vector<std::string> ring{"r1", "r2", "r3", "r4"};
    for (int n = 0; n <= 4; ++n) {
        const auto psi = dicke_state(basis, ring, n);
        EXPECT_NEAR(psi.amplitudes().norm(), 1.0, 1e-14);
        const double binom = std::tgamma(5.0) / (std::tgamma(n + 1.0) * std::tgamma(5.0 - n));
        std::size_t support = 0;
        for (Eigen::Index i = 0; i < psi.amplitudes().size(); ++i) {
            const double a = std::abs(psi.amplitudes()(i));
            if (a == 0.0) continue;
            ++support;
            EXPECT_NEAR(a, 1.0 / std::sqrt(binom), 1e-14);
            EXPECT_EQ(basis.occupation(static_cast<std::size_t>(i), 4), 0);
            EXPECT_EQ(basis.total_number(static_cast<std::size_t>(i)), n);
        }
        EXPECT_EQ(support, static_cast<std::size_t>(std::llround(binom)));
    }
    EXPECT_THROW(dicke_state(basis, ring, 5), ValidationError);
    EXPECT_THROW(dicke_state(basis, {"r1", "r1"}, 1), ValidationError);
}

TEST(DisplayOrder, ReversesTheComputationalOrder) {
    const ProductBasis basis({SiteDescriptor::qubit("s1"), SiteDescriptor::qubit("s2")});
    const auto order = display_order(basis);
    const std::vector<std::size_t> expected{3, 2, 1, 0};  // |11>, |10>, |01>, |00>
    EXPECT_EQ(order, expected);
    Matrix m(4, 4);
    for (int i = 0; i < 16; ++i) m(i / 4, i % 4) = Complex(i, -i);
    EXPECT_EQ(max_abs(from_display_order(basis, to_display_order(basis, m)) - m), 0.0);
    EXPECT_EQ(to_display_order(basis, m)(0, 1), m(3, 2));
}
