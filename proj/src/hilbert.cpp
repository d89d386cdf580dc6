#include "qnet/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qnet/error.hpp"

namespace qnet {

const char* to_string(SiteKind kind) { return kind == SiteKind::qubit ? "qubit" : "spin"; }

const char* to_string(OpKind kind) {
    switch (kind) {
        case OpKind::lower: return "lower";
        case OpKind::raise: return "raise";
        case OpKind::number: return "number";
        case OpKind::sz: return "sz";
        case OpKind::identity: return "identity";
    }
    return "?";
}

ProductBasis::ProductBasis(std::vector<SiteDescriptor> sites) : sites_(std::move(sites)) {
    if (sites_.empty()) throw ValidationError("basis needs at least one site");
    for (std::size_t i = 0; i < sites_.size(); ++i) {
        const auto& s = sites_[i];
        if (s.dimension < 2) throw ValidationError("site '" + s.label + "' has dimension < 2");
        if (s.kind == SiteKind::qubit && s.dimension != 2)
            throw ValidationError("qubit site '" + s.label + "' must have dimension 2");
        if (!index_.emplace(s.label, i).second) throw ValidationError("duplicate site label '" + s.label + "'");
    }
    strides_.assign(sites_.size(), 1);
    for (std::size_t i = sites_.size(); i-- > 0;) {
        strides_[i] = dimension_;
        dimension_ *= static_cast<std::size_t>(sites_[i].dimension);
    }
}

std::size_t ProductBasis::site_index(std::string_view label) const {
    auto it = index_.find(std::string(label));
    if (it == index_.end()) throw ValidationError("unknown site '" + std::string(label) + "'");
    return it->second;
}

bool ProductBasis::has_site(std::string_view label) const { return index_.count(std::string(label)) != 0; }

std::size_t ProductBasis::flat_index(std::span<const int> occupations) const {
    if (occupations.size() != sites_.size())
        throw ValidationError("occupation tuple has " + std::to_string(occupations.size()) + " entries, basis has " +
                              std::to_string(sites_.size()) + " sites");
    std::size_t flat = 0;
    for (std::size_t i = 0; i < sites_.size(); ++i) {
        if (occupations[i] < 0 || occupations[i] >= sites_[i].dimension)
            throw ValidationError("occupation " + std::to_string(occupations[i]) + " out of range for site '" +
                                  sites_[i].label + "'");
        flat += static_cast<std::size_t>(occupations[i]) * strides_[i];
    }
    return flat;
}

std::vector<int> ProductBasis::occupations(std::size_t flat) const {
    std::vector<int> occ(sites_.size());
    for (std::size_t i = 0; i < sites_.size(); ++i) occ[i] = occupation(flat, i);
    return occ;
}

int ProductBasis::total_number(std::size_t flat) const {
    int n = 0;
    for (std::size_t i = 0; i < sites_.size(); ++i) n += occupation(flat, i);
    return n;
}

ProductBasis build_basis(std::vector<SiteDescriptor> sites) { return ProductBasis(std::move(sites)); }

Matrix local_operator(const SiteDescriptor& site, OpKind kind) {
    const int d = site.dimension;
    const double s = site.spin_value();
    Matrix op = Matrix::Zero(d, d);
    switch (kind) {
        case OpKind::identity: op.setIdentity(); break;
        case OpKind::number:
            for (int eta = 0; eta < d; ++eta) op(eta, eta) = eta;
            break;
        case OpKind::sz:
            for (int eta = 0; eta < d; ++eta)
                op(eta, eta) = site.kind == SiteKind::qubit ? 2.0 * eta - 1.0 : eta - s;
            break;
        case OpKind::raise:
        case OpKind::lower:
            for (int eta = 0; eta + 1 < d; ++eta) {
                const double amp = std::sqrt((eta + 1) * (2.0 * s - eta));
                if (kind == OpKind::raise)
                    op(eta + 1, eta) = amp;
                else
                    op(eta, eta + 1) = amp;
            }
            break;
    }
    return op;
}

SparseMatrix embed_site_operator_sparse(const ProductBasis& basis, std::string_view label, OpKind kind) {
    const std::size_t site = basis.site_index(label);
    const Matrix local = local_operator(basis.site(site), kind);
    const int d = basis.site(site).dimension;
    const std::size_t dim = basis.dimension();
    std::vector<Eigen::Triplet<Complex>> triplets;
    triplets.reserve(dim);
    // Each column flat maps to the rows that differ only in this site's digit.
    std::vector<int> occ;
    for (std::size_t col = 0; col < dim; ++col) {
        occ = basis.occupations(col);
        const int eta = occ[site];
        for (int out = 0; out < d; ++out) {
            const Complex v = local(out, eta);
            if (v == Complex{}) continue;
            occ[site] = out;
            triplets.emplace_back(static_cast<int>(basis.flat_index(occ)), static_cast<int>(col), v);
        }
    }
    SparseMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    m.setFromTriplets(triplets.begin(), triplets.end());
    return m;
}

Matrix embed_site_operator(const ProductBasis& basis, std::string_view label, OpKind kind) {
    return Matrix(embed_site_operator_sparse(basis, label, kind));
}

SparseMatrix total_number_operator(const ProductBasis& basis) {
    const auto dim = static_cast<Eigen::Index>(basis.dimension());
    SparseMatrix m(dim, dim);
    std::vector<Eigen::Triplet<Complex>> triplets;
    for (Eigen::Index i = 0; i < dim; ++i) {
        const int n = basis.total_number(static_cast<std::size_t>(i));
        if (n != 0) triplets.emplace_back(i, i, n);
    }
    m.setFromTriplets(triplets.begin(), triplets.end());
    return m;
}

PureState::PureState(Vector amplitudes) : amplitudes_(std::move(amplitudes)) {
    if (std::abs(amplitudes_.norm() - 1.0) > 1e-12) throw ValidationError("pure state is not normalized");
}

DensityMatrix::DensityMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) throw ValidationError("density matrix must be square and nonempty");
    if (!m_.allFinite()) throw ValidationError("density matrix has non-finite entries");
    if (hermiticity_error(m_) > kHermiticityTolerance) throw ValidationError("density matrix is not Hermitian");
    if (std::abs(m_.trace() - 1.0) > kTraceTolerance) throw ValidationError("density matrix trace differs from 1");
    if (min_eigenvalue(m_) < -kPositivityTolerance) throw ValidationError("density matrix has a negative eigenvalue");
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
    Matrix m = psi.amplitudes() * psi.amplitudes().adjoint();
    return DensityMatrix(hermitian_part(m));
}

PureState basis_state(const ProductBasis& basis, std::span<const int> occupations) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(basis.dimension()));
    v(static_cast<Eigen::Index>(basis.flat_index(occupations))) = 1.0;
    return PureState(std::move(v));
}

PureState basis_state(const ProductBasis& basis, std::initializer_list<int> occupations) {
    return basis_state(basis, std::span<const int>(occupations.begin(), occupations.size()));
}

PureState dicke_state(const ProductBasis& basis, const std::vector<std::string>& ring_sites, int n) {
    const int ring = static_cast<int>(ring_sites.size());
    if (n < 0 || n > ring)
        throw ValidationError("Dicke excitation number " + std::to_string(n) + " outside [0, " +
                              std::to_string(ring) + "]");
    std::vector<std::size_t> idx;
    for (const auto& label : ring_sites) {
        const std::size_t i = basis.site_index(label);
        if (basis.site(i).kind != SiteKind::qubit)
            throw ValidationError("Dicke ring site '" + label + "' is not a qubit");
        if (std::find(idx.begin(), idx.end(), i) != idx.end())
            throw ValidationError("Dicke ring site '" + label + "' listed twice");
        idx.push_back(i);
    }
    // Enumerate n-subsets of the ring via a selection mask in lexicographic order.
    std::vector<char> mask(static_cast<std::size_t>(ring), 0);
    std::fill(mask.end() - n, mask.end(), 1);
    std::vector<std::size_t> configurations;
    do {
        std::vector<int> occ(basis.site_count(), 0);
        for (int k = 0; k < ring; ++k)
            if (mask[static_cast<std::size_t>(k)]) occ[idx[static_cast<std::size_t>(k)]] = 1;
        configurations.push_back(basis.flat_index(occ));
    } while (std::next_permutation(mask.begin(), mask.end()));

    Vector v = Vector::Zero(static_cast<Eigen::Index>(basis.dimension()));
    const double amp = 1.0 / std::sqrt(static_cast<double>(configurations.size()));
    for (auto c : configurations) v(static_cast<Eigen::Index>(c)) = amp;
    return PureState(std::move(v));
}

std::vector<std::size_t> display_order(const ProductBasis& basis) {
    std::vector<std::size_t> order(basis.dimension());
    std::iota(order.rbegin(), order.rend(), std::size_t{0});
    return order;
}

Matrix to_display_order(const ProductBasis& basis, const Matrix& m) {
    const auto order = display_order(basis);
    const auto d = static_cast<Eigen::Index>(order.size());
    Matrix out(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            out(i, j) = m(static_cast<Eigen::Index>(order[static_cast<std::size_t>(i)]),
                          static_cast<Eigen::Index>(order[static_cast<std::size_t>(j)]));
    return out;
}

Matrix from_display_order(const ProductBasis& basis, const Matrix& m) {
    const auto order = display_order(basis);
    const auto d = static_cast<Eigen::Index>(order.size());
    Matrix out(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            out(static_cast<Eigen::Index>(order[static_cast<std::size_t>(i)]),
                static_cast<Eigen::Index>(order[static_cast<std::size_t>(j)])) = m(i, j);
    return out;
}

}  // namespace qnet
