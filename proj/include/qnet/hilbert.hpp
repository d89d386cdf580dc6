#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qnet/linalg.hpp"

namespace qnet {

enum class SiteKind { qubit, spin };

/// One node of the network. Qubits have two levels; a spin-s site has 2s+1
/// levels and is used for the multi-excitation "battery".
struct SiteDescriptor {
    std::string label;
    SiteKind kind = SiteKind::qubit;
    int dimension = 2;

    static SiteDescriptor qubit(std::string label) { return {std::move(label), SiteKind::qubit, 2}; }
    static SiteDescriptor spin(std::string label, int dimension) {
        return {std::move(label), SiteKind::spin, dimension};
    }

    /// s with dimension = 2s + 1.
    double spin_value() const { return 0.5 * (dimension - 1); }
};

const char* to_string(SiteKind kind);

enum class OpKind { lower, raise, number, sz, identity };

const char* to_string(OpKind kind);

/// Tensor-product space over an ordered list of sites.
///
/// Flat indices use a mixed-radix encoding with the first declared site as
/// the most significant digit; within a site, occupation runs 0..d-1.
class ProductBasis {
public:
    explicit ProductBasis(std::vector<SiteDescriptor> sites);

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t site_count() const noexcept { return sites_.size(); }
    const std::vector<SiteDescriptor>& sites() const noexcept { return sites_; }
    const SiteDescriptor& site(std::size_t i) const { return sites_.at(i); }

    /// Throws ValidationError on unknown labels.
    std::size_t site_index(std::string_view label) const;
    bool has_site(std::string_view label) const;

    std::size_t flat_index(std::span<const int> occupations) const;
    std::vector<int> occupations(std::size_t flat) const;
    int occupation(std::size_t flat, std::size_t site) const {
        return static_cast<int>((flat / strides_[site]) % static_cast<std::size_t>(sites_[site].dimension));
    }
    /// Sum of occupations (the eigenvalue of the total-number operator).
    int total_number(std::size_t flat) const;

private:
    std::vector<SiteDescriptor> sites_;
    std::vector<std::size_t> strides_;
    std::size_t dimension_ = 1;
    std::unordered_map<std::string, std::size_t> index_;
};

ProductBasis build_basis(std::vector<SiteDescriptor> sites);

/// d x d matrix of the operator on a single site. For every kind,
/// raise|eta> = sqrt((eta+1)(2s-eta)) |eta+1>. sz is eta - s on spins and the
/// Pauli matrix (+1 on the occupied level) on qubits, so number = (sz+1)/2 there.
Matrix local_operator(const SiteDescriptor& site, OpKind kind);

/// identity (x) ... (x) op (x) ... (x) identity in basis ordering.
SparseMatrix embed_site_operator_sparse(const ProductBasis& basis, std::string_view label, OpKind kind);
Matrix embed_site_operator(const ProductBasis& basis, std::string_view label, OpKind kind);

/// Diagonal of sum of number operators over all sites.
SparseMatrix total_number_operator(const ProductBasis& basis);

class PureState {
public:
    /// Requires unit norm to 1e-12.
    explicit PureState(Vector amplitudes);
    const Vector& amplitudes() const noexcept { return amplitudes_; }
    std::size_t dimension() const noexcept { return static_cast<std::size_t>(amplitudes_.size()); }

private:
    Vector amplitudes_;
};

/// Hermitian, unit-trace, positive-semidefinite matrix.
class DensityMatrix {
public:
    static constexpr double kHermiticityTolerance = 1e-12;
    static constexpr double kTraceTolerance = 1e-9;
    static constexpr double kPositivityTolerance = 1e-9;

    /// Validates the invariants above; throws ValidationError otherwise.
    explicit DensityMatrix(Matrix m);
    static DensityMatrix from_pure(const PureState& psi);

    const Matrix& matrix() const noexcept { return m_; }
    std::size_t dimension() const noexcept { return static_cast<std::size_t>(m_.rows()); }

private:
    Matrix m_;
};

PureState basis_state(const ProductBasis& basis, std::span<const int> occupations);
PureState basis_state(const ProductBasis& basis, std::initializer_list<int> occupations);

/// Equal-weight superposition of all C(N, n) placements of n excitations on
/// ring_sites; every other site empty.
PureState dicke_state(const ProductBasis& basis, const std::vector<std::string>& ring_sites, int n);

/// Display order for fixtures: occupation tuples listed in
/// descending lexicographic order, e.g. {|1,1>, |1,0>, |0,1>, |0,0>}.
/// Entry k is the flat index shown at display position k.
std::vector<std::size_t> display_order(const ProductBasis& basis);
Matrix to_display_order(const ProductBasis& basis, const Matrix& m);
Matrix from_display_order(const ProductBasis& basis, const Matrix& m);

}  // namespace qnet
