#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qnet/dynamics.hpp"
#include "qnet/hilbert.hpp"

namespace qnet {

/// tr(number(site) rho); for spin sites this is S^z + s.
double population(const ProductBasis& basis, const Matrix& rho, std::string_view site);

struct PurityRate {
    double purity = 0.0;
    /// 2 tr[rho L(rho)]
    double rate = 0.0;
};

PurityRate purity_and_rate(const Matrix& rho, const LindbladGenerator& gen);

/// Eigendecomposition of a Hermitian H with a reproducible ordering: ascending
/// energies; inside a degenerate cluster (gap < degeneracy_gap) the vectors
/// are rebuilt by Gram-Schmidt against computational basis vectors in index
/// order, which also fixes their phases.
class Eigenbasis {
public:
    explicit Eigenbasis(const Matrix& hamiltonian, double degeneracy_gap = 1e-10);

    std::size_t size() const noexcept { return static_cast<std::size_t>(energies_.size()); }
    const RealVector& energies() const noexcept { return energies_; }
    /// Column n is |n>.
    const Matrix& vectors() const noexcept { return vectors_; }

    /// <bra|rho|ket>
    Complex element(const Matrix& rho, std::size_t bra, std::size_t ket) const;
    /// exp(-i t H) rho exp(i t H)
    Matrix evolve(const Matrix& rho, double t) const;

private:
    RealVector energies_;
    Matrix vectors_;
};

Complex eigenbasis_element(const Matrix& rho, const Matrix& hamiltonian, std::size_t bra, std::size_t ket);

/// exp(-i t H) rho exp(i t H)
Matrix unitary_evolve(const Matrix& hamiltonian, const Matrix& rho, double t);

/// exp(i t H) rho(t) exp(-i t H): the state rho(t) would have come from under H alone.
Matrix back_evolve(const Matrix& hamiltonian, const Matrix& rho_t, double t);

/// Operator norm of rho_t - exp(-i t H) rho_ref exp(i t H).
double unitarity_distance(const Matrix& rho_t, const Matrix& rho_ref, const Matrix& hamiltonian, double t);

/// Largest |eigenvalue| of a - b for Hermitian inputs.
double operator_distance(const Matrix& a, const Matrix& b);

/// Reduced density matrix on the listed sites, in their basis order.
Matrix partial_trace(const ProductBasis& basis, const Matrix& rho, const std::vector<std::string>& keep);

/// Basis of the kept sites, in declaration order.
ProductBasis reduced_basis(const ProductBasis& basis, const std::vector<std::string>& keep);

/// Max-entry norm of the dissipative image of rho_ref carried forward to t.
/// Zero when rho_ref generates a decoherence-free unitary orbit.
double interaction_picture_residual(const LindbladGenerator& gen, const Matrix& rho_ref, double t);

struct ExponentialFit {
    double rate = 0.0;
    double amplitude = 0.0;
    /// RMS residual of the log-linear fit.
    double log_rms = 0.0;
    std::size_t points = 0;
};

/// Least-squares fit of log(values) ~ log(a) - rate * t over samples above floor.
ExponentialFit fit_exponential_decay(const std::vector<double>& times, const std::vector<double>& values,
                                     double floor = 1e-12);

}  // namespace qnet
