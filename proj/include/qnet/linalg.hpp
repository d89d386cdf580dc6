#pragma once

#include <complex>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace qnet {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;

inline constexpr Complex kI{0.0, 1.0};

/// Largest entry modulus.
inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// max |m - m^dagger| entrywise.
inline double hermiticity_error(const Matrix& m) { return max_abs(m - m.adjoint()); }

inline Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

/// Smallest eigenvalue of the Hermitian part of m.
double min_eigenvalue(const Matrix& m);

/// Largest |eigenvalue| of the Hermitian part of m (operator norm for Hermitian m).
double hermitian_operator_norm(const Matrix& m);

/// Dense Kronecker product a (x) b.
Matrix kron(const Matrix& a, const Matrix& b);

/// Column-stacking vectorization and its inverse.
Vector vectorize(const Matrix& m);
Matrix unvectorize(const Vector& v, Eigen::Index dimension);

}  // namespace qnet
