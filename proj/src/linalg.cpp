#include "qnet/linalg.hpp"

#include <algorithm>

namespace qnet {

double min_eigenvalue(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(m), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

double hermitian_operator_norm(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(m), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Vector vectorize(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix unvectorize(const Vector& v, Eigen::Index dimension) {
    return Eigen::Map<const Matrix>(v.data(), dimension, dimension);
}

}  // namespace qnet
