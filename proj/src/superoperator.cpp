#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "dynamics_internal.hpp"
#include "qnet/dynamics.hpp"
#include "qnet/error.hpp"

namespace qnet {

Matrix build_superoperator(const LindbladGenerator& gen, std::size_t max_dimension) {
    const std::size_t d = gen.dimension();
    if (d > max_dimension)
        throw ValidationError("superoperator needs D <= " + std::to_string(max_dimension) + ", got " +
                              std::to_string(d));
    const auto D = static_cast<Eigen::Index>(d);
    const Matrix id = Matrix::Identity(D, D);
    const Matrix& h = gen.hamiltonian();
    Matrix s = -kI * (kron(id, h) - kron(h.transpose(), id));
    for (std::size_t k = 0; k < gen.jumps().size(); ++k) {
        const Matrix& l = gen.jumps()[k];
        const Matrix& ll = gen.jump_products()[k];
        s += kron(l.conjugate(), l) - 0.5 * (kron(id, ll) + kron(ll.transpose(), id));
    }
    return s;
}

namespace {

Eigen::Index superoperator_side(const Matrix& s) {
    const auto D = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(s.rows()))));
    if (s.rows() != s.cols() || D * D != s.rows()) throw ValidationError("superoperator must be D^2 x D^2");
    return D;
}

/// Real coordinates of a Hermitian matrix: diagonal, then Re and Im of the upper triangle.
Eigen::VectorXd hermitian_coordinates(const Matrix& h) {
    const Eigen::Index D = h.rows();
    Eigen::VectorXd v(D * D);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < D; ++i) v(k++) = h(i, i).real();
    for (Eigen::Index i = 0; i < D; ++i)
        for (Eigen::Index j = i + 1; j < D; ++j) {
            v(k++) = h(i, j).real();
            v(k++) = h(i, j).imag();
        }
    return v;
}

Matrix from_hermitian_coordinates(const Eigen::VectorXd& v, Eigen::Index D) {
    Matrix h = Matrix::Zero(D, D);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < D; ++i) h(i, i) = v(k++);
    for (Eigen::Index i = 0; i < D; ++i)
        for (Eigen::Index j = i + 1; j < D; ++j) {
            h(i, j) = Complex(v(k), v(k + 1));
            h(j, i) = std::conj(h(i, j));
            k += 2;
        }
    return h;
}

/// Reduced row echelon form of the rows of m; returns the nonzero rows.
std::vector<Eigen::VectorXd> row_echelon(Eigen::MatrixXd m, double tol) {
    std::vector<Eigen::VectorXd> rows;
    Eigen::Index r = 0;
    for (Eigen::Index c = 0; c < m.cols() && r < m.rows(); ++c) {
        Eigen::Index pivot = r;
        double best = 0.0;
        for (Eigen::Index i = r; i < m.rows(); ++i)
            if (std::abs(m(i, c)) > best) {
                best = std::abs(m(i, c));
                pivot = i;
            }
        if (best <= tol) continue;
        m.row(r).swap(m.row(pivot));
        m.row(r) /= m(r, c);
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (i != r) m.row(i) -= m(i, c) * m.row(r);
        ++r;
    }
    for (Eigen::Index i = 0; i < r; ++i) rows.push_back(m.row(i).transpose());
    return rows;
}

}  // namespace

SteadyStateResult steady_states(const Matrix& superoperator, double rel_tol) {
    const Eigen::Index D = superoperator_side(superoperator);
    SteadyStateResult out;

    Eigen::ComplexEigenSolver<Matrix> eig(superoperator, false);
    if (eig.info() != Eigen::Success) throw InvariantViolation("superoperator eigendecomposition failed", 0.0);
    const Vector& lambda = eig.eigenvalues();
    const double scale = lambda.size() ? lambda.cwiseAbs().maxCoeff() : 0.0;
    const double zero_tol = scale > 0.0 ? rel_tol * scale : rel_tol;
    std::size_t zeros = 0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        out.eigenvalues.push_back(lambda(i));
        const Complex l = lambda(i);
        if (std::abs(l) <= zero_tol)
            ++zeros;
        else if (std::abs(l.real()) <= zero_tol)
            out.rotating_modes.push_back(l);
    }
    out.multiplicity = zeros;
    if (zeros == 0) throw InvariantViolation("superoperator has no zero mode", 0.0);

    // The right singular vectors of the smallest singular values span the null space.
    Eigen::BDCSVD<Matrix> svd(superoperator, Eigen::ComputeFullV);
    const Matrix& v = svd.matrixV();
    const Eigen::Index n = v.cols();
    Eigen::MatrixXd coords(2 * static_cast<Eigen::Index>(zeros), D * D);
    for (std::size_t k = 0; k < zeros; ++k) {
        const Matrix x = unvectorize(v.col(n - 1 - static_cast<Eigen::Index>(k)), D);
        // L commutes with the adjoint, so both Hermitian parts are also zero modes.
        coords.row(2 * static_cast<Eigen::Index>(k)) = hermitian_coordinates(x + x.adjoint()).transpose();
        coords.row(2 * static_cast<Eigen::Index>(k) + 1) = hermitian_coordinates(kI * (x - x.adjoint())).transpose();
    }
    // A part that is zero up to rounding would normalize to pure noise.
    const double largest = coords.rowwise().norm().maxCoeff();
    for (Eigen::Index i = 0; i < coords.rows(); ++i) {
        const double norm = coords.row(i).norm();
        if (norm > 1e-8 * largest)
            coords.row(i) /= norm;
        else
            coords.row(i).setZero();
    }
    const auto basis = row_echelon(coords, 1e-8);

    for (const auto& row : basis) {
        Matrix h = from_hermitian_coordinates(row, D);
        const Complex tr = h.trace();
        if (std::abs(tr) > 1e-8) {
            h /= tr.real();
            out.states.push_back(hermitian_part(h));
        } else {
            out.traceless_modes.push_back(h);
        }
    }
    if (out.states.empty()) throw InvariantViolation("null space contains no trace-one state", 0.0);
    for (const auto& rho : out.states)
        out.residuals.push_back(max_abs(unvectorize(superoperator * vectorize(rho), D)));
    return out;
}

Trajectory propagate_expm(const Matrix& superoperator, const ProductBasis& basis, const DensityMatrix& rho0,
                          const PropagationConfig& cfg, const SampleObserver& observer) {
    const Eigen::Index D = superoperator_side(superoperator);
    if (static_cast<std::size_t>(D) != basis.dimension() || rho0.dimension() != basis.dimension())
        throw ValidationError("superoperator, basis and initial state dimensions differ");
    if (basis.dimension() > kMaxSuperoperatorDimension)
        throw ValidationError("exact propagation needs D <= " + std::to_string(kMaxSuperoperatorDimension));
    detail::validate_config(cfg);
    const detail::SampleLayout layout = detail::full_layout(basis);
    detail::Recorder recorder(
        [&superoperator, D](const Matrix& x) { return unvectorize(superoperator * vectorize(x), D); }, layout, cfg,
        observer);

    Vector v = vectorize(rho0.matrix());
    recorder.record(0, cfg.times[0], rho0.matrix());
    // Step maps exp(dt S) for each distinct interval length. Grids built as
    // t_max * k / (n - 1) differ in the last bits, so lengths within 1e-12
    // relative share one map.
    std::vector<std::pair<double, Matrix>> step_maps;
    for (std::size_t k = 1; k < cfg.times.size(); ++k) {
        const double span = cfg.times[k] - cfg.times[k - 1];
        auto it = std::find_if(step_maps.begin(), step_maps.end(),
                               [span](const auto& e) { return std::abs(e.first - span) <= 1e-12 * span; });
        if (it == step_maps.end()) {
            if (step_maps.size() >= 64) step_maps.clear();
            step_maps.emplace_back(span, Matrix((span * superoperator).exp()));
            it = std::prev(step_maps.end());
        }
        v = it->second * v;
        Matrix rho = unvectorize(v, D);
        if (cfg.rehermitize) {
            rho = hermitian_part(rho);
            v = vectorize(rho);
        }
        recorder.record(k, cfg.times[k], rho);
    }
    return recorder.finish();
}

std::vector<Complex> population_block_spectrum(const Matrix& superoperator, const ProductBasis& basis) {
    const Eigen::Index D = superoperator_side(superoperator);
    if (static_cast<std::size_t>(D) != basis.dimension()) throw ValidationError("superoperator does not match basis");
    std::vector<Eigen::Index> idx;
    for (Eigen::Index b = 0; b < D; ++b)
        for (Eigen::Index a = 0; a < D; ++a)
            if (basis.total_number(static_cast<std::size_t>(a)) == basis.total_number(static_cast<std::size_t>(b)))
                idx.push_back(a + D * b);
    const auto n = static_cast<Eigen::Index>(idx.size());
    Matrix block(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) block(i, j) = superoperator(idx[i], idx[j]);
    Eigen::ComplexEigenSolver<Matrix> eig(block, false);
    std::vector<Complex> out(eig.eigenvalues().data(), eig.eigenvalues().data() + n);
    return out;
}

double population_oscillation_frequency(const Matrix& superoperator, const ProductBasis& basis, double tolerance) {
    double best = 0.0;
    for (const Complex& l : population_block_spectrum(superoperator, basis))
        if (std::abs(l.imag()) > tolerance) best = std::max(best, std::abs(l.imag()));
    return best;
}

}  // namespace qnet
