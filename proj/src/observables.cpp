#include "qnet/observables.hpp"

#include <algorithm>
#include <cmath>

#include "qnet/error.hpp"

namespace qnet {

namespace {

void require_square(const Matrix& m, std::size_t d, const char* what) {
    if (static_cast<std::size_t>(m.rows()) != d || m.rows() != m.cols())
        throw ValidationError(std::string(what) + ": dimension mismatch");
}

std::vector<std::size_t> kept_sites(const ProductBasis& basis, const std::vector<std::string>& keep) {
    std::vector<std::size_t> idx;
    for (const auto& label : keep) idx.push_back(basis.site_index(label));
    std::sort(idx.begin(), idx.end());
    if (std::adjacent_find(idx.begin(), idx.end()) != idx.end())
        throw ValidationError("partial trace: site listed twice");
    if (idx.empty()) throw ValidationError("partial trace: keep at least one site");
    return idx;
}

}  // namespace

double population(const ProductBasis& basis, const Matrix& rho, std::string_view site) {
    require_square(rho, basis.dimension(), "population");
    const std::size_t s = basis.site_index(site);
    double n = 0.0;
    for (std::size_t i = 0; i < basis.dimension(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        n += basis.occupation(i, s) * rho(k, k).real();
    }
    return n;
}

PurityRate purity_and_rate(const Matrix& rho, const LindbladGenerator& gen) {
    require_square(rho, gen.dimension(), "purity");
    const Matrix drho = gen.apply(rho);
    return {(rho * rho).trace().real(), 2.0 * (rho * drho).trace().real()};
}

Eigenbasis::Eigenbasis(const Matrix& hamiltonian, double degeneracy_gap) {
    if (hamiltonian.rows() != hamiltonian.cols() || hamiltonian.rows() == 0)
        throw ValidationError("eigenbasis needs a square nonempty matrix");
    if (hermiticity_error(hamiltonian) > 1e-12) throw ValidationError("eigenbasis needs a Hermitian matrix");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(hamiltonian));
    energies_ = solver.eigenvalues();
    const Matrix& raw = solver.eigenvectors();
    const Eigen::Index D = hamiltonian.rows();
    vectors_.resize(D, D);

    Eigen::Index start = 0;
    while (start < D) {
        Eigen::Index end = start + 1;
        while (end < D && energies_(end) - energies_(end - 1) < degeneracy_gap) ++end;
        const Eigen::Index m = end - start;
        const Matrix block = raw.middleCols(start, m);
        const Matrix projector = block * block.adjoint();
        Eigen::Index accepted = 0;
        for (Eigen::Index i = 0; i < D && accepted < m; ++i) {
            Vector r = projector.col(i);
            for (Eigen::Index q = 0; q < accepted; ++q) {
                const auto col = vectors_.col(start + q);
                r -= col * col.dot(r);
            }
            const double norm = r.norm();
            if (norm > 1e-6) vectors_.col(start + accepted++) = r / norm;
        }
        if (accepted != m) throw InvariantViolation("eigenbasis orthonormalization lost rank", 0.0);
        start = end;
    }
}

Complex Eigenbasis::element(const Matrix& rho, std::size_t bra, std::size_t ket) const {
    if (bra >= size() || ket >= size()) throw ValidationError("eigenbasis index out of range");
    require_square(rho, size(), "eigenbasis element");
    const auto b = static_cast<Eigen::Index>(bra), k = static_cast<Eigen::Index>(ket);
    return vectors_.col(b).dot(rho * vectors_.col(k));
}

Matrix Eigenbasis::evolve(const Matrix& rho, double t) const {
    require_square(rho, size(), "unitary evolution");
    const Vector phases = (-kI * t * energies_.cast<Complex>()).array().exp();
    const Matrix u = vectors_ * phases.asDiagonal() * vectors_.adjoint();
    return u * rho * u.adjoint();
}

Complex eigenbasis_element(const Matrix& rho, const Matrix& hamiltonian, std::size_t bra, std::size_t ket) {
    return Eigenbasis(hamiltonian).element(rho, bra, ket);
}

Matrix unitary_evolve(const Matrix& hamiltonian, const Matrix& rho, double t) {
    return Eigenbasis(hamiltonian).evolve(rho, t);
}

Matrix back_evolve(const Matrix& hamiltonian, const Matrix& rho_t, double t) {
    return Eigenbasis(hamiltonian).evolve(rho_t, -t);
}

double operator_distance(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ValidationError("distance: dimension mismatch");
    return hermitian_operator_norm(a - b);
}

double unitarity_distance(const Matrix& rho_t, const Matrix& rho_ref, const Matrix& hamiltonian, double t) {
    if (rho_t.rows() != rho_ref.rows() || rho_t.rows() != hamiltonian.rows())
        throw ValidationError("unitarity distance: dimension mismatch");
    return operator_distance(rho_t, unitary_evolve(hamiltonian, rho_ref, t));
}

ProductBasis reduced_basis(const ProductBasis& basis, const std::vector<std::string>& keep) {
    std::vector<SiteDescriptor> sites;
    for (std::size_t s : kept_sites(basis, keep)) sites.push_back(basis.site(s));
    return ProductBasis(std::move(sites));
}

Matrix partial_trace(const ProductBasis& basis, const Matrix& rho, const std::vector<std::string>& keep) {
    require_square(rho, basis.dimension(), "partial trace");
    const auto kept = kept_sites(basis, keep);
    std::vector<bool> is_kept(basis.site_count(), false);
    for (std::size_t s : kept) is_kept[s] = true;

    // Reduced index of each full index, and a key for the traced-out part.
    const std::size_t D = basis.dimension();
    std::vector<std::size_t> reduced(D), rest(D);
    std::size_t rd = 1;
    for (std::size_t s : kept) rd *= static_cast<std::size_t>(basis.site(s).dimension);
    for (std::size_t i = 0; i < D; ++i) {
        std::size_t r = 0, o = 0;
        for (std::size_t s = 0; s < basis.site_count(); ++s) {
            const auto d = static_cast<std::size_t>(basis.site(s).dimension);
            const auto occ = static_cast<std::size_t>(basis.occupation(i, s));
            if (is_kept[s])
                r = r * d + occ;
            else
                o = o * d + occ;
        }
        reduced[i] = r;
        rest[i] = o;
    }
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(rd), static_cast<Eigen::Index>(rd));
    for (std::size_t i = 0; i < D; ++i)
        for (std::size_t j = 0; j < D; ++j)
            if (rest[i] == rest[j])
                out(static_cast<Eigen::Index>(reduced[i]), static_cast<Eigen::Index>(reduced[j])) +=
                    rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return out;
}

double interaction_picture_residual(const LindbladGenerator& gen, const Matrix& rho_ref, double t) {
    return max_abs(gen.dissipator(unitary_evolve(gen.hamiltonian(), rho_ref, t)));
}

ExponentialFit fit_exponential_decay(const std::vector<double>& times, const std::vector<double>& values,
                                     double floor) {
    if (times.size() != values.size()) throw ValidationError("decay fit: times and values differ in length");
    double st = 0, sy = 0, stt = 0, sty = 0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!(values[k] > floor)) continue;
        const double y = std::log(values[k]);
        st += times[k];
        sy += y;
        stt += times[k] * times[k];
        sty += times[k] * y;
        ++n;
    }
    if (n < 2) throw ValidationError("decay fit needs at least two samples above the floor");
    const double dn = static_cast<double>(n);
    const double denom = dn * stt - st * st;
    if (!(std::abs(denom) > 0.0)) throw ValidationError("decay fit needs distinct times");
    const double slope = (dn * sty - st * sy) / denom;
    const double intercept = (sy - slope * st) / dn;
    double ss = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!(values[k] > floor)) continue;
        const double r = std::log(values[k]) - (intercept + slope * times[k]);
        ss += r * r;
    }
    return {-slope, std::exp(intercept), std::sqrt(ss / dn), n};
}

}  // namespace qnet
