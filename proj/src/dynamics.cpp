#include "qnet/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dynamics_internal.hpp"
#include "qnet/error.hpp"

namespace qnet {

namespace {

std::string scientific(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

SparseMatrix to_sparse(const Matrix& m) {
    SparseMatrix s = m.sparseView();
    s.prune(Complex{});
    return s;
}

}  // namespace

LindbladGenerator::LindbladGenerator(Matrix hamiltonian, std::vector<Matrix> jumps)
    : h_(std::move(hamiltonian)), jumps_(std::move(jumps)) {
    prepare();
}

LindbladGenerator::LindbladGenerator(const NetworkSpec& spec, const ProductBasis& basis)
    : h_(build_hamiltonian(spec, basis)), jumps_(build_jump_operators(spec, basis)) {
    prepare();
}

void LindbladGenerator::prepare() {
    if (h_.rows() != h_.cols() || h_.rows() == 0) throw ValidationError("Hamiltonian must be square and nonempty");
    if (hermiticity_error(h_) > 1e-12) throw ValidationError("Hamiltonian is not Hermitian");
    Matrix h_eff = h_;
    for (const auto& l : jumps_) {
        if (l.rows() != h_.rows() || l.cols() != h_.cols())
            throw ValidationError("jump operator dimension does not match the Hamiltonian");
        jump_products_.push_back(l.adjoint() * l);
        h_eff -= 0.5 * kI * jump_products_.back();
        jumps_sparse_.push_back(to_sparse(l));
        jumps_adj_sparse_.push_back(to_sparse(l.adjoint()));
    }
    h_eff_ = to_sparse(h_eff);
    h_eff_adj_ = to_sparse(h_eff.adjoint());
}

Matrix LindbladGenerator::apply(const Matrix& x) const {
    if (x.rows() != h_.rows() || x.cols() != h_.cols())
        throw ValidationError("generator applied to a matrix of the wrong dimension");
    // -i H_eff X + i X H_eff^dag + sum L X L^dag
    Matrix out = -kI * (h_eff_ * x);
    out.noalias() += kI * (x * h_eff_adj_);
    for (std::size_t k = 0; k < jumps_sparse_.size(); ++k) {
        const Matrix lx = jumps_sparse_[k] * x;
        out.noalias() += lx * jumps_adj_sparse_[k];
    }
    return out;
}

Matrix LindbladGenerator::apply_hermitian(const Matrix& x) const {
    if (x.rows() != h_.rows() || x.cols() != h_.cols())
        throw ValidationError("generator applied to a matrix of the wrong dimension");
    // With X = X^dag: -i H_eff X + h.c., and L X L^dag = L (L X)^dag.
    const Matrix a = -kI * (h_eff_ * x);
    Matrix out = a + a.adjoint();
    for (const auto& l : jumps_sparse_) {
        const Matrix lx_adj = (l * x).adjoint();
        out.noalias() += l * lx_adj;
    }
    return out;
}

Matrix LindbladGenerator::dissipator(const Matrix& x) const {
    if (x.rows() != h_.rows() || x.cols() != h_.cols())
        throw ValidationError("dissipator applied to a matrix of the wrong dimension");
    Matrix out = Matrix::Zero(x.rows(), x.cols());
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
        const Matrix lx = jumps_sparse_[k] * x;
        out.noalias() += lx * jumps_adj_sparse_[k];
        out.noalias() -= 0.5 * (jump_products_[k] * x + x * jump_products_[k]);
    }
    return out;
}

Matrix dissipator_term(const Matrix& jump, const Matrix& x) {
    const Matrix ldl = jump.adjoint() * jump;
    return jump * x * jump.adjoint() - 0.5 * (ldl * x + x * ldl);
}

Matrix lindblad_apply(const LindbladGenerator& gen, const Matrix& rho) { return gen.apply(rho); }

std::vector<double> Trajectory::population(const std::string& label) const {
    std::size_t s = site_labels.size();
    for (std::size_t i = 0; i < site_labels.size(); ++i)
        if (site_labels[i] == label) s = i;
    if (s == site_labels.size()) throw ValidationError("trajectory has no site '" + label + "'");
    std::vector<double> out;
    out.reserve(populations.size());
    for (const auto& row : populations) out.push_back(row[s]);
    return out;
}

std::vector<double> Trajectory::total_number() const {
    std::vector<double> out;
    for (const auto& row : populations) {
        double n = 0.0;
        for (double p : row) n += p;
        out.push_back(n);
    }
    return out;
}

namespace detail {

SampleLayout full_layout(const ProductBasis& basis) {
    SampleLayout layout;
    for (const auto& s : basis.sites()) layout.labels.push_back(s.label);
    layout.full_dimension = basis.dimension();
    for (std::size_t i = 0; i < basis.dimension(); ++i) {
        layout.occupations.push_back(basis.occupations(i));
        layout.full_index.push_back(i);
    }
    return layout;
}

Matrix SampleLayout::embed(const Matrix& reduced) const {
    if (is_identity()) return reduced;
    const auto D = static_cast<Eigen::Index>(full_dimension);
    Matrix full = Matrix::Zero(D, D);
    for (std::size_t i = 0; i < full_index.size(); ++i)
        for (std::size_t j = 0; j < full_index.size(); ++j)
            full(static_cast<Eigen::Index>(full_index[i]), static_cast<Eigen::Index>(full_index[j])) =
                reduced(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return full;
}

void validate_config(const PropagationConfig& cfg) {
    if (cfg.times.empty()) throw ValidationError("propagation needs at least one output time");
    if (cfg.times.front() != 0.0) throw ValidationError("output grid must start at t = 0");
    for (std::size_t k = 1; k < cfg.times.size(); ++k)
        if (!(cfg.times[k] > cfg.times[k - 1])) throw ValidationError("output grid must be strictly increasing");
    if (cfg.method == PropagationMethod::fixed_step_rk4 && !(cfg.dt > 0.0))
        throw ValidationError("step size dt must be > 0");
}

Recorder::Recorder(GeneratorFn generator, const SampleLayout& layout, const PropagationConfig& cfg,
                   const SampleObserver& observer)
    : generator_(std::move(generator)), layout_(layout), cfg_(cfg), observer_(observer) {
    traj_.site_labels = layout.labels;
    traj_.invariants.min_eigenvalue = std::numeric_limits<double>::infinity();
    // Coherence requests are in full-basis indices; map them to the working basis.
    for (const auto& [i, j] : cfg.coherences) {
        if (i >= layout.full_dimension || j >= layout.full_dimension)
            throw ValidationError("coherence index out of range");
        std::optional<std::pair<std::size_t, std::size_t>> local;
        std::optional<std::size_t> li, lj;
        for (std::size_t k = 0; k < layout.full_index.size(); ++k) {
            if (layout.full_index[k] == i) li = k;
            if (layout.full_index[k] == j) lj = k;
        }
        if (li && lj) local = std::make_pair(*li, *lj);
        coherence_map_.push_back(local);
    }
}

void Recorder::record(std::size_t index, double t, const Matrix& rho) {
    if (!rho.allFinite()) throw InvariantViolation("non-finite density matrix", t);
    const Eigen::Index d = rho.rows();
    const double trace = rho.trace().real();
    const double trace_err = std::abs(rho.trace() - 1.0);
    const double herm_err = hermiticity_error(rho);
    // States outside the working sectors contribute exact zero eigenvalues.
    const double min_eig = layout_.is_full() ? min_eigenvalue(rho) : std::min(min_eigenvalue(rho), 0.0);

    std::vector<double> pops(layout_.labels.size(), 0.0);
    for (Eigen::Index i = 0; i < d; ++i) {
        const double p = rho(i, i).real();
        const auto& occ = layout_.occupations[static_cast<std::size_t>(i)];
        for (std::size_t s = 0; s < pops.size(); ++s) pops[s] += occ[s] * p;
    }
    const double purity = rho.cwiseAbs2().sum();
    const Matrix drho = generator_(rho);
    const double rate = 2.0 * (rho.transpose().cwiseProduct(drho)).sum().real();

    traj_.times.push_back(t);
    traj_.populations.push_back(std::move(pops));
    traj_.purity.push_back(purity);
    traj_.purity_rate.push_back(rate);
    traj_.trace.push_back(trace);
    traj_.min_eigenvalue.push_back(min_eig);
    traj_.hermiticity_error.push_back(herm_err);
    std::vector<Complex> coh;
    for (const auto& m : coherence_map_)
        coh.push_back(m ? rho(static_cast<Eigen::Index>(m->first), static_cast<Eigen::Index>(m->second)) : Complex{});
    traj_.coherence_values.push_back(std::move(coh));

    auto& inv = traj_.invariants;
    inv.max_trace_error = std::max(inv.max_trace_error, trace_err);
    inv.max_hermiticity_error = std::max(inv.max_hermiticity_error, herm_err);
    inv.min_eigenvalue = std::min(inv.min_eigenvalue, min_eig);

    const bool last = index + 1 == cfg_.times.size();
    const bool need_full = observer_ || cfg_.snapshots == SnapshotPolicy::all ||
                           (cfg_.snapshots == SnapshotPolicy::last && last);
    if (need_full) {
        const Matrix full = layout_.embed(rho);
        if (cfg_.snapshots == SnapshotPolicy::all || (cfg_.snapshots == SnapshotPolicy::last && last)) {
            traj_.snapshots.push_back(full);
            traj_.snapshot_times.push_back(t);
        }
        if (observer_) observer_(index, t, full);
    }

    if (cfg_.check_invariants) {
        if (trace_err > cfg_.trace_tolerance)
            throw InvariantViolation("trace drifted by " + scientific(trace_err), t);
        if (herm_err > cfg_.hermiticity_tolerance)
            throw InvariantViolation("Hermiticity error " + scientific(herm_err), t);
        if (min_eig < -cfg_.positivity_tolerance)
            throw InvariantViolation("negative eigenvalue " + scientific(min_eig), t);
    }
}

Trajectory Recorder::finish() { return std::move(traj_); }

Trajectory propagate_rk4(const LindbladGenerator& gen, const SampleLayout& layout, const Matrix& rho0,
                         const PropagationConfig& cfg, const SampleObserver& observer) {
    validate_config(cfg);
    Recorder recorder([&gen](const Matrix& x) { return gen.apply(x); }, layout, cfg, observer);
    Matrix rho = rho0;
    recorder.record(0, cfg.times[0], rho);
    for (std::size_t k = 1; k < cfg.times.size(); ++k) {
        const double span = cfg.times[k] - cfg.times[k - 1];
        const auto steps = static_cast<long>(std::max(1.0, std::ceil(span / cfg.dt - 1e-9)));
        const double h = span / static_cast<double>(steps);
        for (long s = 0; s < steps; ++s) {
            const Matrix k1 = gen.apply_hermitian(rho);
            const Matrix k2 = gen.apply_hermitian(rho + (0.5 * h) * k1);
            const Matrix k3 = gen.apply_hermitian(rho + (0.5 * h) * k2);
            const Matrix k4 = gen.apply_hermitian(rho + h * k3);
            rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (cfg.rehermitize) rho = hermitian_part(rho);
        }
        recorder.record(k, cfg.times[k], rho);
    }
    Trajectory traj = recorder.finish();
    return traj;
}

}  // namespace detail

Trajectory propagate(const LindbladGenerator& gen, const ProductBasis& basis, const DensityMatrix& rho0,
                     const PropagationConfig& cfg, const SampleObserver& observer) {
    if (gen.dimension() != basis.dimension() || rho0.dimension() != basis.dimension())
        throw ValidationError("generator, basis and initial state dimensions differ");
    if (cfg.method == PropagationMethod::superoperator_expm)
        return propagate_expm(build_superoperator(gen), basis, rho0, cfg, observer);
    return detail::propagate_rk4(gen, detail::full_layout(basis), rho0.matrix(), cfg, observer);
}

Trajectory propagate(const NetworkSpec& spec, const DensityMatrix& rho0, const PropagationConfig& cfg,
                     const SampleObserver& observer) {
    const ProductBasis basis = spec.basis();
    if (rho0.dimension() != basis.dimension()) throw ValidationError("initial state dimension does not match network");
    if (cfg.number_sector_filter && cfg.method == PropagationMethod::fixed_step_rk4) {
        if (auto sectors = detail::number_blocks(basis, rho0.matrix())) {
            const detail::SampleLayout layout =
                detail::sector_layout(basis, detail::reachable_sectors(spec, basis, *sectors));
            const detail::BlockGenerator gen(spec, basis, layout);
            Trajectory traj = detail::propagate_blocks(gen, layout, layout.restrict(rho0.matrix()), cfg, observer);
            traj.number_sector_used = true;
            return traj;
        }
    }
    const LindbladGenerator gen(spec, basis);
    return propagate(gen, basis, rho0, cfg, observer);
}

namespace detail {

std::optional<std::vector<int>> number_blocks(const ProductBasis& basis, const Matrix& rho) {
    std::vector<int> sectors;
    for (Eigen::Index i = 0; i < rho.rows(); ++i)
        for (Eigen::Index j = 0; j < rho.cols(); ++j) {
            if (std::abs(rho(i, j)) <= 1e-14) continue;
            const int n = basis.total_number(static_cast<std::size_t>(i));
            if (n != basis.total_number(static_cast<std::size_t>(j))) return std::nullopt;
            if (std::find(sectors.begin(), sectors.end(), n) == sectors.end()) sectors.push_back(n);
        }
    if (sectors.empty()) return std::nullopt;
    std::sort(sectors.begin(), sectors.end());
    return sectors;
}

int number_shift(const JumpProcess& jump) {
    return std::visit(
        [](const auto& j) {
            using T = std::decay_t<decltype(j)>;
            if constexpr (std::is_same_v<T, Injection>) return 1;
            if constexpr (std::is_same_v<T, Extraction> || std::is_same_v<T, Dissipation>) return -1;
            return 0;
        },
        jump);
}

std::vector<int> reachable_sectors(const NetworkSpec& spec, const ProductBasis& basis, std::vector<int> sectors) {
    int top = 0;
    for (const auto& s : basis.sites()) top += s.dimension - 1;
    std::vector<int> shifts;
    for (const auto& j : spec.jumps) shifts.push_back(number_shift(j));
    for (std::size_t k = 0; k < sectors.size(); ++k)
        for (int d : shifts) {
            const int m = sectors[k] + d;
            if (m < 0 || m > top || std::find(sectors.begin(), sectors.end(), m) != sectors.end()) continue;
            sectors.push_back(m);
        }
    std::sort(sectors.begin(), sectors.end());
    return sectors;
}

SampleLayout sector_layout(const ProductBasis& basis, const std::vector<int>& sectors) {
    SampleLayout layout;
    for (const auto& s : basis.sites()) layout.labels.push_back(s.label);
    layout.full_dimension = basis.dimension();
    for (int n : sectors) {
        layout.sectors.push_back(n);
        layout.block_starts.push_back(layout.full_index.size());
        for (std::size_t i = 0; i < basis.dimension(); ++i) {
            if (basis.total_number(i) != n) continue;
            layout.full_index.push_back(i);
            layout.occupations.push_back(basis.occupations(i));
        }
    }
    layout.block_starts.push_back(layout.full_index.size());
    return layout;
}

BlockGenerator::BlockGenerator(const NetworkSpec& spec, const ProductBasis& basis, const SampleLayout& layout) {
    const Matrix reduced_h = layout.restrict(build_hamiltonian(spec, basis));
    std::vector<Matrix> reduced_jumps;
    for (const auto& l : build_jump_operators(spec, basis)) reduced_jumps.push_back(layout.restrict(l));
    Matrix h_eff = reduced_h;
    for (const auto& l : reduced_jumps) h_eff -= 0.5 * kI * (l.adjoint() * l);

    const std::size_t blocks = layout.sectors.size();
    auto range = [&](std::size_t b) {
        return std::pair<Eigen::Index, Eigen::Index>(static_cast<Eigen::Index>(layout.block_starts[b]),
                                                     static_cast<Eigen::Index>(layout.block_starts[b + 1] -
                                                                               layout.block_starts[b]));
    };
    for (std::size_t b = 0; b < blocks; ++b) {
        const auto [start, size] = range(b);
        sizes_.push_back(size);
        starts_.push_back(start);
        h_eff_.push_back(to_sparse(h_eff.block(start, start, size, size)));
    }
    for (std::size_t k = 0; k < reduced_jumps.size(); ++k) {
        const int shift = number_shift(spec.jumps[k]);
        for (std::size_t b = 0; b < blocks; ++b) {
            const auto target = std::find(layout.sectors.begin(), layout.sectors.end(), layout.sectors[b] + shift);
            if (target == layout.sectors.end()) continue;
            const auto t = static_cast<std::size_t>(target - layout.sectors.begin());
            const auto [row, rows] = range(t);
            const auto [col, cols] = range(b);
            SparseMatrix piece = to_sparse(reduced_jumps[k].block(row, col, rows, cols));
            if (piece.nonZeros() == 0) continue;
            jumps_.push_back({b, t, std::move(piece)});
        }
    }
}

BlockGenerator::Blocks BlockGenerator::split(const Matrix& m) const {
    Blocks out;
    for (std::size_t b = 0; b < sizes_.size(); ++b) out.push_back(m.block(starts_[b], starts_[b], sizes_[b], sizes_[b]));
    return out;
}

Matrix BlockGenerator::join(const Blocks& blocks) const {
    const Eigen::Index d = starts_.empty() ? 0 : starts_.back() + sizes_.back();
    Matrix out = Matrix::Zero(d, d);
    for (std::size_t b = 0; b < blocks.size(); ++b) out.block(starts_[b], starts_[b], sizes_[b], sizes_[b]) = blocks[b];
    return out;
}

BlockGenerator::Blocks BlockGenerator::apply(const Blocks& x) const {
    Blocks out;
    for (std::size_t b = 0; b < x.size(); ++b) {
        const Matrix a = -kI * (h_eff_[b] * x[b]);
        out.push_back(a + a.adjoint());
    }
    for (const auto& j : jumps_) {
        const Matrix lx_adj = (j.op * x[j.source]).adjoint();
        out[j.target].noalias() += j.op * lx_adj;
    }
    return out;
}

Trajectory propagate_blocks(const BlockGenerator& gen, const SampleLayout& layout, const Matrix& rho0,
                            const PropagationConfig& cfg, const SampleObserver& observer) {
    validate_config(cfg);
    Recorder recorder([&gen](const Matrix& x) { return gen.join(gen.apply(gen.split(x))); }, layout, cfg, observer);
    using Blocks = BlockGenerator::Blocks;
    // y + c k, blockwise
    auto shifted = [](const Blocks& y, double c, const Blocks& k) {
        Blocks out(y.size());
        for (std::size_t b = 0; b < y.size(); ++b) out[b] = y[b] + c * k[b];
        return out;
    };
    Blocks rho = gen.split(rho0);
    recorder.record(0, cfg.times[0], rho0);
    for (std::size_t k = 1; k < cfg.times.size(); ++k) {
        const double span = cfg.times[k] - cfg.times[k - 1];
        const auto steps = static_cast<long>(std::max(1.0, std::ceil(span / cfg.dt - 1e-9)));
        const double h = span / static_cast<double>(steps);
        for (long s = 0; s < steps; ++s) {
            const Blocks k1 = gen.apply(rho);
            const Blocks k2 = gen.apply(shifted(rho, 0.5 * h, k1));
            const Blocks k3 = gen.apply(shifted(rho, 0.5 * h, k2));
            const Blocks k4 = gen.apply(shifted(rho, h, k3));
            for (std::size_t b = 0; b < rho.size(); ++b) {
                rho[b] += (h / 6.0) * (k1[b] + 2.0 * k2[b] + 2.0 * k3[b] + k4[b]);
                if (cfg.rehermitize) rho[b] = hermitian_part(rho[b]);
            }
        }
        recorder.record(k, cfg.times[k], gen.join(rho));
    }
    return recorder.finish();
}

Matrix SampleLayout::restrict(const Matrix& full) const {
    const auto d = static_cast<Eigen::Index>(full_index.size());
    Matrix out(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            out(i, j) = full(static_cast<Eigen::Index>(full_index[static_cast<std::size_t>(i)]),
                             static_cast<Eigen::Index>(full_index[static_cast<std::size_t>(j)]));
    return out;
}

}  // namespace detail

}  // namespace qnet
