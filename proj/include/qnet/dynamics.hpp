#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qnet/hilbert.hpp"
#include "qnet/model.hpp"

namespace qnet {

/// rho' = -i[H, rho] + sum_k (L_k rho L_k^dag - {L_k^dag L_k, rho}/2)
class LindbladGenerator {
public:
    LindbladGenerator(Matrix hamiltonian, std::vector<Matrix> jumps);
    LindbladGenerator(const NetworkSpec& spec, const ProductBasis& basis);

    std::size_t dimension() const noexcept { return static_cast<std::size_t>(h_.rows()); }
    const Matrix& hamiltonian() const noexcept { return h_; }
    const std::vector<Matrix>& jumps() const noexcept { return jumps_; }
    /// L_k^dag L_k, same order as jumps().
    const std::vector<Matrix>& jump_products() const noexcept { return jump_products_; }

    /// Full generator applied to X.
    Matrix apply(const Matrix& x) const;
    /// Same as apply for Hermitian X, using left products only.
    Matrix apply_hermitian(const Matrix& x) const;
    /// Dissipative part only.
    Matrix dissipator(const Matrix& x) const;

private:
    void prepare();

    Matrix h_;
    std::vector<Matrix> jumps_;
    std::vector<Matrix> jump_products_;
    // H - (i/2) sum L^dag L, and the jumps, sparse for the propagation hot path.
    SparseMatrix h_eff_;
    SparseMatrix h_eff_adj_;
    std::vector<SparseMatrix> jumps_sparse_;
    std::vector<SparseMatrix> jumps_adj_sparse_;
};

/// Dissipator of one jump operator: L X L^dag - {L^dag L, X}/2.
Matrix dissipator_term(const Matrix& jump, const Matrix& x);

/// Generator output, used as lindblad_apply(gen, rho).
Matrix lindblad_apply(const LindbladGenerator& gen, const Matrix& rho);

enum class PropagationMethod { fixed_step_rk4, superoperator_expm };
enum class SnapshotPolicy { none, all, last };

struct PropagationConfig {
    PropagationMethod method = PropagationMethod::fixed_step_rk4;
    double dt = 1e-3;
    /// Output times; strictly increasing and starting at 0.
    std::vector<double> times;
    /// Re-Hermitize after every step. Off by default.
    bool rehermitize = false;
    SnapshotPolicy snapshots = SnapshotPolicy::none;
    /// Check trace/Hermiticity/positivity at every output time and throw on violation.
    bool check_invariants = true;
    double trace_tolerance = 1e-9;
    double hermiticity_tolerance = 1e-9;
    double positivity_tolerance = 1e-9;
    /// Propagate only the total-number blocks reachable from a block-diagonal
    /// initial state. With Transfer-only jumps this is the initial sector alone.
    bool number_sector_filter = false;
    /// Computational-basis elements rho(i, j) to record.
    std::vector<std::pair<std::size_t, std::size_t>> coherences;
};

struct InvariantSummary {
    double max_trace_error = 0.0;
    double max_hermiticity_error = 0.0;
    double min_eigenvalue = 1.0;
    bool ok(const PropagationConfig& cfg) const {
        return max_trace_error <= cfg.trace_tolerance && max_hermiticity_error <= cfg.hermiticity_tolerance &&
               min_eigenvalue >= -cfg.positivity_tolerance;
    }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<std::string> site_labels;
    /// populations[k][s] = <number(site s)> at times[k].
    std::vector<std::vector<double>> populations;
    std::vector<double> purity;
    std::vector<double> purity_rate;
    std::vector<double> trace;
    std::vector<double> min_eigenvalue;
    std::vector<double> hermiticity_error;
    /// coherence_values[k][c] for cfg.coherences[c].
    std::vector<std::vector<Complex>> coherence_values;
    std::vector<Matrix> snapshots;
    std::vector<double> snapshot_times;
    InvariantSummary invariants;
    bool number_sector_used = false;

    /// Population column for one site.
    std::vector<double> population(const std::string& label) const;
    std::vector<double> total_number() const;
};

/// Called at every output time with the full density matrix.
using SampleObserver = std::function<void(std::size_t index, double time, const Matrix& rho)>;

Trajectory propagate(const LindbladGenerator& gen, const ProductBasis& basis, const DensityMatrix& rho0,
                     const PropagationConfig& cfg, const SampleObserver& observer = {});

/// Convenience for preset networks; honours cfg.number_sector_filter.
Trajectory propagate(const NetworkSpec& spec, const DensityMatrix& rho0, const PropagationConfig& cfg,
                     const SampleObserver& observer = {});

/// Default dense bound for superoperator work: D <= 64.
inline constexpr std::size_t kMaxSuperoperatorDimension = 64;

/// Column-stacking superoperator, vec(A X B) = (B^T (x) A) vec(X):
/// -i(I(x)H - H^T(x)I) + sum_k [conj(L_k)(x)L_k - (I(x)L_k^dag L_k + (L_k^dag L_k)^T (x) I)/2]
Matrix build_superoperator(const LindbladGenerator& gen, std::size_t max_dimension = kMaxSuperoperatorDimension);

struct SteadyStateResult {
    /// Trace-one Hermitian null-space elements.
    std::vector<Matrix> states;
    /// Dimension of the null space.
    std::size_t multiplicity = 0;
    /// max-entry norm of L(rho) for each state.
    std::vector<double> residuals;
    /// Hermitian null-space directions with zero trace (complete the basis).
    std::vector<Matrix> traceless_modes;
    /// Purely imaginary nonzero eigenvalues (rotating coherence pairs).
    std::vector<Complex> rotating_modes;
    std::vector<Complex> eigenvalues;
};

/// Null space of the superoperator. Eigenvalues with |lambda| <= rel_tol * max|lambda|
/// count as zero modes.
SteadyStateResult steady_states(const Matrix& superoperator, double rel_tol = 1e-10);

/// Exact propagation rho(t) = unvec(exp(t S) vec(rho0)).
Trajectory propagate_expm(const Matrix& superoperator, const ProductBasis& basis, const DensityMatrix& rho0,
                          const PropagationConfig& cfg, const SampleObserver& observer = {});

/// Eigenvalues of the superoperator restricted to operators |a><b| with equal
/// total number in a and b. Populations evolve only through these modes.
std::vector<Complex> population_block_spectrum(const Matrix& superoperator, const ProductBasis& basis);

/// max |Im lambda| over the population block modes.
double population_oscillation_frequency(const Matrix& superoperator, const ProductBasis& basis,
                                        double tolerance = 1e-9);

}  // namespace qnet
