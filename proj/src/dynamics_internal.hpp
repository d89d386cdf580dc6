#pragma once

#include <optional>

#include "qnet/dynamics.hpp"

namespace qnet::detail {

/// Working basis for a propagation: either the full product basis or a set
/// of total-number sectors, listed sector by sector.
struct SampleLayout {
    std::vector<std::string> labels;
    std::vector<std::vector<int>> occupations;  // per working index
    std::vector<std::size_t> full_index;        // working index -> full flat index
    std::size_t full_dimension = 0;
    /// Sector numbers and the working index where each starts (plus the end); empty for the full layout.
    std::vector<int> sectors;
    std::vector<std::size_t> block_starts;

    /// Every full-basis state is present (possibly reordered).
    bool is_full() const { return full_index.size() == full_dimension; }
    /// Working index equals full index.
    bool is_identity() const { return sectors.empty(); }
    Matrix embed(const Matrix& reduced) const;
    Matrix restrict(const Matrix& full) const;
};

SampleLayout full_layout(const ProductBasis& basis);
SampleLayout sector_layout(const ProductBasis& basis, const std::vector<int>& sectors);

/// Sorted number sectors occupied by rho, or nullopt when rho has coherences between sectors.
std::optional<std::vector<int>> number_blocks(const ProductBasis& basis, const Matrix& rho);

/// Change of total number caused by one jump.
int number_shift(const JumpProcess& jump);

/// Closure of sectors under the jump shifts, within [0, max total number].
std::vector<int> reachable_sectors(const NetworkSpec& spec, const ProductBasis& basis, std::vector<int> sectors);

void validate_config(const PropagationConfig& cfg);

/// Accumulates per-sample observables and enforces the invariants.
/// X -> L(X) in the working basis.
using GeneratorFn = std::function<Matrix(const Matrix&)>;

class Recorder {
public:
    Recorder(GeneratorFn generator, const SampleLayout& layout, const PropagationConfig& cfg,
             const SampleObserver& observer);
    void record(std::size_t index, double t, const Matrix& rho);
    Trajectory finish();

private:
    GeneratorFn generator_;
    const SampleLayout& layout_;
    const PropagationConfig& cfg_;
    const SampleObserver& observer_;
    std::vector<std::optional<std::pair<std::size_t, std::size_t>>> coherence_map_;
    Trajectory traj_;
};

/// The generator on a number-block-diagonal state. H conserves the total
/// number and every jump shifts it by a fixed amount, so such a state stays
/// block diagonal and the blocks are propagated directly.
class BlockGenerator {
public:
    using Blocks = std::vector<Matrix>;

    BlockGenerator(const NetworkSpec& spec, const ProductBasis& basis, const SampleLayout& layout);

    Blocks split(const Matrix& m) const;
    Matrix join(const Blocks& blocks) const;
    /// For Hermitian blocks.
    Blocks apply(const Blocks& x) const;

private:
    struct Piece {
        std::size_t source;
        std::size_t target;
        SparseMatrix op;
    };
    std::vector<Eigen::Index> starts_;
    std::vector<Eigen::Index> sizes_;
    std::vector<SparseMatrix> h_eff_;
    std::vector<Piece> jumps_;
};

Trajectory propagate_blocks(const BlockGenerator& gen, const SampleLayout& layout, const Matrix& rho0,
                            const PropagationConfig& cfg, const SampleObserver& observer);

Trajectory propagate_rk4(const LindbladGenerator& gen, const SampleLayout& layout, const Matrix& rho0,
                         const PropagationConfig& cfg, const SampleObserver& observer);

}  // namespace qnet::detail
