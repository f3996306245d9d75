#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "slab/core_model.hpp"

namespace slab {

/// n x k real generator, identity rows on top and dense parity rows below.
/// Any k distinct rows form an invertible k x k system (MDS property).
struct GeneratorMatrix {
    Eigen::MatrixXd coeffs;
    bool systematic = true;

    int rows() const noexcept { return static_cast<int>(coeffs.rows()); }
    int cols() const noexcept { return static_cast<int>(coeffs.cols()); }
};

/// Result of group-encoding a work matrix: worker (i, j) stores
/// blocks[i][j], the j-th coded row of group i's (n_i, k_i) code.
struct CodedAssignment {
    Allocation alloc;
    int block_rows = 0; // m / k_total
    int cols = 0;       // d
    std::vector<int> source_offset;                    // first source block per group
    std::vector<GeneratorMatrix> generators;           // empty for k_i = 0 groups
    std::vector<std::vector<Eigen::MatrixXd>> blocks;  // [group][worker]
};

/// Systematic construction: identity on top, seed-derived Gaussian parity
/// rows (scaled by 1/sqrt(k)) below. Deterministic given (n, k, seed); the
/// MDS property is spot-checked on random k-subsets at construction.
GeneratorMatrix mds_generator(int n, int k, std::uint64_t seed);

/// Splits A row-wise into k_total equal blocks, hands contiguous chunks of
/// k_i blocks to group i, and encodes each chunk with that group's code.
CodedAssignment group_encode(const Eigen::MatrixXd& A, const GroupSystem& system,
                             const Allocation& alloc, std::uint64_t seed);

/// Recovers the k source values from the first k received rows (distinct row
/// indices, in arrival order). Received systematic rows pass through
/// verbatim; the remaining sources come from one parity solve.
std::vector<Eigen::MatrixXd> decode_from_subset(
    const std::vector<std::pair<int, Eigen::MatrixXd>>& results, const GeneratorMatrix& generator);

/// Per-group decode + reassembly into the full product in source order.
/// Throws group_shortfall naming the first group below its quota.
Eigen::MatrixXd group_decode(
    const std::vector<std::vector<std::pair<int, Eigen::MatrixXd>>>& per_group_results,
    const CodedAssignment& assignment);

} // namespace slab
