#pragma once

#include "slab/core_model.hpp"

namespace slab {

/// Equalized real-valued task split. residual is |h(k_pivot) - k| at
/// termination; saturated marks the degenerate k_total = n solution
/// (every group fully loaded, infinite asymptotic time).
struct ContinuousAllocation {
    std::vector<double> per_group;
    double residual = 0.0;
    int k_total = 0;
    bool saturated = false;
};

/// Load picked up by the whole system when group `pivot` takes k_pivot tasks
/// and every other group is equalized to it:
///   h(x) = x + sum_{j != pivot} n_j * (1 - (1 - x/n_pivot)^(mu_j/mu_pivot)).
/// Strictly increasing on [0, n_pivot] with h(0) = 0 and h(n_pivot) = n.
double h_load(const GroupSystem& system, int pivot, double k_pivot);

/// Bisection on h - k over the bracket [max(0, k - n + n_1), min(n_1, k)],
/// then recovery of the remaining groups from the pivot. The result has all
/// xi equal (exactly, by construction) and sums to k within tol.
ContinuousAllocation solve_allocation_continuous(const GroupSystem& system, int k_total,
                                                 double tol);

/// Largest-remainder rounding with per-group caps. Sum is exactly k_total;
/// repair ties go to the group whose xi grows least.
Allocation round_allocation(const GroupSystem& system, const ContinuousAllocation& continuous);

/// solve + round, followed by a single-move descent so the result cannot be
/// improved by shifting one task between any two groups.
Allocation optimal_allocation(const GroupSystem& system, int k_total);

} // namespace slab
