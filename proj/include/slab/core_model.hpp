#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "slab/errors.hpp"

namespace slab {

/// An (n, mu)-group system: L groups, group i holding group_sizes[i] workers
/// whose completion times are i.i.d. exponential with rate k * rates[i].
struct GroupSystem {
    std::vector<int> group_sizes;
    std::vector<double> rates;

    int num_groups() const noexcept { return static_cast<int>(group_sizes.size()); }
    long total_workers() const noexcept {
        long total = 0;
        for (int n : group_sizes) total += n;
        return total;
    }
};

/// Integer task split k = [k_1..k_L] with sum k_total.
struct Allocation {
    std::vector<int> per_group;
    int k_total = 0;

    int max_per_group() const noexcept {
        int m = 0;
        for (int k : per_group) m = k > m ? k : m;
        return m;
    }
};

/// One realization of every worker's completion time, shaped like the
/// generating system. k_total records the rate scaling used to draw it.
struct CompletionSample {
    std::vector<std::vector<double>> times;
    int k_total = 0;

    int num_groups() const noexcept { return static_cast<int>(times.size()); }
};

GroupSystem new_group_system(std::vector<int> group_sizes, std::vector<double> rates);

/// Throws invalid_allocation / allocation_exceeds_group if alloc does not fit
/// the system (negative entries, wrong length, k_i > n_i, or bad sum).
void validate_allocation(const GroupSystem& system, const Allocation& alloc);

/// Even split of k over the system's groups; remainder spread one task each
/// over the leading groups. Requires the split to fit every group.
Allocation even_allocation(const GroupSystem& system, int k_total);

/// Draws worker (i, j)'s time from the substream (trial, group i, worker j)
/// of the master seed, so the same arguments give bit-identical samples no
/// matter how calls are ordered or threaded.
CompletionSample sample_completion_times(const GroupSystem& system, int k_total,
                                         std::uint64_t seed, std::uint64_t trial = 0);

/// k-th smallest (1-indexed) by partial selection; the input is not modified.
double kth_smallest(std::span<const double> values, int k);

} // namespace slab
