#include "slab/core_model.hpp"

#include <algorithm>
#include <string>

#include "slab/rng.hpp"

namespace slab {

const char* errc_name(errc code) noexcept {
    switch (code) {
        case errc::mismatched_lengths: return "MismatchedLengths";
        case errc::non_positive_size: return "NonPositiveSize";
        case errc::non_positive_rate: return "NonPositiveRate";
        case errc::index_out_of_range: return "IndexOutOfRange";
        case errc::allocation_exceeds_group: return "AllocationExceedsGroup";
        case errc::zero_allocation: return "ZeroAllocation";
        case errc::infeasible_k: return "InfeasibleK";
        case errc::no_convergence: return "NoConvergence";
        case errc::infeasible_after_clamp: return "InfeasibleAfterClamp";
        case errc::out_of_bracket: return "OutOfBracket";
        case errc::negative_discriminant: return "NegativeDiscriminant";
        case errc::invalid_dims: return "InvalidDims";
        case errc::indivisible_rows: return "IndivisibleRows";
        case errc::invalid_allocation: return "InvalidAllocation";
        case errc::insufficient_results: return "InsufficientResults";
        case errc::singular_submatrix: return "SingularSubmatrix";
        case errc::group_shortfall: return "GroupShortfall";
        case errc::shape_mismatch: return "ShapeMismatch";
        case errc::not_decodable_even_complete: return "NotDecodableEvenComplete";
    }
    return "UnknownError";
}

GroupSystem new_group_system(std::vector<int> group_sizes, std::vector<double> rates) {
    if (group_sizes.empty() || group_sizes.size() != rates.size()) {
        raise(errc::mismatched_lengths,
              "group_sizes and rates must be nonempty and of equal length (got " +
                  std::to_string(group_sizes.size()) + " and " + std::to_string(rates.size()) + ")");
    }
    for (std::size_t i = 0; i < group_sizes.size(); ++i) {
        if (group_sizes[i] < 1) {
            raise(errc::non_positive_size,
                  "group " + std::to_string(i) + " has size " + std::to_string(group_sizes[i]));
        }
        if (!(rates[i] > 0.0)) {
            raise(errc::non_positive_rate,
                  "group " + std::to_string(i) + " has rate " + std::to_string(rates[i]));
        }
    }
    return GroupSystem{std::move(group_sizes), std::move(rates)};
}

void validate_allocation(const GroupSystem& system, const Allocation& alloc) {
    if (static_cast<int>(alloc.per_group.size()) != system.num_groups()) {
        raise(errc::invalid_allocation, "allocation has " + std::to_string(alloc.per_group.size()) +
                                            " entries for " + std::to_string(system.num_groups()) +
                                            " groups");
    }
    long sum = 0;
    for (int i = 0; i < system.num_groups(); ++i) {
        const int k_i = alloc.per_group[i];
        if (k_i < 0) {
            raise(errc::invalid_allocation, "negative allocation in group " + std::to_string(i));
        }
        if (k_i > system.group_sizes[i]) {
            raise(errc::allocation_exceeds_group,
                  "group " + std::to_string(i) + " allocated " + std::to_string(k_i) + " of " +
                      std::to_string(system.group_sizes[i]) + " workers");
        }
        sum += k_i;
    }
    if (sum != alloc.k_total) {
        raise(errc::invalid_allocation, "allocation sums to " + std::to_string(sum) +
                                            ", expected k_total = " + std::to_string(alloc.k_total));
    }
}

Allocation even_allocation(const GroupSystem& system, int k_total) {
    const int L = system.num_groups();
    Allocation alloc;
    alloc.k_total = k_total;
    alloc.per_group.assign(L, k_total / L);
    for (int i = 0; i < k_total % L; ++i) alloc.per_group[i] += 1;
    validate_allocation(system, alloc);
    return alloc;
}

CompletionSample sample_completion_times(const GroupSystem& system, int k_total,
                                         std::uint64_t seed, std::uint64_t trial) {
    if (k_total < 1) {
        raise(errc::infeasible_k, "k_total must be >= 1, got " + std::to_string(k_total));
    }
    CompletionSample sample;
    sample.k_total = k_total;
    sample.times.resize(system.num_groups());
    const auto trial_lane = static_cast<std::uint32_t>(trial);
    for (int i = 0; i < system.num_groups(); ++i) {
        const double rate = static_cast<double>(k_total) * system.rates[i];
        auto& row = sample.times[i];
        row.resize(system.group_sizes[i]);
        const std::uint32_t group_lane = stream_tag::completion_times | static_cast<std::uint32_t>(i);
        for (int j = 0; j < system.group_sizes[i]; ++j) {
            CounterRng rng(seed, static_cast<std::uint32_t>(j), group_lane, trial_lane);
            row[j] = rng.next_exponential(rate);
        }
    }
    return sample;
}

double kth_smallest(std::span<const double> values, int k) {
    if (k < 1 || k > static_cast<int>(values.size())) {
        raise(errc::index_out_of_range, "rank " + std::to_string(k) + " outside 1.." +
                                            std::to_string(values.size()));
    }
    std::vector<double> scratch(values.begin(), values.end());
    auto nth = scratch.begin() + (k - 1);
    std::nth_element(scratch.begin(), nth, scratch.end());
    return *nth;
}

} // namespace slab
