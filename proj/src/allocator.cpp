#include "slab/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "slab/asymptotics.hpp"

namespace slab {

namespace {

// Remaining groups equalized to the pivot's xi: k_j = n_j (1 - (1 - x/n_p)^(mu_j/mu_p)).
double equalized_share(const GroupSystem& system, int pivot, double k_pivot, int j) {
    const double survival = 1.0 - k_pivot / system.group_sizes[pivot];
    const double exponent = system.rates[j] / system.rates[pivot];
    return system.group_sizes[j] * (1.0 - std::pow(survival, exponent));
}

} // namespace

double h_load(const GroupSystem& system, int pivot, double k_pivot) {
    if (pivot < 0 || pivot >= system.num_groups()) {
        raise(errc::index_out_of_range, "pivot group " + std::to_string(pivot));
    }
    if (k_pivot < 0.0 || k_pivot > system.group_sizes[pivot]) {
        raise(errc::out_of_bracket, "k_pivot = " + std::to_string(k_pivot) + " outside [0, " +
                                        std::to_string(system.group_sizes[pivot]) + "]");
    }
    double load = k_pivot;
    for (int j = 0; j < system.num_groups(); ++j) {
        if (j == pivot) continue;
        load += equalized_share(system, pivot, k_pivot, j);
    }
    return load;
}

ContinuousAllocation solve_allocation_continuous(const GroupSystem& system, int k_total,
                                                 double tol) {
    const long n = system.total_workers();
    if (k_total < 1 || k_total > n) {
        raise(errc::infeasible_k,
              "k_total = " + std::to_string(k_total) + " outside 1.." + std::to_string(n));
    }
    if (!(tol > 0.0)) {
        raise(errc::out_of_bracket, "tol must be > 0");
    }

    const int pivot = 0;
    const double n1 = system.group_sizes[pivot];
    const double k = k_total;
    double lo = std::max(0.0, k - static_cast<double>(n) + n1);
    double hi = std::min(n1, k);

    // Bisection keeps h(lo) <= k <= h(hi); the residual target sits far
    // below one task so rounding never sees the solver's error.
    const double stop = std::min(tol, 1e-13 * std::max(1.0, k));
    double x = 0.5 * (lo + hi);
    double hx = h_load(system, pivot, x);
    const int kMaxIterations = 200;
    for (int it = 0; it < kMaxIterations && std::abs(hx - k) > stop; ++it) {
        if (hx < k) {
            lo = x;
        } else {
            hi = x;
        }
        const double next = 0.5 * (lo + hi);
        if (next == x || hi - lo <= std::numeric_limits<double>::epsilon() * n1) {
            break; // bracket exhausted at double precision
        }
        x = next;
        hx = h_load(system, pivot, x);
    }

    ContinuousAllocation out;
    out.k_total = k_total;
    out.residual = std::abs(hx - k);
    if (out.residual > tol) {
        raise(errc::no_convergence, "bisection residual " + std::to_string(out.residual) +
                                        " above tol " + std::to_string(tol));
    }
    out.saturated = (k_total == n);
    out.per_group.resize(system.num_groups());
    out.per_group[pivot] = x;
    for (int j = 0; j < system.num_groups(); ++j) {
        if (j == pivot) continue;
        out.per_group[j] = equalized_share(system, pivot, x, j);
    }
    return out;
}

Allocation round_allocation(const GroupSystem& system, const ContinuousAllocation& continuous) {
    const int L = system.num_groups();
    if (static_cast<int>(continuous.per_group.size()) != L) {
        raise(errc::invalid_allocation, "continuous allocation does not match system");
    }
    const int k_total = continuous.k_total;

    Allocation alloc;
    alloc.k_total = k_total;
    alloc.per_group.resize(L);
    std::vector<double> remainder(L);
    long assigned = 0;
    for (int i = 0; i < L; ++i) {
        const double x = std::clamp(continuous.per_group[i], 0.0, double(system.group_sizes[i]));
        const int base = static_cast<int>(std::floor(x));
        alloc.per_group[i] = base;
        remainder[i] = x - base;
        assigned += base;
    }

    // xi growth of granting (or cost of revoking) one task; used for ties.
    auto xi_step_up = [&](int i) {
        if (alloc.per_group[i] >= system.group_sizes[i]) {
            return std::numeric_limits<double>::infinity();
        }
        const double before =
            xi(system.rates[i], system.group_sizes[i], alloc.per_group[i], k_total).value;
        const double after =
            xi(system.rates[i], system.group_sizes[i], alloc.per_group[i] + 1, k_total).value;
        return after - before;
    };

    long deficit = k_total - assigned;
    while (deficit > 0) {
        int best = -1;
        double best_step = 0.0;
        for (int i = 0; i < L; ++i) {
            if (alloc.per_group[i] >= system.group_sizes[i]) continue;
            const double step = xi_step_up(i);
            if (best < 0 || remainder[i] > remainder[best] ||
                (remainder[i] == remainder[best] && step < best_step)) {
                best = i;
                best_step = step;
            }
        }
        if (best < 0) {
            raise(errc::infeasible_after_clamp, "cannot reach sum k within per-group caps");
        }
        alloc.per_group[best] += 1;
        remainder[best] = 0.0;
        --deficit;
    }
    while (deficit < 0) {
        int best = -1;
        for (int i = 0; i < L; ++i) {
            if (alloc.per_group[i] <= 0) continue;
            if (best < 0 || remainder[i] < remainder[best]) best = i;
        }
        if (best < 0) {
            raise(errc::infeasible_after_clamp, "cannot shed surplus tasks");
        }
        alloc.per_group[best] -= 1;
        remainder[best] = 1.0;
        ++deficit;
    }

    validate_allocation(system, alloc);
    return alloc;
}

Allocation optimal_allocation(const GroupSystem& system, int k_total) {
    const double tol = 1e-10 * static_cast<double>(system.total_workers());
    const ContinuousAllocation continuous = solve_allocation_continuous(system, k_total, tol);
    Allocation alloc = round_allocation(system, continuous);

    // Descend over single-task moves until no transfer between any pair of
    // groups improves the asymptotic time (local optimality of the convex
    // objective; rounding already lands within one move of the optimum).
    const int L = system.num_groups();
    double current = asymptotic_group_time(system, alloc);
    bool improved = true;
    while (improved) {
        improved = false;
        int best_from = -1, best_to = -1;
        double best_time = current;
        for (int from = 0; from < L; ++from) {
            if (alloc.per_group[from] <= 0) continue;
            for (int to = 0; to < L; ++to) {
                if (to == from || alloc.per_group[to] >= system.group_sizes[to]) continue;
                alloc.per_group[from] -= 1;
                alloc.per_group[to] += 1;
                const double candidate = asymptotic_group_time(system, alloc);
                alloc.per_group[from] += 1;
                alloc.per_group[to] -= 1;
                if (candidate < best_time) {
                    best_time = candidate;
                    best_from = from;
                    best_to = to;
                }
            }
        }
        if (best_from >= 0) {
            alloc.per_group[best_from] -= 1;
            alloc.per_group[best_to] += 1;
            current = best_time;
            improved = true;
        }
    }
    return alloc;
}

} // namespace slab
