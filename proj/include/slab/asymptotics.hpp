#pragma once

#include "slab/core_model.hpp"

namespace slab {

/// Limiting mean of the k_i-th of n_i group-i order statistics:
/// -ln(1 - k_i/n_i) / (k_total * mu_i). Infinite exactly when k_i = n_i.
struct XiValue {
    double value = 0.0;
    int group_index = -1;
    double load_fraction = 0.0; // k_i / n_i
};

/// The order-statistic sandwich for one realization:
/// min_i T^(i)_{k_i:n_i} <= T_{k:n} <= max_i T^(i)_{k_i:n_i}.
struct BoundsReport {
    double lower = 0.0;
    double mds_time = 0.0;
    double upper = 0.0;
    bool holds = false;
};

XiValue xi(double mu_i, int n_i, int k_i, int k_total, int group_index = -1);

/// Limiting expected computing time of the group code: max_i xi^(i).
double asymptotic_group_time(const GroupSystem& system, const Allocation& alloc);

struct L2HalfRateSolution {
    double k1_star = 0.0;
    double time = 0.0;
};

/// Closed-form optimal split for L = 2 with mu = (2*mu2, mu2), and the
/// corresponding limiting computing time. k1_star does not depend on mu2.
L2HalfRateSolution closed_form_L2_half_rate(int n1, int n2, int k_total, double mu2 = 1.0);

/// Evaluates the sandwich on a concrete realization. Every k_i must be >= 1.
BoundsReport check_order_bounds(const CompletionSample& sample, const Allocation& alloc);

} // namespace slab
