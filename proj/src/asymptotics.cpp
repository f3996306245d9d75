#include "slab/asymptotics.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace slab {

XiValue xi(double mu_i, int n_i, int k_i, int k_total, int group_index) {
    if (k_i > n_i) {
        raise(errc::allocation_exceeds_group,
              "k_i = " + std::to_string(k_i) + " exceeds group size " + std::to_string(n_i));
    }
    XiValue out;
    out.group_index = group_index;
    out.load_fraction = static_cast<double>(k_i) / static_cast<double>(n_i);
    if (k_i == n_i) {
        out.value = std::numeric_limits<double>::infinity();
    } else {
        out.value = -std::log1p(-out.load_fraction) / (static_cast<double>(k_total) * mu_i);
    }
    return out;
}

double asymptotic_group_time(const GroupSystem& system, const Allocation& alloc) {
    validate_allocation(system, alloc);
    double worst = 0.0;
    for (int i = 0; i < system.num_groups(); ++i) {
        const double v = xi(system.rates[i], system.group_sizes[i], alloc.per_group[i],
                            alloc.k_total, i)
                             .value;
        worst = std::max(worst, v);
    }
    return worst;
}

L2HalfRateSolution closed_form_L2_half_rate(int n1, int n2, int k_total, double mu2) {
    if (k_total < 0 || k_total > n1 + n2) {
        raise(errc::negative_discriminant, "k_total = " + std::to_string(k_total) +
                                               " outside 0.." + std::to_string(n1 + n2));
    }
    const double n1d = n1;
    const double n2d = n2;
    const double kd = k_total;
    const double half_ratio = n2d * n2d / (2.0 * n1d);
    const double discriminant = (n2d + half_ratio) * (n2d + half_ratio) - kd * n2d * n2d / n1d;
    if (discriminant < 0.0) {
        raise(errc::negative_discriminant, "negative discriminant; requires k <= n1 + n2");
    }
    L2HalfRateSolution out;
    out.k1_star = kd - n2d - half_ratio + std::sqrt(discriminant);
    // Guard the k = 0 corner where cancellation can leave a tiny negative.
    if (k_total == 0) out.k1_star = 0.0;

    const double inner = (1.0 + n2d / (2.0 * n1d)) * (1.0 + n2d / (2.0 * n1d)) - kd / n1d;
    out.time = -std::log(std::sqrt(inner) - n2d / (2.0 * n1d)) / (kd * mu2);
    if (k_total == 0) out.time = 0.0;
    return out;
}

BoundsReport check_order_bounds(const CompletionSample& sample, const Allocation& alloc) {
    if (static_cast<int>(alloc.per_group.size()) != sample.num_groups()) {
        raise(errc::invalid_allocation, "allocation/sample group count mismatch");
    }
    std::vector<double> flat;
    BoundsReport report;
    report.lower = std::numeric_limits<double>::infinity();
    report.upper = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < sample.num_groups(); ++i) {
        const auto& row = sample.times[i];
        const int k_i = alloc.per_group[i];
        if (k_i < 1) {
            raise(errc::zero_allocation,
                  "group " + std::to_string(i) + " has k_i = 0; its order statistic is undefined");
        }
        if (k_i > static_cast<int>(row.size())) {
            raise(errc::allocation_exceeds_group,
                  "group " + std::to_string(i) + " allocated past its size");
        }
        const double t_i = kth_smallest(row, k_i);
        report.lower = std::min(report.lower, t_i);
        report.upper = std::max(report.upper, t_i);
        flat.insert(flat.end(), row.begin(), row.end());
    }
    report.mds_time = kth_smallest(flat, alloc.k_total);
    report.holds = report.lower <= report.mds_time && report.mds_time <= report.upper;
    return report;
}

} // namespace slab
