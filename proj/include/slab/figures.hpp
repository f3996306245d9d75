#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "slab/montecarlo.hpp"

// Reproduction recipes: each produces the data behind one result figure as a
// deterministic table, plus a CSV writer with a stable header. Plotting is
// left to whatever tool reads the CSV.

namespace slab {

/// Baked-in sweep parameters with the caller's override hooks.
struct FigureOverrides {
    int trials = 10000;
    std::uint64_t seed = 1;
};

/// The six-group benchmark system (n = 900, L = 6) used by fig5.
GroupSystem benchmark_system_l6();

/// Two-group system [3n/4, n/4] with rates [1, 2] used by fig3.
GroupSystem two_group_system(int n);

// fig3: average computing time of MDS vs group codes over an n sweep,
// k = 100, both the optimal and the even task allocation.
struct Fig3Row {
    int n = 0;
    double mean_mds = 0.0;
    double mean_group_opt = 0.0;
    double mean_group_even = 0.0;
    double se_mds = 0.0;
    double se_group_opt = 0.0;
    double se_group_even = 0.0;
};
std::vector<int> fig3_default_grid();
std::vector<Fig3Row> fig3_rows(const FigureOverrides& overrides);

// fig4: mean decode-complexity ratio versus L for the two random-system
// scenarios, the (1/L)^beta floor, and the trend line anchored at
// scenario 2's L = 2 point.
struct Fig4Row {
    int num_groups = 0;
    double scenario1 = 0.0;
    double scenario2 = 0.0;
    double floor_ratio = 0.0;
    double trend = 0.0;
};
std::vector<Fig4Row> fig4_rows(const FigureOverrides& overrides);

// fig5: mean execution time t_comp + alpha * dec_units for the three
// benchmark codes over a low-alpha and a large-alpha grid.
struct Fig5Row {
    double alpha = 0.0;
    double exec_mds = 0.0;
    double exec_product = 0.0;
    double exec_group = 0.0;
};
struct Fig5Data {
    std::vector<Fig5Row> low_alpha;
    std::vector<Fig5Row> large_alpha;
    ExperimentSummary summary;
};
std::vector<double> fig5_low_alpha_grid();
std::vector<double> fig5_large_alpha_grid();
Fig5Data fig5_rows(const FigureOverrides& overrides);

// CSV output. Writers buffer the whole file and write it in one shot, so a
// failed run leaves no partial file behind.
std::string format_csv_value(double value);
void write_fig3_csv(const std::filesystem::path& path, const std::vector<Fig3Row>& rows);
void write_fig4_csv(const std::filesystem::path& path, const std::vector<Fig4Row>& rows);
void write_fig5_csv(const std::filesystem::path& path, const std::vector<Fig5Row>& rows);

} // namespace slab
