#include "slab/figures.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace slab {

GroupSystem benchmark_system_l6() {
    return new_group_system({180, 170, 160, 140, 130, 120},
                            {1.25, 1.35, 1.45, 1.55, 1.65, 1.75});
}

GroupSystem two_group_system(int n) {
    if (n % 4 != 0) {
        raise(errc::invalid_dims, "n must be divisible by 4, got " + std::to_string(n));
    }
    return new_group_system({3 * n / 4, n / 4}, {1.0, 2.0});
}

std::vector<int> fig3_default_grid() {
    return {200, 400, 600, 800, 1200, 1600, 2000, 2400, 3200, 4000};
}

std::vector<Fig3Row> fig3_rows(const FigureOverrides& overrides) {
    std::vector<Fig3Row> rows;
    for (int n : fig3_default_grid()) {
        ExperimentConfig config;
        config.system = two_group_system(n);
        config.k = 100;
        config.codes = {{CodeRequest::Kind::mds, {}, 0, 0},
                        {CodeRequest::Kind::group_optimal, {}, 0, 0},
                        {CodeRequest::Kind::group_even, {}, 0, 0}};
        config.trials = overrides.trials;
        config.master_seed = overrides.seed;
        const ExperimentSummary summary = run_experiment(config);

        Fig3Row row;
        row.n = n;
        row.mean_mds = summary.codes[0].mean_t_comp;
        row.mean_group_opt = summary.codes[1].mean_t_comp;
        row.mean_group_even = summary.codes[2].mean_t_comp;
        row.se_mds = summary.codes[0].se_t_comp;
        row.se_group_opt = summary.codes[1].se_t_comp;
        row.se_group_even = summary.codes[2].se_t_comp;
        rows.push_back(row);
    }
    return rows;
}

std::vector<Fig4Row> fig4_rows(const FigureOverrides& overrides) {
    constexpr int kWorkers = 240;
    constexpr int kTasks = 120;
    constexpr double kBeta = 2.0;

    std::vector<Fig4Row> rows;
    double anchor = 0.0;
    for (int L = 2; L <= 8; ++L) {
        Fig4Row row;
        row.num_groups = L;
        row.scenario1 = scenario_mean_rho(kWorkers, kTasks, L, SortRule::sizes_asc_rates_desc,
                                          kBeta, overrides.trials, overrides.seed);
        row.scenario2 = scenario_mean_rho(kWorkers, kTasks, L, SortRule::sizes_asc_rates_asc,
                                          kBeta, overrides.trials, overrides.seed);
        row.floor_ratio = std::pow(1.0 / L, kBeta);
        if (L == 2) anchor = row.scenario2;
        row.trend = anchor * std::pow(2.0 / L, kBeta);
        rows.push_back(row);
    }
    return rows;
}

std::vector<double> fig5_low_alpha_grid() {
    return {0.0,     5e-12, 1e-11, 2e-11, 3e-11, 5e-11, 7e-11, 1e-10,
            2e-10,   3e-10, 5e-10, 7e-10, 1e-9,  2e-9};
}

std::vector<double> fig5_large_alpha_grid() {
    return {1e-8, 3e-8, 1e-7, 3e-7, 1e-6, 3e-6, 1e-5, 3e-5, 1e-4};
}

Fig5Data fig5_rows(const FigureOverrides& overrides) {
    ExperimentConfig config;
    config.system = benchmark_system_l6();
    config.k = 400;
    config.beta = 2.0;
    config.codes = {{CodeRequest::Kind::mds, {}, 0, 0},
                    {CodeRequest::Kind::product, {}, 30, 20},
                    {CodeRequest::Kind::group_optimal, {}, 0, 0}};
    config.trials = overrides.trials;
    config.master_seed = overrides.seed;
    config.alpha_grid = fig5_low_alpha_grid();

    Fig5Data data;
    data.summary = run_experiment(config);

    auto exec_row = [&](double alpha) {
        Fig5Row row;
        row.alpha = alpha;
        row.exec_mds = data.summary.codes[0].mean_t_comp + alpha * data.summary.codes[0].mean_dec_units;
        row.exec_product =
            data.summary.codes[1].mean_t_comp + alpha * data.summary.codes[1].mean_dec_units;
        row.exec_group =
            data.summary.codes[2].mean_t_comp + alpha * data.summary.codes[2].mean_dec_units;
        return row;
    };
    for (double alpha : fig5_low_alpha_grid()) data.low_alpha.push_back(exec_row(alpha));
    for (double alpha : fig5_large_alpha_grid()) data.large_alpha.push_back(exec_row(alpha));
    return data;
}

std::string format_csv_value(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.12g", value);
    return buffer;
}

namespace {

void write_whole_file(const std::filesystem::path& path, const std::string& contents) {
    // Stage and rename so an interrupted run never leaves a partial file.
    const std::filesystem::path staged = path.string() + ".tmp";
    {
        std::ofstream out(staged, std::ios::binary | std::ios::trunc);
        if (!out) {
            raise(errc::invalid_dims, "cannot open " + staged.string() + " for writing");
        }
        out << contents;
        if (!out.flush()) {
            std::filesystem::remove(staged);
            raise(errc::invalid_dims, "short write to " + staged.string());
        }
    }
    std::filesystem::rename(staged, path);
}

} // namespace

void write_fig3_csv(const std::filesystem::path& path, const std::vector<Fig3Row>& rows) {
    std::string body = "n,mean_mds,mean_group_opt,mean_group_even,se_mds,se_group_opt,se_group_even\n";
    for (const auto& r : rows) {
        body += std::to_string(r.n) + "," + format_csv_value(r.mean_mds) + "," +
                format_csv_value(r.mean_group_opt) + "," + format_csv_value(r.mean_group_even) +
                "," + format_csv_value(r.se_mds) + "," + format_csv_value(r.se_group_opt) + "," +
                format_csv_value(r.se_group_even) + "\n";
    }
    write_whole_file(path, body);
}

void write_fig4_csv(const std::filesystem::path& path, const std::vector<Fig4Row>& rows) {
    std::string body = "L,scenario1,scenario2,floor,trend\n";
    for (const auto& r : rows) {
        body += std::to_string(r.num_groups) + "," + format_csv_value(r.scenario1) + "," +
                format_csv_value(r.scenario2) + "," + format_csv_value(r.floor_ratio) + "," +
                format_csv_value(r.trend) + "\n";
    }
    write_whole_file(path, body);
}

void write_fig5_csv(const std::filesystem::path& path, const std::vector<Fig5Row>& rows) {
    std::string body = "alpha,exec_mds,exec_product,exec_group\n";
    for (const auto& r : rows) {
        body += format_csv_value(r.alpha) + "," + format_csv_value(r.exec_mds) + "," +
                format_csv_value(r.exec_product) + "," + format_csv_value(r.exec_group) + "\n";
    }
    write_whole_file(path, body);
}

} // namespace slab
