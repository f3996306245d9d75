#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "slab/allocator.hpp"
#include "slab/asymptotics.hpp"
#include "slab/config_io.hpp"
#include "slab/figures.hpp"
#include "slab/montecarlo.hpp"
#include "slab/rng.hpp"
#include "slab/runtime.hpp"

namespace {

using nlohmann::json;

void print_summary(const slab::ExperimentSummary& summary) {
    std::cout << "trials=" << summary.trials << " master_seed=" << summary.master_seed << "\n";
    std::cout << std::left << std::setw(16) << "code" << std::right << std::setw(14) << "mean_t_comp"
              << std::setw(13) << "se_t_comp" << std::setw(15) << "mean_dec_units" << std::setw(11)
              << "mean_rho" << "\n";
    for (const auto& code : summary.codes) {
        std::cout << std::left << std::setw(16) << code.label << std::right << std::setw(14)
                  << std::setprecision(6) << code.mean_t_comp << std::setw(13) << code.se_t_comp
                  << std::setw(15) << code.mean_dec_units << std::setw(11) << code.mean_rho
                  << "\n";
    }
    if (!summary.config.alpha_grid.empty()) {
        std::cout << "\n" << std::left << std::setw(14) << "alpha";
        for (const auto& code : summary.codes) std::cout << std::right << std::setw(14) << code.label;
        std::cout << "\n";
        for (double alpha : summary.config.alpha_grid) {
            std::cout << std::left << std::setw(14) << alpha;
            for (const auto& code : summary.codes) {
                std::cout << std::right << std::setw(14)
                          << code.mean_t_comp + alpha * code.mean_dec_units;
            }
            std::cout << "\n";
        }
    }
}

int cmd_allocate(const std::vector<int>& sizes, const std::vector<double>& rates, int k,
                 bool as_json) {
    const auto system = slab::new_group_system(sizes, rates);
    const auto continuous =
        slab::solve_allocation_continuous(system, k, 1e-10 * double(system.total_workers()));
    const auto alloc = slab::optimal_allocation(system, k);

    std::vector<double> xis;
    for (int i = 0; i < system.num_groups(); ++i) {
        xis.push_back(slab::xi(system.rates[i], system.group_sizes[i], alloc.per_group[i], k, i)
                          .value);
    }
    const double time = slab::asymptotic_group_time(system, alloc);

    if (as_json) {
        json doc;
        doc["k_total"] = k;
        doc["per_group"] = alloc.per_group;
        doc["continuous"] = continuous.per_group;
        doc["xi"] = xis;
        doc["asymptotic_time"] = time;
        doc["saturated"] = continuous.saturated;
        std::cout << doc.dump(2) << "\n";
        return 0;
    }

    std::cout << std::left << std::setw(7) << "group" << std::right << std::setw(8) << "n_i"
              << std::setw(9) << "mu_i" << std::setw(8) << "k_i" << std::setw(14) << "k_i (cont.)"
              << std::setw(14) << "xi_i" << "\n";
    for (int i = 0; i < system.num_groups(); ++i) {
        std::cout << std::left << std::setw(7) << i + 1 << std::right << std::setw(8)
                  << system.group_sizes[i] << std::setw(9) << system.rates[i] << std::setw(8)
                  << alloc.per_group[i] << std::setw(14) << std::setprecision(6)
                  << continuous.per_group[i] << std::setw(14) << xis[i] << "\n";
    }
    std::cout << "asymptotic computing time: " << std::setprecision(8) << time << "\n";
    if (continuous.saturated) {
        std::cout << "warning: k equals the total worker count; every group is fully loaded and "
                     "the asymptotic time is infinite\n";
    }
    return 0;
}

int cmd_simulate(const std::string& config_path, std::optional<int> trials,
                 std::optional<std::uint64_t> seed, bool as_json) {
    auto config = slab::load_experiment_config(config_path);
    if (trials) config.trials = *trials;
    if (seed) config.master_seed = *seed;
    const auto summary = slab::run_experiment(config);
    if (as_json) {
        std::cout << slab::summary_to_json(summary).dump(2) << "\n";
    } else {
        print_summary(summary);
    }
    return 0;
}

int cmd_fig3(int trials, std::uint64_t seed, const std::filesystem::path& out_dir) {
    const auto rows = slab::fig3_rows({trials, seed});
    slab::write_fig3_csv(out_dir / "fig3.csv", rows);
    std::cout << std::left << std::setw(8) << "n" << std::right << std::setw(13) << "mds"
              << std::setw(13) << "group_opt" << std::setw(13) << "group_even" << std::setw(13)
              << "opt/mds" << "\n";
    for (const auto& r : rows) {
        std::cout << std::left << std::setw(8) << r.n << std::right << std::setw(13)
                  << std::setprecision(6) << r.mean_mds << std::setw(13) << r.mean_group_opt
                  << std::setw(13) << r.mean_group_even << std::setw(13)
                  << r.mean_group_opt / r.mean_mds << "\n";
    }
    std::cout << "wrote " << (out_dir / "fig3.csv").string() << "\n";
    return 0;
}

int cmd_fig4(int trials, std::uint64_t seed, const std::filesystem::path& out_dir) {
    const auto rows = slab::fig4_rows({trials, seed});
    slab::write_fig4_csv(out_dir / "fig4.csv", rows);
    std::cout << std::left << std::setw(4) << "L" << std::right << std::setw(13) << "scenario1"
              << std::setw(13) << "scenario2" << std::setw(13) << "floor" << std::setw(13)
              << "trend" << "\n";
    for (const auto& r : rows) {
        std::cout << std::left << std::setw(4) << r.num_groups << std::right << std::setw(13)
                  << std::setprecision(6) << r.scenario1 << std::setw(13) << r.scenario2
                  << std::setw(13) << r.floor_ratio << std::setw(13) << r.trend << "\n";
    }
    std::cout << "wrote " << (out_dir / "fig4.csv").string() << "\n";
    return 0;
}

int cmd_fig5(int trials, std::uint64_t seed, const std::filesystem::path& out_dir) {
    const auto data = slab::fig5_rows({trials, seed});
    slab::write_fig5_csv(out_dir / "fig5_low_alpha.csv", data.low_alpha);
    slab::write_fig5_csv(out_dir / "fig5_large_alpha.csv", data.large_alpha);
    print_summary(data.summary);
    std::cout << "wrote " << (out_dir / "fig5_low_alpha.csv").string() << " and "
              << (out_dir / "fig5_large_alpha.csv").string() << "\n";
    return 0;
}

int cmd_demo(const std::vector<int>& sizes, const std::vector<double>& rates, int k, int m, int d,
             std::vector<int> explicit_alloc, double delay_scale, int kill, std::uint64_t seed,
             const std::optional<std::filesystem::path>& out_dir, bool as_json) {
    const auto system = slab::new_group_system(sizes, rates);
    slab::Allocation alloc;
    if (explicit_alloc.empty()) {
        alloc = slab::optimal_allocation(system, k);
    } else {
        alloc = slab::Allocation{std::move(explicit_alloc), k};
        slab::validate_allocation(system, alloc);
    }

    Eigen::MatrixXd A(m, d);
    Eigen::MatrixXd x(d, 1);
    slab::CounterRng data_rng(seed, 0, 0, 0);
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < d; ++c) A(r, c) = data_rng.next_uniform(-1.0, 1.0);
    }
    for (int r = 0; r < d; ++r) x(r, 0) = data_rng.next_uniform(-1.0, 1.0);

    auto injector = slab::exponential_delays(system, k, seed, delay_scale);
    if (kill >= 0) injector = slab::kill_group(std::move(injector), kill);

    const auto trace = slab::run_coded_job(A, x, system, alloc, injector, seed);

    const Eigen::MatrixXd direct = A * x;
    const double rel_error = (trace.result - direct).norm() / direct.norm();
    int used = 0, cancelled = 0;
    for (const auto& e : trace.events) {
        used += e.used;
        cancelled += e.cancelled;
    }

    if (out_dir) {
        std::filesystem::create_directories(*out_dir);
        std::ofstream log(*out_dir / "trace.jsonl", std::ios::trunc);
        for (const auto& e : trace.events) {
            json line;
            line["worker"] = e.worker;
            line["group"] = e.group;
            line["dispatch_ts"] = e.dispatch_ts;
            line["complete_ts"] = e.complete_ts;
            line["used"] = e.used;
            line["failed"] = e.failed;
            line["cancelled"] = e.cancelled;
            line["injected_delay"] = e.injected_delay;
            log << line.dump() << "\n";
        }
    }

    if (as_json) {
        json doc;
        doc["allocation"] = alloc.per_group;
        doc["t_comp_observed"] = trace.t_comp_observed;
        doc["relative_error"] = rel_error;
        doc["workers"] = trace.events.size();
        doc["used"] = used;
        doc["cancelled"] = cancelled;
        std::cout << doc.dump(2) << "\n";
        return 0;
    }

    std::cout << "allocation:";
    for (int v : alloc.per_group) std::cout << " " << v;
    std::cout << "\nworkers dispatched: " << trace.events.size() << " (used " << used
              << ", cancelled " << cancelled << ")\n";
    std::cout << "observed t_comp: " << std::setprecision(6) << trace.t_comp_observed << " s\n";
    std::cout << "relative error vs direct product: " << std::setprecision(3) << rel_error << "\n";
    if (out_dir) {
        std::cout << "wrote " << (*out_dir / "trace.jsonl").string() << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "straggler-lab: task allocation, Monte Carlo timing experiments, and live coded "
        "matrix-vector jobs on heterogeneous group systems.\n"
        "Set STRAGGLER_LAB_THREADS to cap trial parallelism."};
    app.require_subcommand(1);

    std::function<int()> action;

    // allocate
    auto* allocate = app.add_subcommand("allocate", "Solve the optimal task allocation");
    std::vector<int> sizes;
    std::vector<double> rates;
    int k = 0;
    bool alloc_json = false;
    allocate->add_option("--sizes", sizes, "Group sizes n_1..n_L")->required()->delimiter(',');
    allocate->add_option("--rates", rates, "Group rates mu_1..mu_L")->required()->delimiter(',');
    allocate->add_option("-k,--k", k, "Number of tasks")->required();
    allocate->add_flag("--json", alloc_json, "Machine-readable output");
    allocate->callback([&] { action = [&] { return cmd_allocate(sizes, rates, k, alloc_json); }; });

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Run an experiment from a JSON config");
    std::string config_path;
    std::optional<int> sim_trials;
    std::optional<std::uint64_t> sim_seed;
    bool sim_json = false;
    simulate->add_option("--config", config_path, "Path to experiment config")->required();
    simulate->add_option("--trials", sim_trials, "Override config trials");
    simulate->add_option("--seed", sim_seed, "Override config master seed");
    simulate->add_flag("--json", sim_json, "Machine-readable output");
    simulate->callback(
        [&] { action = [&] { return cmd_simulate(config_path, sim_trials, sim_seed, sim_json); }; });

    // figure commands
    struct FigArgs {
        int trials = 10000;
        std::uint64_t seed = 1;
        std::string out = ".";
    };
    auto add_fig = [&](const char* name, const char* help, FigArgs& args, auto runner) {
        auto* cmd = app.add_subcommand(name, help);
        cmd->add_option("--trials", args.trials, "Monte Carlo trials per point");
        cmd->add_option("--seed", args.seed, "Master seed");
        cmd->add_option("--out", args.out, "Output directory for CSV files");
        cmd->callback([&, runner] {
            action = [&, runner] {
                std::filesystem::create_directories(args.out);
                return runner(args.trials, args.seed, std::filesystem::path(args.out));
            };
        });
    };
    FigArgs fig3_args, fig4_args, fig5_args;
    add_fig("fig3", "Average computing time vs n (MDS, optimal and even group codes)", fig3_args,
            [](int t, std::uint64_t s, const std::filesystem::path& o) { return cmd_fig3(t, s, o); });
    add_fig("fig4", "Mean decode-complexity ratio vs L for two scenarios", fig4_args,
            [](int t, std::uint64_t s, const std::filesystem::path& o) { return cmd_fig4(t, s, o); });
    add_fig("fig5", "Mean execution time vs alpha for the benchmark codes", fig5_args,
            [](int t, std::uint64_t s, const std::filesystem::path& o) { return cmd_fig5(t, s, o); });

    // demo
    auto* demo = app.add_subcommand("demo", "Run a real coded job under injected delays");
    std::vector<int> demo_sizes{3, 4};
    std::vector<double> demo_rates{1.0, 2.0};
    int demo_k = 5, demo_m = 10, demo_d = 4, demo_kill = -1;
    std::vector<int> demo_alloc;
    double demo_scale = 1.0;
    std::uint64_t demo_seed = 1;
    std::string demo_out;
    bool demo_json = false;
    demo->add_option("--sizes", demo_sizes, "Group sizes")->delimiter(',');
    demo->add_option("--rates", demo_rates, "Group rates")->delimiter(',');
    demo->add_option("-k,--k", demo_k, "Number of tasks");
    demo->add_option("--m", demo_m, "Rows of A (divisible by k)");
    demo->add_option("--d", demo_d, "Columns of A");
    demo->add_option("--alloc", demo_alloc, "Explicit allocation (default: optimal)")
        ->delimiter(',');
    demo->add_option("--delay-scale", demo_scale, "Stretch factor for injected delays");
    demo->add_option("--kill-group", demo_kill, "Fail every worker of this group (0-based)");
    demo->add_option("--seed", demo_seed, "Master seed");
    demo->add_option("--out", demo_out, "Directory for the trace event log (JSON lines)");
    demo->add_flag("--json", demo_json, "Machine-readable output");
    demo->callback([&] {
        action = [&] {
            std::optional<std::filesystem::path> out;
            if (!demo_out.empty()) out = demo_out;
            return cmd_demo(demo_sizes, demo_rates, demo_k, demo_m, demo_d, demo_alloc, demo_scale,
                            demo_kill, demo_seed, out, demo_json);
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        return action();
    } catch (const slab::Error& e) {
        std::cerr << "error [" << slab::errc_name(e.code()) << "]: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
