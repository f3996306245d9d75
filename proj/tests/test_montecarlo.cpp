#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <numeric>

#include "slab/allocator.hpp"
#include "slab/montecarlo.hpp"
#include "slab/rng.hpp"

using namespace slab;

namespace {

CompletionSample toy_sample() {
    CompletionSample sample;
    sample.k_total = 3;
    sample.times = {{0.2, 0.5, 0.3}, {0.1, 0.4}};
    return sample;
}

// Brute-force peeling oracle: fresh fixpoint iteration on an arrival
// prefix, no incremental state. Cell (r, c) of the grid is known if it
// arrived or if its row/column already has sqrt_k known cells.
bool prefix_peelable(const std::vector<int>& cells, int sqrt_n, int sqrt_k) {
    std::vector<char> known(sqrt_n * sqrt_n, 0);
    for (int cell : cells) known[cell] = 1;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int r = 0; r < sqrt_n; ++r) {
            int count = 0;
            for (int c = 0; c < sqrt_n; ++c) count += known[r * sqrt_n + c];
            if (count >= sqrt_k && count < sqrt_n) {
                for (int c = 0; c < sqrt_n; ++c) known[r * sqrt_n + c] = 1;
                changed = true;
            }
        }
        for (int c = 0; c < sqrt_n; ++c) {
            int count = 0;
            for (int r = 0; r < sqrt_n; ++r) count += known[r * sqrt_n + c];
            if (count >= sqrt_k && count < sqrt_n) {
                for (int r = 0; r < sqrt_n; ++r) known[r * sqrt_n + c] = 1;
                changed = true;
            }
        }
    }
    for (int r = 0; r < sqrt_k; ++r) {
        for (int c = 0; c < sqrt_k; ++c) {
            if (!known[r * sqrt_n + c]) return false;
        }
    }
    return true;
}

double product_oracle(const CompletionSample& sample, int sqrt_n, int sqrt_k,
                      std::uint64_t seed) {
    std::vector<double> times;
    for (const auto& row : sample.times) times.insert(times.end(), row.begin(), row.end());
    const int cells = sqrt_n * sqrt_n;
    std::vector<int> cell_of(cells);
    std::iota(cell_of.begin(), cell_of.end(), 0);
    CounterRng rng(seed, 0, stream_tag::product_placement, 0);
    for (int i = cells - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
        std::swap(cell_of[i], cell_of[j]);
    }
    std::vector<int> order(cells);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return times[a] < times[b]; });
    std::vector<int> arrived;
    for (int i = 0; i < cells; ++i) {
        arrived.push_back(cell_of[order[i]]);
        if (prefix_peelable(arrived, sqrt_n, sqrt_k)) return times[order[i]];
    }
    return -1.0;
}

} // namespace

TEST_CASE("comp_time_mds is the k-th global order statistic") {
    const auto sample = toy_sample();
    CHECK(comp_time_mds(sample, 3) == 0.3);
    CHECK(comp_time_mds(sample, 1) == 0.1);
    CHECK(comp_time_mds(sample, 5) == 0.5);
}

TEST_CASE("comp_time_group is the max per-group quota time") {
    const auto sample = toy_sample();
    CHECK(comp_time_group(sample, {{2, 1}, 3}) == 0.3);
    CHECK(comp_time_group(sample, {{3, 2}, 5}) == 0.5);
    CHECK(comp_time_group(sample, {{0, 2}, 2}) == 0.4);

    CompletionSample single;
    single.k_total = 2;
    single.times = {{0.9, 0.1, 0.5}};
    CHECK(comp_time_group(single, {{2}, 2}) == comp_time_mds(single, 2));
}

TEST_CASE("product code degenerate shapes") {
    const auto system = new_group_system({4}, {1.0});
    const auto sample = sample_completion_times(system, 1, 3);
    std::vector<double> flat = sample.times[0];

    // sqrt_k = 1: one worker is enough.
    CHECK(comp_time_product(sample, 2, 1, 9) == *std::min_element(flat.begin(), flat.end()));
    // sqrt_k = sqrt_n: every worker is needed.
    CHECK(comp_time_product(sample, 2, 2, 9) == *std::max_element(flat.begin(), flat.end()));
}

TEST_CASE("product code matches the brute-force peeling oracle") {
    const auto system = new_group_system({5, 4}, {1.0, 2.0});
    for (int trial = 0; trial < 50; ++trial) {
        const auto sample = sample_completion_times(system, 4, 77, trial);
        const std::uint64_t placement = derive_seed(77, trial, stream_tag::product_placement);
        CHECK(comp_time_product(sample, 3, 2, placement) ==
              product_oracle(sample, 3, 2, placement));
    }
}

TEST_CASE("execution time weighs decode cost by alpha") {
    const TimingResult result{0.5, 100.0};
    CHECK(result.t_exec(0.0) == 0.5);
    CHECK(result.t_exec(0.01) == 1.5);
}

TEST_CASE("dec_units follows the complexity table") {
    CHECK(dec_units({MdsCode{900, 400}, 2.0}) == 160000.0);
    CHECK(dec_units({ProductCode{30, 20}, 2.0}) == 8000.0);
    CHECK(dec_units({GroupCode{{{71, 71, 70, 65, 63, 60}, 400}}, 2.0}) == 5041.0);
}

TEST_CASE("rho_dec is the complexity ratio") {
    CHECK(rho_dec({{400}, 400}, 2.0) == 1.0);
    CHECK(rho_dec({{100, 100, 100, 100}, 400}, 2.0) == std::pow(0.25, 2.0));
    CHECK(rho_dec({{71, 71, 70, 65, 63, 60}, 400}, 2.0) == std::pow(71.0 / 400.0, 2.0));
}

TEST_CASE("crossover predicate: group beats product iff k_max is small") {
    for (double beta : {1.5, 2.0, 3.0}) {
        for (int sqrt_k : {16, 20}) {
            const int k = sqrt_k * sqrt_k;
            for (int k_max = 1; k_max <= k; ++k_max) {
                // Allocation whose largest share is exactly k_max.
                Allocation alloc;
                alloc.k_total = k;
                int left = k;
                while (left > 0) {
                    alloc.per_group.push_back(std::min(k_max, left));
                    left -= std::min(k_max, left);
                }
                const double group_units = dec_units({GroupCode{alloc}, beta});
                const double product_units = dec_units({ProductCode{2 * sqrt_k, sqrt_k}, beta});
                const bool via_units = group_units < product_units;
                const bool via_bound = k_max < std::pow(double(sqrt_k), 1.0 + 1.0 / beta);
                CHECK(via_units == via_bound);
            }
        }
    }
}

TEST_CASE("per-trial dominance and sandwich on random systems") {
    CounterRng rng(31, 2, 2, 2);
    for (int rep = 0; rep < 3000; ++rep) {
        const int L = 1 + static_cast<int>(rng.next_below(4));
        std::vector<int> sizes(L);
        std::vector<double> rates(L);
        for (auto& s : sizes) s = 2 + static_cast<int>(rng.next_below(12));
        for (auto& r : rates) r = rng.next_uniform(0.5, 3.0);
        const auto system = new_group_system(sizes, rates);

        Allocation alloc;
        alloc.per_group.resize(L);
        alloc.k_total = 0;
        for (int i = 0; i < L; ++i) {
            alloc.per_group[i] = 1 + static_cast<int>(rng.next_below(sizes[i]));
            alloc.k_total += alloc.per_group[i];
        }
        const auto sample = sample_completion_times(system, alloc.k_total, 53, rep);
        const double mds = comp_time_mds(sample, alloc.k_total);
        const double group = comp_time_group(sample, alloc);
        REQUIRE(mds <= group);

        double lower = 1e300;
        for (int i = 0; i < L; ++i) {
            lower = std::min(lower, kth_smallest(sample.times[i], alloc.per_group[i]));
        }
        REQUIRE(lower <= mds);
    }
}

TEST_CASE("run_experiment pairs codes on the same sample") {
    ExperimentConfig config;
    config.system = new_group_system({30, 10}, {1.0, 2.0});
    config.k = 10;
    config.codes = {{CodeRequest::Kind::mds, {}, 0, 0},
                    {CodeRequest::Kind::group_optimal, {}, 0, 0},
                    {CodeRequest::Kind::group_even, {}, 0, 0}};
    config.trials = 400;
    config.master_seed = 5;

    const auto summary = run_experiment(config);
    CHECK(summary.codes.size() == 3);
    CHECK(summary.codes[0].label == "mds");
    // Paired dominance survives averaging exactly.
    CHECK(summary.codes[0].mean_t_comp <= summary.codes[1].mean_t_comp);
    CHECK(summary.codes[1].mean_t_comp <= summary.codes[2].mean_t_comp + 1e-15);
    for (const auto& code : summary.codes) {
        CHECK(code.mean_t_comp >= code.min_t_comp);
        CHECK(code.mean_t_comp <= code.max_t_comp);
        CHECK(code.se_t_comp > 0.0);
    }

    ExperimentConfig one = config;
    one.trials = 1;
    const auto single = run_experiment(one);
    const auto sample = sample_completion_times(*config.system, 10, 5, 0);
    CHECK(single.codes[0].mean_t_comp == comp_time_mds(sample, 10));
    CHECK(single.codes[0].se_t_comp == 0.0);
}

TEST_CASE("run_experiment is identical at any thread count") {
    ExperimentConfig config;
    config.system = new_group_system({20, 20}, {1.0, 1.5});
    config.k = 8;
    config.codes = {{CodeRequest::Kind::mds, {}, 0, 0},
                    {CodeRequest::Kind::group_optimal, {}, 0, 0}};
    config.trials = 257;
    config.master_seed = 99;

    setenv("STRAGGLER_LAB_THREADS", "1", 1);
    const auto serial = run_experiment(config);
    setenv("STRAGGLER_LAB_THREADS", "3", 1);
    const auto threaded = run_experiment(config);
    unsetenv("STRAGGLER_LAB_THREADS");

    for (std::size_t c = 0; c < serial.codes.size(); ++c) {
        CHECK(serial.codes[c].mean_t_comp == threaded.codes[c].mean_t_comp);
        CHECK(serial.codes[c].se_t_comp == threaded.codes[c].se_t_comp);
    }
}

TEST_CASE("generator mode draws sorted systems and averages rho") {
    SystemGenerator generator;
    generator.num_groups = 4;
    generator.size_range = {42.0, 78.0};
    generator.rate_range = {1.0, 2.0};
    generator.sort_rule = SortRule::sizes_asc_rates_desc;

    const auto sys = draw_system(generator, 3, 11);
    for (int i = 0; i + 1 < sys.num_groups(); ++i) {
        CHECK(sys.group_sizes[i] <= sys.group_sizes[i + 1]);
        CHECK(sys.rates[i] >= sys.rates[i + 1]);
    }
    for (int i = 0; i < sys.num_groups(); ++i) {
        CHECK(sys.group_sizes[i] >= 42);
        CHECK(sys.group_sizes[i] <= 78);
    }

    const double rho = scenario_mean_rho(240, 120, 4, SortRule::sizes_asc_rates_asc, 2.0, 200, 7);
    CHECK(rho >= std::pow(0.25, 2.0));
    CHECK(rho < 1.0);
}

TEST_CASE("config validation names bad setups") {
    ExperimentConfig config;
    config.k = 10;
    config.trials = 10;
    config.codes = {{CodeRequest::Kind::mds, {}, 0, 0}};
    CHECK_THROWS_AS(validate_config(config), Error); // neither system nor generator

    config.system = new_group_system({10, 6}, {1.0, 1.0});
    validate_config(config);

    ExperimentConfig bad = config;
    bad.codes = {{CodeRequest::Kind::product, {}, 4, 2}};
    CHECK_THROWS_AS(validate_config(bad), Error); // 4^2 != 16 workers

    bad = config;
    bad.beta = 1.0;
    CHECK_THROWS_AS(validate_config(bad), Error);

    bad = config;
    bad.k = 100;
    CHECK_THROWS_AS(validate_config(bad), Error);
}
