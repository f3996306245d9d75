#include "slab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <thread>

#include "slab/allocator.hpp"
#include "slab/rng.hpp"

namespace slab {

double comp_time_mds(const CompletionSample& sample, int k) {
    std::vector<double> flat;
    for (const auto& row : sample.times) flat.insert(flat.end(), row.begin(), row.end());
    return kth_smallest(flat, k);
}

double comp_time_group(const CompletionSample& sample, const Allocation& alloc) {
    if (static_cast<int>(alloc.per_group.size()) != sample.num_groups()) {
        raise(errc::invalid_allocation, "allocation/sample group count mismatch");
    }
    double worst = 0.0;
    for (int i = 0; i < sample.num_groups(); ++i) {
        const int k_i = alloc.per_group[i];
        if (k_i == 0) continue;
        if (k_i > static_cast<int>(sample.times[i].size())) {
            raise(errc::allocation_exceeds_group, "group " + std::to_string(i));
        }
        worst = std::max(worst, kth_smallest(sample.times[i], k_i));
    }
    return worst;
}

double comp_time_product(const CompletionSample& sample, int sqrt_n, int sqrt_k,
                         std::uint64_t seed) {
    const int cells = sqrt_n * sqrt_n;
    std::vector<double> times;
    for (const auto& row : sample.times) times.insert(times.end(), row.begin(), row.end());
    if (static_cast<int>(times.size()) != cells) {
        raise(errc::invalid_dims, "product code needs exactly sqrt_n^2 workers");
    }
    if (sqrt_k > sqrt_n) {
        raise(errc::invalid_dims, "sqrt_k exceeds sqrt_n");
    }

    // Workers take grid cells through a seed-derived Fisher-Yates shuffle.
    std::vector<int> cell_of(cells);
    std::iota(cell_of.begin(), cell_of.end(), 0);
    CounterRng rng(seed, 0, stream_tag::product_placement, 0);
    for (int i = cells - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
        std::swap(cell_of[i], cell_of[j]);
    }

    std::vector<int> order(cells);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return times[a] < times[b]; });

    // Row/column peeling: a line with >= sqrt_k known cells recovers all of
    // its cells. Track known counts and cascade line completions.
    std::vector<char> known(cells, 0);
    std::vector<int> row_known(sqrt_n, 0), col_known(sqrt_n, 0);
    std::vector<char> row_done(sqrt_n, 0), col_done(sqrt_n, 0);
    int data_known = 0;
    const int data_total = sqrt_k * sqrt_k;

    std::vector<int> line_queue;
    auto mark = [&](int cell) {
        if (known[cell]) return;
        known[cell] = 1;
        const int r = cell / sqrt_n;
        const int c = cell % sqrt_n;
        if (r < sqrt_k && c < sqrt_k) ++data_known;
        if (++row_known[r] >= sqrt_k && !row_done[r]) {
            row_done[r] = 1;
            line_queue.push_back(r);
        }
        if (++col_known[c] >= sqrt_k && !col_done[c]) {
            col_done[c] = 1;
            line_queue.push_back(sqrt_n + c);
        }
    };

    for (int arrived = 0; arrived < cells; ++arrived) {
        mark(cell_of[order[arrived]]);
        while (!line_queue.empty()) {
            const int line = line_queue.back();
            line_queue.pop_back();
            if (line < sqrt_n) {
                for (int c = 0; c < sqrt_n; ++c) mark(line * sqrt_n + c);
            } else {
                const int c = line - sqrt_n;
                for (int r = 0; r < sqrt_n; ++r) mark(r * sqrt_n + c);
            }
        }
        if (data_known == data_total) return times[order[arrived]];
    }
    raise(errc::not_decodable_even_complete, "grid not peelable with all workers present");
}

double dec_units(const CodeSpec& spec) {
    return std::visit(
        [&](const auto& code) -> double {
            using T = std::decay_t<decltype(code)>;
            if constexpr (std::is_same_v<T, MdsCode>) {
                return std::pow(static_cast<double>(code.k), spec.beta);
            } else if constexpr (std::is_same_v<T, ProductCode>) {
                return std::pow(static_cast<double>(code.sqrt_k), spec.beta + 1.0);
            } else {
                return std::pow(static_cast<double>(code.alloc.max_per_group()), spec.beta);
            }
        },
        spec.variant);
}

double rho_dec(const Allocation& alloc, double beta) {
    return std::pow(static_cast<double>(alloc.max_per_group()) / static_cast<double>(alloc.k_total),
                    beta);
}

std::string CodeRequest::label() const {
    switch (kind) {
        case Kind::mds: return "mds";
        case Kind::group_optimal: return "group_opt";
        case Kind::group_even: return "group_even";
        case Kind::group_fixed: return "group_fixed";
        case Kind::product:
            return "product_" + std::to_string(sqrt_n) + "x" + std::to_string(sqrt_k);
    }
    return "unknown";
}

void validate_config(const ExperimentConfig& config) {
    if (config.system.has_value() == config.generator.has_value()) {
        raise(errc::invalid_dims, "config needs exactly one of system / generator");
    }
    if (config.trials < 1) raise(errc::invalid_dims, "trials must be >= 1");
    if (config.k < 1) raise(errc::infeasible_k, "k must be >= 1");
    if (!(config.beta > 1.0)) raise(errc::invalid_dims, "beta must be > 1");
    if (config.codes.empty()) raise(errc::invalid_dims, "no codes requested");
    for (const auto& code : config.codes) {
        if (code.kind == CodeRequest::Kind::product) {
            if (!config.system) {
                raise(errc::invalid_dims, "product code requires a fixed system");
            }
            if (code.sqrt_n * code.sqrt_n != config.system->total_workers()) {
                raise(errc::invalid_dims, "product code needs sqrt_n^2 = total workers");
            }
            if (code.sqrt_k * code.sqrt_k != config.k) {
                raise(errc::invalid_dims, "product code needs sqrt_k^2 = k");
            }
        }
        if (code.kind == CodeRequest::Kind::group_fixed && config.system) {
            Allocation alloc{code.per_group, config.k};
            validate_allocation(*config.system, alloc);
        }
        if (code.kind == CodeRequest::Kind::group_even && config.system) {
            even_allocation(*config.system, config.k);
        }
    }
    if (config.system && config.k > config.system->total_workers()) {
        raise(errc::infeasible_k, "k exceeds total workers");
    }
    if (config.generator) {
        const auto& g = *config.generator;
        if (g.num_groups < 1 || !(g.size_range.low >= 1.0) ||
            !(g.size_range.high >= g.size_range.low) || !(g.rate_range.low > 0.0) ||
            !(g.rate_range.high >= g.rate_range.low)) {
            raise(errc::invalid_dims, "bad system generator ranges");
        }
    }
}

int effective_threads(int trials) {
    int threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    if (const char* env = std::getenv("STRAGGLER_LAB_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) threads = std::min(threads, cap);
    }
    return std::min(threads, std::max(trials, 1));
}

namespace {

/// Runs fn(trial) for every trial on a small fork/join pool. Callers store
/// per-trial outputs by index, so scheduling never affects results.
template <typename Fn>
void parallel_trials(int trials, Fn&& fn) {
    const int threads = effective_threads(trials);
    if (threads <= 1) {
        for (int t = 0; t < trials; ++t) fn(t);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            for (int t = w; t < trials; t += threads) fn(t);
        });
    }
    for (auto& th : pool) th.join();
}

GroupSystem sort_system(std::vector<int> sizes, std::vector<double> rates, SortRule rule) {
    std::sort(sizes.begin(), sizes.end());
    std::sort(rates.begin(), rates.end());
    if (rule == SortRule::sizes_asc_rates_desc) {
        std::reverse(rates.begin(), rates.end());
    }
    return new_group_system(std::move(sizes), std::move(rates));
}

} // namespace

GroupSystem draw_system(const SystemGenerator& generator, std::uint64_t seed,
                        std::uint64_t trial) {
    CounterRng rng(seed, 0, stream_tag::system_draw, static_cast<std::uint32_t>(trial));
    std::vector<int> sizes(generator.num_groups);
    std::vector<double> rates(generator.num_groups);
    for (auto& s : sizes) {
        s = std::max(1, static_cast<int>(std::lround(
                            rng.next_uniform(generator.size_range.low, generator.size_range.high))));
    }
    for (auto& r : rates) {
        r = rng.next_uniform(generator.rate_range.low, generator.rate_range.high);
    }
    if (generator.sort_rule == SortRule::none) {
        return new_group_system(std::move(sizes), std::move(rates));
    }
    return sort_system(std::move(sizes), std::move(rates), generator.sort_rule);
}

ExperimentSummary run_experiment(const ExperimentConfig& config) {
    validate_config(config);
    const int trials = config.trials;
    const int num_codes = static_cast<int>(config.codes.size());

    // Per-trial, per-code observations; filled by index so any thread
    // interleaving reduces to the same sums.
    std::vector<std::vector<double>> t_comp(num_codes, std::vector<double>(trials));
    std::vector<std::vector<double>> units(num_codes, std::vector<double>(trials));
    std::vector<std::vector<double>> rho(num_codes, std::vector<double>(trials, 0.0));

    auto group_alloc = [&](const CodeRequest& request, const GroupSystem& system) {
        if (request.kind == CodeRequest::Kind::group_optimal) {
            return optimal_allocation(system, config.k);
        }
        if (request.kind == CodeRequest::Kind::group_even) {
            return even_allocation(system, config.k);
        }
        Allocation alloc{request.per_group, config.k};
        validate_allocation(system, alloc);
        return alloc;
    };

    // With a fixed system the allocations do not vary across trials.
    std::vector<std::optional<Allocation>> fixed_alloc(num_codes);
    if (config.system) {
        for (int c = 0; c < num_codes; ++c) {
            if (config.codes[c].kind != CodeRequest::Kind::mds &&
                config.codes[c].kind != CodeRequest::Kind::product) {
                fixed_alloc[c] = group_alloc(config.codes[c], *config.system);
            }
        }
    }

    parallel_trials(trials, [&](int trial) {
        const GroupSystem system = config.system
                                       ? *config.system
                                       : draw_system(*config.generator, config.master_seed, trial);
        const CompletionSample sample =
            sample_completion_times(system, config.k, config.master_seed, trial);

        for (int c = 0; c < num_codes; ++c) {
            const auto& request = config.codes[c];
            switch (request.kind) {
                case CodeRequest::Kind::mds: {
                    t_comp[c][trial] = comp_time_mds(sample, config.k);
                    units[c][trial] =
                        dec_units({MdsCode{static_cast<int>(system.total_workers()), config.k},
                                   config.beta});
                    break;
                }
                case CodeRequest::Kind::group_optimal:
                case CodeRequest::Kind::group_even:
                case CodeRequest::Kind::group_fixed: {
                    const Allocation alloc =
                        fixed_alloc[c] ? *fixed_alloc[c] : group_alloc(request, system);
                    t_comp[c][trial] = comp_time_group(sample, alloc);
                    units[c][trial] = dec_units({GroupCode{alloc}, config.beta});
                    rho[c][trial] = rho_dec(alloc, config.beta);
                    break;
                }
                case CodeRequest::Kind::product: {
                    const std::uint64_t placement_seed =
                        derive_seed(config.master_seed, trial, stream_tag::product_placement);
                    t_comp[c][trial] =
                        comp_time_product(sample, request.sqrt_n, request.sqrt_k, placement_seed);
                    units[c][trial] =
                        dec_units({ProductCode{request.sqrt_n, request.sqrt_k}, config.beta});
                    break;
                }
            }
        }
    });

    ExperimentSummary summary;
    summary.trials = trials;
    summary.master_seed = config.master_seed;
    summary.config = config;
    for (int c = 0; c < num_codes; ++c) {
        CodeSummary cs;
        cs.label = config.codes[c].label();
        const auto& xs = t_comp[c];
        const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / trials;
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        cs.mean_t_comp = mean;
        cs.se_t_comp = trials > 1 ? std::sqrt(ss / (trials - 1)) / std::sqrt(double(trials)) : 0.0;
        cs.min_t_comp = *std::min_element(xs.begin(), xs.end());
        cs.max_t_comp = *std::max_element(xs.begin(), xs.end());
        cs.mean_dec_units = std::accumulate(units[c].begin(), units[c].end(), 0.0) / trials;
        cs.mean_rho = std::accumulate(rho[c].begin(), rho[c].end(), 0.0) / trials;
        summary.codes.push_back(std::move(cs));
    }
    return summary;
}

double scenario_mean_rho(int n, int k, int num_groups, SortRule sort_rule, double beta, int trials,
                         std::uint64_t seed) {
    SystemGenerator generator;
    generator.num_groups = num_groups;
    generator.size_range = {0.7 * n / num_groups, 1.3 * n / num_groups};
    generator.rate_range = {1.0, 2.0};
    generator.sort_rule = sort_rule;

    std::vector<double> rho(trials);
    parallel_trials(trials, [&](int trial) {
        const GroupSystem system = draw_system(generator, seed, trial);
        const Allocation alloc = optimal_allocation(system, k);
        rho[trial] = rho_dec(alloc, beta);
    });
    return std::accumulate(rho.begin(), rho.end(), 0.0) / trials;
}

} // namespace slab
