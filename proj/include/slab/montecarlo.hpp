#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "slab/core_model.hpp"

namespace slab {

// ---------------------------------------------------------------------------
// Code descriptors and their timing / decoding-cost models.
// ---------------------------------------------------------------------------

struct MdsCode {
    int n = 0;
    int k = 0;
};

struct GroupCode {
    Allocation alloc;
};

struct ProductCode {
    int sqrt_n = 0;
    int sqrt_k = 0;
};

/// A coding scheme plus the decoding-complexity exponent beta (> 1).
struct CodeSpec {
    std::variant<MdsCode, GroupCode, ProductCode> variant;
    double beta = 2.0;
};

/// Computing time and decoding cost of one code on one realization;
/// execution time weighs the decode cost by alpha.
struct TimingResult {
    double t_comp = 0.0;
    double dec_units = 0.0;

    double t_exec(double alpha) const noexcept { return t_comp + alpha * dec_units; }
};

/// MDS computing time: the k-th smallest time over all workers.
double comp_time_mds(const CompletionSample& sample, int k);

/// Group-code computing time: max over groups of the k_i-th smallest time
/// within group i; groups with k_i = 0 contribute nothing.
double comp_time_group(const CompletionSample& sample, const Allocation& alloc);

/// Product-code baseline: workers land on a sqrt_n x sqrt_n grid by a
/// seed-derived permutation; rows/columns peel once sqrt_k cells are known;
/// returns the first arrival time at which all data cells are recovered.
double comp_time_product(const CompletionSample& sample, int sqrt_n, int sqrt_k,
                         std::uint64_t seed);

/// Raw decode-cost counts: k^beta (MDS), (sqrt k)^(beta+1) (product),
/// k_max^beta (group). The unit constant is absorbed into alpha.
double dec_units(const CodeSpec& spec);

/// Group-to-MDS decoding complexity ratio (k_max / k)^beta.
double rho_dec(const Allocation& alloc, double beta);

// ---------------------------------------------------------------------------
// Experiment configuration and the paired-trial engine.
// ---------------------------------------------------------------------------

struct UniformRange {
    double low = 0.0;
    double high = 0.0;
};

enum class SortRule {
    none,
    sizes_asc_rates_desc, // small groups fast (scenario 1)
    sizes_asc_rates_asc,  // large groups fast (scenario 2)
};

/// Random (n, mu) draw per trial: group sizes and rates uniform, then paired
/// according to sort_rule.
struct SystemGenerator {
    int num_groups = 2;
    UniformRange size_range;
    UniformRange rate_range;
    SortRule sort_rule = SortRule::none;
};

struct CodeRequest {
    enum class Kind { mds, group_optimal, group_even, group_fixed, product };
    Kind kind = Kind::mds;
    std::vector<int> per_group; // group_fixed only
    int sqrt_n = 0;             // product only
    int sqrt_k = 0;

    std::string label() const;
};

struct ExperimentConfig {
    int schema_version = 1;
    std::optional<GroupSystem> system;
    std::optional<SystemGenerator> generator;
    int k = 0;
    std::vector<CodeRequest> codes;
    double beta = 2.0;
    std::vector<double> alpha_grid;
    int trials = 1;
    std::uint64_t master_seed = 0;
};

struct CodeSummary {
    std::string label;
    double mean_t_comp = 0.0;
    double se_t_comp = 0.0;
    double min_t_comp = 0.0;
    double max_t_comp = 0.0;
    double mean_dec_units = 0.0;
    double mean_rho = 0.0; // group codes only; 0 otherwise
};

struct ExperimentSummary {
    std::vector<CodeSummary> codes;
    int trials = 0;
    std::uint64_t master_seed = 0;
    ExperimentConfig config;
};

void validate_config(const ExperimentConfig& config);

/// Runs config.trials paired trials: each trial draws one completion sample
/// (and, in generator mode, one system) from (master_seed, trial), evaluates
/// every requested code on that same sample, and aggregates mean / standard
/// error per code. Deterministic for a fixed config at any thread count.
ExperimentSummary run_experiment(const ExperimentConfig& config);

/// Thread count for trial parallelism: hardware concurrency capped by the
/// STRAGGLER_LAB_THREADS environment variable.
int effective_threads(int trials);

/// Mean rho_dec over `trials` random systems with n total workers split into
/// num_groups groups (sizes uniform in 0.7 n/L .. 1.3 n/L, rates uniform in
/// 1..2, paired by sort_rule), each at its optimal allocation for k tasks.
double scenario_mean_rho(int n, int k, int num_groups, SortRule sort_rule, double beta,
                         int trials, std::uint64_t seed);

/// One random system draw, as used by generator-mode trials.
GroupSystem draw_system(const SystemGenerator& generator, std::uint64_t seed, std::uint64_t trial);

} // namespace slab
