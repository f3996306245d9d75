#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "slab/core_model.hpp"

namespace slab {

/// Delay source consulted once per worker at dispatch. Seconds of injected
/// latency, or nullopt for a worker that fails outright (never responds).
using DelayInjector = std::function<std::optional<double>(int group, int worker)>;

DelayInjector zero_delays();

/// Exponential completion times drawn exactly like sample_completion_times
/// for (system, k_total, seed), optionally stretched by `scale` to keep
/// wall-clock jitter small relative to the injected spread.
DelayInjector exponential_delays(const GroupSystem& system, int k_total, std::uint64_t seed,
                                 double scale = 1.0);

/// Wraps another injector, failing every worker of one group.
DelayInjector kill_group(DelayInjector inner, int group);

struct WorkerEvent {
    int group = 0;
    int worker = 0;
    double injected_delay = 0.0;
    double dispatch_ts = 0.0; // seconds since job start
    double complete_ts = 0.0; // seconds since job start; 0 if never completed
    bool used = false;
    bool failed = false;
    bool cancelled = false;
};

struct JobTrace {
    std::vector<WorkerEvent> events;
    double t_comp_observed = 0.0; // wall clock, max over used workers
    Eigen::MatrixXd result;

    const WorkerEvent* event(int group, int worker) const noexcept;
};

/// Encodes A with the group code, runs every worker concurrently under its
/// injected delay, decodes each group as soon as its quota is in, and
/// assembles A * x. Which workers are "used" is k_i-smallest by injected
/// delay (ties by worker id), so traces and the decoded bytes are
/// reproducible run to run; the wall clock only affects the *_ts fields.
JobTrace run_coded_job(const Eigen::MatrixXd& A, const Eigen::MatrixXd& x,
                       const GroupSystem& system, const Allocation& alloc,
                       const DelayInjector& delays, std::uint64_t seed);

} // namespace slab
