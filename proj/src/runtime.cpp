#include "slab/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <latch>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "slab/codec.hpp"

namespace slab {

DelayInjector zero_delays() {
    return [](int, int) { return std::optional<double>(0.0); };
}

DelayInjector exponential_delays(const GroupSystem& system, int k_total, std::uint64_t seed,
                                 double scale) {
    auto sample = std::make_shared<CompletionSample>(
        sample_completion_times(system, k_total, seed));
    return [sample, scale](int group, int worker) {
        return std::optional<double>(sample->times[group][worker] * scale);
    };
}

DelayInjector kill_group(DelayInjector inner, int group) {
    return [inner = std::move(inner), group](int g, int w) -> std::optional<double> {
        if (g == group) return std::nullopt;
        return inner(g, w);
    };
}

const WorkerEvent* JobTrace::event(int group, int worker) const noexcept {
    for (const auto& e : events) {
        if (e.group == group && e.worker == worker) return &e;
    }
    return nullptr;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct GatherItem {
    int group;
    int worker;
    double complete_ts;
};

} // namespace

JobTrace run_coded_job(const Eigen::MatrixXd& A, const Eigen::MatrixXd& x,
                       const GroupSystem& system, const Allocation& alloc,
                       const DelayInjector& delays, std::uint64_t seed) {
    if (A.cols() != x.rows()) {
        raise(errc::shape_mismatch, "A has " + std::to_string(A.cols()) + " columns, x has " +
                                        std::to_string(x.rows()) + " rows");
    }
    const CodedAssignment assignment = group_encode(A, system, alloc, seed);
    const int L = system.num_groups();

    // Injected delays and the deterministic used sets: the k_i live workers
    // of each group with the smallest (delay, id). A group whose survivors
    // cannot meet the quota fails the job before anything runs.
    std::vector<std::vector<std::optional<double>>> delay(L);
    std::vector<std::vector<char>> used(L);
    std::vector<int> quota_remaining(L, 0);
    for (int i = 0; i < L; ++i) {
        const int n_i = system.group_sizes[i];
        const int k_i = alloc.per_group[i];
        delay[i].resize(n_i);
        used[i].assign(n_i, 0);
        if (k_i == 0) continue;
        std::vector<std::pair<double, int>> alive;
        for (int j = 0; j < n_i; ++j) {
            delay[i][j] = delays(i, j);
            if (delay[i][j]) {
                alive.emplace_back(std::max(0.0, *delay[i][j]), j);
            }
        }
        if (static_cast<int>(alive.size()) < k_i) {
            throw Error(errc::group_shortfall,
                        "group " + std::to_string(i) + " has only " +
                            std::to_string(alive.size()) + " live workers for quota " +
                            std::to_string(k_i),
                        i);
        }
        std::sort(alive.begin(), alive.end());
        for (int r = 0; r < k_i; ++r) used[i][alive[r].second] = 1;
        quota_remaining[i] = k_i;
    }

    JobTrace trace;
    for (int i = 0; i < L; ++i) {
        if (alloc.per_group[i] == 0) continue; // group holds no blocks
        for (int j = 0; j < system.group_sizes[i]; ++j) {
            WorkerEvent e;
            e.group = i;
            e.worker = j;
            e.failed = !delay[i][j].has_value();
            e.injected_delay = e.failed ? 0.0 : std::max(0.0, *delay[i][j]);
            e.used = used[i][j] != 0;
            trace.events.push_back(e);
        }
    }

    // Each worker owns one result slot, written before its channel push.
    std::vector<std::vector<Eigen::MatrixXd>> products(L);
    for (int i = 0; i < L; ++i) products[i].resize(system.group_sizes[i]);

    std::mutex channel_mutex;
    std::condition_variable channel_cv;
    std::vector<GatherItem> channel;

    std::mutex cancel_mutex;
    std::condition_variable cancel_cv;
    std::vector<char> group_cancelled(L, 0);

    std::latch start(1);
    const auto t0_holder = std::make_shared<Clock::time_point>();

    std::vector<std::thread> workers;
    workers.reserve(trace.events.size());
    for (auto& e : trace.events) {
        if (e.failed) continue;
        workers.emplace_back([&, event = &e] {
            start.wait();
            const Clock::time_point t0 = *t0_holder;
            event->dispatch_ts = seconds_since(t0);

            // Deadline on the system clock: pthread_cond_timedwait is the
            // only wait libtsan models, and sub-second clock drift is noise
            // next to scheduler jitter anyway.
            const std::chrono::duration<double> remaining =
                std::chrono::duration<double>(event->injected_delay) - (Clock::now() - t0);
            const auto wake =
                std::chrono::system_clock::now() +
                std::chrono::duration_cast<std::chrono::system_clock::duration>(
                    std::max(remaining, std::chrono::duration<double>(0)));
            {
                std::unique_lock lock(cancel_mutex);
                const bool cancelled = cancel_cv.wait_until(
                    lock, wake, [&] { return group_cancelled[event->group] != 0; });
                if (cancelled) {
                    event->cancelled = true;
                    event->complete_ts = seconds_since(t0);
                    return;
                }
            }

            products[event->group][event->worker] =
                assignment.blocks[event->group][event->worker] * x;
            event->complete_ts = seconds_since(t0);

            {
                std::lock_guard lock(channel_mutex);
                channel.push_back({event->group, event->worker, event->complete_ts});
            }
            channel_cv.notify_one();
        });
    }

    *t0_holder = Clock::now();
    start.count_down();

    // Gather loop: a group decodes the moment the last worker of its used
    // set reports in, then the group's leftover workers are cancelled. Late
    // or unused results only show up in the trace.
    std::vector<Eigen::MatrixXd> decoded_rows(L);
    std::vector<char> group_decoded(L, 0);
    int groups_pending = 0;
    for (int i = 0; i < L; ++i) {
        if (alloc.per_group[i] > 0) ++groups_pending;
    }

    trace.t_comp_observed = 0.0;
    while (groups_pending > 0) {
        std::vector<GatherItem> batch;
        {
            std::unique_lock lock(channel_mutex);
            channel_cv.wait(lock, [&] { return !channel.empty(); });
            batch.swap(channel);
        }
        for (const auto& item : batch) {
            if (!used[item.group][item.worker]) continue;
            if (--quota_remaining[item.group] == 0) {
                trace.t_comp_observed = std::max(trace.t_comp_observed, item.complete_ts);
            }
        }
        for (int i = 0; i < L; ++i) {
            if (group_decoded[i] || alloc.per_group[i] == 0 || quota_remaining[i] != 0) continue;

            // Decode from the used set ordered by injected delay; identical
            // to a sequential gather of the same realization.
            std::vector<std::pair<double, int>> order;
            for (int j = 0; j < system.group_sizes[i]; ++j) {
                if (used[i][j]) order.emplace_back(*delay[i][j], j);
            }
            std::sort(order.begin(), order.end());
            std::vector<std::pair<int, Eigen::MatrixXd>> results;
            results.reserve(order.size());
            for (const auto& [d, j] : order) results.emplace_back(j, products[i][j]);

            const auto sources = decode_from_subset(results, assignment.generators[i]);
            Eigen::MatrixXd rows(
                static_cast<Eigen::Index>(alloc.per_group[i]) * assignment.block_rows, x.cols());
            for (int c = 0; c < alloc.per_group[i]; ++c) {
                rows.middleRows(static_cast<Eigen::Index>(c) * assignment.block_rows,
                                assignment.block_rows) = sources[c];
            }
            decoded_rows[i] = std::move(rows);
            group_decoded[i] = 1;
            --groups_pending;

            {
                std::lock_guard lock(cancel_mutex);
                group_cancelled[i] = 1;
            }
            cancel_cv.notify_all();
        }
    }

    for (auto& w : workers) w.join();

    trace.result.resize(A.rows(), x.cols());
    for (int i = 0; i < L; ++i) {
        if (alloc.per_group[i] == 0) continue;
        trace.result.middleRows(static_cast<Eigen::Index>(assignment.source_offset[i]) *
                                    assignment.block_rows,
                                decoded_rows[i].rows()) = decoded_rows[i];
    }
    return trace;
}

} // namespace slab
