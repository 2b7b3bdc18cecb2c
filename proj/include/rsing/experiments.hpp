#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "rsing/config.hpp"
#include "rsing/distribution.hpp"
#include "rsing/report.hpp"
#include "rsing/rng.hpp"

namespace rsing {

// What one task hands back: an aggregate to be merged in task order, plus its census rows.
struct TaskOutput {
    json aggregate = json::object();
    std::vector<CensusRow> census;
};

// fn(task, first_index, count) computes samples [first_index, first_index + count).
using TaskFn = std::function<TaskOutput(std::uint64_t task, std::uint64_t first, std::uint64_t count)>;

struct TaskPlan {
    std::uint64_t total = 0;
    std::uint64_t task_size = 1000;
    unsigned workers = 1;
    // When set, finished tasks are stored here and reused on the next run.
    std::filesystem::path cache_dir;
};

// Runs every task on a pool of `workers` threads and returns the outputs in task order.
// The first failing task (by index) has its exception rethrown.
std::vector<TaskOutput> run_tasks(const TaskPlan& plan, const TaskFn& fn);

// Stream for sample i of task t: substream(t).substream(i) of the root seed.
RngStream sample_stream(std::uint64_t seed, std::uint64_t task, std::uint64_t i);

ExperimentReport run_singularity(const ExperimentConfig& cfg);
ExperimentReport run_smin_tail(const ExperimentConfig& cfg);
ExperimentReport run_events(const ExperimentConfig& cfg);
ExperimentReport run_classify_coverage(const ExperimentConfig& cfg);
ExperimentReport run_rud_profile(const ExperimentConfig& cfg);
ExperimentReport run_kernel_profile(const ExperimentConfig& cfg);
ExperimentReport run_lattice_ud(const ExperimentConfig& cfg);
ExperimentReport run_concentration(const ExperimentConfig& cfg);
ExperimentReport run_distance_kernel(const ExperimentConfig& cfg);

// Dispatches on cfg.experiment and fills config echo, hash and runtime.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Exact P(singular) by enumerating every level pattern; empty when levels^(n^2) > max_patterns.
std::optional<double> enumerate_singular_probability(const DiscreteLaw& law, std::size_t n,
                                                     std::uint64_t max_patterns = 1u << 16);

}  // namespace rsing
