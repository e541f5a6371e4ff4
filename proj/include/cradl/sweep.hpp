#pragma once

// Expansion of an experiment into runs (axis cross product x seeds) and their
// sequential execution. Runs that end up with the same effective configuration
// (e.g. MA under several rules) execute once.

#include <string>
#include <vector>

#include "cradl/experiment.hpp"
#include "cradl/results.hpp"

namespace cradl {

struct PlannedRun {
    std::size_t run_id = 0;
    RunConfig config;  // method defaults applied, per_device resolved
    DataSpec data;
    PerDevice r;
};

struct SweepPlan {
    std::vector<PlannedRun> runs;
    std::vector<SkippedRun> skipped;
    std::size_t subsets = 0;
};

SweepPlan plan_sweep(const Experiment& e);

struct SweepOutcome {
    std::vector<ResultRow> rows;  // sorted by (run_id, iteration)
    std::vector<SkippedRun> skipped;
    std::vector<std::size_t> diverged;  // run ids
    std::size_t completed = 0;
};

SweepOutcome execute(const SweepPlan& plan);
inline SweepOutcome run_experiment(const Experiment& e) { return execute(plan_sweep(e)); }

}  // namespace cradl
