#pragma once

// CSV result rows, one per (run, iteration). Reals are written with %.17g so
// a file re-parsed with read_results reproduces every double exactly.

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cradl/trainer.hpp"

namespace cradl {

struct ResultRow {
    std::size_t run_id = 0;
    std::string method;
    std::string rule;
    std::string attack;
    double alpha = 0.0;
    std::size_t r = 0;
    double sigma_h = 0.0;
    std::uint64_t seed = 0;
    std::size_t iteration = 0;
    double loss = 0.0;
    double grad_norm = 0.0;
    double agg_error = 0.0;
    double lr = 0.0;

    bool operator==(const ResultRow&) const = default;
};

inline constexpr const char* kResultHeader =
    "run_id,method,rule,attack,alpha,r,sigma_h,seed,iteration,loss,grad_norm,agg_error,lr";

std::string format_real(double v);

/// Subsets per device the configuration actually trains with.
std::size_t effective_per_device(const RunConfig& config, std::size_t subsets);

std::vector<ResultRow> to_rows(const Trajectory& trajectory, std::size_t run_id,
                               std::size_t subsets, double sigma_h);

void write_results(std::ostream& os, std::span<const ResultRow> rows);
/// Throws std::runtime_error naming the line on malformed input.
std::vector<ResultRow> read_results(std::istream& is);

/// Runs that could not be executed, with the reason.
struct SkippedRun {
    std::size_t run_id = 0;
    std::string method;
    std::string rule;
    std::string attack;
    double alpha = 0.0;
    std::string r;
    double sigma_h = 0.0;
    std::uint64_t seed = 0;
    std::string reason;
};

inline constexpr const char* kSkippedHeader = "run_id,method,rule,attack,alpha,r,sigma_h,seed,reason";
void write_skipped(std::ostream& os, std::span<const SkippedRun> rows);

}  // namespace cradl
