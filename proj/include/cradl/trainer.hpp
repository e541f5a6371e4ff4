#pragma once

// Parameter-server training loop for CRA-DL and its baselines.
//
// Per iteration t = 0..T: honest devices send coded gradients of x^t,
// Byzantine devices (redrawn every iteration) send attack vectors built from
// the same iteration's honest messages, the server aggregates and applies
// x^{t+1} = x^t - gamma^t * g_hat^t.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cradl/adversary.hpp"
#include "cradl/aggregation.hpp"
#include "cradl/allocation.hpp"
#include "cradl/linalg.hpp"
#include "cradl/problem.hpp"

namespace cradl {

enum class Method { CraDl, Ma, RbaDl, SgcDl, Clairvoyant };

std::string_view method_name(Method m);
/// Accepts "CRA-DL", "cra-dl", "cradl", ... case-insensitively.
Method parse_method(std::string_view text);
inline constexpr Method kAllMethods[] = {Method::CraDl, Method::Ma, Method::RbaDl, Method::SgcDl,
                                         Method::Clairvoyant};

enum class AllocationScheme { NonRedundant, UniformRandom, FullReplication };
std::string_view scheme_name(AllocationScheme s);
AllocationScheme parse_scheme(std::string_view text);

struct FixedRate {
    double gamma = 0.001;
};
struct DecayingRate {
    double gamma0 = 0.0;
    double rho1 = 0.0;
    double rho2 = 0.0;
};
using Schedule = std::variant<FixedRate, DecayingRate>;

/// gamma = lambda / sqrt(T + 1)
double lr_fixed(double lambda, std::size_t iterations);
/// gamma^t solving gamma rho1 - gamma^2 rho2 = (gamma0 rho1 - gamma0^2 rho2) / sqrt(t + 1),
/// smaller root. Requires 0 < gamma0 < rho1 / (2 rho2).
double lr_decaying(double gamma0, double rho1, double rho2, std::size_t t);
double learning_rate(const Schedule& schedule, std::size_t t);

struct RunConfig {
    Method method = Method::CraDl;
    std::size_t devices = 100;
    AllocationScheme allocation = AllocationScheme::UniformRandom;
    std::size_t per_device = 40;  // r, used by the uniform random scheme
    RbaRuleSpec rule = RbaRuleSpec::of(RuleKind::CoordMedian);
    AttackSpec attack;
    double alpha = 0.0;
    Schedule schedule = FixedRate{};
    std::size_t iterations = 500;  // T; iterations 0..T run
    std::uint64_t seed = 0;
    double init_value = 0.0;  // x^0 filled with this value
    // Seeds the random allocation instead of `seed`, so several runs can share one allocation.
    std::optional<std::uint64_t> allocation_seed;
};

/// Forces the components a method fixes: MA, RBA-DL and Clairvoyant use the
/// non-redundant allocation; MA, SGC-DL and Clairvoyant use the mean rule.
RunConfig with_method_defaults(RunConfig config);

/// Rejects inconsistent or infeasible configurations before iteration 0.
void validate(const RunConfig& config, std::size_t subsets);

/// Allocation a configuration trains with, over M subsets.
AllocationMatrix build_allocation(const RunConfig& config, std::size_t subsets);

struct IterationRecord {
    std::size_t t = 0;
    double loss = 0.0;       // F(x^t)
    double grad_norm = 0.0;  // |grad F(x^t)|
    double agg_error = 0.0;  // |g_hat^t - g_bar^t|
    double spread = 0.0;     // max_{i honest} |g_bar^t - g_i^t|^2
    double lr = 0.0;
};

struct Trajectory {
    RunConfig config;
    std::vector<IterationRecord> records;  // T + 1 unless diverged
    Vector final_model;                    // x^{T+1}
    bool diverged = false;
    // Filled only with RunOptions::keep_history.
    std::vector<Vector> models;   // x^0 .. x^{T+1}
    std::vector<Vector> updates;  // g_hat^0 .. g_hat^T
    std::vector<Vector> honest_means;

    double final_loss() const { return records.empty() ? 0.0 : records.back().loss; }
};

struct RunOptions {
    bool keep_history = false;
};

inline constexpr double kDivergenceThreshold = 1e12;

Trajectory run(const RunConfig& config, const Objective& objective, RunOptions options = {});
Trajectory run(const RunConfig& config, const Dataset& data, RunOptions options = {});

struct SuiteParams {
    std::size_t devices = 100;
    std::size_t per_device = 40;
    RbaRuleSpec rule = RbaRuleSpec::of(RuleKind::CoordMedian);
    AttackSpec attack;
    double alpha = 0.2;
    Schedule schedule = FixedRate{};
    std::size_t iterations = 500;
    std::uint64_t seed = 0;
};

RunConfig suite_config(const SuiteParams& params, Method method);

/// All five methods on one dataset with shared identity and attack streams.
std::map<Method, Trajectory> run_baseline_suite(const Dataset& data, const SuiteParams& params);

}  // namespace cradl
