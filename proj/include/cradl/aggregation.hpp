#pragma once

// Robust bounded aggregation (RBA) rules and their robustness constants.
//
// An aggregator A is RBA with constant C^2 when, for honest messages z_i with
// mean z_bar and spread s = max_i |z_bar - z_i|^2, |A(all) - z_bar|^2 <= C^2 s.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cradl/linalg.hpp"

namespace cradl {

enum class RuleKind { Mean, CoordMedian, TrimmedMean, GeometricMedian, Krum, Phocas, Faba };

std::string_view rule_name(RuleKind kind);

struct RbaRuleSpec {
    RuleKind kind = RuleKind::CoordMedian;
    /// Per-side trim fraction for TrimmedMean and Phocas; unset means alpha.
    std::optional<double> trim_fraction;
    double tolerance = 1e-10;
    std::size_t max_iterations = 1000;
    /// Krum's f; unset means round(alpha N).
    std::optional<std::size_t> byzantine_count;
    /// FABA removals; unset means ceil(alpha N).
    std::optional<std::size_t> removal_count;

    static RbaRuleSpec of(RuleKind kind) {
        RbaRuleSpec r;
        r.kind = kind;
        return r;
    }
};

/// Grammar: mean | median | trimmed[:<frac>] | geomedian | krum | phocas | faba
RbaRuleSpec parse_rule(std::string_view text);
std::string to_string(const RbaRuleSpec& rule);

// Individual rules. Counts are absolute numbers of messages.
Vector mean(std::span<const Vector> messages);
/// Even counts take the midpoint of the two central order statistics.
Vector coord_median(std::span<const Vector> messages);
/// Drops `per_side` smallest and largest values per coordinate.
Vector trimmed_mean(std::span<const Vector> messages, std::size_t per_side);

struct GeometricMedianResult {
    Vector point;
    std::size_t iterations = 0;
    bool converged = false;
};
/// Weiszfeld iteration from the mean with the Vardi-Zhang step at data points;
/// stops when the move is below tol * (1 + |y|).
GeometricMedianResult geometric_median(std::span<const Vector> messages, double tol = 1e-10,
                                       std::size_t max_iterations = 1000);

/// Input minimising the summed squared distance to its N - f - 2 nearest
/// neighbours. Equal scores go to the lexicographically smallest vector, then
/// the lowest index.
Vector krum(std::span<const Vector> messages, std::size_t f);
/// Per coordinate: average of the N - trim values closest to the trimmed mean
/// (trim per side).
Vector phocas(std::span<const Vector> messages, std::size_t trim);
/// Removes the vector farthest from the running mean `removals` times, then
/// averages the survivors.
Vector faba(std::span<const Vector> messages, std::size_t removals);

/// Concrete parameters of `rule` for N messages at Byzantine fraction alpha.
struct ResolvedRule {
    RuleKind kind;
    std::size_t count = 0;  // trim per side, Krum f or FABA removals
    double tolerance = 1e-10;
    std::size_t max_iterations = 1000;
};
/// Throws std::invalid_argument when the rule cannot run for (N, alpha).
ResolvedRule resolve_rule(const RbaRuleSpec& rule, std::size_t n, double alpha);

Vector aggregate(const RbaRuleSpec& rule, std::span<const Vector> messages, double alpha);

/// Robustness constant C_alpha^2. Mean is only bounded without attackers.
double c_alpha_sq(RuleKind kind, double alpha, std::size_t n, std::size_t dimension);

struct RobustBoundReport {
    double lhs = 0.0;        // |A(.) - z_bar|^2
    double varsigma = 0.0;   // max_i |z_bar - z_i|^2 over honest i
    double c_alpha_sq = 0.0;
    bool satisfied = false;  // lhs <= C^2 s + 1e-9 (1 + s)
};

/// Aggregates the union of honest and Byzantine messages after a seeded shuffle.
RobustBoundReport robust_bound_check(const RbaRuleSpec& rule, std::span<const Vector> honest,
                                     std::span<const Vector> byzantine, double alpha,
                                     std::uint64_t shuffle_seed = 0);

}  // namespace cradl
