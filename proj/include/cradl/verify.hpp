#pragma once

// Acceptance suite: exact identities, inequality checks and reproductions of
// the published figures at their own scale. Each criterion reports a verdict
// and the measured quantities behind it.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace cradl {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    std::uint64_t seed = 2024;
    std::size_t figure_seeds = 5;
    std::size_t figure_iterations = 500;
};

CriterionResult check_sum_identity(const AcceptanceOptions& o);
CriterionResult check_gradient_oracle(const AcceptanceOptions& o);
CriterionResult check_robust_bound(const AcceptanceOptions& o);
CriterionResult check_lemma1(const AcceptanceOptions& o);
CriterionResult check_lemma2(const AcceptanceOptions& o);
CriterionResult check_baselines(const AcceptanceOptions& o);
CriterionResult check_redundancy_sweep(const AcceptanceOptions& o);
CriterionResult check_alpha_sweep(const AcceptanceOptions& o);
CriterionResult check_heterogeneity(const AcceptanceOptions& o);
CriterionResult check_theorems(const AcceptanceOptions& o);
CriterionResult check_determinism(const AcceptanceOptions& o);

using Criterion = std::function<CriterionResult(const AcceptanceOptions&)>;
/// Criteria 1..11 in order.
std::vector<Criterion> acceptance_criteria();

/// "PASS [n] name: detail" / "FAIL [n] name: detail"
std::string format_result(const CriterionResult& r);

}  // namespace cradl
