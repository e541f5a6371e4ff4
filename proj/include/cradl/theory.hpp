#pragma once

// Constants and bounds of the CRA-DL convergence analysis, plus numeric
// checks of the two lemmas the theorems rest on.
//
// `deficit` stands for the number of subsets one device holds that another
// does not. For a pair-wise balanced allocation it is r - r^2/M; for a random
// allocation the largest observed one-sided symmetric difference keeps the
// spread lemma (and everything built on it) valid.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cradl/allocation.hpp"
#include "cradl/linalg.hpp"
#include "cradl/problem.hpp"

namespace cradl {

struct PowerIterationResult {
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Largest eigenvalue of sum_k z_k z_k^T: the smoothness constant of F.
PowerIterationResult estimate_L(const Dataset& data, double tol = 1e-10,
                                std::size_t max_iterations = 10000);

/// max_k |grad f_k(x) - grad F(x) / M| at one point.
double estimate_beta(const Dataset& data, std::span<const double> x);

/// min_x F(x) from the normal equations (Cholesky). Returns 0, the trivial
/// lower bound, when sum_k z_k z_k^T is singular.
double optimal_loss(const Dataset& data);

struct PhiConstants {
    double phi1 = 1.0;  // P(device honest)
    double phi2 = 1.0;  // P(two given devices both honest)
};
PhiConstants phi_constants(double alpha, std::size_t devices);

inline double ideal_deficit(std::size_t r, std::size_t subsets) {
    const double rr = static_cast<double>(r);
    return rr - rr * rr / static_cast<double>(subsets);
}

struct TheoryInputs {
    double smoothness = 0.0;   // L
    double beta = 0.0;
    double f_star = 0.0;
    double alpha = 0.0;
    std::size_t devices = 0;   // N
    std::size_t subsets = 0;   // M
    std::size_t per_device = 0;  // r
    std::size_t min_replication = 0;  // d_min
    double c_alpha_sq = 0.0;
    std::optional<double> deficit;  // default r - r^2/M
};

struct TheoryConstants {
    double smoothness = 0.0;
    double beta = 0.0;
    double f_star = 0.0;
    double alpha = 0.0;
    std::size_t devices = 0;
    std::size_t subsets = 0;
    std::size_t per_device = 0;
    std::size_t min_replication = 0;
    double c_alpha_sq = 0.0;
    double deficit = 0.0;
    double phi1 = 0.0;
    double phi2 = 0.0;
    double rho1 = 0.0;
    double rho2 = 0.0;
    double rho3 = 0.0;
    double rho4 = 0.0;
    double eta = 0.0;
};

TheoryConstants make_constants(const TheoryInputs& in);

/// C_alpha < d_min M / (2 sqrt(2) N deficit); always true when deficit = 0.
bool convergence_condition(double c_alpha, std::size_t d_min, std::size_t subsets,
                           std::size_t devices, std::size_t r);
bool convergence_condition(double c_alpha, std::size_t d_min, std::size_t subsets,
                           std::size_t devices, double deficit);
/// Right-hand side of the condition (infinity when deficit = 0).
double convergence_threshold(std::size_t d_min, std::size_t subsets, std::size_t devices,
                             double deficit);

/// Fixed-rate bound on (1/(T+1)) sum_t |grad F(x^t)|^2 with gamma = lambda / sqrt(T+1).
/// Requires rho1 > 0 and T > (lambda rho2 / rho1)^2 - 1.
double theorem1_bound(std::size_t iterations, double lambda, const TheoryConstants& c,
                      double initial_loss);
/// Decaying-rate bound on min_t |grad F(x^t)|^2. Requires 0 < gamma0 < rho1 / (2 rho2).
double theorem2_bound(std::size_t iterations, double gamma0, const TheoryConstants& c,
                      double initial_loss);

/// T -> infinity residual. With `replication_balanced` (d_min M ~ N r) the
/// closed form in r/M is used; otherwise rho3 / rho1 (resp. rho3 / (rho1 - gamma0 rho2)).
double asymptotic_error_fixed(const TheoryConstants& c, bool replication_balanced = true);
double asymptotic_error_decaying(const TheoryConstants& c, double gamma0,
                                 bool replication_balanced = true);

struct Lemma1Report {
    double actual_max = 0.0;   // max_{i,j} |g_i - g_j|^2
    double ideal_bound = 0.0;  // 8 (r - r^2/M)^2 (beta^2 + |grad F|^2 / M^2) / d_min^2
    bool ideal_applicable = false;  // allocation exactly pair-wise balanced
    bool ideal_holds = false;
    std::size_t pairs_checked = 0;
    std::size_t violations = 0;     // pairs exceeding their per-pair bound
    double worst_ratio = 0.0;       // max actual / per-pair bound over pairs with bound > 0
    double beta = 0.0;
    double grad_norm_sq = 0.0;
};

Lemma1Report lemma1_check(std::span<const double> x, const AllocationMatrix& alloc,
                          const Dataset& data);

struct Lemma2Report {
    double estimate = 0.0;           // Monte Carlo mean of |g_bar|^2
    double std_error = 0.0;
    double exact_expectation = 0.0;  // trace identity, no sampling
    double bound = 0.0;
    bool satisfied = false;          // estimate <= bound + 3 s.e.
    double phi1 = 0.0;
    double phi2 = 0.0;
    double honest_rate = 0.0;        // empirical P(h_0 = 1)
    double honest_rate_se = 0.0;
    double pair_rate = 0.0;          // empirical P(h_0 = h_1 = 1)
    double pair_rate_se = 0.0;
    bool structure_ok = false;       // both within 3 s.e. of phi1, phi2
};

/// Requires trials >= 1000.
Lemma2Report lemma2_check(std::span<const double> x, const AllocationMatrix& alloc,
                          const Dataset& data, double alpha, std::size_t trials,
                          std::uint64_t seed);

/// Named constants and bound values, in output order.
using TheoryTable = std::vector<std::pair<std::string, double>>;

}  // namespace cradl
