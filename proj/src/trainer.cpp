#include "cradl/trainer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "cradl/coding.hpp"
#include "cradl/rng.hpp"

namespace cradl {

namespace {

std::string normalized(std::string_view text) {
    std::string out;
    for (char c : text)
        if (c != '-' && c != '_') out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool uses_redundancy(Method m) { return m == Method::CraDl || m == Method::SgcDl; }
bool forces_mean(Method m) {
    return m == Method::Ma || m == Method::SgcDl || m == Method::Clairvoyant;
}

}  // namespace

std::string_view method_name(Method m) {
    switch (m) {
        case Method::CraDl: return "CRA-DL";
        case Method::Ma: return "MA";
        case Method::RbaDl: return "RBA-DL";
        case Method::SgcDl: return "SGC-DL";
        case Method::Clairvoyant: return "Clairvoyant";
    }
    return "?";
}

Method parse_method(std::string_view text) {
    const std::string key = normalized(text);
    for (Method m : kAllMethods)
        if (normalized(method_name(m)) == key) return m;
    throw std::invalid_argument("unknown method '" + std::string(text) +
                                "' (CRA-DL | MA | RBA-DL | SGC-DL | Clairvoyant)");
}

std::string_view scheme_name(AllocationScheme s) {
    switch (s) {
        case AllocationScheme::NonRedundant: return "nonredundant";
        case AllocationScheme::UniformRandom: return "random";
        case AllocationScheme::FullReplication: return "full";
    }
    return "?";
}

AllocationScheme parse_scheme(std::string_view text) {
    const std::string key = normalized(text);
    if (key == "nonredundant") return AllocationScheme::NonRedundant;
    if (key == "random" || key == "uniformrandom") return AllocationScheme::UniformRandom;
    if (key == "full" || key == "fullreplication") return AllocationScheme::FullReplication;
    throw std::invalid_argument("unknown allocation scheme '" + std::string(text) +
                                "' (nonredundant | random | full)");
}

double lr_fixed(double lambda, std::size_t iterations) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lr_fixed: lambda must be positive");
    return lambda / std::sqrt(static_cast<double>(iterations) + 1.0);
}

double lr_decaying(double gamma0, double rho1, double rho2, std::size_t t) {
    if (!(rho1 > 0.0 && rho2 > 0.0)) throw std::invalid_argument("lr_decaying: rho1, rho2 must be positive");
    if (!(gamma0 > 0.0 && gamma0 < rho1 / (2.0 * rho2))) {
        throw std::invalid_argument("lr_decaying: need 0 < gamma0 < rho1 / (2 rho2)");
    }
    if (t == 0) return gamma0;
    const double c = (gamma0 * rho1 - gamma0 * gamma0 * rho2) / std::sqrt(static_cast<double>(t) + 1.0);
    const double disc = rho1 * rho1 - 4.0 * rho2 * c;
    // smaller root rationalised: (rho1 - sqrt(disc)) / (2 rho2) = 2c / (rho1 + sqrt(disc))
    return 2.0 * c / (rho1 + std::sqrt(disc));
}

double learning_rate(const Schedule& schedule, std::size_t t) {
    return std::visit(overloaded{[](const FixedRate& f) { return f.gamma; },
                                 [t](const DecayingRate& d) {
                                     return lr_decaying(d.gamma0, d.rho1, d.rho2, t);
                                 }},
                      schedule);
}

RunConfig with_method_defaults(RunConfig config) {
    if (!uses_redundancy(config.method)) config.allocation = AllocationScheme::NonRedundant;
    if (forces_mean(config.method)) config.rule = RbaRuleSpec::of(RuleKind::Mean);
    return config;
}

void validate(const RunConfig& config, std::size_t subsets) {
    if (config.devices == 0) throw std::invalid_argument("config: devices must be positive");
    if (config.iterations == 0) throw std::invalid_argument("config: iterations must be at least 1");
    if (!uses_redundancy(config.method) && config.allocation != AllocationScheme::NonRedundant) {
        throw std::invalid_argument(std::string(method_name(config.method)) +
                                    " requires the non-redundant allocation");
    }
    if (forces_mean(config.method) && config.rule.kind != RuleKind::Mean) {
        throw std::invalid_argument(std::string(method_name(config.method)) +
                                    " requires the mean rule");
    }
    if (!(config.alpha >= 0.0 && config.alpha < 0.5)) {
        throw std::invalid_argument("config: alpha must lie in [0, 0.5)");
    }
    if (config.allocation == AllocationScheme::UniformRandom &&
        (config.per_device < 1 || config.per_device > subsets)) {
        throw std::invalid_argument("config: r=" + std::to_string(config.per_device) +
                                    " outside [1, M=" + std::to_string(subsets) + "]");
    }
    if (config.allocation == AllocationScheme::NonRedundant && subsets % config.devices != 0) {
        throw std::invalid_argument("config: non-redundant allocation needs N dividing M");
    }
    validate(config.attack);
    std::visit(overloaded{[](const FixedRate& f) {
                              if (!(f.gamma > 0.0)) throw std::invalid_argument("config: learning rate must be positive");
                          },
                          [](const DecayingRate& d) { lr_decaying(d.gamma0, d.rho1, d.rho2, 0); }},
               config.schedule);
    // throws when the rule cannot run with the honest + Byzantine message count
    resolve_rule(config.rule, config.devices, config.alpha);
}

AllocationMatrix build_allocation(const RunConfig& config, std::size_t subsets) {
    switch (config.allocation) {
        case AllocationScheme::NonRedundant: return allocate_partition(config.devices, subsets);
        case AllocationScheme::UniformRandom:
            return allocate_uniform_random(config.devices, subsets, config.per_device,
                                           stream_seed(config.allocation_seed.value_or(config.seed), "run.allocation"));
        case AllocationScheme::FullReplication:
            return allocate_full_replication(config.devices, subsets);
    }
    throw std::logic_error("build_allocation: unknown scheme");
}

Trajectory run(const RunConfig& config, const Objective& objective, RunOptions options) {
    validate(config, objective.subsets);
    const std::size_t dim = objective.dimension;
    const std::size_t m = objective.subsets;
    const std::size_t n = config.devices;
    const AllocationMatrix alloc = build_allocation(config, m);

    Trajectory traj;
    traj.config = config;
    traj.records.reserve(config.iterations + 1);

    Vector x(dim, config.init_value);
    std::vector<Vector> subset_grads(m, Vector(dim));
    std::vector<Vector> coded;
    std::vector<Vector> received(n);
    std::vector<Vector> honest_msgs;
    if (options.keep_history) traj.models.push_back(x);

    for (std::size_t t = 0; t <= config.iterations; ++t) {
        IterationRecord rec;
        rec.t = t;
        rec.loss = objective.total_loss(x);
        Vector full(dim, 0.0);
        for (std::size_t k = 0; k < m; ++k) {
            objective.grad(x, k, subset_grads[k]);
            axpy(1.0, subset_grads[k], full);
        }
        rec.grad_norm = norm(full);
        if (!std::isfinite(rec.loss) || rec.loss > kDivergenceThreshold || !all_finite(full)) {
            traj.diverged = true;
            traj.records.push_back(rec);
            break;
        }

        encode_all_into(alloc, subset_grads, coded);
        const IdentitySample ids = sample_identities(n, config.alpha, t, config.seed);
        honest_msgs.clear();
        for (std::size_t i : ids.honest) honest_msgs.push_back(coded[i]);
        const Vector honest_mean = mean_of(honest_msgs);
        for (const auto& g : honest_msgs) rec.spread = std::max(rec.spread, squared_distance(honest_mean, g));

        Vector update;
        if (config.method == Method::Clairvoyant) {
            update = honest_mean;
        } else {
            for (std::size_t i = 0; i < n; ++i) received[i] = coded[i];
            for (std::size_t j : ids.byzantine) {
                Rng rng = make_rng(config.seed, "attack", {t, j});
                received[j] = byzantine_message(config.attack, coded[j], honest_msgs, rng);
            }
            update = aggregate(config.rule, received, config.alpha);
        }
        rec.agg_error = std::sqrt(squared_distance(update, honest_mean));
        rec.lr = learning_rate(config.schedule, t);
        traj.records.push_back(rec);

        axpy(-rec.lr, update, x);
        if (options.keep_history) {
            traj.models.push_back(x);
            traj.updates.push_back(std::move(update));
            traj.honest_means.push_back(honest_mean);
        }
        if (!all_finite(x)) {
            traj.diverged = true;
            break;
        }
    }
    traj.final_model = std::move(x);
    return traj;
}

Trajectory run(const RunConfig& config, const Dataset& data, RunOptions options) {
    return run(config, linear_regression(data), options);
}

RunConfig suite_config(const SuiteParams& params, Method method) {
    RunConfig c;
    c.method = method;
    c.devices = params.devices;
    c.allocation = AllocationScheme::UniformRandom;
    c.per_device = params.per_device;
    c.rule = params.rule;
    c.attack = params.attack;
    c.alpha = params.alpha;
    c.schedule = params.schedule;
    c.iterations = params.iterations;
    c.seed = params.seed;
    return with_method_defaults(c);
}

std::map<Method, Trajectory> run_baseline_suite(const Dataset& data, const SuiteParams& params) {
    std::map<Method, Trajectory> out;
    for (Method m : kAllMethods) out.emplace(m, run(suite_config(params, m), data));
    return out;
}

}  // namespace cradl
