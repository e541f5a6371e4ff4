#include "cradl/sweep.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace cradl {

namespace {

std::string real_key(double v) { return format_real(v); }

std::string schedule_key(const Schedule& s) {
    if (const auto* f = std::get_if<FixedRate>(&s)) return "fixed:" + real_key(f->gamma);
    const auto& d = std::get<DecayingRate>(s);
    return "decaying:" + real_key(d.gamma0) + ":" + real_key(d.rho1) + ":" + real_key(d.rho2);
}

std::string rule_key(const RbaRuleSpec& r) {
    std::string k(rule_name(r.kind));
    if (r.trim_fraction) k += ":t" + real_key(*r.trim_fraction);
    if (r.byzantine_count) k += ":f" + std::to_string(*r.byzantine_count);
    if (r.removal_count) k += ":q" + std::to_string(*r.removal_count);
    return k + ":" + real_key(r.tolerance) + ":" + std::to_string(r.max_iterations);
}

std::string attack_key(const AttackSpec& a) {
    return to_string(a) + ":" + real_key(a.coefficient) + ":" + real_key(a.variance);
}

std::string effective_key(const PlannedRun& p, std::size_t subsets) {
    const RunConfig& c = p.config;
    std::string k;
    k += std::string(method_name(c.method)) + "|" + std::to_string(c.devices) + "|";
    k += std::string(scheme_name(c.allocation)) + "|" + std::to_string(effective_per_device(c, subsets)) + "|";
    k += rule_key(c.rule) + "|" + attack_key(c.attack) + "|" + real_key(c.alpha) + "|";
    k += schedule_key(c.schedule) + "|" + std::to_string(c.iterations) + "|" + std::to_string(c.seed) + "|";
    k += real_key(c.init_value) + "|" + real_key(p.data.sigma_h) + "|";
    k += std::to_string(p.data.seed.value_or(c.seed)) + "|" + p.data.file;
    return k;
}

void apply(SweepAxis axis, const std::string& value, RunConfig& c, DataSpec& d, PerDevice& r) {
    switch (axis) {
        case SweepAxis::R: r = parse_per_device(value); break;
        case SweepAxis::Alpha: c.alpha = std::stod(value); break;
        case SweepAxis::SigmaH: d.sigma_h = std::stod(value); break;
        case SweepAxis::Rule: c.rule = parse_rule(value); break;
        case SweepAxis::Attack: c.attack = parse_attack(value); break;
        case SweepAxis::Method: c.method = parse_method(value); break;
    }
}

SkippedRun describe(const PlannedRun& p, std::string reason) {
    const RunConfig& c = p.config;
    return {p.run_id, std::string(method_name(c.method)), to_string(c.rule), to_string(c.attack), c.alpha,
            p.r.text(), p.data.sigma_h, c.seed, std::move(reason)};
}

}  // namespace

SweepPlan plan_sweep(const Experiment& e) {
    SweepPlan plan;
    if (!e.data.file.empty()) {
        plan.subsets = materialize(e.data, 0).size();
    } else {
        plan.subsets = e.data.m;
    }

    // Odometer over the axes in file order; seeds vary fastest.
    std::vector<std::size_t> idx(e.sweeps.size(), 0);
    std::set<std::string> seen;
    std::size_t next_id = 0;
    while (true) {
        for (std::uint64_t seed : e.seeds) {
            PlannedRun p;
            p.config = e.run;
            p.data = e.data;
            p.r = e.r;
            for (std::size_t a = 0; a < e.sweeps.size(); ++a) {
                apply(e.sweeps[a].axis, e.sweeps[a].values[idx[a]], p.config, p.data, p.r);
            }
            p.config.seed = seed;
            p.config = with_method_defaults(p.config);
            try {
                p.config.per_device = p.r.resolve(plan.subsets);
            } catch (const std::exception& ex) {
                p.run_id = next_id++;
                plan.skipped.push_back(describe(p, ex.what()));
                continue;
            }
            if (!seen.insert(effective_key(p, plan.subsets)).second) continue;
            p.run_id = next_id++;
            try {
                validate(p.config, plan.subsets);
                if (p.config.allocation == AllocationScheme::UniformRandom &&
                    p.config.devices * p.config.per_device < plan.subsets) {
                    throw std::invalid_argument("N*r < M leaves subsets unallocated");
                }
            } catch (const std::exception& ex) {
                plan.skipped.push_back(describe(p, ex.what()));
                continue;
            }
            plan.runs.push_back(std::move(p));
        }
        std::size_t a = e.sweeps.size();
        while (a > 0) {
            --a;
            if (++idx[a] < e.sweeps[a].values.size()) break;
            idx[a] = 0;
            if (a == 0) return plan;
        }
        if (e.sweeps.empty()) return plan;
    }
}

SweepOutcome execute(const SweepPlan& plan) {
    SweepOutcome out;
    out.skipped = plan.skipped;
    std::map<std::pair<std::string, std::uint64_t>, Dataset> cache;
    for (const auto& p : plan.runs) {
        const std::uint64_t data_seed = p.data.seed.value_or(p.config.seed);
        const auto key = std::make_pair(p.data.file + "|" + real_key(p.data.sigma_h), data_seed);
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, materialize(p.data, p.config.seed)).first;
        Trajectory traj;
        try {
            traj = run(p.config, it->second);
        } catch (const std::invalid_argument& ex) {
            out.skipped.push_back(describe(p, ex.what()));
            continue;
        }
        ++out.completed;
        if (traj.diverged) out.diverged.push_back(p.run_id);
        auto rows = to_rows(traj, p.run_id, it->second.size(), p.data.sigma_h);
        out.rows.insert(out.rows.end(), std::make_move_iterator(rows.begin()),
                        std::make_move_iterator(rows.end()));
    }
    std::stable_sort(out.rows.begin(), out.rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return a.run_id != b.run_id ? a.run_id < b.run_id : a.iteration < b.iteration;
    });
    std::sort(out.skipped.begin(), out.skipped.end(),
              [](const SkippedRun& a, const SkippedRun& b) { return a.run_id < b.run_id; });
    return out;
}

}  // namespace cradl
