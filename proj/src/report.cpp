#include "cradl/report.hpp"

#include <cmath>
#include <limits>

#include "cradl/results.hpp"

namespace cradl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

}  // namespace

std::vector<TheoryRow> theory_report(const Experiment& e) {
    RunConfig config = with_method_defaults(e.run);
    config.seed = e.seeds.front();
    const Dataset data = materialize(e.data, config.seed);
    config.per_device = e.r.resolve(data.size());
    validate(config, data.size());
    const AllocationMatrix alloc = build_allocation(config, data.size());
    const BalanceReport balance = balance_diagnostics(alloc);

    std::vector<TheoryRow> rows;
    const auto add = [&](std::string name, double v, std::string note = {}) {
        rows.push_back({std::move(name), v, std::move(note)});
    };

    const std::size_t n = config.devices;
    const std::size_t m = data.size();
    add("N", static_cast<double>(n));
    add("M", static_cast<double>(m));
    add("D", static_cast<double>(data.dimension));
    add("r", static_cast<double>(alloc.per_device()));
    add("d_min", static_cast<double>(alloc.min_replication()));
    add("alpha", config.alpha);

    const auto L = estimate_L(data);
    add("L", L.value, L.converged ? "power iteration" : "power iteration did not converge");

    const Trajectory traj = run(config, data, RunOptions{true});
    double beta = 0.0;
    for (const auto& x : traj.models) {
        if (all_finite(x)) beta = std::max(beta, estimate_beta(data, x));
    }
    add("beta", beta, "sup over the configured trajectory");
    const Vector x0(data.dimension, config.init_value);
    const double f0 = total_loss(x0, data);
    add("F0", f0);
    const double f_star = optimal_loss(data);
    add("F_star", f_star, "least-squares optimum");
    add("final_loss", traj.final_loss(), traj.diverged ? "run diverged" : "");

    double c2 = kNaN;
    std::string c2_note;
    try {
        c2 = c_alpha_sq(config.rule.kind, config.alpha, n, data.dimension);
    } catch (const std::exception& ex) {
        c2_note = ex.what();
    }
    add("C_alpha_sq", c2, c2_note);
    if (std::isnan(c2)) return rows;

    TheoryInputs in;
    in.smoothness = L.value;
    in.beta = beta;
    in.f_star = f_star;
    in.alpha = config.alpha;
    in.devices = n;
    in.subsets = m;
    in.per_device = alloc.per_device();
    in.min_replication = alloc.min_replication();
    in.c_alpha_sq = c2;
    const bool balanced = balance.exactly_balanced;
    if (!balanced) in.deficit = static_cast<double>(balance.max_one_sided);
    const TheoryConstants c = make_constants(in);

    add("deficit", c.deficit, balanced ? "r - r^2/M" : "largest one-sided symmetric difference");
    add("phi1", c.phi1);
    add("phi2", c.phi2);
    add("eta", c.eta);
    add("rho1", c.rho1);
    add("rho2", c.rho2);
    add("rho3", c.rho3);
    add("rho4", c.rho4);
    const double threshold = convergence_threshold(alloc.min_replication(), m, n, c.deficit);
    add("condition_lhs", std::sqrt(c2), "C_alpha");
    add("condition_rhs", threshold, "d_min M / (2 sqrt(2) N deficit)");
    const bool holds = convergence_condition(std::sqrt(c2), alloc.min_replication(), m, n, c.deficit);
    add("condition_holds", holds ? 1.0 : 0.0);

    const auto guarded = [&](const std::string& name, auto fn) {
        try {
            add(name, fn());
        } catch (const std::exception& ex) {
            add(name, kNaN, ex.what());
        }
    };
    guarded("asymptotic_fixed", [&] { return asymptotic_error_fixed(c, true); });
    guarded("asymptotic_fixed_rho", [&] { return asymptotic_error_fixed(c, false); });

    const std::size_t T = config.iterations;
    if (const auto* f = std::get_if<FixedRate>(&config.schedule)) {
        const double lambda = f->gamma * std::sqrt(static_cast<double>(T) + 1.0);
        add("lambda", lambda);
        guarded("theorem1_bound", [&] { return theorem1_bound(T, lambda, c, f0); });
        double avg = 0.0;
        for (const auto& rec : traj.records) avg += rec.grad_norm * rec.grad_norm;
        add("avg_grad_norm_sq", avg / static_cast<double>(traj.records.size()), "run, mean over t");
    } else {
        const auto& d = std::get<DecayingRate>(config.schedule);
        add("gamma0", d.gamma0);
        guarded("theorem2_bound", [&] { return theorem2_bound(T, d.gamma0, c, f0); });
        guarded("asymptotic_decaying", [&] { return asymptotic_error_decaying(c, d.gamma0, true); });
        double best = std::numeric_limits<double>::infinity();
        for (const auto& rec : traj.records) best = std::min(best, rec.grad_norm * rec.grad_norm);
        add("min_grad_norm_sq", best, "run, min over t");
    }
    return rows;
}

void write_theory(std::ostream& os, const std::vector<TheoryRow>& rows) {
    os << "name,value,note\n";
    for (const auto& r : rows) os << r.name << ',' << format_real(r.value) << ',' << csv_field(r.note) << '\n';
}

}  // namespace cradl
