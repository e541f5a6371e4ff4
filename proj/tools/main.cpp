// cradl: generate data, run and sweep experiments, evaluate theory bounds,
// plot results and run the acceptance suite.
//
// Exit codes: 0 success, 1 configuration error, 2 verification failure,
// 3 completed with at least one diverged run.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "cradl/experiment.hpp"
#include "cradl/plot.hpp"
#include "cradl/report.hpp"
#include "cradl/results.hpp"
#include "cradl/sweep.hpp"
#include "cradl/verify.hpp"

namespace {

constexpr int kOk = 0, kConfigError = 1, kVerifyFailed = 2, kDiverged = 3;

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

cradl::Experiment load(const Common& c) {
    cradl::Experiment e = cradl::load_experiment(c.config);
    if (c.seed) cradl::override_seed(e, *c.seed);
    if (!c.out.empty()) e.out = c.out;
    cradl::resolve_paths(e);
    return e;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw cradl::ConfigError(path + ": cannot write");
    f << text;
}

std::string skipped_path(const std::string& out) { return out + ".skipped.csv"; }

int emit_outcome(const cradl::Experiment& e, const cradl::SweepOutcome& res) {
    std::ostringstream csv;
    cradl::write_results(csv, res.rows);
    write_text(e.out, csv.str());
    if (!res.skipped.empty()) {
        std::ostringstream sk;
        cradl::write_skipped(sk, res.skipped);
        if (e.out.empty()) {
            std::cerr << sk.str();
        } else {
            write_text(skipped_path(e.out), sk.str());
        }
    }
    if (!e.plot.empty()) {
        write_text(e.plot, cradl::render_loss_svg(res.rows, e.figure.empty() ? "training loss" : e.figure));
    }
    std::fprintf(stderr, "%zu run(s) completed, %zu skipped, %zu diverged\n", res.completed, res.skipped.size(),
                 res.diverged.size());
    return res.diverged.empty() ? kOk : kDiverged;
}

int cmd_run(const Common& c, bool sweep) {
    const cradl::Experiment e = load(c);
    if (!sweep && !e.sweeps.empty()) {
        throw cradl::ConfigError(c.config + ": sweep.* keys need the 'sweep' subcommand");
    }
    return emit_outcome(e, cradl::run_experiment(e));
}

int cmd_theory(const Common& c) {
    const cradl::Experiment e = load(c);
    std::ostringstream os;
    cradl::write_theory(os, cradl::theory_report(e));
    write_text(e.out, os.str());
    return kOk;
}

int cmd_gendata(const Common& c, std::size_t m, std::size_t dim, double sigma_h) {
    cradl::DataSpec desc;
    std::string out = c.out;
    std::uint64_t seed = c.seed.value_or(0);
    if (!c.config.empty()) {
        const cradl::Experiment e = load(c);
        desc = e.data;
        seed = e.seeds.front();
        if (out.empty()) out = e.out;
    } else {
        desc.m = m;
        desc.dimension = dim;
        desc.sigma_h = sigma_h;
    }
    if (!desc.file.empty()) throw cradl::ConfigError("gendata: data.file given; nothing to generate");
    const cradl::Dataset data = cradl::materialize(desc, seed);
    std::ostringstream os;
    cradl::write_dataset(os, data);
    write_text(out, os.str());
    return kOk;
}

int cmd_plot(const std::string& csv_path, const std::string& figure, const std::string& out) {
    std::ifstream in(csv_path);
    if (!in) throw cradl::ConfigError(csv_path + ": cannot open");
    const auto rows = cradl::read_results(in);
    write_text(out, cradl::render_loss_svg(rows, figure));
    return kOk;
}

int cmd_verify(std::uint64_t seed, std::size_t seeds, std::size_t iterations, const std::vector<int>& only) {
    cradl::AcceptanceOptions o;
    o.seed = seed;
    o.figure_seeds = seeds;
    o.figure_iterations = iterations;
    const std::set<int> pick(only.begin(), only.end());
    bool all = true;
    const auto criteria = cradl::acceptance_criteria();
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!pick.empty() && !pick.count(static_cast<int>(i) + 1)) continue;
        const auto r = criteria[i](o);
        std::cout << cradl::format_result(r) << std::endl;
        all = all && r.passed;
    }
    return all ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coded robust aggregation for Byzantine-resilient distributed learning"};
    app.require_subcommand(1);

    Common common;
    const auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("--config", common.config, "experiment file");
        if (config_required) opt->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", common.seed, "override the seed list with one seed");
        sub->add_option("--out", common.out, "output path (stdout when omitted)");
    };

    auto* run = app.add_subcommand("run", "run the configured experiment and write CSV rows");
    add_common(run, true);
    auto* sweep = app.add_subcommand("sweep", "run the sweep.* cross product and write CSV rows");
    add_common(sweep, true);
    auto* theory = app.add_subcommand("theory", "write theory constants and bounds as CSV");
    add_common(theory, true);

    auto* gendata = app.add_subcommand("gendata", "generate a synthetic regression dataset");
    add_common(gendata, false);
    std::size_t gm = 1000, gdim = 100;
    double gsigma = 0.0;
    gendata->add_option("--m", gm, "data points");
    gendata->add_option("--dim", gdim, "dimension");
    gendata->add_option("--sigma-h", gsigma, "heterogeneity shift standard deviation");

    auto* plot = app.add_subcommand("plot", "render a results CSV as an SVG loss chart");
    std::string plot_csv, plot_figure = "training loss", plot_out;
    plot->add_option("csv", plot_csv, "results CSV")->required()->check(CLI::ExistingFile);
    plot->add_option("--figure", plot_figure, "figure title");
    plot->add_option("--out", plot_out, "SVG path (stdout when omitted)");

    auto* verify = app.add_subcommand("verify", "run the acceptance suite");
    std::uint64_t vseed = cradl::AcceptanceOptions{}.seed;
    std::size_t vseeds = 5, viters = 500;
    std::vector<int> vonly;
    verify->add_option("--seed", vseed, "base seed");
    verify->add_option("--seeds", vseeds, "seeds per figure reproduction");
    verify->add_option("--iterations", viters, "iterations per figure reproduction");
    verify->add_option("--only", vonly, "criterion numbers to run")->check(CLI::Range(1, 11));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*run) return cmd_run(common, false);
        if (*sweep) return cmd_run(common, true);
        if (*theory) return cmd_theory(common);
        if (*gendata) return cmd_gendata(common, gm, gdim, gsigma);
        if (*plot) return cmd_plot(plot_csv, plot_figure, plot_out);
        if (*verify) return cmd_verify(vseed, vseeds, viters, vonly);
    } catch (const cradl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return kConfigError;
}
