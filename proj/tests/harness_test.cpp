#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "cradl/experiment.hpp"
#include "cradl/plot.hpp"
#include "cradl/report.hpp"
#include "cradl/results.hpp"
#include "cradl/sweep.hpp"

using namespace cradl;

namespace {

Experiment parse(const std::string& text) {
    std::istringstream in(text);
    return parse_experiment(in, "test.cfg");
}

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

const char* kToy =
    "# small experiment\n"
    "method = CRA-DL\n"
    "devices = 10\n"
    "r = 0.4M\n"
    "rule = median\n"
    "attack = signflip:-2\n"
    "alpha = 0.2\n"
    "lr = 0.0002\n"
    "iterations = 25\n"
    "seeds = 3..4\n"
    "data.m = 20\n"
    "data.dim = 4\n"
    "data.sigma_h = 0.5\n";

std::string csv_of(const SweepOutcome& o) {
    std::ostringstream os;
    write_results(os, o.rows);
    return os.str();
}

}  // namespace

TEST_CASE("experiment files parse into run configurations") {
    const Experiment e = parse(kToy);
    CHECK(e.run.method == Method::CraDl);
    CHECK(e.run.devices == 10);
    CHECK(e.r.resolve(20) == 8);
    CHECK(e.run.rule.kind == RuleKind::CoordMedian);
    CHECK(e.run.alpha == 0.2);
    CHECK(std::get<FixedRate>(e.run.schedule).gamma == 0.0002);
    CHECK(e.run.iterations == 25);
    CHECK(e.seeds == std::vector<std::uint64_t>{3, 4});
    CHECK(e.data.m == 20);
    CHECK(e.data.sigma_h == 0.5);
}

TEST_CASE("learning-rate keys") {
    const Experiment l = parse("lambda = 2\niterations = 3\n");
    CHECK(std::get<FixedRate>(l.run.schedule).gamma == 1.0);
    const Experiment d = parse("schedule = decaying\ngamma0 = 0.25\nrho1 = 1\nrho2 = 1\n");
    CHECK(std::get<DecayingRate>(d.run.schedule).gamma0 == 0.25);
    CHECK(error_of("schedule = decaying\ngamma0 = 0.6\nrho1 = 1\nrho2 = 1\n").find("gamma0") != std::string::npos);
    CHECK(!error_of("lr = 0.1\nlambda = 1\n").empty());
    CHECK(!error_of("schedule = decaying\n").empty());
}

TEST_CASE("malformed files report the offending line") {
    CHECK(error_of("devices = 10\ncolour = red\n").rfind("test.cfg:2:", 0) == 0);
    CHECK(error_of("devices = 10\ncolour = red\n").find("unknown key 'colour'") != std::string::npos);
    CHECK(error_of("\n\nalpha\n").rfind("test.cfg:3:", 0) == 0);
    CHECK(error_of("devices = ten\n").rfind("test.cfg:1:", 0) == 0);
    CHECK(error_of("rule = average\n").rfind("test.cfg:1:", 0) == 0);
    CHECK(error_of("seed = 1\nseed = 2\n").find("duplicate key") != std::string::npos);
    CHECK(error_of("sweep.colour = 1, 2\n").find("unknown sweep axis") != std::string::npos);
    CHECK(error_of("sweep.alpha = 0.1, , 0.2\n").rfind("test.cfg:1:", 0) == 0);
    CHECK(error_of("alpha = 0.5\n").find("alpha") != std::string::npos);
    CHECK(error_of("r = 0\n").rfind("test.cfg:1:", 0) == 0);
    CHECK(error_of("r = 1.5M\n").rfind("test.cfg:1:", 0) == 0);
    CHECK(error_of("attack = signflip:3\n").rfind("test.cfg:1:", 0) == 0);
}

TEST_CASE("per-device counts") {
    CHECK(parse_per_device("40").resolve(1000) == 40);
    CHECK(parse_per_device("0.1M").resolve(1000) == 100);
    CHECK(parse_per_device("M").resolve(1000) == 1000);
    CHECK(parse_per_device("0.4M").text() == "0.4M");
}

TEST_CASE("CSV output round-trips the trajectory exactly") {
    const Experiment e = parse(kToy);
    const SweepOutcome out = run_experiment(e);
    REQUIRE(out.completed == 2);
    REQUIRE(out.rows.size() == 52);
    std::istringstream in(csv_of(out));
    CHECK(read_results(in) == out.rows);

    RunConfig c = with_method_defaults(e.run);
    c.seed = 3;
    c.per_device = 8;
    const Trajectory traj = run(c, materialize(e.data, 3));
    for (std::size_t t = 0; t < traj.records.size(); ++t) {
        CHECK(out.rows[t].loss == traj.records[t].loss);
        CHECK(out.rows[t].grad_norm == traj.records[t].grad_norm);
        CHECK(out.rows[t].agg_error == traj.records[t].agg_error);
        CHECK(out.rows[t].iteration == t);
    }
    CHECK(out.rows[0].method == "CRA-DL");
    CHECK(out.rows[0].rule == "median");
    CHECK(out.rows[0].attack == "signflip:-2");
    CHECK(out.rows[0].r == 8);
    CHECK(out.rows[0].sigma_h == 0.5);
    CHECK(out.rows[0].seed == 3);
}

TEST_CASE("CSV header and reader errors") {
    std::ostringstream os;
    write_results(os, std::vector<ResultRow>{});
    CHECK(os.str() == std::string(kResultHeader) + "\n");
    std::istringstream bad_header("a,b\n");
    CHECK_THROWS(read_results(bad_header));
    std::istringstream bad_row(std::string(kResultHeader) + "\n1,CRA-DL,median\n");
    CHECK_THROWS(read_results(bad_row));
    CHECK(format_real(0.1) == "0.10000000000000001");
}

TEST_CASE("identical experiments give byte-identical CSV") {
    const std::string text = std::string(kToy) + "sweep.attack = gaussian, duplicate\nsweep.rule = krum, geomedian\n";
    CHECK(csv_of(run_experiment(parse(text))) == csv_of(run_experiment(parse(text))));
}

TEST_CASE("sweeps expand, deduplicate and skip") {
    const std::string text = std::string(kToy) +
                             "sweep.method = CRA-DL, MA, Clairvoyant\n"
                             "sweep.rule = median, faba\n"
                             "sweep.alpha = 0.2, 0.4\n";
    const SweepPlan plan = plan_sweep(parse(text));
    // CRA-DL: 2 rules x 2 alphas x 2 seeds; MA and Clairvoyant ignore the rule
    std::size_t cra = 0, ma = 0, clair = 0;
    for (const auto& p : plan.runs) {
        cra += p.config.method == Method::CraDl;
        ma += p.config.method == Method::Ma;
        clair += p.config.method == Method::Clairvoyant;
    }
    CHECK(ma == 4);
    CHECK(clair == 4);
    CHECK(cra == 6);  // faba at alpha 0.4 is skipped
    REQUIRE(plan.skipped.size() == 2);
    CHECK(plan.skipped[0].rule == "faba");
    CHECK(plan.skipped[0].alpha == 0.4);
    CHECK(plan.skipped[0].reason.find("FABA") != std::string::npos);
    std::set<std::size_t> ids;
    for (const auto& p : plan.runs) ids.insert(p.run_id);
    for (const auto& s : plan.skipped) ids.insert(s.run_id);
    CHECK(ids.size() == plan.runs.size() + plan.skipped.size());

    const SweepOutcome out = execute(plan);
    for (std::size_t i = 1; i < out.rows.size(); ++i) {
        const auto& a = out.rows[i - 1];
        const auto& b = out.rows[i];
        CHECK((a.run_id < b.run_id || (a.run_id == b.run_id && a.iteration < b.iteration)));
    }
    std::ostringstream sk;
    write_skipped(sk, out.skipped);
    CHECK(sk.str().rfind(kSkippedHeader, 0) == 0);
}

TEST_CASE("redundancy and heterogeneity axes") {
    const std::string text = std::string(kToy) + "sweep.r = 0.1M, 0.5M, M\nsweep.sigma_h = 0, 1\n";
    const SweepPlan plan = plan_sweep(parse(text));
    CHECK(plan.runs.size() == 12);
    std::set<std::size_t> rs;
    std::set<double> sh;
    for (const auto& p : plan.runs) {
        rs.insert(p.config.per_device);
        sh.insert(p.data.sigma_h);
    }
    CHECK(rs == std::set<std::size_t>{2, 10, 20});
    CHECK(sh == std::set<double>{0.0, 1.0});
}

TEST_CASE("divergent runs are reported") {
    const SweepOutcome ok = run_experiment(parse(kToy));
    CHECK(ok.diverged.empty());
    const SweepOutcome bad =
        run_experiment(parse("method = MA\ndevices = 10\nlr = 10\niterations = 30\ndata.m = 20\ndata.dim = 4\n"));
    REQUIRE(bad.diverged.size() == 1);
    CHECK(bad.completed == 1);
    CHECK(!bad.rows.empty());
    CHECK(bad.rows.size() <= 31);
}

TEST_CASE("loss chart") {
    const std::string text = std::string(kToy) + "sweep.method = CRA-DL, RBA-DL\n";
    const SweepOutcome out = run_experiment(parse(text));
    const std::string svg = render_loss_svg(out.rows, "toy <chart>");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("toy &lt;chart&gt;") != std::string::npos);
    std::size_t lines = 0;
    for (std::size_t p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++lines;
    CHECK(lines == 2);
    CHECK(svg.find(">CRA-DL r=8<") != std::string::npos);
}

TEST_CASE("theory table") {
    const std::string text = "devices = 10\nr = 18\nalpha = 0.2\nrule = median\niterations = 20\n"
                             "data.m = 20\ndata.dim = 5\nlambda = 0.01\n";
    const auto rows = theory_report(parse(text));
    std::set<std::string> names;
    for (const auto& r : rows) names.insert(r.name);
    for (const char* n : {"L", "beta", "F0", "F_star", "C_alpha_sq", "phi1", "phi2", "rho1", "rho2", "rho3", "rho4",
                          "eta", "condition_lhs", "condition_rhs", "condition_holds", "theorem1_bound",
                          "asymptotic_fixed"}) {
        CHECK(names.count(n) == 1);
    }
    std::ostringstream os;
    write_theory(os, rows);
    CHECK(os.str().rfind("name,value,note\n", 0) == 0);
}
