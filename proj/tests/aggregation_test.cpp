#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "cradl/adversary.hpp"
#include "cradl/aggregation.hpp"
#include "helpers.hpp"

using namespace cradl;

namespace {

const RuleKind kRobust[] = {RuleKind::CoordMedian, RuleKind::TrimmedMean, RuleKind::GeometricMedian,
                            RuleKind::Krum,        RuleKind::Phocas,      RuleKind::Faba};

std::vector<Vector> scalars(std::initializer_list<double> v) {
    std::vector<Vector> out;
    for (double x : v) out.push_back({x});
    return out;
}

}  // namespace

TEST_CASE("coordinate median") {
    const std::vector<Vector> m = {{1, 2}, {3, 4}, {5, 6}};
    CHECK(coord_median(m) == Vector{3, 4});
    CHECK(coord_median(scalars({4, 1, 3, 2})) == Vector{2.5});
}

TEST_CASE("trimmed mean") {
    CHECK(trimmed_mean(scalars({0, 1, 2, 100}), 1) == Vector{1.5});
    CHECK_THROWS_AS(trimmed_mean(scalars({0, 1, 2, 100}), 2), std::invalid_argument);
}

TEST_CASE("krum scores and tie-breaking") {
    // each of the first three has one neighbour at squared distance 0.01
    const auto m = scalars({0, 0.1, 0.2, 10});
    CHECK(krum(m, 1) == Vector{0.0});
    const auto permuted = scalars({10, 0.2, 0.1, 0});
    CHECK(krum(permuted, 1) == Vector{0.0});
    CHECK_THROWS_AS(krum(scalars({0, 1, 2}), 1), std::invalid_argument);
}

TEST_CASE("geometric median") {
    const auto r = geometric_median(scalars({0, 0, 10}));
    CHECK(r.converged);
    CHECK(std::abs(r.point[0]) < 1e-9);
    const std::vector<Vector> tri = {{1, 0}, {-0.5, std::sqrt(3.0) / 2}, {-0.5, -std::sqrt(3.0) / 2}};
    const auto c = geometric_median(tri);
    CHECK(std::abs(c.point[0]) < 1e-9);
    CHECK(std::abs(c.point[1]) < 1e-9);
    // 1-D median oracle on an odd count
    const auto odd = geometric_median(scalars({-3, 7, 1, 2, 50}));
    CHECK(odd.point[0] == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("faba removes the outlier") {
    CHECK(faba(scalars({0, 1, 2, 100}), 1) == Vector{1.0});
}

TEST_CASE("phocas averages the values nearest the trimmed mean") {
    // trimmed mean (1 per side) = 1.5; three nearest of {0,1,2,100} are 0,1,2
    CHECK(phocas(scalars({0, 1, 2, 100}), 1) == Vector{1.0});
}

TEST_CASE("robustness constants") {
    CHECK(c_alpha_sq(RuleKind::TrimmedMean, 0.2, 10, 5) == doctest::Approx(0.8889).epsilon(1e-4));
    CHECK(c_alpha_sq(RuleKind::Krum, 0.0, 10, 5) == doctest::Approx(8.0));
    CHECK(c_alpha_sq(RuleKind::Faba, 0.0, 10, 5) == doctest::Approx(0.0));
    CHECK(c_alpha_sq(RuleKind::CoordMedian, 0.2, 100, 100) == doctest::Approx(78.125));
    CHECK(c_alpha_sq(RuleKind::GeometricMedian, 0.2, 10, 5) == doctest::Approx(std::pow(1.6 / 0.6, 2)));
    CHECK(c_alpha_sq(RuleKind::Phocas, 0.2, 10, 5) == doctest::Approx(4 + 12 * 0.16 / 0.36));
    CHECK(c_alpha_sq(RuleKind::Mean, 0.0, 10, 5) == 0.0);
    // 2 sqrt(N - alpha N) is the smaller branch when D is large
    CHECK(c_alpha_sq(RuleKind::CoordMedian, 0.2, 10, 1000) == doctest::Approx(32.0 / (2 * 0.64)));
    const double n = 10, na = 2;
    const double faba = 4 * (na / (n - na) + (n + 1 - na) / (n - na) * na / (n - 3 * na));
    CHECK(c_alpha_sq(RuleKind::Faba, 0.2, 10, 5) == doctest::Approx(faba));
}

TEST_CASE("robustness constants outside their range are rejected") {
    CHECK_THROWS_AS(c_alpha_sq(RuleKind::Mean, 0.1, 10, 5), std::invalid_argument);
    CHECK_THROWS_AS(c_alpha_sq(RuleKind::Faba, 0.35, 20, 5), std::invalid_argument);
    CHECK_THROWS_AS(c_alpha_sq(RuleKind::CoordMedian, 0.5, 10, 5), std::invalid_argument);
    CHECK_THROWS_AS(c_alpha_sq(RuleKind::Krum, -0.1, 10, 5), std::invalid_argument);
}

TEST_CASE("hand-checked bounded aggregation instance") {
    const std::vector<Vector> honest = {{0.0}, {2.0}};
    const std::vector<Vector> byz = {{100.0}};
    const auto rep = robust_bound_check(RbaRuleSpec::of(RuleKind::CoordMedian), honest, byz, 1.0 / 3.0);
    CHECK(rep.varsigma == doctest::Approx(1.0));
    CHECK(rep.lhs == doctest::Approx(1.0));
    CHECK(rep.c_alpha_sq == doctest::Approx(1.125));
    CHECK(rep.satisfied);
}

TEST_CASE("identical honest majority pins the median") {
    const std::vector<Vector> honest(7, Vector{1.5, -2.0, 3.0});
    const std::vector<Vector> byz = {{1e6, 1e6, -1e6}, {-1e6, 0, 1e6}, {5, 5, 5}};
    const auto rep = robust_bound_check(RbaRuleSpec::of(RuleKind::CoordMedian), honest, byz, 0.3);
    CHECK(rep.lhs == 0.0);
    CHECK(rep.varsigma == 0.0);
    CHECK(rep.satisfied);
}

TEST_CASE("every rule maps identical inputs to themselves") {
    const Vector v = {0.3, -7.25, 1e3};
    const std::vector<Vector> same(10, v);
    CHECK(aggregate(RbaRuleSpec::of(RuleKind::Mean), same, 0.0) == v);
    for (RuleKind k : kRobust) {
        const Vector out = aggregate(RbaRuleSpec::of(k), same, 0.2);
        CHECK(testing::rel_diff(out, v) < 1e-15);
    }
}

TEST_CASE("rules are permutation invariant") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Vector> m;
        for (int i = 0; i < 10; ++i) m.push_back(testing::normal_vector(rng, 4, 3.0));
        if (trial % 5 == 0) m[3] = m[7];  // exact duplicates exercise tie handling
        std::vector<Vector> p = m;
        std::shuffle(p.begin(), p.end(), rng);
        for (RuleKind k : kRobust) {
            const RbaRuleSpec rule = RbaRuleSpec::of(k);
            CHECK(testing::rel_diff(aggregate(rule, p, 0.2), aggregate(rule, m, 0.2)) < 1e-9);
        }
        CHECK(krum(p, 2) == krum(m, 2));
    }
}

TEST_CASE("rules are translation equivariant") {
    std::mt19937_64 rng(22);
    const RuleKind kinds[] = {RuleKind::Mean, RuleKind::CoordMedian, RuleKind::TrimmedMean,
                              RuleKind::GeometricMedian, RuleKind::Krum, RuleKind::Faba};
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Vector> m;
        for (int i = 0; i < 10; ++i) m.push_back(testing::normal_vector(rng, 3, 2.0));
        const Vector c = testing::normal_vector(rng, 3, 50.0);
        std::vector<Vector> shifted = m;
        for (auto& v : shifted) axpy(1.0, c, v);
        for (RuleKind k : kinds) {
            const double alpha = k == RuleKind::Mean ? 0.0 : 0.2;
            Vector expect = aggregate(RbaRuleSpec::of(k), m, alpha);
            axpy(1.0, c, expect);
            CHECK(testing::rel_diff(aggregate(RbaRuleSpec::of(k), shifted, alpha), expect) < 1e-9);
        }
    }
}

TEST_CASE("bounded aggregation holds at the simulated Byzantine fractions") {
    const std::size_t n = 100, dim = 10;
    for (double alpha : {0.03, 0.2, 0.4}) {
        for (RuleKind k : {RuleKind::CoordMedian, RuleKind::TrimmedMean, RuleKind::Phocas}) {
            const std::size_t byz = byzantine_count(n, alpha);
            for (int trial = 0; trial < 100; ++trial) {
                std::mt19937_64 rng(1000 * trial + byz);
                const Vector center = testing::normal_vector(rng, dim, 5.0);
                std::vector<Vector> honest, bad;
                for (std::size_t i = 0; i < n - byz; ++i) {
                    Vector h = testing::normal_vector(rng, dim, 0.5);
                    axpy(1.0, center, h);
                    honest.push_back(h);
                }
                const Vector hmean = mean_of(honest);
                for (std::size_t j = 0; j < byz; ++j) {
                    bad.push_back(trial % 2 ? attack_sign_flip(hmean) : testing::normal_vector(rng, dim, 100.0));
                }
                const auto rep = robust_bound_check(RbaRuleSpec::of(k), honest, bad, alpha, trial);
                CHECK(rep.satisfied);
            }
        }
    }
}

TEST_CASE("rule grammar") {
    CHECK(parse_rule("median").kind == RuleKind::CoordMedian);
    CHECK(parse_rule("geomedian").kind == RuleKind::GeometricMedian);
    const auto t = parse_rule("trimmed:0.25");
    CHECK(t.kind == RuleKind::TrimmedMean);
    CHECK(*t.trim_fraction == 0.25);
    CHECK(to_string(t) == "trimmed:0.25");
    for (const char* s : {"mean", "median", "trimmed", "geomedian", "krum", "phocas", "faba"}) {
        CHECK(to_string(parse_rule(s)) == s);
    }
    CHECK_THROWS_AS(parse_rule("average"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rule("trimmed:0.6"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rule("median:3"), std::invalid_argument);
}

TEST_CASE("rule parameters resolve from alpha") {
    CHECK(resolve_rule(RbaRuleSpec::of(RuleKind::TrimmedMean), 100, 0.2).count == 20);
    CHECK(resolve_rule(RbaRuleSpec::of(RuleKind::Krum), 100, 0.2).count == 20);
    CHECK(resolve_rule(RbaRuleSpec::of(RuleKind::Faba), 10, 0.2).count == 2);
    CHECK(resolve_rule(RbaRuleSpec::of(RuleKind::Phocas), 100, 0.03).count == 3);
    CHECK_THROWS_AS(resolve_rule(RbaRuleSpec::of(RuleKind::Faba), 100, 0.4), std::invalid_argument);
    CHECK_THROWS_AS(resolve_rule(RbaRuleSpec::of(RuleKind::Krum), 4, 0.45), std::invalid_argument);
    CHECK_THROWS_AS(resolve_rule(parse_rule("trimmed:0.5"), 10, 0.2), std::invalid_argument);
}
