#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "cradl/adversary.hpp"
#include "helpers.hpp"

using namespace cradl;

TEST_CASE("identity sample sizes") {
    const auto s = sample_identities(100, 0.2, 0, 1);
    CHECK(s.byzantine.size() == 20);
    CHECK(s.honest.size() == 80);
    CHECK(std::is_sorted(s.byzantine.begin(), s.byzantine.end()));
    std::vector<std::size_t> all = s.honest;
    all.insert(all.end(), s.byzantine.begin(), s.byzantine.end());
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < 100; ++i) CHECK(all[i] == i);
    const auto none = sample_identities(10, 0.0, 3, 1);
    CHECK(none.byzantine.empty());
    CHECK(none.honest.size() == 10);
    CHECK_THROWS_AS(sample_identities(10, 0.5, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_identities(10, -0.1, 0, 1), std::invalid_argument);
}

TEST_CASE("every device is Byzantine with probability alpha") {
    std::vector<double> freq(10, 0.0);
    const std::size_t draws = 100000;
    for (std::size_t t = 0; t < draws; ++t)
        for (std::size_t b : sample_identities(10, 0.3, t, 5).byzantine) freq[b] += 1.0;
    for (double f : freq) CHECK(std::abs(f / draws - 0.3) <= 0.01);
}

TEST_CASE("identities are reproducible and serially uncorrelated") {
    CHECK(sample_identities(50, 0.2, 17, 3).byzantine == sample_identities(50, 0.2, 17, 3).byzantine);
    const std::size_t draws = 100000;
    std::vector<double> h(draws);
    for (std::size_t t = 0; t < draws; ++t) {
        const auto b = sample_identities(10, 0.3, t, 8).byzantine;
        h[t] = std::binary_search(b.begin(), b.end(), std::size_t{0}) ? 1.0 : 0.0;
    }
    double mean = 0.0;
    for (double v : h) mean += v;
    mean /= draws;
    double cov = 0.0, var = 0.0;
    for (std::size_t t = 0; t < draws; ++t) {
        var += (h[t] - mean) * (h[t] - mean);
        if (t + 1 < draws) cov += (h[t] - mean) * (h[t + 1] - mean);
    }
    CHECK(std::abs(cov / var) < 0.01);
}

TEST_CASE("sign flipping") {
    CHECK(attack_sign_flip(Vector{1.0, -2.0}) == Vector{-2.0, 4.0});
    CHECK(attack_sign_flip(Vector{0.0, 0.0}) == Vector{0.0, 0.0});
    const Vector in = {3.0, 4.0};
    CHECK(norm(attack_sign_flip(in)) == doctest::Approx(2.0 * norm(in)));
    CHECK(attack_sign_flip(in, -0.5) == Vector{-1.5, -2.0});
}

TEST_CASE("gaussian attack moments") {
    Rng rng(42);
    const Vector v = attack_gaussian(1000000, 10000.0, rng);
    CHECK(v.size() == 1000000);
    double s = 0, s2 = 0;
    for (double x : v) {
        s += x;
        s2 += x * x;
    }
    const double mean = s / v.size();
    const double var = s2 / v.size() - mean * mean;
    CHECK(var >= 9800.0);
    CHECK(var <= 10200.0);
    CHECK(std::abs(mean) <= 3.0 * 100.0 / 1000.0);
    CHECK(attack_gaussian(7, 1.0, rng).size() == 7);
}

TEST_CASE("sample duplication copies an honest message") {
    Rng rng(7);
    const std::vector<Vector> one = {{1.25, -3.5}};
    CHECK(attack_sample_duplicate(one, rng) == one[0]);
    std::vector<Vector> honest;
    std::mt19937_64 g(3);
    for (int i = 0; i < 8; ++i) honest.push_back(testing::normal_vector(g, 3));
    for (int t = 0; t < 10000; ++t) {
        const Vector out = attack_sample_duplicate(honest, rng);
        CHECK(std::find(honest.begin(), honest.end(), out) != honest.end());
    }
    std::vector<double> freq(8, 0.0);
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
        const Vector out = attack_sample_duplicate(honest, rng);
        freq[std::find(honest.begin(), honest.end(), out) - honest.begin()] += 1.0;
    }
    for (double f : freq) CHECK(std::abs(f / trials - 1.0 / 8.0) <= 0.01);
    CHECK_THROWS_AS(attack_sample_duplicate(std::vector<Vector>{}, rng), std::invalid_argument);
}

TEST_CASE("attack grammar") {
    CHECK(parse_attack("signflip").coefficient == -2.0);
    CHECK(parse_attack("signflip:-3").coefficient == -3.0);
    CHECK(parse_attack("gaussian").variance == 10000.0);
    CHECK(parse_attack("gaussian:25").variance == 25.0);
    CHECK(parse_attack("duplicate").kind == AttackKind::SampleDuplicate);
    CHECK(to_string(parse_attack("signflip:-2")) == "signflip:-2");
    CHECK_THROWS_AS(parse_attack("noise"), std::invalid_argument);
    CHECK_THROWS_AS(validate(parse_attack("signflip:2")), std::invalid_argument);
    CHECK_THROWS_AS(validate(parse_attack("gaussian:0")), std::invalid_argument);
}

TEST_CASE("byzantine message dispatch") {
    Rng rng(1);
    const Vector truth = {1.0, 2.0};
    const std::vector<Vector> honest = {{5.0, 5.0}};
    CHECK(byzantine_message(parse_attack("signflip"), truth, honest, rng) == Vector{-2.0, -4.0});
    CHECK(byzantine_message(parse_attack("duplicate"), truth, honest, rng) == honest[0]);
    CHECK(byzantine_message(parse_attack("gaussian"), truth, honest, rng).size() == 2);
}
