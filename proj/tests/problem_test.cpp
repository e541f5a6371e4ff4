#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "cradl/problem.hpp"
#include "helpers.hpp"

using namespace cradl;

TEST_CASE("feature entries have variance 100") {
    const Dataset d = generate_dataset(1000, 100, 0.0, 11);
    double s = 0, s2 = 0, n = 0;
    for (const auto& p : d.points)
        for (double v : p.features) {
            s += v;
            s2 += v * v;
            n += 1;
        }
    const double var = s2 / n - (s / n) * (s / n);
    CHECK(var >= 90.0);
    CHECK(var <= 110.0);
    CHECK(d.ground_truth.size() == 100);
}

TEST_CASE("single point dataset") {
    const Dataset d = generate_dataset(1, 1, 0.0, 3);
    REQUIRE(d.size() == 1);
    CHECK(d.points[0].features.size() == 1);
    CHECK(d.dimension == 1);
}

TEST_CASE("target noise has unit variance") {
    const Dataset d = generate_dataset(500, 10, 0.0, 5);
    double s = 0, s2 = 0;
    for (const auto& p : d.points) {
        const double r = p.target - dot(p.features, d.ground_truth);
        s += r;
        s2 += r * r;
    }
    const double var = s2 / 500.0 - (s / 500.0) * (s / 500.0);
    CHECK(var >= 0.8);
    CHECK(var <= 1.2);
}

TEST_CASE("hand-computed losses and gradients") {
    const Dataset a = testing::make_data({{{1.0}, 2.0}});
    CHECK(subset_loss(Vector{0.0}, a, 0) == 2.0);
    CHECK(subset_grad(Vector{0.0}, a, 0) == Vector{-2.0});
    const Dataset b = testing::make_data({{{3.0, 4.0}, 5.0}});
    CHECK(subset_loss(Vector{1.0, 1.0}, b, 0) == 2.0);
    CHECK(subset_grad(Vector{1.0, 1.0}, b, 0) == Vector{6.0, 8.0});
    const Dataset both = testing::make_data({{{3.0, 4.0}, 5.0}, {{1.0, 0.0}, 2.0}});
    CHECK(total_loss(Vector{1.0, 1.0}, both) == doctest::Approx(2.0 + 0.5));
}

TEST_CASE("loss vanishes at the truth without noise") {
    std::mt19937_64 rng(9);
    const Vector truth = testing::normal_vector(rng, 4);
    std::vector<std::pair<Vector, double>> pts;
    for (int k = 0; k < 12; ++k) {
        Vector z = testing::normal_vector(rng, 4, 10.0);
        const double y = dot(z, truth);
        pts.push_back({z, y});
    }
    const Dataset d = testing::make_data(pts);
    for (std::size_t k = 0; k < d.size(); ++k) CHECK(subset_loss(truth, d, k) < 1e-20);
}

TEST_CASE("gradients match central finite differences") {
    for (int trial = 0; trial < 100; ++trial) {
        std::mt19937_64 rng(1000 + trial);
        const Dataset d = generate_dataset(50, 6, 0.7, trial);
        const Vector x = testing::normal_vector(rng, 6);
        const std::size_t k = rng() % 50;
        const Vector g = subset_grad(x, d, k);
        const Vector gt = total_grad(x, d);
        for (std::size_t j = 0; j < 6; ++j) {
            const double h = 1e-4;
            Vector xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            const double fd = (subset_loss(xp, d, k) - subset_loss(xm, d, k)) / (2 * h);
            const double fdt = (total_loss(xp, d) - total_loss(xm, d)) / (2 * h);
            CHECK(std::abs(fd - g[j]) <= 1e-5 * std::max(1.0, std::abs(g[j])));
            CHECK(std::abs(fdt - gt[j]) <= 1e-5 * std::max(1.0, std::abs(gt[j])));
        }
    }
}

TEST_CASE("total gradient equals the sum of subset gradients") {
    std::mt19937_64 rng(4);
    const Dataset d = generate_dataset(80, 7, 1.0, 8);
    const Vector x = testing::normal_vector(rng, 7);
    Vector sum(7, 0.0);
    for (std::size_t k = 0; k < d.size(); ++k) axpy(1.0, subset_grad(x, d, k), sum);
    CHECK(max_abs(subtract(total_grad(x, d), sum)) < 1e-12 * (1.0 + max_abs(sum)));
    CHECK(testing::rel_diff(total_grad(x, d), testing::reference_grad(d, x, testing::all_points(d))) < 1e-12);
}

TEST_CASE("loss is non-negative") {
    std::mt19937_64 rng(2);
    const Dataset d = generate_dataset(30, 3, 2.0, 1);
    for (int i = 0; i < 200; ++i) CHECK(total_loss(testing::normal_vector(rng, 3, 100.0), d) >= 0.0);
}

TEST_CASE("generation is reproducible and streams are separated") {
    const Dataset a = generate_dataset(40, 5, 0.0, 77);
    const Dataset b = generate_dataset(40, 5, 0.0, 77);
    const Dataset c = generate_dataset(40, 5, 1.5, 77);
    for (std::size_t k = 0; k < 40; ++k) {
        CHECK(a.points[k].features == b.points[k].features);
        CHECK(a.points[k].target == b.points[k].target);
        CHECK(a.points[k].features == c.points[k].features);
    }
    CHECK(a.ground_truth == c.ground_truth);
    const Dataset other = generate_dataset(40, 5, 0.0, 78);
    CHECK(other.points[0].features != a.points[0].features);
}

TEST_CASE("heterogeneity shift raises the residual spread") {
    const Dataset flat = generate_dataset(400, 10, 0.0, 3);
    const Dataset shifted = generate_dataset(400, 10, 1.0, 3);
    CHECK(total_loss(flat.ground_truth, flat) * 100 < total_loss(shifted.ground_truth, shifted));
}

TEST_CASE("invalid inputs are rejected") {
    CHECK_THROWS_AS(generate_dataset(0, 3, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_dataset(3, 0, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_dataset(3, 3, -1.0, 1), std::invalid_argument);
    const Dataset d = generate_dataset(3, 3, 0.0, 1);
    CHECK_THROWS_AS(subset_loss(Vector{1.0, 2.0}, d, 0), std::invalid_argument);
    CHECK_THROWS_AS(subset_grad(Vector{1.0, 2.0, 3.0}, d, 3), std::out_of_range);
}

TEST_CASE("dataset files round-trip exactly") {
    const Dataset d = generate_dataset(25, 4, 0.3, 12);
    std::stringstream ss;
    write_dataset(ss, d);
    const Dataset back = read_dataset(ss);
    REQUIRE(back.size() == d.size());
    CHECK(back.dimension == d.dimension);
    CHECK(back.sigma_h == d.sigma_h);
    CHECK(back.seed == d.seed);
    for (std::size_t k = 0; k < d.size(); ++k) {
        CHECK(back.points[k].features == d.points[k].features);
        CHECK(back.points[k].target == d.points[k].target);
    }
    std::istringstream bad("2 2 0 1\n1 2 3\n");
    CHECK_THROWS(read_dataset(bad));
}

TEST_CASE("objective wraps the dataset") {
    std::mt19937_64 rng(6);
    const Dataset d = generate_dataset(20, 3, 0.0, 2);
    const Objective f = linear_regression(d);
    const Vector x = testing::normal_vector(rng, 3);
    CHECK(f.dimension == 3);
    CHECK(f.subsets == 20);
    CHECK(f.total_loss(x) == total_loss(x, d));
    CHECK(f.total_grad(x) == total_grad(x, d));
    Vector g(3);
    f.grad(x, 4, g);
    CHECK(g == subset_grad(x, d, 4));
}
