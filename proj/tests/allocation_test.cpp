#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "cradl/allocation.hpp"

using namespace cradl;

namespace {

void check_structure(const AllocationMatrix& s) {
    std::vector<std::size_t> d(s.subsets(), 0);
    for (std::size_t i = 0; i < s.devices(); ++i) {
        const auto row = s.row(i);
        CHECK(row.size() == s.per_device());
        CHECK(std::set<std::size_t>(row.begin(), row.end()).size() == row.size());
        std::size_t dense = 0;
        for (std::size_t k = 0; k < s.subsets(); ++k) dense += s.holds(i, k) ? 1 : 0;
        CHECK(dense == s.per_device());
        for (std::size_t k : row) ++d[k];
    }
    std::size_t dmin = d.empty() ? 0 : d[0];
    for (std::size_t k = 0; k < d.size(); ++k) {
        CHECK(d[k] == s.replication()[k]);
        dmin = std::min(dmin, d[k]);
    }
    CHECK(dmin >= 1);
    CHECK(dmin == s.min_replication());
}

}  // namespace

TEST_CASE("non-redundant allocation is the identity") {
    const auto s = allocate_non_redundant(3);
    check_structure(s);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < 3; ++k) CHECK(s.holds(i, k) == (i == k));
    CHECK(s.min_replication() == 1);
    CHECK(pairwise_overlap(s, 0, 1) == 0);
    CHECK(pairwise_overlap(s, 1, 2) == 0);
}

TEST_CASE("partition allocation") {
    const auto s = allocate_partition(4, 12);
    check_structure(s);
    CHECK(s.per_device() == 3);
    CHECK(s.row(2)[0] == 6);
    CHECK(allocate_partition(5, 5) == allocate_non_redundant(5));
    CHECK_THROWS_AS(allocate_partition(4, 10), std::invalid_argument);
}

TEST_CASE("uniform random allocation at the published scale") {
    const auto s = allocate_uniform_random(100, 1000, 40, 1);
    check_structure(s);
    CHECK(s.per_device() == 40);
    CHECK(s == allocate_uniform_random(100, 1000, 40, 1));
    CHECK_FALSE(s == allocate_uniform_random(100, 1000, 40, 2));
}

TEST_CASE("mean pairwise overlap is close to r^2/M") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto rep = balance_diagnostics(allocate_uniform_random(100, 1000, 40, seed));
        CHECK(rep.ideal_overlap == doctest::Approx(1.6));
        CHECK(std::abs(rep.mean_overlap - 1.6) <= 0.2 * 1.6);
    }
}

TEST_CASE("r = M gives full replication") {
    CHECK(allocate_uniform_random(5, 7, 7, 3) == allocate_full_replication(5, 7));
}

TEST_CASE("coverage repair keeps rows intact") {
    // one attempt almost surely leaves a subset uncovered at this size
    const auto s = allocate_uniform_random(100, 1000, 40, 9, 1);
    check_structure(s);
    const auto t = allocate_uniform_random(30, 60, 2, 4, 1);
    check_structure(t);
    CHECK(t == allocate_uniform_random(30, 60, 2, 4, 1));
}

TEST_CASE("impossible random allocations are rejected") {
    CHECK_THROWS_AS(allocate_uniform_random(3, 10, 3, 1), std::invalid_argument);
    CHECK_THROWS_AS(allocate_uniform_random(3, 10, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(allocate_uniform_random(3, 10, 11, 1), std::invalid_argument);
    CHECK_NOTHROW(allocate_uniform_random(2, 10, 5, 1));
}

TEST_CASE("full replication") {
    const auto s = allocate_full_replication(4, 6);
    check_structure(s);
    std::size_t ones = 0;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t k = 0; k < 6; ++k) ones += s.holds(i, k);
    CHECK(ones == 24);
    for (std::size_t k = 0; k < 6; ++k) CHECK(s.replication()[k] == 4);
    CHECK(pairwise_overlap(s, 0, 3) == 6);
    const auto rep = balance_diagnostics(s);
    CHECK(rep.max_deviation == 0.0);
    CHECK(rep.exactly_balanced);
    CHECK(rep.max_one_sided == 0);
}

TEST_CASE("balance diagnostics by enumeration") {
    const auto nr = balance_diagnostics(allocate_non_redundant(3));
    CHECK(nr.max_overlap == 0.0);
    CHECK(nr.max_deviation == doctest::Approx(1.0 / 3.0));
    CHECK_FALSE(nr.exactly_balanced);
    CHECK(nr.max_one_sided == 1);

    const auto s = AllocationMatrix::from_rows(3, {{0, 1}, {1, 2}, {0, 2}});
    const auto rep = balance_diagnostics(s);
    CHECK(rep.min_overlap == 1.0);
    CHECK(rep.max_overlap == 1.0);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            if (i != j) CHECK(rep.sym_diff(i, j, 3) == 1);
}

TEST_CASE("from_rows validation") {
    CHECK_THROWS_AS(AllocationMatrix::from_rows(3, {{0, 1}, {2}}), std::invalid_argument);
    CHECK_THROWS_AS(AllocationMatrix::from_rows(3, {{0, 0}, {1, 2}}), std::invalid_argument);
    CHECK_THROWS_AS(AllocationMatrix::from_rows(3, {{0, 3}, {1, 2}}), std::invalid_argument);
    CHECK_THROWS_AS(AllocationMatrix::from_rows(4, {{0, 1}, {1, 2}}), std::invalid_argument);
    const auto s = AllocationMatrix::from_rows(3, {{2, 0}, {1, 2}});
    CHECK(s.row(0)[0] == 0);
    CHECK(s.replication()[2] == 2);
}

TEST_CASE("allocation files round-trip") {
    const auto s = allocate_uniform_random(12, 30, 7, 5);
    std::stringstream ss;
    write_allocation(ss, s);
    const auto back = read_allocation(ss);
    CHECK(back == s);
    CHECK(back.seed() == s.seed());
}
