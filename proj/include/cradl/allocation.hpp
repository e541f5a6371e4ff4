#pragma once

// Device-to-subset allocation matrices S (N devices x M subsets). Each device
// holds exactly r subsets; d_k counts the devices holding subset k.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace cradl {

class AllocationMatrix {
public:
    /// Validates: every row has r distinct in-range subsets, every subset is
    /// held by at least one device.
    static AllocationMatrix from_rows(std::size_t subsets, std::vector<std::vector<std::size_t>> rows,
                                      std::uint64_t seed = 0);

    std::size_t devices() const { return rows_.size(); }
    std::size_t subsets() const { return replication_.size(); }
    std::size_t per_device() const { return per_device_; }
    std::uint64_t seed() const { return seed_; }

    /// Sorted subset indices held by device i.
    std::span<const std::size_t> row(std::size_t i) const { return rows_.at(i); }
    bool holds(std::size_t i, std::size_t k) const { return dense_.at(i * subsets() + k) != 0; }

    std::span<const std::size_t> replication() const { return replication_; }
    std::size_t min_replication() const { return min_replication_; }

    friend bool operator==(const AllocationMatrix& a, const AllocationMatrix& b) {
        return a.rows_ == b.rows_ && a.replication_ == b.replication_;
    }

private:
    AllocationMatrix() = default;

    std::vector<std::vector<std::size_t>> rows_;
    std::vector<unsigned char> dense_;
    std::vector<std::size_t> replication_;
    std::size_t per_device_ = 0;
    std::size_t min_replication_ = 0;
    std::uint64_t seed_ = 0;
};

/// Identity assignment, M = N.
AllocationMatrix allocate_non_redundant(std::size_t devices);

/// Disjoint contiguous blocks of M/N subsets per device; requires N | M.
/// Equal to allocate_non_redundant when M = N.
AllocationMatrix allocate_partition(std::size_t devices, std::size_t subsets);

/// Independent uniform r-subset per device. Matrices leaving a subset
/// uncovered are redrawn (seed, attempt) up to `max_attempts` times; if the
/// budget runs out the last draw is repaired by moving assignments from the
/// most-replicated subsets onto uncovered ones, which keeps every row sum at r.
/// Throws when N * r < M (coverage impossible).
AllocationMatrix allocate_uniform_random(std::size_t devices, std::size_t subsets,
                                         std::size_t per_device, std::uint64_t seed,
                                         std::size_t max_attempts = 64);

AllocationMatrix allocate_full_replication(std::size_t devices, std::size_t subsets);

std::size_t pairwise_overlap(const AllocationMatrix& s, std::size_t i, std::size_t j);

struct BalanceReport {
    double min_overlap = 0.0;
    double mean_overlap = 0.0;
    double max_overlap = 0.0;
    double ideal_overlap = 0.0;   // r^2 / M
    double max_deviation = 0.0;   // max_{i != j} |overlap(i, j) - r^2/M|
    bool exactly_balanced = false;
    /// one_sided[i * N + j] = |row_i \ row_j|
    std::vector<std::size_t> one_sided;
    std::size_t max_one_sided = 0;

    std::size_t sym_diff(std::size_t i, std::size_t j, std::size_t n) const {
        return one_sided[i * n + j];
    }
};

/// With a single device there are no pairs; overlap stats then describe the
/// device with itself.
BalanceReport balance_diagnostics(const AllocationMatrix& s);

// Text format: header "N M r seed", then one line per device with its sorted
// subset indices, one-based.
void write_allocation(std::ostream& os, const AllocationMatrix& s);
AllocationMatrix read_allocation(std::istream& is);

}  // namespace cradl
