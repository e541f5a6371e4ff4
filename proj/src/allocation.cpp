#include "cradl/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "cradl/rng.hpp"

namespace cradl {

AllocationMatrix AllocationMatrix::from_rows(std::size_t subsets,
                                             std::vector<std::vector<std::size_t>> rows,
                                             std::uint64_t seed) {
    if (rows.empty() || subsets == 0) throw std::invalid_argument("allocation: empty matrix");
    AllocationMatrix s;
    s.seed_ = seed;
    s.per_device_ = rows.front().size();
    s.replication_.assign(subsets, 0);
    s.dense_.assign(rows.size() * subsets, 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto& row = rows[i];
        std::sort(row.begin(), row.end());
        if (row.size() != s.per_device_) {
            throw std::invalid_argument("allocation: row " + std::to_string(i) + " holds " +
                                        std::to_string(row.size()) + " subsets, expected " +
                                        std::to_string(s.per_device_));
        }
        if (std::adjacent_find(row.begin(), row.end()) != row.end()) {
            throw std::invalid_argument("allocation: duplicate subset in row " + std::to_string(i));
        }
        for (std::size_t k : row) {
            if (k >= subsets) throw std::invalid_argument("allocation: subset index out of range");
            ++s.replication_[k];
            s.dense_[i * subsets + k] = 1;
        }
    }
    s.min_replication_ = *std::min_element(s.replication_.begin(), s.replication_.end());
    if (s.min_replication_ == 0) {
        const auto k = std::find(s.replication_.begin(), s.replication_.end(), 0u) -
                       s.replication_.begin();
        throw std::invalid_argument("allocation: subset " + std::to_string(k) +
                                    " is not held by any device");
    }
    s.rows_ = std::move(rows);
    return s;
}

AllocationMatrix allocate_non_redundant(std::size_t devices) {
    return allocate_partition(devices, devices);
}

AllocationMatrix allocate_partition(std::size_t devices, std::size_t subsets) {
    if (devices == 0 || subsets % devices != 0) {
        throw std::invalid_argument("non-redundant allocation needs N dividing M (N=" +
                                    std::to_string(devices) + ", M=" + std::to_string(subsets) +
                                    ")");
    }
    const std::size_t block = subsets / devices;
    std::vector<std::vector<std::size_t>> rows(devices);
    for (std::size_t i = 0; i < devices; ++i)
        for (std::size_t b = 0; b < block; ++b) rows[i].push_back(i * block + b);
    return AllocationMatrix::from_rows(subsets, std::move(rows));
}

namespace {

using Rows = std::vector<std::vector<std::size_t>>;

Rows draw_rows(std::size_t devices, std::size_t subsets, std::size_t r, Rng& rng) {
    Rows rows(devices);
    for (auto& row : rows) row = sample_subset(rng, subsets, r);
    return rows;
}

std::vector<std::size_t> column_counts(const Rows& rows, std::size_t subsets) {
    std::vector<std::size_t> d(subsets, 0);
    for (const auto& row : rows)
        for (std::size_t k : row) ++d[k];
    return d;
}

void repair_coverage(Rows& rows, std::size_t subsets, Rng& rng) {
    auto d = column_counts(rows, subsets);
    for (std::size_t k = 0; k < subsets; ++k) {
        if (d[k] != 0) continue;
        // donor: most replicated subset, lowest index on ties
        const std::size_t donor = static_cast<std::size_t>(
            std::max_element(d.begin(), d.end()) - d.begin());
        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (std::binary_search(rows[i].begin(), rows[i].end(), donor)) candidates.push_back(i);
        std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
        auto& row = rows[candidates[pick(rng)]];
        *std::find(row.begin(), row.end(), donor) = k;
        std::sort(row.begin(), row.end());
        --d[donor];
        ++d[k];
    }
}

}  // namespace

AllocationMatrix allocate_uniform_random(std::size_t devices, std::size_t subsets,
                                         std::size_t per_device, std::uint64_t seed,
                                         std::size_t max_attempts) {
    if (devices == 0 || subsets == 0) throw std::invalid_argument("allocation: empty matrix");
    if (per_device < 1 || per_device > subsets) {
        throw std::invalid_argument("allocation: r=" + std::to_string(per_device) +
                                    " outside [1, M=" + std::to_string(subsets) + "]");
    }
    if (devices * per_device < subsets) {
        throw std::invalid_argument("allocation: N*r=" + std::to_string(devices * per_device) +
                                    " < M=" + std::to_string(subsets) +
                                    ", some subset must stay uncovered");
    }
    Rows rows;
    for (std::size_t attempt = 0; attempt < std::max<std::size_t>(max_attempts, 1); ++attempt) {
        Rng rng = make_rng(seed, "allocation.uniform", {attempt});
        rows = draw_rows(devices, subsets, per_device, rng);
        const auto d = column_counts(rows, subsets);
        if (std::find(d.begin(), d.end(), 0u) == d.end())
            return AllocationMatrix::from_rows(subsets, std::move(rows), seed);
    }
    Rng repair_rng = make_rng(seed, "allocation.repair");
    repair_coverage(rows, subsets, repair_rng);
    return AllocationMatrix::from_rows(subsets, std::move(rows), seed);
}

AllocationMatrix allocate_full_replication(std::size_t devices, std::size_t subsets) {
    if (devices == 0 || subsets == 0) throw std::invalid_argument("allocation: empty matrix");
    std::vector<std::size_t> all(subsets);
    for (std::size_t k = 0; k < subsets; ++k) all[k] = k;
    return AllocationMatrix::from_rows(subsets, Rows(devices, all));
}

std::size_t pairwise_overlap(const AllocationMatrix& s, std::size_t i, std::size_t j) {
    if (i >= s.devices() || j >= s.devices()) throw std::out_of_range("pairwise_overlap: device");
    const auto a = s.row(i);
    const auto b = s.row(j);
    std::size_t count = 0;
    std::size_t p = 0, q = 0;
    while (p < a.size() && q < b.size()) {
        if (a[p] == b[q]) {
            ++count;
            ++p;
            ++q;
        } else if (a[p] < b[q]) {
            ++p;
        } else {
            ++q;
        }
    }
    return count;
}

BalanceReport balance_diagnostics(const AllocationMatrix& s) {
    const std::size_t n = s.devices();
    const double r = static_cast<double>(s.per_device());
    BalanceReport rep;
    rep.ideal_overlap = r * r / static_cast<double>(s.subsets());
    rep.one_sided.assign(n * n, 0);

    double sum = 0.0;
    std::size_t pairs = 0;
    rep.min_overlap = std::numeric_limits<double>::infinity();
    rep.max_overlap = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t ov = pairwise_overlap(s, i, j);
            rep.one_sided[i * n + j] = s.per_device() - ov;
            if (i == j && n > 1) continue;
            if (j < i) continue;
            const double o = static_cast<double>(ov);
            rep.min_overlap = std::min(rep.min_overlap, o);
            rep.max_overlap = std::max(rep.max_overlap, o);
            rep.max_deviation = std::max(rep.max_deviation, std::abs(o - rep.ideal_overlap));
            rep.max_one_sided = std::max(rep.max_one_sided, s.per_device() - ov);
            sum += o;
            ++pairs;
        }
    }
    rep.mean_overlap = sum / static_cast<double>(pairs);
    rep.exactly_balanced = rep.max_deviation == 0.0;
    return rep;
}

void write_allocation(std::ostream& os, const AllocationMatrix& s) {
    os << s.devices() << ' ' << s.subsets() << ' ' << s.per_device() << ' ' << s.seed() << '\n';
    for (std::size_t i = 0; i < s.devices(); ++i) {
        const auto row = s.row(i);
        for (std::size_t p = 0; p < row.size(); ++p) os << (p ? " " : "") << row[p] + 1;
        os << '\n';
    }
}

AllocationMatrix read_allocation(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("allocation: missing header");
    std::istringstream header(line);
    std::size_t n = 0, m = 0, r = 0;
    std::uint64_t seed = 0;
    if (!(header >> n >> m >> r >> seed) || n == 0 || m == 0) {
        throw std::runtime_error("allocation: malformed header '" + line + "'");
    }
    std::vector<std::vector<std::size_t>> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(is, line)) throw std::runtime_error("allocation: missing device rows");
        std::istringstream row(line);
        std::size_t k = 0;
        while (row >> k) {
            if (k == 0) throw std::runtime_error("allocation: subset indices are one-based");
            rows[i].push_back(k - 1);
        }
        if (rows[i].size() != r) {
            throw std::runtime_error("allocation: device " + std::to_string(i + 1) + " lists " +
                                     std::to_string(rows[i].size()) + " subsets, header says " +
                                     std::to_string(r));
        }
    }
    return AllocationMatrix::from_rows(m, std::move(rows), seed);
}

}  // namespace cradl
