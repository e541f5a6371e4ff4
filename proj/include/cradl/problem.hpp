#pragma once

// Synthetic linear-regression benchmark: one data point per subset, loss
// f_k(x) = 0.5 * (<x, z_k> - y_k)^2, overall loss F = sum_k f_k.
//
// Subset indices are zero-based in the C++ API.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "cradl/linalg.hpp"

namespace cradl {

struct DataPoint {
    Vector features;
    double target = 0.0;
};

struct Dataset {
    std::vector<DataPoint> points;
    std::size_t dimension = 0;
    Vector ground_truth;  // empty when loaded from a file
    double sigma_h = 0.0;
    std::uint64_t seed = 0;

    std::size_t size() const { return points.size(); }
};

/// Features ~ N(0, 100), ground truth ~ N(0, 1), per-point shift ~ N(0, sigma_h^2),
/// target ~ N(<z_k, truth + shift_k>, 1). Each quantity draws from its own
/// labelled stream, so sigma_h never perturbs the features or the noise.
Dataset generate_dataset(std::size_t m, std::size_t dimension, double sigma_h,
                         std::uint64_t seed);

double subset_loss(std::span<const double> x, const Dataset& data, std::size_t k);
Vector subset_grad(std::span<const double> x, const Dataset& data, std::size_t k);
void subset_grad_into(std::span<const double> x, const Dataset& data, std::size_t k,
                      std::span<double> out);

double total_loss(std::span<const double> x, const Dataset& data);
/// Sum of subset gradients accumulated in ascending k.
Vector total_grad(std::span<const double> x, const Dataset& data);

/// Loss/gradient callables over M subsets; the trainer only sees this.
struct Objective {
    std::size_t dimension = 0;
    std::size_t subsets = 0;
    std::function<double(std::span<const double>, std::size_t)> loss;
    std::function<void(std::span<const double>, std::size_t, std::span<double>)> grad;

    double total_loss(std::span<const double> x) const;
    Vector total_grad(std::span<const double> x) const;
};

/// The returned objective refers to `data`, which must outlive it.
Objective linear_regression(const Dataset& data);

// Text format: header "m D sigma_h seed", then one line per point holding the
// D features followed by the target, all with 17 significant digits.
void write_dataset(std::ostream& os, const Dataset& data);
Dataset read_dataset(std::istream& is);

}  // namespace cradl
