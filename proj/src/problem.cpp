#include "cradl/problem.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "cradl/rng.hpp"

namespace cradl {

namespace {

void check_point(std::span<const double> x, const Dataset& data, std::size_t k) {
    if (x.size() != data.dimension) {
        throw std::invalid_argument("model dimension " + std::to_string(x.size()) +
                                    " does not match dataset dimension " +
                                    std::to_string(data.dimension));
    }
    if (k >= data.size()) {
        throw std::out_of_range("subset index " + std::to_string(k) + " out of range");
    }
}

double residual(std::span<const double> x, const DataPoint& p) {
    return dot(x, p.features) - p.target;
}

std::string format17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Dataset generate_dataset(std::size_t m, std::size_t dimension, double sigma_h,
                         std::uint64_t seed) {
    if (m == 0) throw std::invalid_argument("generate_dataset: m must be positive");
    if (dimension == 0) throw std::invalid_argument("generate_dataset: D must be positive");
    if (!(sigma_h >= 0.0)) throw std::invalid_argument("generate_dataset: sigma_h must be >= 0");

    Rng feature_rng = make_rng(seed, "dataset.features");
    Rng truth_rng = make_rng(seed, "dataset.truth");
    Rng shift_rng = make_rng(seed, "dataset.shift");
    Rng noise_rng = make_rng(seed, "dataset.noise");
    std::normal_distribution<double> feature(0.0, 10.0);
    std::normal_distribution<double> standard(0.0, 1.0);

    Dataset data;
    data.dimension = dimension;
    data.sigma_h = sigma_h;
    data.seed = seed;
    data.ground_truth.resize(dimension);
    for (double& v : data.ground_truth) v = standard(truth_rng);

    data.points.resize(m);
    Vector shifted(dimension);
    for (auto& p : data.points) {
        p.features.resize(dimension);
        for (double& v : p.features) v = feature(feature_rng);
        for (std::size_t j = 0; j < dimension; ++j) {
            const double shift = sigma_h > 0.0 ? sigma_h * standard(shift_rng) : 0.0;
            shifted[j] = data.ground_truth[j] + shift;
        }
        p.target = dot(p.features, shifted) + standard(noise_rng);
    }
    return data;
}

double subset_loss(std::span<const double> x, const Dataset& data, std::size_t k) {
    check_point(x, data, k);
    const double r = residual(x, data.points[k]);
    return 0.5 * r * r;
}

void subset_grad_into(std::span<const double> x, const Dataset& data, std::size_t k,
                      std::span<double> out) {
    check_point(x, data, k);
    if (out.size() != data.dimension) throw std::invalid_argument("subset_grad: bad output size");
    const auto& p = data.points[k];
    const double r = residual(x, p);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = r * p.features[j];
}

Vector subset_grad(std::span<const double> x, const Dataset& data, std::size_t k) {
    Vector g(data.dimension);
    subset_grad_into(x, data, k, g);
    return g;
}

double total_loss(std::span<const double> x, const Dataset& data) {
    double s = 0.0;
    for (std::size_t k = 0; k < data.size(); ++k) s += subset_loss(x, data, k);
    return s;
}

Vector total_grad(std::span<const double> x, const Dataset& data) {
    Vector g(data.dimension, 0.0);
    Vector gk(data.dimension);
    for (std::size_t k = 0; k < data.size(); ++k) {
        subset_grad_into(x, data, k, gk);
        axpy(1.0, gk, g);
    }
    return g;
}

double Objective::total_loss(std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t k = 0; k < subsets; ++k) s += loss(x, k);
    return s;
}

Vector Objective::total_grad(std::span<const double> x) const {
    Vector g(dimension, 0.0);
    Vector gk(dimension);
    for (std::size_t k = 0; k < subsets; ++k) {
        grad(x, k, gk);
        axpy(1.0, gk, g);
    }
    return g;
}

Objective linear_regression(const Dataset& data) {
    Objective obj;
    obj.dimension = data.dimension;
    obj.subsets = data.size();
    obj.loss = [&data](std::span<const double> x, std::size_t k) {
        return subset_loss(x, data, k);
    };
    obj.grad = [&data](std::span<const double> x, std::size_t k, std::span<double> out) {
        subset_grad_into(x, data, k, out);
    };
    return obj;
}

void write_dataset(std::ostream& os, const Dataset& data) {
    os << data.size() << ' ' << data.dimension << ' ' << format17(data.sigma_h) << ' '
       << data.seed << '\n';
    for (const auto& p : data.points) {
        for (double v : p.features) os << format17(v) << ' ';
        os << format17(p.target) << '\n';
    }
}

Dataset read_dataset(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("dataset: missing header");
    std::istringstream header(line);
    std::size_t m = 0;
    Dataset data;
    if (!(header >> m >> data.dimension >> data.sigma_h >> data.seed) || m == 0 ||
        data.dimension == 0) {
        throw std::runtime_error("dataset: malformed header '" + line + "'");
    }
    data.points.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        if (!std::getline(is, line)) {
            throw std::runtime_error("dataset: expected " + std::to_string(m) + " points, got " +
                                     std::to_string(k));
        }
        std::istringstream row(line);
        auto& p = data.points[k];
        p.features.resize(data.dimension);
        for (double& v : p.features)
            if (!(row >> v)) throw std::runtime_error("dataset: short row " + std::to_string(k + 2));
        if (!(row >> p.target)) throw std::runtime_error("dataset: missing target on row " +
                                                         std::to_string(k + 2));
        std::string extra;
        if (row >> extra) throw std::runtime_error("dataset: trailing data on row " +
                                                   std::to_string(k + 2));
    }
    return data;
}

}  // namespace cradl
