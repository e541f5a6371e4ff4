#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "cradl/linalg.hpp"
#include "cradl/problem.hpp"

namespace testing {

inline cradl::Vector normal_vector(std::mt19937_64& rng, std::size_t d, double sd = 1.0) {
    std::normal_distribution<double> g(0.0, sd);
    cradl::Vector v(d);
    for (double& e : v) e = g(rng);
    return v;
}

inline double rel_diff(const cradl::Vector& a, const cradl::Vector& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    return num / (1.0 + den);
}

// Gradient of 0.5 (<x, z> - y)^2 summed over the chosen points, written out
// independently of the library.
inline cradl::Vector reference_grad(const cradl::Dataset& data, const cradl::Vector& x,
                                    const std::vector<std::size_t>& points) {
    cradl::Vector g(x.size(), 0.0);
    for (std::size_t k : points) {
        const auto& p = data.points[k];
        double r = -p.target;
        for (std::size_t j = 0; j < x.size(); ++j) r += p.features[j] * x[j];
        for (std::size_t j = 0; j < x.size(); ++j) g[j] += r * p.features[j];
    }
    return g;
}

inline std::vector<std::size_t> all_points(const cradl::Dataset& data) {
    std::vector<std::size_t> k(data.size());
    for (std::size_t i = 0; i < k.size(); ++i) k[i] = i;
    return k;
}

// Dataset with explicit points.
inline cradl::Dataset make_data(const std::vector<std::pair<cradl::Vector, double>>& pts) {
    cradl::Dataset d;
    d.dimension = pts.front().first.size();
    for (const auto& [z, y] : pts) d.points.push_back({z, y});
    return d;
}

}  // namespace testing
