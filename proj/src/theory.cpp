#include "cradl/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cradl/adversary.hpp"
#include "cradl/coding.hpp"

namespace cradl {

PowerIterationResult estimate_L(const Dataset& data, double tol, std::size_t max_iterations) {
    if (data.size() == 0) throw std::invalid_argument("estimate_L: empty dataset");
    const std::size_t d = data.dimension;
    std::vector<double> gram(d * d, 0.0);
    for (const auto& p : data.points)
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b) gram[a * d + b] += p.features[a] * p.features[b];

    // deterministic start with no special alignment to coordinate axes
    Vector v(d);
    for (std::size_t a = 0; a < d; ++a) v[a] = 1.0 + 0.5 * std::sin(static_cast<double>(a) + 1.0);
    double nv = norm(v);
    for (double& e : v) e /= nv;

    PowerIterationResult res;
    Vector w(d);
    double previous = 0.0;
    for (std::size_t it = 0; it < max_iterations; ++it) {
        for (std::size_t a = 0; a < d; ++a) {
            double s = 0.0;
            for (std::size_t b = 0; b < d; ++b) s += gram[a * d + b] * v[b];
            w[a] = s;
        }
        const double lambda = dot(v, w);  // Rayleigh quotient
        nv = norm(w);
        res.iterations = it + 1;
        res.value = lambda;
        if (nv == 0.0) {  // all features zero
            res.converged = true;
            return res;
        }
        for (std::size_t a = 0; a < d; ++a) v[a] = w[a] / nv;
        if (it > 0 && std::abs(lambda - previous) <= tol * std::abs(lambda)) {
            res.converged = true;
            return res;
        }
        previous = lambda;
    }
    return res;
}

double estimate_beta(const Dataset& data, std::span<const double> x) {
    const Vector full = total_grad(x, data);
    const double inv_m = 1.0 / static_cast<double>(data.size());
    double worst = 0.0;
    Vector gk(data.dimension);
    for (std::size_t k = 0; k < data.size(); ++k) {
        subset_grad_into(x, data, k, gk);
        double s = 0.0;
        for (std::size_t j = 0; j < gk.size(); ++j) {
            const double diff = gk[j] - full[j] * inv_m;
            s += diff * diff;
        }
        worst = std::max(worst, s);
    }
    return std::sqrt(worst);
}

double optimal_loss(const Dataset& data) {
    const std::size_t d = data.dimension;
    std::vector<double> a(d * d, 0.0);
    Vector rhs(d, 0.0);
    for (const auto& p : data.points) {
        for (std::size_t i = 0; i < d; ++i) {
            rhs[i] += p.features[i] * p.target;
            for (std::size_t j = 0; j <= i; ++j) a[i * d + j] += p.features[i] * p.features[j];
        }
    }
    // in-place lower Cholesky factor
    for (std::size_t j = 0; j < d; ++j) {
        double diag = a[j * d + j];
        for (std::size_t k = 0; k < j; ++k) diag -= a[j * d + k] * a[j * d + k];
        if (!(diag > 1e-12 * (1.0 + std::abs(a[j * d + j])))) return 0.0;
        const double l = std::sqrt(diag);
        a[j * d + j] = l;
        for (std::size_t i = j + 1; i < d; ++i) {
            double s = a[i * d + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * d + k] * a[j * d + k];
            a[i * d + j] = s / l;
        }
    }
    Vector x = rhs;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < i; ++k) x[i] -= a[i * d + k] * x[k];
        x[i] /= a[i * d + i];
    }
    for (std::size_t i = d; i-- > 0;) {
        for (std::size_t k = i + 1; k < d; ++k) x[i] -= a[k * d + i] * x[k];
        x[i] /= a[i * d + i];
    }
    return total_loss(x, data);
}

PhiConstants phi_constants(double alpha, std::size_t devices) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("phi_constants: alpha in [0, 1)");
    if (devices < 2) throw std::invalid_argument("phi_constants: N >= 2");
    const double n = static_cast<double>(devices);
    return {1.0 - alpha, (1.0 - alpha) * (n - n * alpha - 1.0) / (n - 1.0)};
}

TheoryConstants make_constants(const TheoryInputs& in) {
    if (in.devices < 2 || in.subsets == 0 || in.per_device == 0 || in.min_replication == 0) {
        throw std::invalid_argument("theory: N >= 2 and positive M, r, d_min required");
    }
    if (in.per_device > in.subsets) throw std::invalid_argument("theory: r must not exceed M");
    TheoryConstants c;
    c.smoothness = in.smoothness;
    c.beta = in.beta;
    c.f_star = in.f_star;
    c.alpha = in.alpha;
    c.devices = in.devices;
    c.subsets = in.subsets;
    c.per_device = in.per_device;
    c.min_replication = in.min_replication;
    c.c_alpha_sq = in.c_alpha_sq;
    c.deficit = in.deficit.value_or(ideal_deficit(in.per_device, in.subsets));

    const auto phi = phi_constants(in.alpha, in.devices);
    c.phi1 = phi.phi1;
    c.phi2 = phi.phi2;

    const double n = static_cast<double>(in.devices);
    const double m = static_cast<double>(in.subsets);
    const double r = static_cast<double>(in.per_device);
    const double dmin = static_cast<double>(in.min_replication);
    const double L = in.smoothness;
    const double b2 = in.beta * in.beta;
    const double root = std::sqrt(2.0 * in.c_alpha_sq);
    const double honest_sq = (1.0 - in.alpha) * (1.0 - in.alpha);
    const double gap = c.phi1 - c.phi2;
    const double def = c.deficit;

    c.eta = 2.0 * def * root / (dmin * m);
    c.rho1 = 1.0 / n - c.eta;
    c.rho2 = gap * 2.0 * r * r * L / (honest_sq * n * dmin * dmin * m * m) +
             c.phi2 * L / (honest_sq * n * n) + 8.0 * L * in.c_alpha_sq * def * def / (dmin * dmin * m * m);
    c.rho3 = b2 * m * root * def / dmin;
    c.rho4 = gap * 2.0 * r * r * b2 * L / (honest_sq * n * dmin * dmin) +
             8.0 * in.c_alpha_sq * b2 * L * def * def / (dmin * dmin);
    return c;
}

double convergence_threshold(std::size_t d_min, std::size_t subsets, std::size_t devices,
                             double deficit) {
    if (deficit <= 0.0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(d_min) * static_cast<double>(subsets) /
           (2.0 * std::sqrt(2.0) * static_cast<double>(devices) * deficit);
}

bool convergence_condition(double c_alpha, std::size_t d_min, std::size_t subsets,
                           std::size_t devices, double deficit) {
    if (deficit <= 0.0) return true;
    return c_alpha < convergence_threshold(d_min, subsets, devices, deficit);
}

bool convergence_condition(double c_alpha, std::size_t d_min, std::size_t subsets,
                           std::size_t devices, std::size_t r) {
    if (r > subsets) throw std::invalid_argument("convergence_condition: r must not exceed M");
    if (r == subsets) return true;
    return convergence_condition(c_alpha, d_min, subsets, devices, ideal_deficit(r, subsets));
}

double theorem1_bound(std::size_t iterations, double lambda, const TheoryConstants& c,
                      double initial_loss) {
    if (!(c.rho1 > 0.0)) {
        throw std::invalid_argument("theorem1_bound: convergence condition violated (rho1 <= 0)");
    }
    if (!(lambda > 0.0)) throw std::invalid_argument("theorem1_bound: lambda must be positive");
    const double ratio = lambda * c.rho2 / c.rho1;
    const double tp1 = static_cast<double>(iterations) + 1.0;
    if (!(static_cast<double>(iterations) > ratio * ratio - 1.0)) {
        throw std::invalid_argument("theorem1_bound: requires T > (lambda rho2 / rho1)^2 - 1");
    }
    const double s = std::sqrt(tp1);
    return (initial_loss - c.f_star) / (lambda * s * c.rho1 - lambda * lambda * c.rho2) +
           (s * c.rho3 + lambda * c.rho4) / (s * c.rho1 - lambda * c.rho2);
}

double theorem2_bound(std::size_t iterations, double gamma0, const TheoryConstants& c,
                      double initial_loss) {
    if (!(c.rho1 > 0.0)) {
        throw std::invalid_argument("theorem2_bound: convergence condition violated (rho1 <= 0)");
    }
    if (!(gamma0 > 0.0 && gamma0 < c.rho1 / (2.0 * c.rho2))) {
        throw std::invalid_argument("theorem2_bound: requires 0 < gamma0 < rho1 / (2 rho2)");
    }
    const double tp1 = static_cast<double>(iterations) + 1.0;
    const double s = std::sqrt(tp1);
    const double base = gamma0 * c.rho1 - gamma0 * gamma0 * c.rho2;
    return (initial_loss - c.f_star) / (base * s) + c.rho3 / (c.rho1 - gamma0 * c.rho2) +
           gamma0 * gamma0 * c.rho4 * (2.0 + std::log(tp1)) / (base * s);
}

double asymptotic_error_fixed(const TheoryConstants& c, bool replication_balanced) {
    if (!replication_balanced) {
        if (!(c.rho1 > 0.0)) throw std::invalid_argument("asymptotic error: rho1 <= 0");
        return c.rho3 / c.rho1;
    }
    const double m = static_cast<double>(c.subsets);
    const double miss = 1.0 - static_cast<double>(c.per_device) / m;
    const double root = std::sqrt(2.0 * c.c_alpha_sq);
    const double denom = 1.0 - 2.0 * miss * root;
    if (!(denom > 0.0)) throw std::invalid_argument("asymptotic error: denominator <= 0");
    return c.beta * c.beta * m * m * root * miss / denom;
}

double asymptotic_error_decaying(const TheoryConstants& c, double gamma0, bool replication_balanced) {
    if (!replication_balanced) {
        const double denom = c.rho1 - gamma0 * c.rho2;
        if (!(denom > 0.0)) throw std::invalid_argument("asymptotic error: denominator <= 0");
        return c.rho3 / denom;
    }
    const double n = static_cast<double>(c.devices);
    const double m = static_cast<double>(c.subsets);
    const double miss = 1.0 - static_cast<double>(c.per_device) / m;
    const double root = std::sqrt(2.0 * c.c_alpha_sq);
    const double honest_sq = (1.0 - c.alpha) * (1.0 - c.alpha);
    const double L = c.smoothness;
    const double lr_term = (c.phi1 - c.phi2) * 2.0 * L / (honest_sq * n * n) +
                           c.phi2 * L / (honest_sq * n) + 8.0 * L * c.c_alpha_sq * miss * miss / n;
    const double denom = 1.0 - 2.0 * miss * root - gamma0 * lr_term;
    if (!(denom > 0.0)) throw std::invalid_argument("asymptotic error: denominator <= 0");
    return c.beta * c.beta * m * m * root * miss / denom;
}

namespace {

std::vector<Vector> coded_gradients(std::span<const double> x, const AllocationMatrix& alloc,
                                    const Dataset& data, Vector& full) {
    if (alloc.subsets() != data.size()) {
        throw std::invalid_argument("theory: allocation and dataset disagree on M");
    }
    std::vector<Vector> grads(data.size());
    full.assign(data.dimension, 0.0);
    for (std::size_t k = 0; k < data.size(); ++k) {
        grads[k] = subset_grad(x, data, k);
        axpy(1.0, grads[k], full);
    }
    std::vector<Vector> coded;
    encode_all_into(alloc, grads, coded);
    return coded;
}

}  // namespace

Lemma1Report lemma1_check(std::span<const double> x, const AllocationMatrix& alloc,
                          const Dataset& data) {
    Vector full;
    const auto coded = coded_gradients(x, alloc, data, full);
    const BalanceReport balance = balance_diagnostics(alloc);

    Lemma1Report rep;
    const double m = static_cast<double>(alloc.subsets());
    const double dmin = static_cast<double>(alloc.min_replication());
    rep.beta = estimate_beta(data, x);
    rep.grad_norm_sq = squared_norm(full);
    const double spread = rep.beta * rep.beta + rep.grad_norm_sq / (m * m);
    const double ideal = ideal_deficit(alloc.per_device(), alloc.subsets());
    rep.ideal_bound = 8.0 * ideal * ideal * spread / (dmin * dmin);
    rep.ideal_applicable = balance.exactly_balanced;

    const std::size_t n = alloc.devices();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double actual = squared_distance(coded[i], coded[j]);
            const double a = static_cast<double>(balance.sym_diff(i, j, n));
            const double b = static_cast<double>(balance.sym_diff(j, i, n));
            const double bound = 4.0 * (a * a + b * b) * spread / (dmin * dmin);
            rep.actual_max = std::max(rep.actual_max, actual);
            ++rep.pairs_checked;
            if (actual > bound * (1.0 + 1e-12)) ++rep.violations;
            if (bound > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, actual / bound);
        }
    }
    rep.ideal_holds = rep.actual_max <= rep.ideal_bound * (1.0 + 1e-12);
    return rep;
}

Lemma2Report lemma2_check(std::span<const double> x, const AllocationMatrix& alloc,
                          const Dataset& data, double alpha, std::size_t trials,
                          std::uint64_t seed) {
    if (trials < 1000) throw std::invalid_argument("lemma2_check: needs at least 1000 trials");
    Vector full;
    const auto coded = coded_gradients(x, alloc, data, full);
    const std::size_t n = alloc.devices();
    const double nn = static_cast<double>(n);
    const double m = static_cast<double>(alloc.subsets());
    const double r = static_cast<double>(alloc.per_device());
    const double dmin = static_cast<double>(alloc.min_replication());

    Lemma2Report rep;
    const auto phi = phi_constants(alpha, n);
    rep.phi1 = phi.phi1;
    rep.phi2 = phi.phi2;
    const double honest_sq = (1.0 - alpha) * (1.0 - alpha);
    const double grad_sq = squared_norm(full);
    const double beta = estimate_beta(data, x);

    double coded_sq = 0.0;
    for (const auto& g : coded) coded_sq += squared_norm(g);
    rep.exact_expectation = ((phi.phi1 - phi.phi2) * coded_sq + phi.phi2 * grad_sq) / (honest_sq * nn * nn);
    rep.bound = (phi.phi1 - phi.phi2) * 2.0 * r * r / (honest_sq * nn * dmin * dmin) *
                    (beta * beta + grad_sq / (m * m)) +
                phi.phi2 / (honest_sq * nn * nn) * grad_sq;

    double sum = 0.0, sum_sq = 0.0;
    double h0 = 0.0, h01 = 0.0;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const auto ids = sample_identities(n, alpha, trial, seed);
        const Vector g_bar = honest_average(coded, ids.honest);
        const double v = squared_norm(g_bar);
        sum += v;
        sum_sq += v * v;
        const bool honest0 = std::binary_search(ids.honest.begin(), ids.honest.end(), 0u);
        const bool honest1 = n > 1 && std::binary_search(ids.honest.begin(), ids.honest.end(), 1u);
        h0 += honest0 ? 1.0 : 0.0;
        h01 += (honest0 && honest1) ? 1.0 : 0.0;
    }
    const double t = static_cast<double>(trials);
    rep.estimate = sum / t;
    const double var = std::max(0.0, (sum_sq - t * rep.estimate * rep.estimate) / (t - 1.0));
    rep.std_error = std::sqrt(var / t);
    rep.satisfied = rep.estimate <= rep.bound * (1.0 + 1e-12) + 3.0 * rep.std_error;

    rep.honest_rate = h0 / t;
    rep.pair_rate = h01 / t;
    // standard errors from the model rates so a zero-variance draw does not pass vacuously
    rep.honest_rate_se = std::sqrt(phi.phi1 * (1.0 - phi.phi1) / t);
    rep.pair_rate_se = std::sqrt(phi.phi2 * (1.0 - phi.phi2) / t);
    const auto within = [](double est, double target, double se) {
        return std::abs(est - target) <= 3.0 * se + 1e-12;
    };
    rep.structure_ok = within(rep.honest_rate, phi.phi1, rep.honest_rate_se) &&
                       within(rep.pair_rate, phi.phi2, rep.pair_rate_se);
    return rep;
}

}  // namespace cradl
