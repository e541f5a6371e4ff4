#include "cradl/aggregation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cradl/rng.hpp"

namespace cradl {

namespace {

std::size_t check_messages(std::span<const Vector> messages) {
    if (messages.empty()) throw std::invalid_argument("aggregate: no messages");
    const std::size_t dim = messages.front().size();
    for (const auto& m : messages) {
        if (m.size() != dim) throw std::invalid_argument("aggregate: dimension mismatch");
    }
    return dim;
}

void gather_column(std::span<const Vector> messages, std::size_t j, std::vector<double>& out) {
    out.resize(messages.size());
    for (std::size_t i = 0; i < messages.size(); ++i) out[i] = messages[i][j];
}

double median_in_place(std::vector<double>& v) {
    const std::size_t n = v.size();
    const std::size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return lower + (upper - lower) / 2.0;
}

double trimmed_mean_sorted(const std::vector<double>& sorted, std::size_t per_side) {
    double s = 0.0;
    for (std::size_t i = per_side; i + per_side < sorted.size(); ++i) s += sorted[i];
    return s / static_cast<double>(sorted.size() - 2 * per_side);
}

double parse_double(std::string_view text, std::string_view what) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw std::invalid_argument(std::string("bad number '") + std::string(text) + "' in " +
                                    std::string(what));
    }
    return v;
}

std::size_t ceil_count(double fraction, std::size_t n) {
    // guard against 0.2 * 10 = 2.0000000000000004 style round-up
    const double x = fraction * static_cast<double>(n);
    const double nearest = std::round(x);
    if (std::abs(x - nearest) < 1e-9) return static_cast<std::size_t>(nearest);
    return static_cast<std::size_t>(std::ceil(x));
}

}  // namespace

std::string_view rule_name(RuleKind kind) {
    switch (kind) {
        case RuleKind::Mean: return "mean";
        case RuleKind::CoordMedian: return "median";
        case RuleKind::TrimmedMean: return "trimmed";
        case RuleKind::GeometricMedian: return "geomedian";
        case RuleKind::Krum: return "krum";
        case RuleKind::Phocas: return "phocas";
        case RuleKind::Faba: return "faba";
    }
    return "?";
}

RbaRuleSpec parse_rule(std::string_view text) {
    std::string_view head = text;
    std::string_view arg;
    if (const auto colon = text.find(':'); colon != std::string_view::npos) {
        head = text.substr(0, colon);
        arg = text.substr(colon + 1);
    }
    static constexpr RuleKind kinds[] = {RuleKind::Mean,   RuleKind::CoordMedian,
                                         RuleKind::TrimmedMean, RuleKind::GeometricMedian,
                                         RuleKind::Krum,   RuleKind::Phocas, RuleKind::Faba};
    for (RuleKind k : kinds) {
        if (head != rule_name(k)) continue;
        RbaRuleSpec rule = RbaRuleSpec::of(k);
        if (!arg.empty()) {
            if (k != RuleKind::TrimmedMean) {
                throw std::invalid_argument("rule '" + std::string(head) + "' takes no parameter");
            }
            const double frac = parse_double(arg, "trimmed rule");
            if (!(frac >= 0.0 && frac < 0.5)) {
                throw std::invalid_argument("trim fraction must lie in [0, 0.5)");
            }
            rule.trim_fraction = frac;
        }
        return rule;
    }
    throw std::invalid_argument("unknown rule '" + std::string(text) +
                                "' (mean | median | trimmed:<frac> | geomedian | krum | phocas | "
                                "faba)");
}

std::string to_string(const RbaRuleSpec& rule) {
    std::string out(rule_name(rule.kind));
    if (rule.kind == RuleKind::TrimmedMean && rule.trim_fraction) {
        char buf[32];
        std::snprintf(buf, sizeof buf, ":%g", *rule.trim_fraction);
        out += buf;
    }
    return out;
}

Vector mean(std::span<const Vector> messages) {
    check_messages(messages);
    return mean_of(messages);
}

Vector coord_median(std::span<const Vector> messages) {
    const std::size_t dim = check_messages(messages);
    Vector out(dim);
    std::vector<double> col;
    for (std::size_t j = 0; j < dim; ++j) {
        gather_column(messages, j, col);
        out[j] = median_in_place(col);
    }
    return out;
}

Vector trimmed_mean(std::span<const Vector> messages, std::size_t per_side) {
    const std::size_t dim = check_messages(messages);
    if (2 * per_side >= messages.size()) {
        throw std::invalid_argument("trimmed_mean: trimming " + std::to_string(per_side) +
                                    " per side removes all " + std::to_string(messages.size()) +
                                    " messages");
    }
    Vector out(dim);
    std::vector<double> col;
    for (std::size_t j = 0; j < dim; ++j) {
        gather_column(messages, j, col);
        std::sort(col.begin(), col.end());
        out[j] = trimmed_mean_sorted(col, per_side);
    }
    return out;
}

GeometricMedianResult geometric_median(std::span<const Vector> messages, double tol,
                                       std::size_t max_iterations) {
    const std::size_t dim = check_messages(messages);
    if (!(tol > 0.0)) throw std::invalid_argument("geometric_median: tolerance must be positive");

    GeometricMedianResult res;
    res.point = mean_of(messages);
    Vector& y = res.point;
    Vector weighted(dim);
    Vector pull(dim);
    Vector next(dim);
    for (std::size_t it = 0; it < max_iterations; ++it) {
        res.iterations = it + 1;
        const double scale = 1.0 + norm(y);
        std::fill(weighted.begin(), weighted.end(), 0.0);
        std::fill(pull.begin(), pull.end(), 0.0);
        double inv_sum = 0.0;
        double coincident = 0.0;
        for (const auto& x : messages) {
            const double d = std::sqrt(squared_distance(x, y));
            if (d <= 1e-14 * scale) {
                coincident += 1.0;
                continue;
            }
            const double w = 1.0 / d;
            inv_sum += w;
            for (std::size_t j = 0; j < dim; ++j) {
                weighted[j] += w * x[j];
                pull[j] += w * (x[j] - y[j]);
            }
        }
        if (inv_sum == 0.0) {  // every message sits on y
            res.converged = true;
            return res;
        }
        for (std::size_t j = 0; j < dim; ++j) next[j] = weighted[j] / inv_sum;
        if (coincident > 0.0) {
            const double r = norm(pull);
            if (r <= coincident) {  // y is itself the geometric median
                res.converged = true;
                return res;
            }
            const double keep = coincident / r;
            for (std::size_t j = 0; j < dim; ++j) next[j] = (1.0 - keep) * next[j] + keep * y[j];
        }
        const double move = std::sqrt(squared_distance(next, y));
        y.swap(next);
        if (move <= tol * scale) {
            res.converged = true;
            return res;
        }
    }
    return res;
}

Vector krum(std::span<const Vector> messages, std::size_t f) {
    check_messages(messages);
    const std::size_t n = messages.size();
    if (n < f + 3) {
        throw std::invalid_argument("krum: needs N - f - 2 >= 1 (N=" + std::to_string(n) +
                                    ", f=" + std::to_string(f) + ")");
    }
    const std::size_t neighbours = n - f - 2;
    std::vector<double> dist(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            dist[i * n + j] = dist[j * n + i] = squared_distance(messages[i], messages[j]);

    std::vector<double> scores(n);
    std::vector<double> row;
    for (std::size_t i = 0; i < n; ++i) {
        row.clear();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) row.push_back(dist[i * n + j]);
        std::sort(row.begin(), row.end());
        scores[i] = std::accumulate(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(neighbours), 0.0);
    }
    const double best = *std::min_element(scores.begin(), scores.end());
    std::size_t chosen = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (scores[i] != best) continue;
        if (chosen == n || messages[i] < messages[chosen]) chosen = i;
    }
    return messages[chosen];
}

Vector phocas(std::span<const Vector> messages, std::size_t trim) {
    const std::size_t dim = check_messages(messages);
    const std::size_t n = messages.size();
    if (2 * trim >= n) {
        throw std::invalid_argument("phocas: trimming " + std::to_string(trim) +
                                    " per side removes all " + std::to_string(n) + " messages");
    }
    const std::size_t keep = n - trim;
    Vector out(dim);
    std::vector<double> col;
    std::vector<std::pair<double, double>> by_distance(n);
    for (std::size_t j = 0; j < dim; ++j) {
        gather_column(messages, j, col);
        std::sort(col.begin(), col.end());
        const double centre = trimmed_mean_sorted(col, trim);
        for (std::size_t i = 0; i < n; ++i) by_distance[i] = {std::abs(col[i] - centre), col[i]};
        std::sort(by_distance.begin(), by_distance.end());
        double s = 0.0;
        for (std::size_t i = 0; i < keep; ++i) s += by_distance[i].second;
        out[j] = s / static_cast<double>(keep);
    }
    return out;
}

Vector faba(std::span<const Vector> messages, std::size_t removals) {
    check_messages(messages);
    const std::size_t n = messages.size();
    if (removals >= n) {
        throw std::invalid_argument("faba: cannot remove " + std::to_string(removals) + " of " +
                                    std::to_string(n) + " messages");
    }
    std::vector<Vector> kept(messages.begin(), messages.end());
    for (std::size_t round = 0; round < removals; ++round) {
        const Vector centre = mean_of(kept);
        std::size_t worst = 0;
        double worst_d = -1.0;
        for (std::size_t i = 0; i < kept.size(); ++i) {
            const double d = squared_distance(kept[i], centre);
            if (d > worst_d || (d == worst_d && kept[worst] < kept[i])) {
                worst_d = d;
                worst = i;
            }
        }
        kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    return mean_of(kept);
}

ResolvedRule resolve_rule(const RbaRuleSpec& rule, std::size_t n, double alpha) {
    if (n == 0) throw std::invalid_argument("aggregate: no messages");
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in [0, 1)");
    ResolvedRule out{rule.kind, 0, rule.tolerance, rule.max_iterations};
    switch (rule.kind) {
        case RuleKind::Mean:
        case RuleKind::CoordMedian:
            break;
        case RuleKind::TrimmedMean:
        case RuleKind::Phocas: {
            const double frac = rule.trim_fraction.value_or(alpha);
            if (!(frac >= 0.0 && frac < 0.5)) throw std::invalid_argument("trim fraction must lie in [0, 0.5)");
            out.count = ceil_count(frac, n);
            if (2 * out.count >= n) {
                throw std::invalid_argument(std::string(rule_name(rule.kind)) + ": trimming " +
                                            std::to_string(out.count) + " per side of " +
                                            std::to_string(n) + " messages leaves nothing");
            }
            break;
        }
        case RuleKind::GeometricMedian:
            if (!(rule.tolerance > 0.0)) throw std::invalid_argument("geomedian: tolerance must be positive");
            break;
        case RuleKind::Krum:
            out.count = rule.byzantine_count.value_or(
                static_cast<std::size_t>(std::llround(alpha * static_cast<double>(n))));
            if (n < out.count + 3) {
                throw std::invalid_argument("krum: needs N - f - 2 >= 1 (N=" + std::to_string(n) +
                                            ", f=" + std::to_string(out.count) + ")");
            }
            break;
        case RuleKind::Faba:
            if (!rule.removal_count && !(alpha < 1.0 / 3.0)) {
                throw std::invalid_argument("faba: FABA requires alpha < 1/3");
            }
            out.count = rule.removal_count.value_or(ceil_count(alpha, n));
            if (out.count >= n) throw std::invalid_argument("faba: removals must be < N");
            break;
    }
    return out;
}

Vector aggregate(const RbaRuleSpec& rule, std::span<const Vector> messages, double alpha) {
    check_messages(messages);
    const ResolvedRule r = resolve_rule(rule, messages.size(), alpha);
    switch (r.kind) {
        case RuleKind::Mean: return mean(messages);
        case RuleKind::CoordMedian: return coord_median(messages);
        case RuleKind::TrimmedMean: return trimmed_mean(messages, r.count);
        case RuleKind::GeometricMedian:
            return geometric_median(messages, r.tolerance, r.max_iterations).point;
        case RuleKind::Krum: return krum(messages, r.count);
        case RuleKind::Phocas: return phocas(messages, r.count);
        case RuleKind::Faba: return faba(messages, r.count);
    }
    throw std::logic_error("aggregate: unknown rule");
}

double c_alpha_sq(RuleKind kind, double alpha, std::size_t n, std::size_t dimension) {
    if (n < 2) throw std::invalid_argument("c_alpha_sq: N must be >= 2");
    const double a = alpha;
    const double nn = static_cast<double>(n);
    const auto require = [&](double upper, const char* range) {
        if (!(a >= 0.0 && a < upper)) {
            throw std::invalid_argument(std::string(rule_name(kind)) + ": alpha=" +
                                        std::to_string(a) + " outside valid range " + range);
        }
    };
    switch (kind) {
        case RuleKind::Mean:
            if (a != 0.0) {
                throw std::invalid_argument("mean: alpha=" + std::to_string(a) +
                                            " outside valid range alpha = 0");
            }
            return 0.0;
        case RuleKind::CoordMedian: {
            require(0.5, "[0, 1/2)");
            const double m = std::min(2.0 * std::sqrt(nn - nn * a),
                                      std::sqrt(static_cast<double>(dimension)));
            return m * m / (2.0 * (1.0 - a) * (1.0 - a));
        }
        case RuleKind::TrimmedMean:
            require(0.5, "[0, 1/2)");
            return 2.0 * a * (1.0 - a) / ((1.0 - 2.0 * a) * (1.0 - 2.0 * a));
        case RuleKind::GeometricMedian: {
            require(0.5, "[0, 1/2)");
            const double q = 2.0 * (1.0 - a) / (1.0 - 2.0 * a);
            return q * q;
        }
        case RuleKind::Krum: {
            require(0.5, "[0, 1/2)");
            const double q = 1.0 + std::sqrt((1.0 - a) / (1.0 - 2.0 * a));
            return 2.0 * q * q;
        }
        case RuleKind::Phocas:
            require(0.5, "[0, 1/2)");
            return 4.0 + 12.0 * a * (1.0 - a) / ((1.0 - 2.0 * a) * (1.0 - 2.0 * a));
        case RuleKind::Faba: {
            require(1.0 / 3.0, "[0, 1/3)");
            const double byz = nn * a;
            const double honest = nn - byz;
            return 4.0 * (byz / honest + (nn + 1.0 - byz) / honest * byz / (nn - 3.0 * byz));
        }
    }
    throw std::logic_error("c_alpha_sq: unknown rule");
}

RobustBoundReport robust_bound_check(const RbaRuleSpec& rule, std::span<const Vector> honest,
                                     std::span<const Vector> byzantine, double alpha,
                                     std::uint64_t shuffle_seed) {
    if (honest.empty()) throw std::invalid_argument("robust_bound_check: no honest messages");
    const std::size_t n = honest.size() + byzantine.size();
    if (std::abs(static_cast<double>(byzantine.size()) - alpha * static_cast<double>(n)) > 0.5 + 1e-9) {
        throw std::invalid_argument("robust_bound_check: Byzantine count does not match alpha");
    }
    std::vector<Vector> all(honest.begin(), honest.end());
    all.insert(all.end(), byzantine.begin(), byzantine.end());
    Rng rng = make_rng(shuffle_seed, "aggregation.shuffle");
    std::shuffle(all.begin(), all.end(), rng);

    const Vector z_bar = mean_of(honest);
    RobustBoundReport rep;
    for (const auto& z : honest) rep.varsigma = std::max(rep.varsigma, squared_distance(z_bar, z));
    rep.lhs = squared_distance(aggregate(rule, all, alpha), z_bar);
    rep.c_alpha_sq = c_alpha_sq(rule.kind, alpha, n, z_bar.size());
    rep.satisfied = rep.lhs <= rep.c_alpha_sq * rep.varsigma + 1e-9 * (1.0 + rep.varsigma);
    return rep;
}

}  // namespace cradl
