#include "cradl/experiment.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

namespace cradl {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = s.find(',', start);
        out.push_back(trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    for (const auto& v : out) {
        if (v.empty()) throw std::invalid_argument("empty entry in list");
    }
    return out;
}

double to_double(std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw std::invalid_argument("expected a number, got '" + std::string(s) + "'");
    }
    return v;
}

std::uint64_t to_unsigned(std::string_view s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw std::invalid_argument("expected a non-negative integer, got '" + std::string(s) + "'");
    }
    return v;
}

std::vector<std::uint64_t> parse_seeds(std::string_view s) {
    const auto dots = s.find("..");
    if (dots != std::string_view::npos) {
        const auto lo = to_unsigned(trim(s.substr(0, dots)));
        const auto hi = to_unsigned(trim(s.substr(dots + 2)));
        if (hi < lo) throw std::invalid_argument("empty seed range");
        if (hi - lo >= 100000) throw std::invalid_argument("seed range too long");
        std::vector<std::uint64_t> out;
        for (auto v = lo; v <= hi; ++v) out.push_back(v);
        return out;
    }
    std::vector<std::uint64_t> out;
    for (const auto& v : split_list(s)) out.push_back(to_unsigned(v));
    return out;
}

std::optional<SweepAxis> parse_axis(std::string_view s) {
    if (s == "r") return SweepAxis::R;
    if (s == "alpha") return SweepAxis::Alpha;
    if (s == "sigma_h") return SweepAxis::SigmaH;
    if (s == "rule") return SweepAxis::Rule;
    if (s == "attack") return SweepAxis::Attack;
    if (s == "method") return SweepAxis::Method;
    return std::nullopt;
}

// Checks a sweep value parses for its axis so bad lists fail at load time.
void check_axis_value(SweepAxis axis, const std::string& v) {
    switch (axis) {
        case SweepAxis::R: parse_per_device(v); break;
        case SweepAxis::Alpha: to_double(v); break;
        case SweepAxis::SigmaH:
            if (to_double(v) < 0.0) throw std::invalid_argument("sigma_h must be non-negative");
            break;
        case SweepAxis::Rule: parse_rule(v); break;
        case SweepAxis::Attack: validate(parse_attack(v)); break;
        case SweepAxis::Method: parse_method(v); break;
    }
}

}  // namespace

std::size_t PerDevice::resolve(std::size_t subsets) const {
    if (!fraction_of_m) return static_cast<std::size_t>(value);
    const double r = std::round(value * static_cast<double>(subsets));
    if (r < 1.0) throw std::invalid_argument("r=" + text() + " rounds to zero subsets");
    return static_cast<std::size_t>(r);
}

std::string PerDevice::text() const {
    char buf[64];
    if (fraction_of_m) {
        std::snprintf(buf, sizeof buf, "%gM", value);
    } else {
        std::snprintf(buf, sizeof buf, "%.0f", value);
    }
    return buf;
}

PerDevice parse_per_device(std::string_view text) {
    const std::string t = trim(text);
    PerDevice p;
    if (!t.empty() && t.back() == 'M') {
        const std::string head = t.substr(0, t.size() - 1);
        p.value = head.empty() ? 1.0 : to_double(head);
        p.fraction_of_m = true;
        if (!(p.value > 0.0 && p.value <= 1.0)) throw std::invalid_argument("r fraction must lie in (0, 1]");
        return p;
    }
    const auto v = to_unsigned(t);
    if (v == 0) throw std::invalid_argument("r must be positive");
    p.value = static_cast<double>(v);
    return p;
}

std::string_view axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::R: return "r";
        case SweepAxis::Alpha: return "alpha";
        case SweepAxis::SigmaH: return "sigma_h";
        case SweepAxis::Rule: return "rule";
        case SweepAxis::Attack: return "attack";
        case SweepAxis::Method: return "method";
    }
    return "?";
}

Experiment parse_experiment(std::istream& in, const std::string& source) {
    Experiment e;
    std::map<std::string, std::pair<std::string, std::size_t>> kv;  // key -> (value, line)
    std::vector<std::string> order;
    std::string line;
    std::size_t lineno = 0;
    const auto fail = [&](std::size_t at, const std::string& msg) -> ConfigError {
        return ConfigError(source + ":" + std::to_string(at) + ": " + msg);
    };

    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const std::string body = trim(std::string_view(line).substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw fail(lineno, "expected 'key = value'");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) throw fail(lineno, "missing key");
        if (value.empty()) throw fail(lineno, "missing value for '" + key + "'");
        if (kv.count(key)) {
            throw fail(lineno, "duplicate key '" + key + "' (first set on line " +
                                   std::to_string(kv[key].second) + ")");
        }
        kv[key] = {value, lineno};
        order.push_back(key);
    }

    std::optional<double> lr, gamma0, rho1, rho2;
    std::string schedule = "fixed";
    std::set<SweepAxis> seen_axes;
    for (const auto& key : order) {
        const auto& [value, at] = kv[key];
        try {
            if (key == "method") e.run.method = parse_method(value);
            else if (key == "devices") e.run.devices = to_unsigned(value);
            else if (key == "allocation") e.run.allocation = parse_scheme(value);
            else if (key == "r") e.r = parse_per_device(value);
            else if (key == "rule") e.run.rule = parse_rule(value);
            else if (key == "attack") {
                e.run.attack = parse_attack(value);
                validate(e.run.attack);
            }
            else if (key == "alpha") e.run.alpha = to_double(value);
            else if (key == "lr") lr = to_double(value);
            else if (key == "lambda") {
                e.lambda_rate = true;
                e.lambda = to_double(value);
            }
            else if (key == "schedule") {
                if (value != "fixed" && value != "decaying") {
                    throw std::invalid_argument("schedule must be 'fixed' or 'decaying'");
                }
                schedule = value;
            }
            else if (key == "gamma0") gamma0 = to_double(value);
            else if (key == "rho1") rho1 = to_double(value);
            else if (key == "rho2") rho2 = to_double(value);
            else if (key == "iterations") e.run.iterations = to_unsigned(value);
            else if (key == "seed") e.seeds = {to_unsigned(value)};
            else if (key == "seeds") e.seeds = parse_seeds(value);
            else if (key == "init") e.run.init_value = to_double(value);
            else if (key == "data.m") e.data.m = to_unsigned(value);
            else if (key == "data.dim") e.data.dimension = to_unsigned(value);
            else if (key == "data.sigma_h") {
                e.data.sigma_h = to_double(value);
                if (e.data.sigma_h < 0.0) throw std::invalid_argument("sigma_h must be non-negative");
            }
            else if (key == "data.seed") e.data.seed = to_unsigned(value);
            else if (key == "data.file") e.data.file = value;
            else if (key == "out") e.out = value;
            else if (key == "plot") e.plot = value;
            else if (key == "figure") e.figure = value;
            else if (key.rfind("sweep.", 0) == 0) {
                const auto axis = parse_axis(key.substr(6));
                if (!axis) {
                    throw std::invalid_argument(
                        "unknown sweep axis '" + key.substr(6) +
                        "' (expected r, alpha, sigma_h, rule, attack or method)");
                }
                SweepSpec s{*axis, split_list(value)};
                for (const auto& v : s.values) check_axis_value(*axis, v);
                seen_axes.insert(*axis);
                e.sweeps.push_back(std::move(s));
            }
            else throw std::invalid_argument("unknown key '" + key + "'");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& ex) {
            throw fail(at, ex.what());
        }
    }

    const auto line_of = [&](const char* key) { return kv.count(key) ? kv[key].second : lineno; };
    if (kv.count("seed") && kv.count("seeds")) throw fail(line_of("seeds"), "give either 'seed' or 'seeds'");
    if (e.seeds.empty()) e.seeds = {0};
    if (e.run.iterations < 1) throw fail(line_of("iterations"), "iterations must be at least 1");
    if (e.run.devices < 1) throw fail(line_of("devices"), "devices must be positive");
    if (e.data.m < 1 || e.data.dimension < 1) throw fail(line_of("data.m"), "data.m and data.dim must be positive");
    if (lr && e.lambda_rate) throw fail(line_of("lambda"), "give either 'lr' or 'lambda'");
    if (schedule == "decaying") {
        if (lr || e.lambda_rate) throw fail(line_of("schedule"), "decaying schedule takes gamma0, rho1, rho2, not lr");
        if (!gamma0 || !rho1 || !rho2) throw fail(line_of("schedule"), "decaying schedule needs gamma0, rho1 and rho2");
        if (!(*rho1 > 0.0 && *rho2 > 0.0 && *gamma0 > 0.0 && *gamma0 < *rho1 / (2.0 * *rho2))) {
            throw fail(line_of("gamma0"), "decaying schedule needs 0 < gamma0 < rho1 / (2 rho2)");
        }
        e.run.schedule = DecayingRate{*gamma0, *rho1, *rho2};
    } else {
        if (gamma0 || rho1 || rho2) throw fail(line_of("schedule"), "gamma0/rho1/rho2 need 'schedule = decaying'");
        double gamma = lr.value_or(FixedRate{}.gamma);
        if (e.lambda_rate) gamma = lr_fixed(e.lambda, e.run.iterations);
        if (!(gamma > 0.0)) throw fail(line_of(e.lambda_rate ? "lambda" : "lr"), "learning rate must be positive");
        e.run.schedule = FixedRate{gamma};
    }
    if (!(e.run.alpha >= 0.0 && e.run.alpha < 0.5)) throw fail(line_of("alpha"), "alpha must lie in [0, 0.5)");
    if (!e.data.file.empty() && (kv.count("data.m") || kv.count("data.dim") || kv.count("data.sigma_h"))) {
        throw fail(line_of("data.file"), "data.file excludes data.m, data.dim and data.sigma_h");
    }
    if (!e.data.file.empty() && seen_axes.count(SweepAxis::SigmaH)) {
        throw fail(line_of("data.file"), "a sigma_h sweep needs generated data, not data.file");
    }
    e.run.seed = e.seeds.front();
    return e;
}

Experiment load_experiment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");
    return parse_experiment(in, path);
}

void resolve_paths(Experiment& e) {
    namespace fs = std::filesystem;
    const auto absolute = [](std::string& p) {
        if (!p.empty()) p = fs::absolute(fs::path(p)).lexically_normal().string();
    };
    absolute(e.data.file);
    absolute(e.out);
    absolute(e.plot);
    if (!e.data.file.empty() && !fs::is_regular_file(e.data.file)) {
        throw ConfigError(e.data.file + ": data file not found");
    }
    for (const std::string* p : {&e.out, &e.plot}) {
        if (p->empty()) continue;
        const auto parent = fs::path(*p).parent_path();
        if (!parent.empty() && !fs::is_directory(parent)) {
            throw ConfigError(*p + ": output directory does not exist");
        }
    }
}

void override_seed(Experiment& e, std::uint64_t seed) {
    e.seeds = {seed};
    e.run.seed = seed;
}

Dataset materialize(const DataSpec& desc, std::uint64_t run_seed) {
    if (!desc.file.empty()) {
        std::ifstream in(desc.file);
        if (!in) throw std::runtime_error(desc.file + ": cannot open data file");
        return read_dataset(in);
    }
    return generate_dataset(desc.m, desc.dimension, desc.sigma_h, desc.seed.value_or(run_seed));
}

}  // namespace cradl
