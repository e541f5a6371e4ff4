#include "cradl/results.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace cradl {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

// Attack and rule strings may contain commas only in theory; quote defensively.
std::string field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

double parse_real(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw std::invalid_argument("bad real '" + s + "'");
    return v;
}

std::uint64_t parse_uint(const std::string& s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw std::invalid_argument("bad integer '" + s + "'");
    }
    return v;
}

}  // namespace

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::size_t effective_per_device(const RunConfig& config, std::size_t subsets) {
    switch (config.allocation) {
        case AllocationScheme::NonRedundant: return subsets / config.devices;
        case AllocationScheme::FullReplication: return subsets;
        case AllocationScheme::UniformRandom: return config.per_device;
    }
    return 0;
}

std::vector<ResultRow> to_rows(const Trajectory& trajectory, std::size_t run_id,
                               std::size_t subsets, double sigma_h) {
    const RunConfig& c = trajectory.config;
    const std::string method(method_name(c.method));
    const std::string rule = to_string(c.rule);
    const std::string attack = to_string(c.attack);
    const std::size_t r = effective_per_device(c, subsets);
    std::vector<ResultRow> rows;
    rows.reserve(trajectory.records.size());
    for (const auto& rec : trajectory.records) {
        rows.push_back({run_id, method, rule, attack, c.alpha, r, sigma_h, c.seed, rec.t, rec.loss,
                        rec.grad_norm, rec.agg_error, rec.lr});
    }
    return rows;
}

void write_results(std::ostream& os, std::span<const ResultRow> rows) {
    os << kResultHeader << '\n';
    for (const auto& row : rows) {
        os << row.run_id << ',' << field(row.method) << ',' << field(row.rule) << ','
           << field(row.attack) << ',' << format_real(row.alpha) << ',' << row.r << ','
           << format_real(row.sigma_h) << ',' << row.seed << ',' << row.iteration << ','
           << format_real(row.loss) << ',' << format_real(row.grad_norm) << ','
           << format_real(row.agg_error) << ',' << format_real(row.lr) << '\n';
    }
}

std::vector<ResultRow> read_results(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kResultHeader) {
        throw std::runtime_error("results: line 1: expected header '" + std::string(kResultHeader) + "'");
    }
    std::vector<ResultRow> rows;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        try {
            if (f.size() != 13) throw std::invalid_argument("expected 13 fields");
            ResultRow r;
            r.run_id = parse_uint(f[0]);
            r.method = f[1];
            r.rule = f[2];
            r.attack = f[3];
            r.alpha = parse_real(f[4]);
            r.r = parse_uint(f[5]);
            r.sigma_h = parse_real(f[6]);
            r.seed = parse_uint(f[7]);
            r.iteration = parse_uint(f[8]);
            r.loss = parse_real(f[9]);
            r.grad_norm = parse_real(f[10]);
            r.agg_error = parse_real(f[11]);
            r.lr = parse_real(f[12]);
            rows.push_back(std::move(r));
        } catch (const std::exception& ex) {
            throw std::runtime_error("results: line " + std::to_string(lineno) + ": " + ex.what());
        }
    }
    return rows;
}

void write_skipped(std::ostream& os, std::span<const SkippedRun> rows) {
    os << kSkippedHeader << '\n';
    for (const auto& s : rows) {
        os << s.run_id << ',' << field(s.method) << ',' << field(s.rule) << ',' << field(s.attack)
           << ',' << format_real(s.alpha) << ',' << field(s.r) << ',' << format_real(s.sigma_h) << ','
           << s.seed << ',' << field(s.reason) << '\n';
    }
}

}  // namespace cradl
