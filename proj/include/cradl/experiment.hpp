#pragma once

// Experiment files: one `key = value` per line, `#` starts a comment.
//
//   method = CRA-DL          devices = 100        allocation = random
//   r = 40 | 0.4M            rule = median        attack = signflip:-2
//   alpha = 0.2              lr = 0.001 | lambda = 0.5
//   schedule = decaying      gamma0 = ...  rho1 = ...  rho2 = ...
//   iterations = 500         seed = 0             seeds = 0..4 | 0,1,2
//   init = 0
//   data.m = 1000  data.dim = 100  data.sigma_h = 0  data.seed = 7  data.file = path
//   out = results.csv        plot = results.svg   figure = sign flipping
//   sweep.<axis> = v1, v2, ...   axis in {r, alpha, sigma_h, rule, attack, method}

#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cradl/problem.hpp"
#include "cradl/trainer.hpp"

namespace cradl {

/// Malformed experiment file; the message carries `source:line:`.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Subsets per device, either absolute or as a fraction of M.
struct PerDevice {
    double value = 40.0;
    bool fraction_of_m = false;

    std::size_t resolve(std::size_t subsets) const;
    std::string text() const;
};
PerDevice parse_per_device(std::string_view text);

struct DataSpec {
    std::size_t m = 1000;
    std::size_t dimension = 100;
    double sigma_h = 0.0;
    std::optional<std::uint64_t> seed;  // run seed when unset
    std::string file;                   // load instead of generating when set
};

enum class SweepAxis { R, Alpha, SigmaH, Rule, Attack, Method };
std::string_view axis_name(SweepAxis axis);

struct SweepSpec {
    SweepAxis axis;
    std::vector<std::string> values;
};

struct Experiment {
    RunConfig run;  // per_device is filled from `r` once M is known
    PerDevice r;
    bool lambda_rate = false;  // lr given as lambda, gamma = lambda / sqrt(T + 1)
    double lambda = 0.0;
    DataSpec data;
    std::vector<std::uint64_t> seeds;  // never empty after parsing
    std::vector<SweepSpec> sweeps;     // in file order
    std::string out;
    std::string plot;
    std::string figure;
};

Experiment parse_experiment(std::istream& in, const std::string& source);
Experiment load_experiment(const std::string& path);

/// Makes every path absolute and checks that input files exist.
void resolve_paths(Experiment& e);

/// Replaces the seed list by one seed.
void override_seed(Experiment& e, std::uint64_t seed);

/// Dataset described by `desc` for a run seeded with `run_seed`.
Dataset materialize(const DataSpec& desc, std::uint64_t run_seed);

}  // namespace cradl
