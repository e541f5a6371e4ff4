#include "cradl/adversary.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace cradl {

std::size_t byzantine_count(std::size_t devices, double alpha) {
    return static_cast<std::size_t>(std::llround(alpha * static_cast<double>(devices)));
}

IdentitySample sample_identities(std::size_t devices, double alpha, std::size_t iteration,
                                 std::uint64_t seed) {
    if (!(alpha >= 0.0 && alpha < 0.5)) {
        throw std::invalid_argument("alpha=" + std::to_string(alpha) + " outside [0, 0.5)");
    }
    if (devices == 0) throw std::invalid_argument("sample_identities: no devices");
    IdentitySample s;
    s.iteration = iteration;
    Rng rng = make_rng(seed, "identities", {iteration});
    s.byzantine = sample_subset(rng, devices, byzantine_count(devices, alpha));
    s.honest.reserve(devices - s.byzantine.size());
    std::size_t p = 0;
    for (std::size_t i = 0; i < devices; ++i) {
        if (p < s.byzantine.size() && s.byzantine[p] == i) {
            ++p;
        } else {
            s.honest.push_back(i);
        }
    }
    return s;
}

namespace {

double parse_number(std::string_view text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw std::invalid_argument("bad attack parameter '" + std::string(text) + "'");
    }
    return v;
}

}  // namespace

void validate(const AttackSpec& attack) {
    if (attack.kind == AttackKind::SignFlip && !(attack.coefficient < 0.0)) {
        throw std::invalid_argument("signflip coefficient must be negative");
    }
    if (attack.kind == AttackKind::Gaussian && !(attack.variance > 0.0)) {
        throw std::invalid_argument("gaussian variance must be positive");
    }
}

AttackSpec parse_attack(std::string_view text) {
    std::string_view head = text;
    std::string_view arg;
    if (const auto colon = text.find(':'); colon != std::string_view::npos) {
        head = text.substr(0, colon);
        arg = text.substr(colon + 1);
    }
    AttackSpec a;
    if (head == "signflip") {
        a.kind = AttackKind::SignFlip;
        if (!arg.empty()) a.coefficient = parse_number(arg);
    } else if (head == "gaussian") {
        a.kind = AttackKind::Gaussian;
        if (!arg.empty()) a.variance = parse_number(arg);
    } else if (head == "duplicate" && arg.empty()) {
        a.kind = AttackKind::SampleDuplicate;
    } else {
        throw std::invalid_argument("unknown attack '" + std::string(text) +
                                    "' (signflip:<coef> | gaussian:<var> | duplicate)");
    }
    validate(a);
    return a;
}

std::string to_string(const AttackSpec& attack) {
    char buf[64];
    switch (attack.kind) {
        case AttackKind::SignFlip:
            std::snprintf(buf, sizeof buf, "signflip:%g", attack.coefficient);
            return buf;
        case AttackKind::Gaussian:
            std::snprintf(buf, sizeof buf, "gaussian:%g", attack.variance);
            return buf;
        case AttackKind::SampleDuplicate:
            return "duplicate";
    }
    return "?";
}

Vector attack_sign_flip(std::span<const double> true_msg, double coefficient) {
    Vector out(true_msg.begin(), true_msg.end());
    for (double& v : out) v *= coefficient;
    return out;
}

Vector attack_gaussian(std::size_t dimension, double variance, Rng& rng) {
    if (dimension == 0) throw std::invalid_argument("attack_gaussian: dimension must be positive");
    std::normal_distribution<double> dist(0.0, std::sqrt(variance));
    Vector out(dimension);
    for (double& v : out) v = dist(rng);
    return out;
}

Vector attack_sample_duplicate(std::span<const Vector> honest_msgs, Rng& rng) {
    if (honest_msgs.empty()) throw std::invalid_argument("attack_sample_duplicate: no honest messages");
    std::uniform_int_distribution<std::size_t> pick(0, honest_msgs.size() - 1);
    return honest_msgs[pick(rng)];
}

Vector byzantine_message(const AttackSpec& attack, std::span<const double> true_msg,
                         std::span<const Vector> honest_msgs, Rng& rng) {
    switch (attack.kind) {
        case AttackKind::SignFlip: return attack_sign_flip(true_msg, attack.coefficient);
        case AttackKind::Gaussian: return attack_gaussian(true_msg.size(), attack.variance, rng);
        case AttackKind::SampleDuplicate: return attack_sample_duplicate(honest_msgs, rng);
    }
    throw std::logic_error("byzantine_message: unknown attack");
}

}  // namespace cradl
