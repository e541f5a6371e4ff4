#pragma once

// Byzantine identity sampling and attack vectors. Identities are redrawn every
// iteration from the stream (seed, iteration); per-device attack randomness
// uses (seed, iteration, device).

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cradl/linalg.hpp"
#include "cradl/rng.hpp"

namespace cradl {

struct IdentitySample {
    std::vector<std::size_t> honest;     // ascending
    std::vector<std::size_t> byzantine;  // ascending
    std::size_t iteration = 0;
};

/// Number of Byzantine devices: round(alpha N).
std::size_t byzantine_count(std::size_t devices, double alpha);

/// Requires 0 <= alpha < 0.5.
IdentitySample sample_identities(std::size_t devices, double alpha, std::size_t iteration,
                                 std::uint64_t seed);

enum class AttackKind { SignFlip, Gaussian, SampleDuplicate };

struct AttackSpec {
    AttackKind kind = AttackKind::SignFlip;
    double coefficient = -2.0;
    double variance = 10000.0;
};

/// Grammar: signflip[:<coef>] | gaussian[:<var>] | duplicate
AttackSpec parse_attack(std::string_view text);
std::string to_string(const AttackSpec& attack);
void validate(const AttackSpec& attack);

Vector attack_sign_flip(std::span<const double> true_msg, double coefficient = -2.0);
Vector attack_gaussian(std::size_t dimension, double variance, Rng& rng);
/// Bit-exact copy of a uniformly chosen honest message.
Vector attack_sample_duplicate(std::span<const Vector> honest_msgs, Rng& rng);

/// Message sent by a Byzantine device whose true message is `true_msg`.
Vector byzantine_message(const AttackSpec& attack, std::span<const double> true_msg,
                         std::span<const Vector> honest_msgs, Rng& rng);

}  // namespace cradl
