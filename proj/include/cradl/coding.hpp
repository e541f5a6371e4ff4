#pragma once

// Per-device gradient encoding: g_i = sum_{k held by i} grad f_k / d_k.
// Summed over all devices the coded gradients reproduce the full gradient.

#include <map>
#include <span>
#include <vector>

#include "cradl/allocation.hpp"
#include "cradl/linalg.hpp"

namespace cradl {

struct CodedGradient {
    std::size_t device = 0;
    Vector vector;
};

/// `local_grads` must hold exactly the subsets of `held`; every d_k >= 1.
Vector encode_subsets(std::span<const std::size_t> held, std::span<const std::size_t> replication,
                      const std::map<std::size_t, Vector>& local_grads);

CodedGradient encode_device(std::size_t device, const AllocationMatrix& s,
                            const std::map<std::size_t, Vector>& local_grads);

/// Columns of G = A S^T, one coded gradient per device, each summed in
/// ascending subset order.
std::vector<CodedGradient> encode_all(const AllocationMatrix& s,
                                      std::span<const Vector> subset_grads);

/// Raw message matrix variant used by the trainer: writes N vectors into `out`.
void encode_all_into(const AllocationMatrix& s, std::span<const Vector> subset_grads,
                     std::vector<Vector>& out);

/// Mean of the given messages over the (ascending) index set `honest`.
Vector honest_average(std::span<const Vector> messages, std::span<const std::size_t> honest);
Vector honest_average(std::span<const CodedGradient> messages);

}  // namespace cradl
