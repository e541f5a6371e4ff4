#include "cradl/coding.hpp"

#include <stdexcept>
#include <string>

namespace cradl {

Vector encode_subsets(std::span<const std::size_t> held, std::span<const std::size_t> replication,
                      const std::map<std::size_t, Vector>& local_grads) {
    if (local_grads.size() != held.size()) {
        throw std::invalid_argument("encode: expected " + std::to_string(held.size()) +
                                    " local gradients, got " + std::to_string(local_grads.size()));
    }
    if (held.empty()) throw std::invalid_argument("encode: device holds no subsets");
    Vector out;
    for (std::size_t k : held) {
        const auto it = local_grads.find(k);
        if (it == local_grads.end()) {
            throw std::invalid_argument("encode: missing gradient for subset " + std::to_string(k));
        }
        if (k >= replication.size() || replication[k] == 0) {
            throw std::invalid_argument("encode: replication count of subset " + std::to_string(k) +
                                        " is zero");
        }
        if (out.empty()) out.assign(it->second.size(), 0.0);
        axpy(1.0 / static_cast<double>(replication[k]), it->second, out);
    }
    return out;
}

CodedGradient encode_device(std::size_t device, const AllocationMatrix& s,
                            const std::map<std::size_t, Vector>& local_grads) {
    return {device, encode_subsets(s.row(device), s.replication(), local_grads)};
}

void encode_all_into(const AllocationMatrix& s, std::span<const Vector> subset_grads,
                     std::vector<Vector>& out) {
    if (subset_grads.size() != s.subsets()) {
        throw std::invalid_argument("encode_all: need gradients for all " +
                                    std::to_string(s.subsets()) + " subsets");
    }
    const std::size_t dim = subset_grads.front().size();
    const auto d = s.replication();
    out.resize(s.devices());
    for (std::size_t i = 0; i < s.devices(); ++i) {
        out[i].assign(dim, 0.0);
        for (std::size_t k : s.row(i)) axpy(1.0 / static_cast<double>(d[k]), subset_grads[k], out[i]);
    }
}

std::vector<CodedGradient> encode_all(const AllocationMatrix& s,
                                      std::span<const Vector> subset_grads) {
    std::vector<Vector> raw;
    encode_all_into(s, subset_grads, raw);
    std::vector<CodedGradient> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = {i, std::move(raw[i])};
    return out;
}

Vector honest_average(std::span<const Vector> messages, std::span<const std::size_t> honest) {
    if (honest.empty()) throw std::invalid_argument("honest_average: empty honest set");
    Vector out(messages[honest.front()].size(), 0.0);
    for (std::size_t i : honest) axpy(1.0, messages[i], out);
    const double inv = 1.0 / static_cast<double>(honest.size());
    for (double& v : out) v *= inv;
    return out;
}

Vector honest_average(std::span<const CodedGradient> messages) {
    if (messages.empty()) throw std::invalid_argument("honest_average: empty honest set");
    Vector out(messages.front().vector.size(), 0.0);
    for (const auto& m : messages) axpy(1.0, m.vector, out);
    const double inv = 1.0 / static_cast<double>(messages.size());
    for (double& v : out) v *= inv;
    return out;
}

}  // namespace cradl
