#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "cra/channel_model.hpp"
#include "cra/poisson_receiver.hpp"

namespace cra {

/// Bipartite class-to-receiver association: class k packets reach exactly
/// the receivers in footprint B_k (with probability 1).
class AssociationGraph {
public:
    AssociationGraph(int num_receivers, std::vector<ReceiverSet> footprints)
        : num_receivers_(num_receivers) {
        if (num_receivers < 1 || num_receivers > 31)
            throw ValidationError("association graph: receiver count must be in [1,31]");
        if (footprints.empty()) throw ValidationError("association graph: needs at least one class");
        for (const ReceiverSet& b : footprints) {
            if (b.empty()) throw ValidationError("association graph: empty class footprint");
            std::uint32_t mask = 0;
            for (int r : b) {
                if (r < 1 || r > num_receivers)
                    throw ValidationError("association graph: receiver index out of range");
                mask |= std::uint32_t{1} << (r - 1);
            }
            masks_.push_back(mask);
        }
        footprints_ = std::move(footprints);
    }

    std::size_t num_classes() const { return masks_.size(); }
    int num_receivers() const { return num_receivers_; }
    const std::vector<ReceiverSet>& footprints() const { return footprints_; }
    std::uint32_t footprint_mask(std::size_t k) const { return masks_[k]; }

private:
    int num_receivers_;
    std::vector<ReceiverSet> footprints_;
    std::vector<std::uint32_t> masks_;
};

/// Truncated per-slot arrival pattern and the packets it lets through.
/// m_k counts class k packets in the slot, saturated at 2; w_k flags whether
/// the (then unique) class k packet is decoded.
struct ConfigurationOutcome {
    std::vector<int> m;
    std::vector<int> w;
};

namespace detail {

/// Peels one arrival configuration. Receivers covered by any class with two
/// or more packets are jammed for the whole slot; among the singleton
/// classes, any class alone at some live receiver decodes and its edges are
/// removed, cascading until nothing moves. Returns a bitmask of decoded
/// classes.
inline std::uint32_t peel_configuration(const AssociationGraph& assoc, const int* m,
                                        std::vector<int>& count, std::vector<int>& ids,
                                        std::vector<int>& stack) {
    const std::size_t num_classes = assoc.num_classes();
    const int num_recv = assoc.num_receivers();

    std::uint32_t jammed = 0;
    for (std::size_t k = 0; k < num_classes; ++k)
        if (m[k] >= 2) jammed |= assoc.footprint_mask(k);

    count.assign(num_recv, 0);
    ids.assign(num_recv, 0);
    for (std::size_t k = 0; k < num_classes; ++k) {
        if (m[k] != 1) continue;
        std::uint32_t mask = assoc.footprint_mask(k) & ~jammed;
        while (mask) {
            const int r = std::countr_zero(mask);
            mask &= mask - 1;
            ++count[r];
            ids[r] += static_cast<int>(k);
        }
    }

    stack.clear();
    for (int r = 0; r < num_recv; ++r)
        if (count[r] == 1) stack.push_back(r);

    std::uint32_t decoded = 0;
    while (!stack.empty()) {
        const int r = stack.back();
        stack.pop_back();
        if (count[r] != 1) continue;
        const int k = ids[r];
        if (decoded & (std::uint32_t{1} << k)) continue;
        decoded |= std::uint32_t{1} << k;
        std::uint32_t mask = assoc.footprint_mask(static_cast<std::size_t>(k)) & ~jammed;
        while (mask) {
            const int rr = std::countr_zero(mask);
            mask &= mask - 1;
            --count[rr];
            ids[rr] -= k;
            if (count[rr] == 1) stack.push_back(rr);
        }
    }
    return decoded;
}

}  // namespace detail

/// Decodes a single truncated arrival configuration against an association
/// graph; spatial cancellation only, within one slot.
inline ConfigurationOutcome decode_configuration(const AssociationGraph& assoc,
                                                 const std::vector<int>& m) {
    if (m.size() != assoc.num_classes())
        throw ValidationError("decode configuration: arity mismatch with association graph");
    for (int v : m)
        if (v < 0 || v > 2) throw ValidationError("decode configuration: entries must be 0, 1 or 2");

    std::vector<int> count, ids, stack;
    const std::uint32_t decoded = detail::peel_configuration(assoc, m.data(), count, ids, stack);

    ConfigurationOutcome out;
    out.m = m;
    out.w.assign(m.size(), 0);
    for (std::size_t k = 0; k < m.size(); ++k)
        out.w[k] = (decoded >> k) & 1u;
    return out;
}

/// Builds the exact multi-class receiver for cooperative slotted ALOHA with
/// fixed footprints, by enumerating all 3^K truncated arrival
/// configurations. Decode outcomes are precomputed at construction; each
/// evaluation is a weighted sum over configurations.
///
/// The truncation at 2 is exact here because all class k packets share the
/// footprint B_k: two or more of them jam every receiver in B_k outright.
inline PoissonReceiver make_multi_receiver(const AssociationGraph& assoc, int class_cap = 14) {
    const std::size_t num_classes = assoc.num_classes();
    if (num_classes > static_cast<std::size_t>(class_cap) || num_classes > 18) {
        std::ostringstream msg;
        msg << "multi receiver: " << num_classes << " classes needs 3^" << num_classes
            << " configurations per evaluation, above the cap of " << class_cap;
        throw CapacityError(msg.str());
    }

    std::size_t total = 1;
    for (std::size_t k = 0; k < num_classes; ++k) total *= 3;

    // Precompute the decoded-class bitmask for every configuration, walking
    // the configurations as a base-3 counter.
    std::vector<std::uint32_t> decoded_masks(total);
    {
        std::vector<int> m(num_classes, 0), count, ids, stack;
        for (std::size_t idx = 0;; ++idx) {
            decoded_masks[idx] = detail::peel_configuration(assoc, m.data(), count, ids, stack);
            std::size_t d = 0;
            while (d < num_classes && ++m[d] == 3) m[d++] = 0;
            if (d == num_classes) break;
        }
    }

    auto fn = [num_classes, total, decoded_masks](const OfferedLoad& load) {
        // Arrival-count probabilities per class, truncated at 2.
        std::vector<double> h(num_classes * 3), tagged(num_classes);
        for (std::size_t k = 0; k < num_classes; ++k) {
            const double rho = load[k];
            const double e = std::exp(-rho);
            h[k * 3 + 0] = e;
            h[k * 3 + 1] = rho * e;
            h[k * 3 + 2] = 1.0 - e - rho * e;
            tagged[k] = e;  // h1(rho)/rho, the tagged packet's own-class factor
        }

        std::vector<double> psuc(num_classes, 0.0);
        std::vector<int> m(num_classes, 0);
        std::vector<double> prefix(num_classes + 1), suffix(num_classes + 1);
        for (std::size_t idx = 0;; ++idx) {
            const std::uint32_t decoded = decoded_masks[idx];
            if (decoded) {
                prefix[0] = 1.0;
                for (std::size_t k = 0; k < num_classes; ++k)
                    prefix[k + 1] = prefix[k] * h[k * 3 + m[k]];
                suffix[num_classes] = 1.0;
                for (std::size_t k = num_classes; k-- > 0;)
                    suffix[k] = suffix[k + 1] * h[k * 3 + m[k]];
                for (std::size_t k = 0; k < num_classes; ++k) {
                    if (m[k] == 1 && ((decoded >> k) & 1u))
                        psuc[k] += tagged[k] * prefix[k] * suffix[k + 1];
                }
            }
            std::size_t d = 0;
            while (d < num_classes && ++m[d] == 3) m[d++] = 0;
            if (d == num_classes) break;
        }
        return psuc;
    };

    return PoissonReceiver(num_classes, std::move(fn), true, "multi_receiver");
}

}  // namespace cra
