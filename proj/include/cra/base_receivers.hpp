#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "cra/channel_model.hpp"
#include "cra/poisson_receiver.hpp"

namespace cra {

/// Probability that a tagged packet is received by *all* receivers in the
/// subset: no interfering packet may reach any of them in that slot.
inline double psuc_all(const ChannelModel& channel, double rho, const ReceiverSet& subset) {
    if (!(rho >= 0.0)) throw ValidationError("psuc_all: load must be nonnegative");
    return std::exp(-rho * channel.reach_probability(subset));
}

inline double psuc_all_mask(const ChannelModel& channel, double rho, std::uint32_t mask) {
    return std::exp(-rho * channel.reach_probability_mask(mask));
}

/// Probability that a tagged packet is received by *at least one* receiver
/// in the subset, by inclusion-exclusion over its nonempty subsets.
inline double psuc_any(const ChannelModel& channel, double rho, const ReceiverSet& subset) {
    if (!(rho >= 0.0)) throw ValidationError("psuc_any: load must be nonnegative");
    const std::uint32_t mask = channel.subset_mask(subset);
    double acc = 0.0;
    for (std::uint32_t sub = mask; sub != 0; sub = (sub - 1) & mask) {
        const int bits = std::popcount(sub);
        const double term = psuc_all_mask(channel, rho, sub);
        acc += (bits % 2 == 1) ? term : -term;
    }
    return acc;
}

/// Success probability averaged over the tagged packet's own channel state.
inline double psuc_state_averaged(const ChannelModel& channel, double rho) {
    double acc = 0.0;
    for (std::uint32_t c = 1; c < channel.num_states(); ++c) {
        const double pc = channel.state_prob(c);
        if (pc == 0.0) continue;
        double any = 0.0;
        for (std::uint32_t sub = c; sub != 0; sub = (sub - 1) & c) {
            const double term = psuc_all_mask(channel, rho, sub);
            any += (std::popcount(sub) % 2 == 1) ? term : -term;
        }
        acc += pc * any;
    }
    return acc;
}

/// Classical slotted ALOHA on the collision channel: success e^-rho.
inline PoissonReceiver make_collision_sa() {
    return PoissonReceiver(
        1, [](const OfferedLoad& rho) { return std::vector<double>{std::exp(-rho[0])}; },
        true, "collision_sa");
}

/// Slot that decodes up to t_fold simultaneous packets and loses all of
/// them beyond that; t_fold = 1 is plain slotted ALOHA.
inline PoissonReceiver make_tfold(int t_fold) {
    if (t_fold < 1) throw ValidationError("tfold receiver: fold must be at least 1");
    return PoissonReceiver(
        1,
        [t_fold](const OfferedLoad& load) {
            const double rho = load[0];
            // sum_{t=0}^{T-1} e^-rho rho^t / t!
            double term = std::exp(-rho);
            double acc = term;
            for (int t = 1; t < t_fold; ++t) {
                term *= rho / static_cast<double>(t);
                acc += term;
            }
            return std::vector<double>{acc};
        },
        true, "tfold");
}

/// Single-class slotted ALOHA over a correlated two-receiver on-off channel.
/// Without cooperation a packet succeeds if it is alone at some receiver it
/// reaches; cooperation adds the cross-receiver cancellation term.
inline PoissonReceiver make_two_receiver(const ChannelModel& channel, bool cooperative) {
    const double p11 = channel.p11();
    const double p10 = channel.p10();
    const double p01 = channel.p01();
    const double p00 = channel.p00();
    auto fn = [p11, p10, p01, p00, cooperative](const OfferedLoad& load) {
        const double rho = load[0];
        const double r1 = p11 + p10;  // reach prob of receiver 1
        const double r2 = p11 + p01;
        double p = r1 * std::exp(-rho * r1) + r2 * std::exp(-rho * r2) -
                   p11 * std::exp(-rho * (1.0 - p00));
        if (cooperative) p += (p01 + p10) * rho * p11 * std::exp(-rho * (1.0 - p00));
        return std::vector<double>{p};
    };
    return PoissonReceiver(1, std::move(fn), true,
                           cooperative ? "two_receiver_coop" : "two_receiver_noncoop");
}

/// Two-receiver slot seen as three traffic classes: class 1 reaches
/// receiver 1 only, class 2 receiver 2 only, class 3 both.
inline PoissonReceiver make_two_receiver_three_class(bool cooperative) {
    auto fn = [cooperative](const OfferedLoad& rho) {
        const double r1 = rho[0], r2 = rho[1], r3 = rho[2];
        const double e13 = std::exp(-(r1 + r3));
        const double e23 = std::exp(-(r2 + r3));
        const double e123 = std::exp(-(r1 + r2 + r3));
        std::vector<double> out(3);
        if (cooperative) {
            out[0] = e13 + r3 * e123;
            out[1] = e23 + r3 * e123;
        } else {
            out[0] = e13;
            out[1] = e23;
        }
        out[2] = e13 + e23 - e123;
        return out;
    };
    return PoissonReceiver(3, std::move(fn), true,
                           cooperative ? "three_class_coop" : "three_class_noncoop");
}

/// Reach correlation of the two receivers in the symmetric family
/// p10 = p01 = (1 - p11) / 2; ranges from -1 (p11 = 0) to 0 (p11 = 1).
inline double correlation_coefficient(double p11) {
    if (!(p11 >= 0.0 && p11 <= 1.0))
        throw ValidationError("correlation coefficient: p11 outside [0,1]");
    return -(1.0 - p11) / (1.0 + p11);
}

/// The symmetric two-receiver channel family parameterized by p11.
inline ChannelModel symmetric_two_receiver_channel(double p11) {
    if (!(p11 >= 0.0 && p11 <= 1.0))
        throw ValidationError("symmetric channel: p11 outside [0,1]");
    const double side = (1.0 - p11) / 2.0;
    return ChannelModel::two_receiver(p11, side, side);
}

}  // namespace cra
