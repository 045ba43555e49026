#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "cra/errors.hpp"

namespace cra {

/// Receiver subset, receivers numbered 1..J.
using ReceiverSet = std::vector<int>;

/// Joint on-off reach distribution over J physical receivers.
///
/// A transmission sees the channel in one of 2^J states; state bit j-1 set
/// means the packet reaches receiver j. State probabilities may be
/// arbitrarily correlated across receivers.
class ChannelModel {
public:
    /// probs[mask] = probability of the reach state `mask`; must cover all
    /// 2^J masks and sum to 1 within 1e-9 (then renormalized exactly).
    static ChannelModel from_state_probs(int num_receivers, std::vector<double> probs) {
        if (num_receivers < 1 || num_receivers > 20)
            throw ValidationError("channel model: receiver count must be in [1,20]");
        const std::size_t n = std::size_t{1} << num_receivers;
        if (probs.size() != n) {
            std::ostringstream msg;
            msg << "channel model: expected " << n << " state probabilities, got " << probs.size();
            throw ValidationError(msg.str());
        }
        double sum = 0.0;
        for (double p : probs) {
            if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("channel model: state probability outside [0,1]");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            std::ostringstream msg;
            msg << "channel model: state probabilities sum to " << sum << ", expected 1 within 1e-9";
            throw ValidationError(msg.str());
        }
        for (double& p : probs) p /= sum;
        return ChannelModel(num_receivers, std::move(probs));
    }

    /// Two-receiver channel from the named reach probabilities.
    /// p11: reaches both, p10: receiver 1 only, p01: receiver 2 only.
    static ChannelModel two_receiver(double p11, double p10, double p01) {
        const double p00 = 1.0 - (p11 + p10 + p01);
        if (p00 < -1e-9) throw ValidationError("channel model: reach probabilities exceed 1");
        std::vector<double> probs(4, 0.0);
        probs[0b00] = p00 > 0.0 ? p00 : 0.0;
        probs[0b01] = p10;  // bit 0 = receiver 1
        probs[0b10] = p01;  // bit 1 = receiver 2
        probs[0b11] = p11;
        return from_state_probs(2, std::move(probs));
    }

    /// Single receiver that is always reached (classical collision channel).
    static ChannelModel ideal_single() { return from_state_probs(1, {0.0, 1.0}); }

    int num_receivers() const { return num_receivers_; }
    std::size_t num_states() const { return probs_.size(); }
    double state_prob(std::uint32_t mask) const { return probs_[mask]; }
    const std::vector<double>& state_probs() const { return probs_; }

    // Named accessors for the two-receiver case.
    double p00() const { return require_two(), probs_[0b00]; }
    double p10() const { return require_two(), probs_[0b01]; }
    double p01() const { return require_two(), probs_[0b10]; }
    double p11() const { return require_two(), probs_[0b11]; }

    /// Bitmask for a 1-based receiver subset; validates the indices.
    std::uint32_t subset_mask(const ReceiverSet& subset) const {
        std::uint32_t mask = 0;
        for (int r : subset) {
            if (r < 1 || r > num_receivers_)
                throw ValidationError("channel model: receiver index out of range");
            mask |= std::uint32_t{1} << (r - 1);
        }
        return mask;
    }

    /// Probability that a transmission reaches at least one receiver in the
    /// subset. Empty subsets have reach probability 0.
    double reach_probability(const ReceiverSet& subset) const {
        return reach_probability_mask(subset_mask(subset));
    }

    double reach_probability_mask(std::uint32_t mask) const {
        double p = 0.0;
        for (std::uint32_t c = 0; c < probs_.size(); ++c)
            if (c & mask) p += probs_[c];
        return p;
    }

private:
    ChannelModel(int num_receivers, std::vector<double> probs)
        : num_receivers_(num_receivers), probs_(std::move(probs)) {}

    void require_two() const {
        if (num_receivers_ != 2)
            throw ValidationError("channel model: named reach probabilities require exactly 2 receivers");
    }

    int num_receivers_;
    std::vector<double> probs_;  // indexed by reach mask
};

}  // namespace cra
