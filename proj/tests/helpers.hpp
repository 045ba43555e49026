#pragma once

// Shared test oracles, independent of the library's analytic paths.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "cra/cra.hpp"

namespace testutil {

/// Probability that a tagged packet is clean at >= 1 receiver of `subset`,
/// by direct enumeration over interferer counts and channel states: a
/// coverage DP over which receivers of the subset are already hit. No
/// inclusion-exclusion involved.
inline double psuc_any_enumeration(const cra::ChannelModel& channel, double rho,
                                   const cra::ReceiverSet& subset, double tail = 1e-13) {
    const std::uint32_t mask = channel.subset_mask(subset);
    if (mask == 0) return 0.0;
    const int bits = std::popcount(mask);

    // Category probabilities: which sub-part of `subset` one interferer hits.
    std::vector<double> category(std::size_t{1} << bits, 0.0);
    for (std::uint32_t c = 0; c < channel.num_states(); ++c) {
        std::uint32_t hit = 0;
        int out = 0;
        for (std::uint32_t m = mask; m; m &= m - 1) {
            const int r = std::countr_zero(m);
            if (c & (std::uint32_t{1} << r)) hit |= std::uint32_t{1} << out;
            ++out;
        }
        category[hit] += channel.state_prob(c);
    }

    const std::uint32_t full = (std::uint32_t{1} << bits) - 1;
    double total = 0.0;
    double pn = std::exp(-rho);  // P(N interferers = n)
    double cum = 0.0;
    std::vector<double> dp(full + 1, 0.0), next(full + 1, 0.0);
    dp[0] = 1.0;
    for (int n = 0; cum < 1.0 - tail; ++n) {
        if (n > 0) {
            pn *= rho / n;
            std::fill(next.begin(), next.end(), 0.0);
            for (std::uint32_t s = 0; s <= full; ++s) {
                if (dp[s] == 0.0) continue;
                for (std::uint32_t t = 0; t <= full; ++t)
                    if (category[t] > 0.0) next[s | t] += dp[s] * category[t];
            }
            dp.swap(next);
        }
        double clean_somewhere = 0.0;
        for (std::uint32_t s = 0; s < full; ++s) clean_somewhere += dp[s];
        total += pn * clean_somewhere;
        cum += pn;
        if (n > 500) break;
    }
    return total;
}

/// Monte Carlo estimate of the tagged-packet success probability in a single
/// two-receiver slot, using the finite-system decoder as the mechanism.
/// Returns (estimate, standard error).
inline std::pair<double, double> slot_mc(const cra::ChannelModel& channel, double rho,
                                         bool cooperative, int trials, std::uint64_t seed) {
    std::mt19937_64 rng = cra::make_stream_rng(seed, 7);
    long long success = 0;
    for (int t = 0; t < trials; ++t) {
        const long long others = cra::sample_poisson(rng, rho);
        cra::Instance inst;
        inst.t_slots = 1;
        inst.num_receivers = channel.num_receivers();
        inst.class_population = {others + 1};
        for (long long u = 0; u < others + 1; ++u) {
            inst.user_class.push_back(0);
            inst.user_copy_begin.push_back(static_cast<std::size_t>(u));
            inst.copy_user.push_back(static_cast<int>(u));
            inst.copy_slot.push_back(0);
            inst.copy_mask.push_back(static_cast<std::uint32_t>(
                cra::sample_categorical(rng, channel.state_probs())));
        }
        inst.user_copy_begin.push_back(inst.copy_user.size());
        const cra::DecodeResult res = cra::sic_decode(
            inst, cooperative ? cra::DecodeMode::spatial : cra::DecodeMode::plain, 100);
        success += res.user_decoded[0];  // user 0 is the tagged packet
    }
    const double p = static_cast<double>(success) / trials;
    return {p, std::sqrt(p * (1.0 - p) / trials)};
}

inline cra::DegreeDistribution random_dd(std::mt19937_64& rng, std::size_t max_degree = 6) {
    std::vector<double> coeffs(max_degree + 1, 0.0);
    double sum = 0.0;
    for (double& c : coeffs) {
        c = cra::uniform_unit(rng);
        sum += c;
    }
    for (double& c : coeffs) c /= sum;
    return cra::DegreeDistribution::from_coeffs(std::move(coeffs));
}

inline cra::ChannelModel random_channel(std::mt19937_64& rng, int receivers) {
    std::vector<double> probs(std::size_t{1} << receivers, 0.0);
    double sum = 0.0;
    for (double& p : probs) {
        p = cra::uniform_unit(rng);
        sum += p;
    }
    for (double& p : probs) p /= sum;
    return cra::ChannelModel::from_state_probs(receivers, std::move(probs));
}

/// Checks coordinatewise monotone decrease of every class's success
/// probability on a regular grid. Returns the worst (most positive) increase
/// found between adjacent grid points.
inline double worst_monotonicity_violation(const cra::PoissonReceiver& receiver, double max_load,
                                           double step) {
    const std::size_t k = receiver.num_classes();
    const int n = static_cast<int>(std::floor(max_load / step + 1e-9)) + 1;
    std::vector<int> idx(k, 0);
    double worst = -1.0;
    // Walk the full grid; compare against the +step neighbour in each axis.
    while (true) {
        std::vector<double> load(k);
        for (std::size_t d = 0; d < k; ++d) load[d] = idx[d] * step;
        const std::vector<double> base = receiver.success(cra::OfferedLoad{load});
        for (std::size_t d = 0; d < k; ++d) {
            if (idx[d] + 1 >= n) continue;
            std::vector<double> up(load);
            up[d] += step;
            const std::vector<double> higher = receiver.success(cra::OfferedLoad{up});
            for (std::size_t c = 0; c < k; ++c) worst = std::max(worst, higher[c] - base[c]);
        }
        std::size_t d = 0;
        while (d < k && ++idx[d] == n) idx[d++] = 0;
        if (d == k) break;
    }
    return worst;
}

}  // namespace testutil
