#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <vector>

#include "cra/simulator.hpp"

namespace cra {

/// A scenario small enough for exhaustive enumeration: at most 3 slots,
/// 4 users in total, 2 physical receivers, and degree 3 per packet.
struct SmallSystem {
    Scenario scenario;
    static constexpr double kMaxLeaves = 1e7;

    explicit SmallSystem(Scenario s) : scenario(std::move(s)) {
        scenario.validate();
        if (scenario.t_slots > 3) throw ValidationError("small system: more than 3 slots");
        if (scenario.channel.num_receivers() > 2)
            throw ValidationError("small system: more than 2 receivers");
        long long total_users = 0;
        for (const ClassTraffic& c : scenario.classes) {
            total_users += c.population(scenario.t_slots);
            if (c.dd.max_degree() > 3)
                throw ValidationError("small system: degree support above 3");
        }
        if (total_users > 4) throw ValidationError("small system: more than 4 users in total");
        if (leaf_count() > kMaxLeaves) {
            std::ostringstream msg;
            msg << "small system: enumeration needs " << leaf_count()
                << " assignments, above the budget of " << kMaxLeaves;
            throw CapacityError(msg.str());
        }
    }

    /// Number of (degree, slot, reach) assignments to enumerate.
    double leaf_count() const {
        double total = 1.0;
        for (const ClassTraffic& c : scenario.classes) {
            int reach_options = 1;
            if (!c.fixed_footprint) {
                reach_options = 0;
                for (double p : scenario.channel.state_probs())
                    if (p > 0.0) ++reach_options;
            }
            const double per_copy = static_cast<double>(scenario.t_slots) * reach_options;
            double per_user = 0.0;
            for (std::size_t d = 0; d < c.dd.coeffs().size(); ++d)
                if (c.dd.coeffs()[d] > 0.0) per_user += std::pow(per_copy, static_cast<double>(d));
            for (long long u = 0; u < c.population(scenario.t_slots); ++u) total *= per_user;
        }
        return total;
    }
};

/// Exact per-class success probabilities by exhausting every copy-count,
/// slot and reach-state assignment, weighting each by its probability and
/// running the very same decoder as the Monte Carlo path. Weights accumulate
/// in log space and are exponentiated per leaf.
inline std::vector<double> exact_success(const SmallSystem& sys) {
    const Scenario& sc = sys.scenario;
    const std::size_t num_classes = sc.classes.size();

    // Flatten the user list in the same class-major order as build_instance.
    std::vector<int> user_class;
    for (std::size_t k = 0; k < num_classes; ++k)
        for (long long u = 0; u < sc.classes[k].population(sc.t_slots); ++u)
            user_class.push_back(static_cast<int>(k));
    const std::size_t num_users = user_class.size();

    std::vector<double> decoded_mass(num_classes, 0.0);
    std::vector<long long> populations(num_classes, 0);
    for (int k : user_class) ++populations[static_cast<std::size_t>(k)];

    if (num_users == 0) return std::vector<double>(num_classes, 1.0);

    // Reach-state options per class: (mask, log prob) pairs.
    std::vector<std::vector<std::pair<std::uint32_t, double>>> reach_options(num_classes);
    for (std::size_t k = 0; k < num_classes; ++k) {
        if (sc.classes[k].fixed_footprint) {
            reach_options[k].emplace_back(sc.channel.subset_mask(*sc.classes[k].fixed_footprint),
                                          0.0);
        } else {
            for (std::uint32_t m = 0; m < sc.channel.num_states(); ++m)
                if (sc.channel.state_prob(m) > 0.0)
                    reach_options[k].emplace_back(m, std::log(sc.channel.state_prob(m)));
        }
    }
    const double log_slot = -std::log(static_cast<double>(sc.t_slots));

    std::vector<int> degrees(num_users, 0);
    Instance inst;
    inst.t_slots = sc.t_slots;
    inst.num_receivers = sc.channel.num_receivers();
    inst.user_class = user_class;
    inst.class_population = populations;

    // Inner recursion: assign (slot, reach) to each copy in turn.
    std::function<void(std::size_t, double)> assign_copy = [&](std::size_t c, double log_w) {
        if (c == inst.copy_slot.size()) {
            const DecodeResult res = sic_decode(inst, sc.mode, sc.max_sic_iters);
            const double w = std::exp(log_w);
            for (std::size_t u = 0; u < num_users; ++u)
                if (res.user_decoded[u])
                    decoded_mass[static_cast<std::size_t>(user_class[u])] += w;
            return;
        }
        const std::size_t k = static_cast<std::size_t>(
            inst.user_class[static_cast<std::size_t>(inst.copy_user[c])]);
        for (int slot = 0; slot < sc.t_slots; ++slot) {
            inst.copy_slot[c] = static_cast<std::uint32_t>(slot);
            for (const auto& [mask, log_p] : reach_options[k]) {
                inst.copy_mask[c] = mask;
                assign_copy(c + 1, log_w + log_slot + log_p);
            }
        }
    };

    // Outer recursion: choose each user's copy count.
    std::function<void(std::size_t, double)> assign_degree = [&](std::size_t u, double log_w) {
        if (u == num_users) {
            inst.user_copy_begin.clear();
            inst.copy_user.clear();
            for (std::size_t uu = 0; uu < num_users; ++uu) {
                inst.user_copy_begin.push_back(inst.copy_user.size());
                for (int d = 0; d < degrees[uu]; ++d)
                    inst.copy_user.push_back(static_cast<int>(uu));
            }
            inst.user_copy_begin.push_back(inst.copy_user.size());
            inst.copy_slot.assign(inst.copy_user.size(), 0);
            inst.copy_mask.assign(inst.copy_user.size(), 0);
            assign_copy(0, log_w);
            return;
        }
        const std::vector<double>& probs =
            sc.classes[static_cast<std::size_t>(user_class[u])].dd.coeffs();
        for (std::size_t d = 0; d < probs.size(); ++d) {
            if (probs[d] <= 0.0) continue;
            degrees[u] = static_cast<int>(d);
            assign_degree(u + 1, log_w + std::log(probs[d]));
        }
    };
    assign_degree(0, 0.0);

    std::vector<double> success(num_classes, 1.0);
    for (std::size_t k = 0; k < num_classes; ++k)
        if (populations[k] > 0) success[k] = decoded_mass[k] / static_cast<double>(populations[k]);
    return success;
}

/// Largest fixpoint of a continuous self-map of [0,1], located by a downward
/// grid scan for the topmost sign change of f(q) - q followed by bisection.
/// Returns nothing when no sign structure exists on the grid (the limit is
/// then a boundary point).
inline std::optional<double> fixpoint_root(const std::function<double(double)>& map, double tol,
                                           int grid = 4096) {
    auto g = [&](double q) { return map(q) - q; };
    if (g(1.0) >= 0.0) return 1.0;
    double hi = 1.0;
    double lo = -1.0;
    for (int i = 1; i <= grid; ++i) {
        const double q = 1.0 - static_cast<double>(i) / grid;
        if (g(q) >= 0.0) {
            lo = q;
            break;
        }
        hi = q;
    }
    if (lo < 0.0) return std::nullopt;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) >= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace cra
