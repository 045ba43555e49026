#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cra/channel_model.hpp"
#include "cra/degree_distribution.hpp"
#include "cra/rng.hpp"

namespace cra {

enum class DecodeMode { plain, spatial, spatial_temporal };

inline DecodeMode decode_mode_from_string(const std::string& s) {
    if (s == "plain") return DecodeMode::plain;
    if (s == "spatial") return DecodeMode::spatial;
    if (s == "spatial_temporal") return DecodeMode::spatial_temporal;
    throw ValidationError("unknown decode mode '" + s + "'");
}

inline const char* to_string(DecodeMode m) {
    switch (m) {
        case DecodeMode::plain: return "plain";
        case DecodeMode::spatial: return "spatial";
        default: return "spatial_temporal";
    }
}

/// One traffic class in a finite instance. Population is either explicit or
/// normalized (n = round(g * slots)). Copies either draw their reach state
/// from the scenario channel or hit a fixed receiver subset.
struct ClassTraffic {
    DegreeDistribution dd = DegreeDistribution::regular(1);
    double g = -1.0;
    long long n = -1;
    std::optional<ReceiverSet> fixed_footprint;

    long long population(int t_slots) const {
        if (n >= 0) return n;
        if (g >= 0.0) return static_cast<long long>(std::llround(g * t_slots));
        throw ValidationError("class traffic: population not set");
    }
};

struct Scenario {
    int t_slots = 1;
    ChannelModel channel = ChannelModel::ideal_single();
    std::vector<ClassTraffic> classes;
    DecodeMode mode = DecodeMode::spatial_temporal;
    int max_sic_iters = 100;
    bool poisson_populations = false;

    void validate() const {
        if (t_slots < 1) throw ValidationError("scenario: needs at least one slot");
        if (classes.empty()) throw ValidationError("scenario: needs at least one class");
        if (max_sic_iters < 1) throw ValidationError("scenario: max_sic_iters must be at least 1");
        for (const ClassTraffic& c : classes) {
            c.population(t_slots);
            if (c.fixed_footprint) {
                if (c.fixed_footprint->empty())
                    throw ValidationError("scenario: fixed footprint must be nonempty");
                channel.subset_mask(*c.fixed_footprint);
            }
        }
    }
};

/// A sampled frame: every user's class and every transmitted copy's slot and
/// reach mask. Copies of user u are stored contiguously.
struct Instance {
    int t_slots = 0;
    int num_receivers = 0;
    std::vector<int> user_class;
    std::vector<std::size_t> user_copy_begin;  // size users+1
    std::vector<int> copy_user;
    std::vector<std::uint32_t> copy_slot;
    std::vector<std::uint32_t> copy_mask;
    std::vector<long long> class_population;

    std::size_t num_users() const { return user_class.size(); }
    std::size_t num_copies() const { return copy_slot.size(); }
};

struct DecodeResult {
    std::vector<long long> decoded;  // per class
    std::vector<std::uint8_t> user_decoded;
    int sic_iterations_used = 0;
};

/// Samples a frame. Draw order is fixed (classes, then users, then per copy
/// slot and reach), so an instance is fully determined by the engine state.
inline Instance build_instance(const Scenario& scenario, std::mt19937_64& rng,
                               const std::vector<long long>* populations = nullptr) {
    Instance inst;
    inst.t_slots = scenario.t_slots;
    inst.num_receivers = scenario.channel.num_receivers();
    const std::size_t num_classes = scenario.classes.size();
    inst.class_population.assign(num_classes, 0);

    for (std::size_t k = 0; k < num_classes; ++k) {
        const ClassTraffic& cls = scenario.classes[k];
        const long long n = populations ? (*populations)[k] : cls.population(scenario.t_slots);
        inst.class_population[k] = n;
        const std::vector<double>& degree_probs = cls.dd.coeffs();
        const std::uint32_t fixed_mask =
            cls.fixed_footprint ? scenario.channel.subset_mask(*cls.fixed_footprint) : 0;
        for (long long u = 0; u < n; ++u) {
            const int user_id = static_cast<int>(inst.user_class.size());
            inst.user_class.push_back(static_cast<int>(k));
            inst.user_copy_begin.push_back(inst.copy_slot.size());
            const std::size_t degree = sample_categorical(rng, degree_probs);
            for (std::size_t c = 0; c < degree; ++c) {
                inst.copy_user.push_back(user_id);
                inst.copy_slot.push_back(static_cast<std::uint32_t>(
                    uniform_index(rng, static_cast<std::uint64_t>(scenario.t_slots))));
                std::uint32_t mask = fixed_mask;
                if (!cls.fixed_footprint)
                    mask = static_cast<std::uint32_t>(
                        sample_categorical(rng, scenario.channel.state_probs()));
                inst.copy_mask.push_back(mask);
            }
        }
    }
    inst.user_copy_begin.push_back(inst.copy_slot.size());
    return inst;
}

inline Instance build_instance(const Scenario& scenario, std::uint64_t seed) {
    scenario.validate();
    std::mt19937_64 rng = make_stream_rng(seed, 0);
    return build_instance(scenario, rng);
}

namespace detail {

/// Per-cell occupancy bookkeeping. A cell is one (slot, receiver) pair; the
/// id sum identifies the unique live copy whenever the count is 1.
struct CellGrid {
    int num_receivers;
    std::vector<std::int64_t> count;
    std::vector<std::int64_t> id_sum;

    explicit CellGrid(const Instance& inst)
        : num_receivers(inst.num_receivers),
          count(static_cast<std::size_t>(inst.t_slots) * inst.num_receivers, 0),
          id_sum(count.size(), 0) {
        for (std::size_t c = 0; c < inst.num_copies(); ++c) update(inst, c, +1);
    }

    std::size_t cell_of(std::uint32_t slot, int receiver) const {
        return static_cast<std::size_t>(slot) * num_receivers + receiver;
    }

    void update(const Instance& inst, std::size_t c, int sign) {
        std::uint32_t mask = inst.copy_mask[c];
        const std::uint32_t slot = inst.copy_slot[c];
        while (mask) {
            const int r = std::countr_zero(mask);
            mask &= mask - 1;
            const std::size_t cell = cell_of(slot, r);
            count[cell] += sign;
            id_sum[cell] += sign * static_cast<std::int64_t>(c);
        }
    }
};

}  // namespace detail

/// Runs the configured decoder over a sampled frame.
///
/// plain: a user succeeds iff one of its copies is the sole arrival in some
/// (slot, receiver) cell. spatial: cascaded cancellation restricted to each
/// slot (cross-receiver only, no cross-slot removal). spatial_temporal:
/// global peeling in synchronous sweeps, capped at max_iters; every copy of
/// a decoded user is removed from every cell.
inline DecodeResult sic_decode(const Instance& inst, DecodeMode mode, int max_iters = 100) {
    DecodeResult result;
    const std::size_t num_classes = inst.class_population.size();
    result.decoded.assign(num_classes, 0);
    result.user_decoded.assign(inst.num_users(), 0);

    detail::CellGrid grid(inst);
    auto decode_user = [&](int u) {
        if (!result.user_decoded[static_cast<std::size_t>(u)]) {
            result.user_decoded[static_cast<std::size_t>(u)] = 1;
            ++result.decoded[static_cast<std::size_t>(inst.user_class[static_cast<std::size_t>(u)])];
        }
    };

    switch (mode) {
        case DecodeMode::plain: {
            for (std::size_t cell = 0; cell < grid.count.size(); ++cell)
                if (grid.count[cell] == 1)
                    decode_user(inst.copy_user[static_cast<std::size_t>(grid.id_sum[cell])]);
            break;
        }

        case DecodeMode::spatial: {
            std::vector<std::uint8_t> copy_removed(inst.num_copies(), 0);
            std::vector<std::size_t> stack;
            for (std::size_t cell = 0; cell < grid.count.size(); ++cell)
                if (grid.count[cell] == 1) stack.push_back(cell);
            while (!stack.empty()) {
                const std::size_t cell = stack.back();
                stack.pop_back();
                if (grid.count[cell] != 1) continue;
                const auto c = static_cast<std::size_t>(grid.id_sum[cell]);
                const int u = inst.copy_user[c];
                const std::uint32_t slot = inst.copy_slot[c];
                decode_user(u);
                // The packet is known at this slot; cancel all of this
                // user's arrivals here. Other slots are untouched.
                for (std::size_t cc = inst.user_copy_begin[static_cast<std::size_t>(u)];
                     cc < inst.user_copy_begin[static_cast<std::size_t>(u) + 1]; ++cc) {
                    if (copy_removed[cc] || inst.copy_slot[cc] != slot) continue;
                    copy_removed[cc] = 1;
                    grid.update(inst, cc, -1);
                    std::uint32_t mask = inst.copy_mask[cc];
                    while (mask) {
                        const int r = std::countr_zero(mask);
                        mask &= mask - 1;
                        const std::size_t ncell = grid.cell_of(slot, r);
                        if (grid.count[ncell] == 1) stack.push_back(ncell);
                    }
                }
            }
            break;
        }

        case DecodeMode::spatial_temporal: {
            std::vector<std::uint8_t> copy_removed(inst.num_copies(), 0);
            std::vector<int> frontier;
            for (int sweep = 1; sweep <= max_iters; ++sweep) {
                frontier.clear();
                for (std::size_t cell = 0; cell < grid.count.size(); ++cell) {
                    if (grid.count[cell] != 1) continue;
                    const int u =
                        inst.copy_user[static_cast<std::size_t>(grid.id_sum[cell])];
                    if (!result.user_decoded[static_cast<std::size_t>(u)]) frontier.push_back(u);
                }
                // Deduplicate users surfacing in several cells this sweep.
                std::sort(frontier.begin(), frontier.end());
                frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
                if (frontier.empty()) break;
                result.sic_iterations_used = sweep;
                for (int u : frontier) {
                    decode_user(u);
                    for (std::size_t cc = inst.user_copy_begin[static_cast<std::size_t>(u)];
                         cc < inst.user_copy_begin[static_cast<std::size_t>(u) + 1]; ++cc) {
                        if (copy_removed[cc]) continue;
                        copy_removed[cc] = 1;
                        grid.update(inst, cc, -1);
                    }
                }
            }
            break;
        }
    }
    return result;
}

/// Aggregated outcome of repeated independent trials.
struct TrialStats {
    int runs = 0;
    std::uint64_t seed = 0;
    std::string generator = kGeneratorId;
    std::vector<long long> users;             // per class, summed over runs
    std::vector<long long> decoded;           // per class, summed over runs
    std::vector<double> success;              // per class mean success probability
    std::vector<double> error;                // 1 - success
    std::vector<double> success_halfwidth;    // 95% binomial half-width
    std::vector<double> throughput;            // per class, decoded per slot per run
    std::vector<double> throughput_halfwidth;  // 95% half-width of the mean estimate
    std::vector<double> throughput_run_sd;     // run-to-run standard deviation
};

namespace detail {

inline unsigned worker_count() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* cap = std::getenv("CRA_MAX_THREADS")) {
        const long v = std::strtol(cap, nullptr, 10);
        if (v >= 1 && static_cast<unsigned>(v) < n) n = static_cast<unsigned>(v);
    }
    return n;
}

}  // namespace detail

/// Runs `runs` independent trials. Trial t uses the deterministic stream
/// (base_seed, t); results are reduced in trial order, so the outcome does
/// not depend on how trials are scheduled across threads.
inline TrialStats run_trials(const Scenario& scenario, int runs, std::uint64_t base_seed) {
    if (runs < 1) throw ValidationError("run_trials: needs at least one run");
    scenario.validate();
    const std::size_t num_classes = scenario.classes.size();

    std::vector<std::vector<long long>> trial_decoded(static_cast<std::size_t>(runs));
    std::vector<std::vector<long long>> trial_users(static_cast<std::size_t>(runs));

    auto run_one = [&](int t) {
        std::mt19937_64 rng = make_stream_rng(base_seed, static_cast<std::uint64_t>(t));
        std::vector<long long> populations(num_classes);
        for (std::size_t k = 0; k < num_classes; ++k) {
            const ClassTraffic& cls = scenario.classes[k];
            populations[k] = scenario.poisson_populations
                                 ? sample_poisson(rng, cls.g >= 0.0
                                                           ? cls.g * scenario.t_slots
                                                           : static_cast<double>(cls.n))
                                 : cls.population(scenario.t_slots);
        }
        Instance inst = build_instance(scenario, rng, &populations);
        DecodeResult res = sic_decode(inst, scenario.mode, scenario.max_sic_iters);
        trial_decoded[static_cast<std::size_t>(t)] = std::move(res.decoded);
        trial_users[static_cast<std::size_t>(t)] = std::move(populations);
    };

    const unsigned workers = std::min<unsigned>(detail::worker_count(),
                                                static_cast<unsigned>(runs));
    if (workers <= 1) {
        for (int t = 0; t < runs; ++t) run_one(t);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (int t = static_cast<int>(w); t < runs; t += static_cast<int>(workers))
                    run_one(t);
            });
        for (std::thread& th : pool) th.join();
    }

    TrialStats stats;
    stats.runs = runs;
    stats.seed = base_seed;
    stats.users.assign(num_classes, 0);
    stats.decoded.assign(num_classes, 0);
    for (int t = 0; t < runs; ++t)
        for (std::size_t k = 0; k < num_classes; ++k) {
            stats.decoded[k] += trial_decoded[static_cast<std::size_t>(t)][k];
            stats.users[k] += trial_users[static_cast<std::size_t>(t)][k];
        }

    stats.success.assign(num_classes, 1.0);
    stats.error.assign(num_classes, 0.0);
    stats.success_halfwidth.assign(num_classes, 0.0);
    stats.throughput.assign(num_classes, 0.0);
    stats.throughput_halfwidth.assign(num_classes, 0.0);
    stats.throughput_run_sd.assign(num_classes, 0.0);
    for (std::size_t k = 0; k < num_classes; ++k) {
        if (stats.users[k] > 0) {
            const double p = static_cast<double>(stats.decoded[k]) /
                             static_cast<double>(stats.users[k]);
            stats.success[k] = p;
            stats.error[k] = 1.0 - p;
            stats.success_halfwidth[k] =
                1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(stats.users[k]));
        }
        double mean = 0.0;
        for (int t = 0; t < runs; ++t)
            mean += static_cast<double>(trial_decoded[static_cast<std::size_t>(t)][k]);
        mean /= static_cast<double>(runs) * scenario.t_slots;
        stats.throughput[k] = mean;
        if (runs > 1) {
            double ss = 0.0;
            for (int t = 0; t < runs; ++t) {
                const double x = static_cast<double>(trial_decoded[static_cast<std::size_t>(t)][k]) /
                                 scenario.t_slots;
                ss += (x - mean) * (x - mean);
            }
            const double sd = std::sqrt(ss / static_cast<double>(runs - 1));
            stats.throughput_run_sd[k] = sd;
            stats.throughput_halfwidth[k] = 1.96 * sd / std::sqrt(static_cast<double>(runs));
        }
    }
    return stats;
}

}  // namespace cra
