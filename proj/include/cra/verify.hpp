#pragma once

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "cra/commands.hpp"
#include "cra/oracle.hpp"

namespace cra {

struct CorpusEntry {
    std::string name;
    SmallSystem system;
};

/// Fixed desk-size systems used to cross-check the Monte Carlo path against
/// the exhaustive enumeration.
inline std::vector<CorpusEntry> small_system_corpus() {
    std::vector<CorpusEntry> corpus;

    {
        Scenario s;
        s.t_slots = 2;
        s.channel = ChannelModel::ideal_single();
        s.classes.push_back({DegreeDistribution::regular(1), -1.0, 2, std::nullopt});
        s.mode = DecodeMode::plain;
        corpus.push_back({"two-users-two-slots-plain", SmallSystem(s)});
    }
    {
        Scenario s;
        s.t_slots = 1;
        s.channel = ChannelModel::two_receiver(0.5, 0.25, 0.25);
        s.classes.push_back({DegreeDistribution::regular(1), -1.0, 2, std::nullopt});
        s.mode = DecodeMode::spatial;
        corpus.push_back({"two-users-one-slot-spatial", SmallSystem(s)});
    }
    {
        Scenario s;
        s.t_slots = 2;
        s.channel = ChannelModel::two_receiver(0.3, 0.35, 0.35);
        s.classes.push_back({DegreeDistribution::regular(2), -1.0, 2, std::nullopt});
        s.mode = DecodeMode::spatial_temporal;
        corpus.push_back({"two-copy-users-spatial-temporal", SmallSystem(s)});
    }
    {
        Scenario s;
        s.t_slots = 3;
        s.channel = ChannelModel::ideal_single();
        s.classes.push_back(
            {DegreeDistribution::from_coeffs({0.0, 0.5, 0.5}), -1.0, 3, std::nullopt});
        s.mode = DecodeMode::spatial_temporal;
        corpus.push_back({"irregular-three-users", SmallSystem(s)});
    }
    {
        Scenario s;
        s.t_slots = 2;
        s.channel = ChannelModel::from_state_probs(2, {0.25, 0.25, 0.25, 0.25});
        s.classes.push_back({DegreeDistribution::regular(1), -1.0, 3, std::nullopt});
        s.mode = DecodeMode::plain;
        corpus.push_back({"uniform-channel-plain", SmallSystem(s)});
    }
    {
        Scenario s;
        s.t_slots = 2;
        s.channel = ChannelModel::two_receiver(0.0, 0.5, 0.5);
        s.classes.push_back(
            {DegreeDistribution::regular(2), -1.0, 1, ReceiverSet{1, 2}});
        s.classes.push_back({DegreeDistribution::regular(1), -1.0, 2, std::nullopt});
        s.mode = DecodeMode::spatial_temporal;
        corpus.push_back({"two-class-mixed-footprint", SmallSystem(s)});
    }
    return corpus;
}

struct VerifyClassResult {
    double exact = 0.0;
    double simulated = 0.0;
    double z = 0.0;
};

struct VerifyResult {
    std::string name;
    bool pass = true;
    std::vector<VerifyClassResult> classes;
};

/// Compares trial frequencies against the exact enumeration; z is the
/// distance in standard errors of the per-trial success fraction.
inline VerifyResult verify_against_exact(const CorpusEntry& entry, int runs,
                                         std::uint64_t base_seed) {
    const Scenario& sc = entry.system.scenario;
    const std::vector<double> exact = exact_success(entry.system);
    const std::size_t num_classes = sc.classes.size();

    std::vector<double> sum(num_classes, 0.0), sumsq(num_classes, 0.0);
    for (int t = 0; t < runs; ++t) {
        std::mt19937_64 rng = make_stream_rng(base_seed, static_cast<std::uint64_t>(t));
        std::vector<long long> populations(num_classes);
        for (std::size_t k = 0; k < num_classes; ++k)
            populations[k] = sc.classes[k].population(sc.t_slots);
        const Instance inst = build_instance(sc, rng, &populations);
        const DecodeResult res = sic_decode(inst, sc.mode, sc.max_sic_iters);
        for (std::size_t k = 0; k < num_classes; ++k) {
            const double frac = populations[k] > 0 ? static_cast<double>(res.decoded[k]) /
                                                         static_cast<double>(populations[k])
                                                   : 1.0;
            sum[k] += frac;
            sumsq[k] += frac * frac;
        }
    }

    VerifyResult out;
    out.name = entry.name;
    for (std::size_t k = 0; k < num_classes; ++k) {
        VerifyClassResult c;
        c.exact = exact[k];
        c.simulated = sum[k] / runs;
        const double var =
            (sumsq[k] - sum[k] * sum[k] / runs) / std::max(1.0, static_cast<double>(runs - 1));
        const double se = std::sqrt(std::max(var, 0.0) / runs);
        if (se > 0.0)
            c.z = std::abs(c.simulated - c.exact) / se;
        else
            c.z = std::abs(c.simulated - c.exact) > 1e-12 ? 1e9 : 0.0;
        if (c.z > 3.0) out.pass = false;
        out.classes.push_back(c);
    }
    return out;
}

/// Runs the whole corpus and prints one line per system; returns meta with
/// an overall pass flag.
inline json cmd_verify(int runs, std::uint64_t seed, std::ostream& report) {
    Stopwatch watch;
    bool all_pass = true;
    json systems = json::array();
    for (const CorpusEntry& entry : small_system_corpus()) {
        const VerifyResult res = verify_against_exact(entry, runs, seed);
        all_pass = all_pass && res.pass;
        report << (res.pass ? "PASS " : "FAIL ") << entry.name;
        json classes = json::array();
        for (std::size_t k = 0; k < res.classes.size(); ++k) {
            const VerifyClassResult& c = res.classes[k];
            report << "  class" << (k + 1) << ": exact=" << c.exact << " sim=" << c.simulated
                   << " z=" << c.z;
            classes.push_back({{"exact", c.exact}, {"sim", c.simulated}, {"z", c.z}});
        }
        report << "\n";
        systems.push_back({{"name", res.name}, {"pass", res.pass}, {"classes", classes}});
    }
    json meta = make_meta("verify", json{{"runs", runs}}, watch.elapsed_ms(), seed);
    meta["pass"] = all_pass;
    meta["systems"] = systems;
    return meta;
}

}  // namespace cra
