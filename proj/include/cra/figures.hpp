#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cra/commands.hpp"

namespace cra {

struct SweepOptions {
    bool simulate = false;
    int runs = -1;  // -1 keeps each figure's pinned run count
    std::uint64_t seed = 1;
};

struct SweepFile {
    std::string name;
    std::string content;
};

// Pinned parameters of the admission use case: 256 slots per interval, 100
// protected users sending 5 copies each, best-effort users sending 1 copy,
// error target 1e-5 on the protected class.
inline constexpr int kAdmitSlots = 256;
inline constexpr int kAdmitProtectedUsers = 100;
inline constexpr int kAdmitCopies = 5;
inline constexpr double kAdmitTarget = 1e-5;

inline std::vector<CodeSpec> admit_code_specs() {
    return {CodeSpec(DegreeDistribution::regular(kAdmitCopies), 1, "urllc"),
            CodeSpec(DegreeDistribution::regular(1), 1, "embb")};
}

/// Both classes share one pool of slots behind the given single-class
/// receiver.
inline PoissonReceiver admit_shared_pipeline(const PoissonReceiver& slot_receiver) {
    return code(route(slot_receiver, RoutingMatrix({{1.0}, {1.0}})), admit_code_specs(), 200,
                1e-12);
}

/// Protected packets reach both receivers; best-effort packets are split
/// evenly between them.
inline PoissonReceiver admit_split_pipeline() {
    return code(route(make_two_receiver_three_class(true),
                      RoutingMatrix({{0.0, 0.0, 1.0}, {0.5, 0.5, 0.0}})),
                admit_code_specs(), 200, 1e-12);
}

inline double admit_error(const PoissonReceiver& pipeline, long long n2) {
    const OfferedLoad g{static_cast<double>(kAdmitProtectedUsers) / kAdmitSlots,
                        static_cast<double>(n2) / kAdmitSlots};
    return 1.0 - pipeline.success(g)[0];
}

inline AdmitResult admit_search(const PoissonReceiver& pipeline, long long n_max = 2048) {
    return admission_search([&](long long n) { return admit_error(pipeline, n); }, kAdmitTarget,
                            n_max);
}

namespace detail {

inline std::vector<double> arange(double from, double to, double step) {
    std::vector<double> out;
    const auto count = static_cast<long long>(std::floor((to - from) / step + 1e-9)) + 1;
    for (long long i = 0; i < count; ++i) out.push_back(from + static_cast<double>(i) * step);
    return out;
}

/// The three slotted-ALOHA systems on one two-receiver channel: no
/// cancellation, in-slot cancellation, and in-slot plus cross-slot
/// cancellation with two copies per packet.
struct TwoReceiverSystems {
    PoissonReceiver noncoop;
    PoissonReceiver spatial;
    PoissonReceiver spatial_temporal;

    explicit TwoReceiverSystems(const ChannelModel& channel)
        : noncoop(make_two_receiver(channel, false)),
          spatial(make_two_receiver(channel, true)),
          spatial_temporal(code(make_two_receiver(channel, true),
                                {CodeSpec(DegreeDistribution::regular(2))}, 100, 1e-12)) {}
};

inline SweepFile load_figure_theory(const std::string& stem, const ChannelModel& channel,
                                    const std::vector<double>& grid) {
    const TwoReceiverSystems sys(channel);
    std::ostringstream out;
    CsvWriter csv(out);
    csv.header({"G", "S_noncoop", "S_spatial", "S_spatial_temporal"});
    for (double g : grid)
        csv.row({CsvWriter::num(g), CsvWriter::num(g * sys.noncoop.success1(g)),
                 CsvWriter::num(g * sys.spatial.success1(g)),
                 CsvWriter::num(g * sys.spatial_temporal.success1(g))});
    return {stem + "_theory.csv", out.str()};
}

inline SweepFile load_figure_sim(const std::string& stem, const ChannelModel& channel,
                                 const std::vector<double>& grid, DecodeMode mode,
                                 const DegreeDistribution& dd, int runs, std::uint64_t seed) {
    Scenario scenario;
    scenario.t_slots = 1000;
    scenario.channel = channel;
    scenario.mode = mode;
    scenario.max_sic_iters = 100;
    scenario.classes.push_back({dd, -1.0, -1, std::nullopt});
    std::ostringstream out;
    CsvWriter csv(out);
    csv.header({"G", "N", "S_sim", "S_ci", "psuc", "err", "ci"});
    for (double g : grid) {
        scenario.classes[0].g = g;
        const TrialStats stats = run_trials(scenario, runs, seed);
        csv.row({CsvWriter::num(g), CsvWriter::num(scenario.classes[0].population(1000)),
                 CsvWriter::num(stats.throughput[0]), CsvWriter::num(stats.throughput_halfwidth[0]),
                 CsvWriter::num(stats.success[0]), CsvWriter::num(stats.error[0]),
                 CsvWriter::num(stats.success_halfwidth[0])});
    }
    csv.footer("generator", kGeneratorId);
    return {stem + "_sim_" + to_string(mode) + ".csv", out.str()};
}

inline std::vector<SweepFile> fig_load(const std::string& stem, double p11,
                                       const SweepOptions& opt) {
    const ChannelModel channel = symmetric_two_receiver_channel(p11);
    const std::vector<double> grid = arange(0.1, 2.0, 0.1);
    std::vector<SweepFile> files{load_figure_theory(stem, channel, grid)};
    if (opt.simulate) {
        const int runs = opt.runs > 0 ? opt.runs : 100;
        files.push_back(load_figure_sim(stem, channel, grid, DecodeMode::plain,
                                        DegreeDistribution::regular(1), runs, opt.seed));
        files.push_back(load_figure_sim(stem, channel, grid, DecodeMode::spatial,
                                        DegreeDistribution::regular(1), runs, opt.seed));
        files.push_back(load_figure_sim(stem, channel, grid, DecodeMode::spatial_temporal,
                                        DegreeDistribution::regular(2), runs, opt.seed));
    }
    return files;
}

inline std::vector<SweepFile> fig_p11(const SweepOptions&) {
    const double g = 1.2;
    std::ostringstream out;
    CsvWriter csv(out);
    csv.header({"p11", "omega", "S_noncoop", "S_spatial", "S_spatial_temporal"});
    for (double p11 : arange(0.0, 1.0, 0.1)) {
        const TwoReceiverSystems sys(symmetric_two_receiver_channel(p11));
        csv.row({CsvWriter::num(p11), CsvWriter::num(correlation_coefficient(p11)),
                 CsvWriter::num(g * sys.noncoop.success1(g)),
                 CsvWriter::num(g * sys.spatial.success1(g)),
                 CsvWriter::num(g * sys.spatial_temporal.success1(g))});
    }
    return {{"fig-p11.csv", out.str()}};
}

/// Throughput of one ideal-coded system at population-per-slot g: the coded
/// system spreads n blocks over blocks_needed * T slots, so the normalized
/// load per receiver is g / blocks_needed.
inline double fec_throughput(const PoissonReceiver& coded, int blocks_needed, double g) {
    return g * coded.success1(g / blocks_needed);
}

inline std::vector<SweepFile> fig_fec(const SweepOptions&) {
    const ChannelModel channel = ChannelModel::two_receiver(0.3, 0.35, 0.35);
    const PoissonReceiver inner = make_two_receiver(channel, true);
    struct System {
        int n, n0;
        PoissonReceiver coded;
    };
    std::vector<System> systems;
    for (auto [n, n0] : {std::pair{2, 1}, {4, 2}, {3, 1}, {6, 2}})
        systems.push_back(
            {n, n0,
             code(inner, {CodeSpec(DegreeDistribution::regular(static_cast<std::size_t>(n)), n0)},
                  100, 1e-12)});
    std::ostringstream out;
    CsvWriter csv(out);
    csv.header({"g", "S_2_1", "S_4_2", "S_3_1", "S_6_2"});
    for (double g : arange(0.05, 3.0, 0.05)) {
        std::vector<std::string> row{CsvWriter::num(g)};
        for (const System& s : systems)
            row.push_back(CsvWriter::num(fec_throughput(s.coded, s.n0, g)));
        csv.row(row);
    }
    return {{"fig-fec.csv", out.str()}};
}

inline std::vector<SweepFile> fig_admit_p11(const SweepOptions&) {
    std::ostringstream out;
    CsvWriter csv(out);
    csv.header({"p11", "n_admissible", "error_at", "error_next"});
    for (double p11 : arange(0.0, 1.0, 0.05)) {
        const PoissonReceiver pipeline =
            admit_shared_pipeline(make_two_receiver(symmetric_two_receiver_channel(p11), true));
        const AdmitResult res = admit_search(pipeline);
        csv.row({CsvWriter::num(p11), CsvWriter::num(res.admissible),
                 CsvWriter::num(res.error_at), CsvWriter::num(res.error_next)});
    }
    return {{"fig-admit-p11.csv", out.str()}};
}

struct UrllcSetup {
    PoissonReceiver pipeline;
    Scenario scenario;  // matching Monte Carlo setup, populations left open
    long long curve_max;
    long long curve_step;
};

inline UrllcSetup urllc_setup(const std::string& variant) {
    UrllcSetup setup;
    setup.scenario.t_slots = kAdmitSlots;
    setup.scenario.mode = DecodeMode::spatial_temporal;
    setup.scenario.max_sic_iters = 100;
    ClassTraffic urllc{DegreeDistribution::regular(kAdmitCopies), -1.0, kAdmitProtectedUsers,
                       std::nullopt};
    ClassTraffic embb{DegreeDistribution::regular(1), -1.0, 0, std::nullopt};
    if (variant == "single") {
        setup.pipeline = admit_shared_pipeline(make_collision_sa());
        setup.scenario.channel = ChannelModel::ideal_single();
        setup.curve_max = 60;
        setup.curve_step = 1;
    } else if (variant == "common") {
        const ChannelModel channel = ChannelModel::two_receiver(0.5, 0.25, 0.25);
        setup.pipeline = admit_shared_pipeline(make_two_receiver(channel, true));
        setup.scenario.channel = channel;
        setup.curve_max = 120;
        setup.curve_step = 1;
    } else if (variant == "split") {
        setup.pipeline = admit_split_pipeline();
        // Protected packets hit both receivers; each best-effort packet goes
        // to one receiver chosen uniformly, modeled by a p11=0 channel draw.
        setup.scenario.channel = ChannelModel::two_receiver(0.0, 0.5, 0.5);
        urllc.fixed_footprint = ReceiverSet{1, 2};
        setup.curve_max = 260;
        setup.curve_step = 2;
    } else {
        throw ValidationError("unknown admission variant '" + variant + "'");
    }
    setup.scenario.classes = {urllc, embb};
    return setup;
}

inline std::vector<SweepFile> fig_urllc(const std::string& variant, const SweepOptions& opt) {
    UrllcSetup setup = urllc_setup(variant);
    const std::string stem = "fig-urllc-" + variant;
    std::vector<SweepFile> files;

    {
        std::ostringstream out;
        CsvWriter csv(out);
        csv.header({"N2", "error_de"});
        for (long long n = 0; n <= setup.curve_max; n += setup.curve_step)
            csv.row({CsvWriter::num(n), CsvWriter::num(admit_error(setup.pipeline, n))});
        files.push_back({stem + "_curve.csv", out.str()});
    }
    {
        const AdmitResult res = admit_search(setup.pipeline);
        std::ostringstream out;
        CsvWriter csv(out);
        csv.header({"n_admissible", "error_at", "error_next", "target"});
        csv.row({CsvWriter::num(res.admissible), CsvWriter::num(res.error_at),
                 CsvWriter::num(res.error_next), CsvWriter::num(res.target)});
        files.push_back({stem + "_admit.csv", out.str()});
    }
    if (opt.simulate) {
        const int runs = opt.runs > 0 ? opt.runs : 100000;
        std::ostringstream out;
        CsvWriter csv(out);
        csv.header({"N2", "error_sim", "ci", "runs"});
        for (long long n = 0; n <= setup.curve_max; n += setup.curve_step) {
            setup.scenario.classes[1].n = n;
            const TrialStats stats = run_trials(setup.scenario, runs, opt.seed);
            csv.row({CsvWriter::num(n), CsvWriter::num(stats.error[0]),
                     CsvWriter::num(stats.success_halfwidth[0]), CsvWriter::num(runs)});
        }
        csv.footer("generator", kGeneratorId);
        files.push_back({stem + "_sim.csv", out.str()});
    }
    return files;
}

}  // namespace detail

using FigureFn = std::function<std::vector<SweepFile>(const SweepOptions&)>;

/// Named experiments with every parameter pinned, reproducing the reference
/// curves: offered-load sweeps on three channel correlations, the
/// correlation sweep at fixed load, the ideal-FEC comparison, and the
/// admission studies.
inline const std::map<std::string, FigureFn>& figure_registry() {
    static const std::map<std::string, FigureFn> registry = {
        {"fig-load-a",
         [](const SweepOptions& o) { return detail::fig_load("fig-load-a", 0.0, o); }},
        {"fig-load-b",
         [](const SweepOptions& o) { return detail::fig_load("fig-load-b", 0.3, o); }},
        {"fig-load-c",
         [](const SweepOptions& o) { return detail::fig_load("fig-load-c", 1.0, o); }},
        {"fig-p11", detail::fig_p11},
        {"fig-fec", detail::fig_fec},
        {"fig-admit-p11", detail::fig_admit_p11},
        {"fig-urllc-single",
         [](const SweepOptions& o) { return detail::fig_urllc("single", o); }},
        {"fig-urllc-common",
         [](const SweepOptions& o) { return detail::fig_urllc("common", o); }},
        {"fig-urllc-split", [](const SweepOptions& o) { return detail::fig_urllc("split", o); }},
    };
    return registry;
}

inline std::vector<SweepFile> run_figure(const std::string& name, const SweepOptions& options) {
    const auto& registry = figure_registry();
    const auto it = registry.find(name);
    if (it == registry.end()) {
        std::ostringstream msg;
        msg << "unknown figure '" << name << "'; available:";
        for (const auto& [key, fn] : registry) msg << ' ' << key;
        throw ValidationError(msg.str());
    }
    return it->second(options);
}

/// Runs a registry entry and writes its CSV bundle into out_dir.
inline json cmd_sweep(const std::string& name, const SweepOptions& options,
                      const std::string& out_dir) {
    Stopwatch watch;
    const std::vector<SweepFile> files = run_figure(name, options);
    std::filesystem::create_directories(out_dir);
    json written = json::array();
    for (const SweepFile& f : files) {
        const std::filesystem::path path = std::filesystem::path(out_dir) / f.name;
        std::ofstream out(path);
        if (!out) throw ValidationError("sweep: cannot write '" + path.string() + "'");
        out << f.content;
        written.push_back(path.string());
    }
    json meta = make_meta("sweep", json{{"figure", name}}, watch.elapsed_ms(), options.seed);
    meta["files"] = written;
    meta["simulate"] = options.simulate;
    return meta;
}

}  // namespace cra
