#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "cra/config.hpp"
#include "cra/csv.hpp"
#include "cra/version.hpp"

namespace cra {

inline json make_meta(const std::string& command, const json& config, double wall_ms,
                      std::uint64_t seed = 0) {
    json meta;
    meta["command"] = command;
    meta["version"] = kVersion;
    meta["generator"] = kGeneratorId;
    meta["seed"] = seed;
    meta["wall_clock_ms"] = wall_ms;
    meta["config"] = config;
    return meta;
}

class Stopwatch {
public:
    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Evaluates the declared pipeline over the load grid: one CSV row per grid
/// point with per-class success probability and throughput.
inline json cmd_eval(const json& config, std::ostream& csv_out) {
    Stopwatch watch;
    const Pipeline pipeline = build_pipeline(config);
    const std::size_t k_ext = pipeline.num_external_classes();
    const std::vector<OfferedLoad> grid = parse_grid(config, k_ext);

    CsvWriter csv(csv_out);
    std::vector<std::string> header;
    for (std::size_t k = 1; k <= k_ext; ++k) header.push_back("G" + std::to_string(k));
    for (std::size_t k = 1; k <= k_ext; ++k) header.push_back("psuc" + std::to_string(k));
    for (std::size_t k = 1; k <= k_ext; ++k) header.push_back("S" + std::to_string(k));
    csv.header(header);

    for (const OfferedLoad& g : grid) {
        const std::vector<double> suc = pipeline.full.success(g);
        std::vector<std::string> row;
        for (std::size_t k = 0; k < k_ext; ++k) row.push_back(CsvWriter::num(g[k]));
        for (std::size_t k = 0; k < k_ext; ++k) row.push_back(CsvWriter::num(suc[k]));
        for (std::size_t k = 0; k < k_ext; ++k) row.push_back(CsvWriter::num(g[k] * suc[k]));
        csv.row(row);
    }
    json meta = make_meta("eval", config, watch.elapsed_ms());
    meta["grid_points"] = grid.size();
    return meta;
}

/// Emits the full recursion trace at one load point plus a marked terminal
/// row carrying the resulting packet success probabilities.
inline json cmd_de(const json& config, std::ostream& csv_out) {
    Stopwatch watch;
    const Pipeline pipeline = build_pipeline(config);
    if (!pipeline.code_block)
        throw config_error("$.pipeline", "de command requires a 'code' block");
    if (!config.contains("load"))
        throw config_error("$", "de command requires a 'load' array");
    OfferedLoad load{config["load"].get<std::vector<double>>()};
    if (load.num_classes() != pipeline.num_external_classes())
        throw config_error("$.load", "arity differs from pipeline classes");

    const CodeBlock& cb = *pipeline.code_block;
    const DensityEvolutionTrace trace =
        de_trace(pipeline.analytic, cb.specs, load, cb.max_iters, cb.tol);
    const std::vector<double> terminal = coded_terminal_success(cb.specs, trace);
    const std::size_t k_ext = cb.specs.size();

    CsvWriter csv(csv_out);
    std::vector<std::string> header{"row", "iter"};
    for (std::size_t k = 1; k <= k_ext; ++k) header.push_back("p" + std::to_string(k));
    for (std::size_t k = 1; k <= k_ext; ++k) header.push_back("q" + std::to_string(k));
    for (std::size_t k = 1; k <= k_ext; ++k) header.push_back("ptilde" + std::to_string(k));
    csv.header(header);

    for (int i = 0; i < trace.iterations_used; ++i) {
        std::vector<std::string> row{"iter", CsvWriter::num(i + 1)};
        for (double v : trace.p[static_cast<std::size_t>(i)]) row.push_back(CsvWriter::num(v));
        for (double v : trace.q[static_cast<std::size_t>(i)]) row.push_back(CsvWriter::num(v));
        for (std::size_t k = 0; k < k_ext; ++k) row.emplace_back();
        csv.row(row);
    }
    std::vector<std::string> row{"terminal", CsvWriter::num(trace.iterations_used)};
    for (double v : trace.final_p()) row.push_back(CsvWriter::num(v));
    for (double v : trace.final_q()) row.push_back(CsvWriter::num(v));
    for (double v : terminal) row.push_back(CsvWriter::num(v));
    csv.row(row);

    json meta = make_meta("de", config, watch.elapsed_ms());
    meta["converged"] = trace.converged;
    meta["monotone"] = trace.monotone;
    meta["iterations_used"] = trace.iterations_used;
    return meta;
}

/// Runs the Monte Carlo scenario over the load grid; one row of trial
/// statistics per grid point.
inline json cmd_simulate(const json& config, std::ostream& csv_out) {
    Stopwatch watch;
    Scenario scenario = parse_scenario(
        config, config.contains("channel")
                    ? std::optional<ChannelModel>(parse_channel(config["channel"], "$.channel"))
                    : std::nullopt);
    const std::size_t k_cls = scenario.classes.size();
    const std::vector<OfferedLoad> grid = parse_grid(config, k_cls);
    const json& sim = config["simulation"];
    const int runs = static_cast<int>(get_number(sim, "runs", "$.simulation", 100));
    const auto seed = static_cast<std::uint64_t>(get_number(sim, "seed", "$.simulation", 1));

    CsvWriter csv(csv_out);
    std::vector<std::string> header;
    for (std::size_t k = 1; k <= k_cls; ++k) header.push_back("G" + std::to_string(k));
    for (std::size_t k = 1; k <= k_cls; ++k) header.push_back("N" + std::to_string(k));
    for (std::size_t k = 1; k <= k_cls; ++k) header.push_back("psuc" + std::to_string(k));
    for (std::size_t k = 1; k <= k_cls; ++k) header.push_back("err" + std::to_string(k));
    for (std::size_t k = 1; k <= k_cls; ++k) header.push_back("ci" + std::to_string(k));
    for (std::size_t k = 1; k <= k_cls; ++k) header.push_back("S" + std::to_string(k));
    for (std::size_t k = 1; k <= k_cls; ++k) header.push_back("Sci" + std::to_string(k));
    header.emplace_back("runs");
    header.emplace_back("seed");
    csv.header(header);

    for (const OfferedLoad& g : grid) {
        for (std::size_t k = 0; k < k_cls; ++k) {
            scenario.classes[k].g = g[k];
            scenario.classes[k].n = -1;
        }
        const TrialStats stats = run_trials(scenario, runs, seed);
        std::vector<std::string> row;
        for (std::size_t k = 0; k < k_cls; ++k) row.push_back(CsvWriter::num(g[k]));
        for (std::size_t k = 0; k < k_cls; ++k)
            row.push_back(CsvWriter::num(scenario.classes[k].population(scenario.t_slots)));
        for (std::size_t k = 0; k < k_cls; ++k) row.push_back(CsvWriter::num(stats.success[k]));
        for (std::size_t k = 0; k < k_cls; ++k) row.push_back(CsvWriter::num(stats.error[k]));
        for (std::size_t k = 0; k < k_cls; ++k)
            row.push_back(CsvWriter::num(stats.success_halfwidth[k]));
        for (std::size_t k = 0; k < k_cls; ++k) row.push_back(CsvWriter::num(stats.throughput[k]));
        for (std::size_t k = 0; k < k_cls; ++k)
            row.push_back(CsvWriter::num(stats.throughput_halfwidth[k]));
        row.push_back(CsvWriter::num(runs));
        row.push_back(std::to_string(seed));
        csv.row(row);
    }
    csv.footer("generator", kGeneratorId);
    csv.footer("version", kVersion);

    json meta = make_meta("simulate", config, watch.elapsed_ms(), seed);
    meta["runs"] = runs;
    meta["grid_points"] = grid.size();
    return meta;
}

struct AdmitResult {
    bool attainable = false;
    long long admissible = -1;
    double error_at = 0.0;
    double error_next = 0.0;
    double target = 0.0;
    std::vector<std::pair<long long, double>> evaluated;
};

/// Largest-population bisection against a monotone error curve. The error
/// function is evaluated lazily and memoized; monotonicity over everything
/// evaluated is verified afterwards and violations abort the search.
inline AdmitResult admission_search(const std::function<double(long long)>& error_at,
                                    double target, long long n_max,
                                    const std::function<double(long long)>& slack_at = {}) {
    AdmitResult result;
    result.target = target;
    auto eval = [&](long long n) {
        for (const auto& [nn, ee] : result.evaluated)
            if (nn == n) return ee;
        const double e = error_at(n);
        result.evaluated.emplace_back(n, e);
        return e;
    };

    const double err0 = eval(0);
    if (err0 > target) {
        result.attainable = false;
        result.admissible = -1;
        result.error_at = err0;
        result.error_next = eval(1);
        return result;
    }
    result.attainable = true;

    long long lo = 0;
    long long hi = n_max + 1;
    if (eval(n_max) <= target) {
        lo = n_max;
    } else {
        hi = n_max;
        while (hi - lo > 1) {
            const long long mid = lo + (hi - lo) / 2;
            if (eval(mid) <= target)
                lo = mid;
            else
                hi = mid;
        }
    }
    result.admissible = lo;
    result.error_at = eval(lo);
    result.error_next = eval(lo + 1);

    std::sort(result.evaluated.begin(), result.evaluated.end());
    for (std::size_t i = 1; i < result.evaluated.size(); ++i) {
        const auto& [na, ea] = result.evaluated[i - 1];
        const auto& [nb, eb] = result.evaluated[i];
        const double slack = slack_at ? slack_at(na) + slack_at(nb) : 1e-12;
        if (ea > eb + slack) {
            std::ostringstream msg;
            msg << "admission search: error not monotone, err(" << na << ")=" << ea << " > err("
                << nb << ")=" << eb;
            throw ValidationError(msg.str());
        }
    }
    return result;
}

/// Searches the largest admissible population of the varied class while the
/// protected class keeps its error below target. Uses the recursion-based
/// evaluation by default; `montecarlo` switches to trial estimates.
inline AdmitResult cmd_admit(const json& config, std::ostream& csv_out, json* meta_out = nullptr,
                             bool montecarlo = false) {
    Stopwatch watch;
    if (!config.contains("admission")) throw config_error("$", "missing 'admission' block");
    const json& adm = config["admission"];
    const int t_slots = static_cast<int>(get_number(adm, "t_slots", "$.admission"));
    const double target = get_number(adm, "target", "$.admission");
    const auto protected_class =
        static_cast<std::size_t>(get_number(adm, "protected_class", "$.admission"));
    const auto vary_class = static_cast<std::size_t>(get_number(adm, "vary_class", "$.admission"));
    const auto n_max = static_cast<long long>(get_number(adm, "n_max", "$.admission", 4096));

    const Pipeline pipeline = build_pipeline(config);
    const std::size_t k_ext = pipeline.num_external_classes();
    if (protected_class < 1 || protected_class > k_ext)
        throw config_error("$.admission.protected_class", "class index out of range (1-based)");
    if (vary_class < 1 || vary_class > k_ext)
        throw config_error("$.admission.vary_class", "class index out of range (1-based)");
    std::vector<double> fixed_n(k_ext, 0.0);
    if (adm.contains("fixed_n")) {
        fixed_n = adm["fixed_n"].get<std::vector<double>>();
        if (fixed_n.size() != k_ext)
            throw config_error("$.admission.fixed_n", "arity differs from pipeline classes");
    }

    std::function<double(long long)> error_at;
    std::function<double(long long)> slack_at;
    int mc_runs = 0;
    std::uint64_t mc_seed = 1;
    if (!montecarlo) {
        error_at = [&, fixed_n](long long n) {
            std::vector<double> g(fixed_n);
            for (double& v : g) v /= t_slots;
            g[vary_class - 1] = static_cast<double>(n) / t_slots;
            const std::vector<double> suc = pipeline.full.success(OfferedLoad{std::move(g)});
            return 1.0 - suc[protected_class - 1];
        };
    } else {
        const json mc = adm.contains("montecarlo") ? adm["montecarlo"] : json::object();
        mc_runs = static_cast<int>(get_number(mc, "runs", "$.admission.montecarlo", 100000));
        mc_seed =
            static_cast<std::uint64_t>(get_number(mc, "seed", "$.admission.montecarlo", 1));
        Scenario scenario = parse_scenario(
            config, config.contains("channel") ? std::optional<ChannelModel>(parse_channel(
                                                     config["channel"], "$.channel"))
                                               : std::nullopt);
        if (scenario.classes.size() != k_ext)
            throw config_error("$.simulation.classes",
                               "arity differs from pipeline classes for admission");
        if (scenario.t_slots != t_slots)
            throw config_error("$.simulation.t_slots", "differs from admission t_slots");
        error_at = [&, scenario, fixed_n](long long n) mutable {
            for (std::size_t k = 0; k < k_ext; ++k) {
                scenario.classes[k].n = static_cast<long long>(fixed_n[k]);
                scenario.classes[k].g = -1.0;
            }
            scenario.classes[vary_class - 1].n = n;
            const TrialStats stats = run_trials(scenario, mc_runs, mc_seed);
            return stats.error[protected_class - 1];
        };
        slack_at = [&, fixed_n](long long n) {
            // 3-sigma allowance on a binomial estimate near the target rate.
            const double users =
                std::max(1.0, fixed_n[protected_class - 1] * static_cast<double>(mc_runs));
            (void)n;
            return 3.0 * std::sqrt(target * (1.0 - target) / users) + 3.0 / users;
        };
    }

    const AdmitResult result = admission_search(error_at, target, n_max, slack_at);

    CsvWriter csv(csv_out);
    csv.header({"N", "error"});
    for (const auto& [n, e] : result.evaluated)
        csv.row({CsvWriter::num(n), CsvWriter::num(e)});

    if (meta_out) {
        *meta_out = make_meta("admit", config, watch.elapsed_ms(), montecarlo ? mc_seed : 0);
        (*meta_out)["montecarlo"] = montecarlo;
        (*meta_out)["attainable"] = result.attainable;
        (*meta_out)["admissible"] = result.admissible;
        (*meta_out)["error_at"] = result.error_at;
        (*meta_out)["error_next"] = result.error_next;
        (*meta_out)["target"] = result.target;
    }
    return result;
}

}  // namespace cra
