#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "cra/cra.hpp"

namespace {

struct IoOptions {
    std::string config_path;
    std::string out_path = "-";
    std::string meta_path;
};

void add_io(CLI::App* cmd, IoOptions& io, bool needs_config = true) {
    if (needs_config)
        cmd->add_option("--config", io.config_path, "scenario config (JSON)")->required();
    cmd->add_option("--out", io.out_path, "CSV output path, or - for stdout");
    cmd->add_option("--meta", io.meta_path, "metadata sidecar path (JSON)");
}

void write_meta(const IoOptions& io, const cra::json& meta) {
    std::string path = io.meta_path;
    if (path.empty()) {
        if (io.out_path == "-" || io.out_path.empty()) return;
        path = io.out_path + ".meta.json";
    }
    std::ofstream out(path);
    if (!out) throw cra::ValidationError("cannot write metadata to '" + path + "'");
    out << meta.dump(2) << "\n";
}

cra::json run_with_csv(const IoOptions& io,
                       const std::function<cra::json(std::ostream&)>& body) {
    if (io.out_path == "-" || io.out_path.empty()) return body(std::cout);
    std::ofstream out(io.out_path);
    if (!out) throw cra::ValidationError("cannot write CSV to '" + io.out_path + "'");
    return body(out);
}

int fail(const std::string& category, const std::string& message, int code) {
    cra::json err;
    err["error"]["category"] = category;
    err["error"]["message"] = message;
    std::cerr << err.dump() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coded random access analysis toolkit"};
    app.require_subcommand(1);

    IoOptions io;
    std::optional<long long> seed_override, runs_override, max_iters_override;
    std::optional<double> tol_override;
    bool montecarlo = false;
    bool simulate_overlay = false;
    std::string figure_name;
    long long verify_runs = 100000;
    long long verify_seed = 1;

    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a receiver pipeline over a grid");
    add_io(eval_cmd, io);
    eval_cmd->add_option("--max-iters", max_iters_override, "override code max iterations");
    eval_cmd->add_option("--tol", tol_override, "override code stop tolerance");

    CLI::App* de_cmd = app.add_subcommand("de", "emit the cancellation recursion trace");
    add_io(de_cmd, io);
    de_cmd->add_option("--max-iters", max_iters_override, "override code max iterations");
    de_cmd->add_option("--tol", tol_override, "override code stop tolerance");

    CLI::App* sim_cmd = app.add_subcommand("simulate", "Monte Carlo trials over a grid");
    add_io(sim_cmd, io);
    sim_cmd->add_option("--runs", runs_override, "override run count");
    sim_cmd->add_option("--seed", seed_override, "override base seed");

    CLI::App* admit_cmd =
        app.add_subcommand("admit", "search the largest admissible population");
    add_io(admit_cmd, io);
    admit_cmd->add_flag("--montecarlo", montecarlo, "estimate errors by simulation");
    admit_cmd->add_option("--runs", runs_override, "override Monte Carlo run count");
    admit_cmd->add_option("--seed", seed_override, "override Monte Carlo seed");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "reproduce a named experiment");
    sweep_cmd->add_option("--figure", figure_name, "registry entry name")->required();
    sweep_cmd->add_option("--out", io.out_path, "output directory")->required();
    sweep_cmd->add_option("--meta", io.meta_path, "metadata sidecar path");
    sweep_cmd->add_flag("--simulate", simulate_overlay, "add simulation overlays");
    sweep_cmd->add_option("--runs", runs_override, "override overlay run count");
    sweep_cmd->add_option("--seed", seed_override, "override overlay seed");

    CLI::App* verify_cmd =
        app.add_subcommand("verify", "cross-check simulator against the exact oracle");
    verify_cmd->add_option("--runs", verify_runs, "trials per system");
    verify_cmd->add_option("--seed", verify_seed, "base seed");
    verify_cmd->add_option("--meta", io.meta_path, "metadata sidecar path");

    CLI11_PARSE(app, argc, argv);

    try {
        cra::json config;
        if (!io.config_path.empty()) {
            config = cra::load_config_file(io.config_path);
            if (seed_override) {
                config["simulation"]["seed"] = *seed_override;
                config["admission"]["montecarlo"]["seed"] = *seed_override;
            }
            if (runs_override) {
                config["simulation"]["runs"] = *runs_override;
                config["admission"]["montecarlo"]["runs"] = *runs_override;
            }
            if (max_iters_override && config.contains("pipeline") &&
                config["pipeline"].contains("code"))
                config["pipeline"]["code"]["max_iters"] = *max_iters_override;
            if (tol_override && config.contains("pipeline") && config["pipeline"].contains("code"))
                config["pipeline"]["code"]["tol"] = *tol_override;
        }

        if (eval_cmd->parsed()) {
            write_meta(io, run_with_csv(io, [&](std::ostream& o) { return cra::cmd_eval(config, o); }));
        } else if (de_cmd->parsed()) {
            write_meta(io, run_with_csv(io, [&](std::ostream& o) { return cra::cmd_de(config, o); }));
        } else if (sim_cmd->parsed()) {
            write_meta(io,
                       run_with_csv(io, [&](std::ostream& o) { return cra::cmd_simulate(config, o); }));
        } else if (admit_cmd->parsed()) {
            cra::json meta;
            cra::AdmitResult result;
            run_with_csv(io, [&](std::ostream& o) {
                result = cra::cmd_admit(config, o, &meta, montecarlo);
                return meta;
            });
            write_meta(io, meta);
            std::cout << "attainable=" << (result.attainable ? "true" : "false") << "\n"
                      << "admissible=" << result.admissible << "\n"
                      << "error_at=" << cra::CsvWriter::num(result.error_at) << "\n"
                      << "error_next=" << cra::CsvWriter::num(result.error_next) << "\n"
                      << "target=" << cra::CsvWriter::num(result.target) << "\n";
            if (!result.attainable)
                return fail("unattainable", "error target cannot be met even with zero load", 4);
        } else if (sweep_cmd->parsed()) {
            cra::SweepOptions options;
            options.simulate = simulate_overlay;
            if (runs_override) options.runs = static_cast<int>(*runs_override);
            if (seed_override) options.seed = static_cast<std::uint64_t>(*seed_override);
            const cra::json meta = cra::cmd_sweep(figure_name, options, io.out_path);
            if (!io.meta_path.empty()) {
                write_meta(io, meta);
            } else {
                std::ofstream out(io.out_path + "/meta.json");
                out << meta.dump(2) << "\n";
            }
        } else if (verify_cmd->parsed()) {
            const cra::json meta = cra::cmd_verify(static_cast<int>(verify_runs),
                                                   static_cast<std::uint64_t>(verify_seed),
                                                   std::cout);
            if (!io.meta_path.empty()) write_meta(io, meta);
            if (!meta["pass"].get<bool>()) return 1;
        }
        return 0;
    } catch (const cra::CapacityError& e) {
        return fail("capacity", e.what(), 3);
    } catch (const cra::ValidationError& e) {
        return fail("validation", e.what(), 2);
    } catch (const std::exception& e) {
        return fail("internal", e.what(), 1);
    }
}
