#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cra/association_graph.hpp"
#include "cra/base_receivers.hpp"
#include "cra/coding.hpp"
#include "cra/routing.hpp"
#include "cra/simulator.hpp"

namespace cra {

using json = nlohmann::json;

inline ValidationError config_error(const std::string& path, const std::string& msg) {
    return ValidationError("config " + path + ": " + msg);
}

inline json load_config_file(const std::string& filename) {
    std::ifstream in(filename);
    if (!in) throw ValidationError("config: cannot open '" + filename + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config '" + filename + "': " + e.what());
    }
}

inline double get_number(const json& j, const std::string& key, const std::string& path,
                         std::optional<double> fallback = std::nullopt) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        throw config_error(path, "missing required field '" + key + "'");
    }
    if (!j[key].is_number()) throw config_error(path + "." + key, "expected a number");
    return j[key].get<double>();
}

inline ChannelModel parse_channel(const json& j, const std::string& path) {
    if (!j.is_object()) throw config_error(path, "expected an object");
    if (j.contains("p11")) {
        return ChannelModel::two_receiver(get_number(j, "p11", path), get_number(j, "p10", path),
                                          get_number(j, "p01", path));
    }
    const int receivers = static_cast<int>(get_number(j, "receivers", path));
    if (!j.contains("states") || !j["states"].is_object())
        throw config_error(path, "missing 'states' object");
    std::vector<double> probs(std::size_t{1} << receivers, 0.0);
    for (const auto& [key, value] : j["states"].items()) {
        if (static_cast<int>(key.size()) != receivers)
            throw config_error(path + ".states." + key,
                               "state key must have one bit per receiver");
        std::uint32_t mask = 0;
        for (int i = 0; i < receivers; ++i) {
            if (key[static_cast<std::size_t>(i)] == '1')
                mask |= std::uint32_t{1} << i;
            else if (key[static_cast<std::size_t>(i)] != '0')
                throw config_error(path + ".states." + key, "state key must be a bit string");
        }
        if (!value.is_number()) throw config_error(path + ".states." + key, "expected a number");
        probs[mask] = value.get<double>();
    }
    try {
        return ChannelModel::from_state_probs(receivers, std::move(probs));
    } catch (const ValidationError& e) {
        throw config_error(path, e.what());
    }
}

inline DegreeDistribution parse_dd(const json& j, const std::string& path) {
    try {
        if (j.is_array()) return DegreeDistribution::from_coeffs(j.get<std::vector<double>>());
        if (j.is_object() && j.contains("regular"))
            return DegreeDistribution::regular(j["regular"].get<std::size_t>());
    } catch (const ValidationError& e) {
        throw config_error(path, e.what());
    } catch (const json::exception& e) {
        throw config_error(path, e.what());
    }
    throw config_error(path, "expected a coefficient array or {\"regular\": n}");
}

struct CodeBlock {
    std::vector<CodeSpec> specs;
    int max_iters = 100;
    double tol = 1e-12;
};

inline CodeBlock parse_code_block(const json& j, const std::string& path) {
    if (!j.is_object() || !j.contains("classes") || !j["classes"].is_array() ||
        j["classes"].empty())
        throw config_error(path, "code block needs a nonempty 'classes' array");
    CodeBlock block;
    block.max_iters = static_cast<int>(get_number(j, "max_iters", path, 100));
    block.tol = get_number(j, "tol", path, 1e-12);
    std::size_t idx = 0;
    for (const json& cls : j["classes"]) {
        const std::string cpath = path + ".classes[" + std::to_string(idx) + "]";
        if (!cls.is_object() || !cls.contains("dd"))
            throw config_error(cpath, "code class needs a 'dd' field");
        try {
            block.specs.emplace_back(parse_dd(cls["dd"], cpath + ".dd"),
                                     static_cast<int>(get_number(cls, "blocks_needed", cpath, 1)),
                                     cls.value("label", "class" + std::to_string(idx + 1)));
        } catch (const ValidationError& e) {
            throw config_error(cpath, e.what());
        }
        ++idx;
    }
    return block;
}

/// A declared receiver pipeline: a base receiver, optionally wrapped by
/// packet routing and then by packet coding.
struct Pipeline {
    std::optional<ChannelModel> channel;
    PoissonReceiver base;
    std::optional<RoutingMatrix> routing;
    std::optional<CodeBlock> code_block;
    PoissonReceiver analytic;  // base with routing applied
    PoissonReceiver full;      // analytic with coding applied

    std::size_t num_external_classes() const { return full.num_classes(); }
};

inline PoissonReceiver parse_base_receiver(const json& j,
                                           const std::optional<ChannelModel>& channel,
                                           const std::string& path) {
    if (!j.is_object() || !j.contains("kind"))
        throw config_error(path, "base receiver needs a 'kind'");
    const std::string kind = j["kind"].get<std::string>();
    // Wrap construction failures with the config path; config_error results
    // pass through untouched.
    auto build = [&]() -> PoissonReceiver {
        if (kind == "collision_sa") return make_collision_sa();
        if (kind == "tfold") return make_tfold(static_cast<int>(get_number(j, "fold", path)));
        if (kind == "two_receiver") {
            if (!channel) throw config_error(path, "two_receiver requires a channel block");
            return make_two_receiver(*channel, j.value("cooperative", true));
        }
        if (kind == "three_class")
            return make_two_receiver_three_class(j.value("cooperative", true));
        if (kind == "multi_receiver") {
            if (!j.contains("footprints") || !j["footprints"].is_array())
                throw config_error(path, "multi_receiver needs a 'footprints' array");
            std::vector<ReceiverSet> footprints;
            for (const json& fp : j["footprints"])
                footprints.push_back(fp.get<ReceiverSet>());
            const int receivers = static_cast<int>(get_number(j, "receivers", path));
            AssociationGraph assoc(receivers, std::move(footprints));
            return make_multi_receiver(assoc,
                                       static_cast<int>(get_number(j, "class_cap", path, 14)));
        }
        throw config_error(path + ".kind", "unknown receiver kind '" + kind + "'");
    };
    try {
        return build();
    } catch (const ValidationError& e) {
        if (std::string(e.what()).rfind("config ", 0) == 0) throw;
        throw config_error(path, e.what());
    }
}

inline Pipeline build_pipeline(const json& root, const std::string& path = "$") {
    if (!root.contains("pipeline"))
        throw config_error(path, "missing 'pipeline' block");
    const json& p = root["pipeline"];
    Pipeline out;
    if (root.contains("channel")) out.channel = parse_channel(root["channel"], path + ".channel");
    out.base = parse_base_receiver(p.contains("base") ? p["base"] : json{}, out.channel,
                                   path + ".pipeline.base");
    out.analytic = out.base;
    if (p.contains("route")) {
        try {
            out.routing = RoutingMatrix(p["route"].get<std::vector<std::vector<double>>>());
            out.analytic = route(out.base, *out.routing);
        } catch (const ValidationError& e) {
            throw config_error(path + ".pipeline.route", e.what());
        } catch (const json::exception& e) {
            throw config_error(path + ".pipeline.route", e.what());
        }
    }
    out.full = out.analytic;
    if (p.contains("code")) {
        out.code_block = parse_code_block(p["code"], path + ".pipeline.code");
        try {
            out.full = code(out.analytic, out.code_block->specs, out.code_block->max_iters,
                            out.code_block->tol);
        } catch (const ValidationError& e) {
            throw config_error(path + ".pipeline.code", e.what());
        }
    }
    return out;
}

/// Load grid: either explicit points or an arithmetic sweep t*direction.
inline std::vector<OfferedLoad> parse_grid(const json& root, std::size_t num_classes,
                                           const std::string& path = "$") {
    if (!root.contains("grid")) throw config_error(path, "missing 'grid' block");
    const json& g = root["grid"];
    std::vector<OfferedLoad> points;
    try {
        if (g.contains("points")) {
            for (const json& p : g["points"]) {
                auto v = p.get<std::vector<double>>();
                if (v.size() != num_classes)
                    throw config_error(path + ".grid.points",
                                       "point arity differs from receiver classes");
                points.emplace_back(std::move(v));
            }
            return points;
        }
        const double from = get_number(g, "from", path + ".grid");
        const double to = get_number(g, "to", path + ".grid");
        const double step = get_number(g, "step", path + ".grid");
        if (!(step > 0.0)) throw config_error(path + ".grid.step", "step must be positive");
        std::vector<double> direction(num_classes, 1.0);
        if (g.contains("direction")) {
            direction = g["direction"].get<std::vector<double>>();
            if (direction.size() != num_classes)
                throw config_error(path + ".grid.direction",
                                   "direction arity differs from receiver classes");
        }
        const auto count = static_cast<long long>(std::floor((to - from) / step + 1e-9)) + 1;
        for (long long i = 0; i < count; ++i) {
            const double t = from + static_cast<double>(i) * step;
            std::vector<double> v(direction);
            for (double& x : v) x *= t;
            points.emplace_back(std::move(v));
        }
    } catch (const ValidationError&) {
        throw;
    } catch (const json::exception& e) {
        throw config_error(path + ".grid", e.what());
    }
    return points;
}

/// Scenario block for the Monte Carlo path. Populations may be left to the
/// caller (set from a grid point).
inline Scenario parse_scenario(const json& root, const std::optional<ChannelModel>& channel,
                               const std::string& path = "$") {
    if (!root.contains("simulation")) throw config_error(path, "missing 'simulation' block");
    const json& s = root["simulation"];
    Scenario scenario;
    scenario.t_slots = static_cast<int>(get_number(s, "t_slots", path + ".simulation"));
    scenario.max_sic_iters =
        static_cast<int>(get_number(s, "max_sic_iters", path + ".simulation", 100));
    scenario.mode = decode_mode_from_string(s.value("mode", "spatial_temporal"));
    scenario.poisson_populations = s.value("poisson_populations", false);
    if (channel) scenario.channel = *channel;
    if (!s.contains("classes") || !s["classes"].is_array() || s["classes"].empty())
        throw config_error(path + ".simulation", "needs a nonempty 'classes' array");
    std::size_t idx = 0;
    for (const json& cls : s["classes"]) {
        const std::string cpath = path + ".simulation.classes[" + std::to_string(idx) + "]";
        ClassTraffic traffic;
        if (!cls.contains("dd")) throw config_error(cpath, "class needs a 'dd' field");
        traffic.dd = parse_dd(cls["dd"], cpath + ".dd");
        if (cls.contains("g")) traffic.g = cls["g"].get<double>();
        if (cls.contains("n")) traffic.n = cls["n"].get<long long>();
        if (cls.contains("footprint") && !cls["footprint"].is_string()) {
            try {
                traffic.fixed_footprint = cls["footprint"].get<ReceiverSet>();
            } catch (const json::exception& e) {
                throw config_error(cpath + ".footprint", e.what());
            }
        }
        scenario.classes.push_back(std::move(traffic));
        ++idx;
    }
    return scenario;
}

}  // namespace cra
