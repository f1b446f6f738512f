#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "g2flow/flow.hpp"
#include "g2flow/lattice.hpp"

namespace g2flow {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BackgroundConfig {
    enum class Kind { TorsionFree, SigmaU, File };
    Kind kind = Kind::TorsionFree;
    int axis = 1;
    int twists = 1;
    std::string path;
};

struct InitConfig {
    enum class Kind { Constant, Winding, Perturbation, File };
    Kind kind = Kind::Constant;
    int axis = 1;
    int twists = 1;
    double amplitude = 0.1;
    std::uint64_t seed = 1;
    std::string path;
};

struct FlowConfig {
    Integrator integrator = Integrator::Rk4;
    std::optional<double> dt;  // derived from cfl_factor when absent
    double cfl_factor = 0.25;
    double t_end = 1.0;
    int renormalize_stride = 1;
};

struct MonotonicityConfig {
    bool enabled = false;
    std::vector<int> x0;
    double t0 = 0.0;
};

struct DiagnosticsConfig {
    int stride = 1;
    MonotonicityConfig monotonicity;
};

struct OutputConfig {
    std::string csv;
    std::string checkpoint;
    int checkpoint_stride = 0;
};

struct RunConfig {
    LatticeSpec lattice;
    BackgroundConfig background;
    InitConfig init;
    FlowConfig flow;
    DiagnosticsConfig diagnostics;
    OutputConfig output;

    double resolved_dt() const {
        if (flow.dt) return *flow.dt;
        return cfl_limit(lattice, flow.cfl_factor);
    }
};

namespace detail {

template <typename T>
T require_field(const nlohmann::json& j, const std::string& key) {
    if (!j.contains(key)) throw ConfigError("missing config key: " + key);
    try {
        return j.at(key).get<T>();
    } catch (const std::exception&) {
        throw ConfigError("config key has wrong type: " + key);
    }
}

template <typename T>
T optional_field(const nlohmann::json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const std::exception&) {
        throw ConfigError("config key has wrong type: " + key);
    }
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
    RunConfig cfg;
    if (!j.is_object()) throw ConfigError("config root must be an object");

    if (!j.contains("lattice")) throw ConfigError("missing config key: lattice");
    const auto& jl = j.at("lattice");
    try {
        cfg.lattice = LatticeSpec(detail::require_field<std::vector<int>>(jl, "active_axes"),
                                  detail::require_field<int>(jl, "n"),
                                  detail::require_field<double>(jl, "L"),
                                  detail::optional_field<bool>(jl, "allow_large", false));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid lattice: ") + e.what());
    }

    const auto& jb = j.contains("background") ? j.at("background") : nlohmann::json::object();
    std::string bkind = detail::optional_field<std::string>(jb, "kind", "torsion_free");
    if (bkind == "torsion_free") {
        cfg.background.kind = BackgroundConfig::Kind::TorsionFree;
    } else if (bkind == "sigma_u") {
        cfg.background.kind = BackgroundConfig::Kind::SigmaU;
        cfg.background.axis = detail::require_field<int>(jb, "axis");
        cfg.background.twists = detail::require_field<int>(jb, "twists");
    } else if (bkind == "file") {
        cfg.background.kind = BackgroundConfig::Kind::File;
        cfg.background.path = detail::require_field<std::string>(jb, "path");
    } else {
        throw ConfigError("unknown background.kind: " + bkind);
    }

    if (!j.contains("init")) throw ConfigError("missing config key: init");
    const auto& ji = j.at("init");
    std::string ikind = detail::require_field<std::string>(ji, "kind");
    if (ikind == "constant") {
        cfg.init.kind = InitConfig::Kind::Constant;
    } else if (ikind == "winding") {
        cfg.init.kind = InitConfig::Kind::Winding;
        cfg.init.axis = detail::require_field<int>(ji, "axis");
        cfg.init.twists = detail::require_field<int>(ji, "twists");
    } else if (ikind == "perturbation") {
        cfg.init.kind = InitConfig::Kind::Perturbation;
        cfg.init.amplitude = detail::require_field<double>(ji, "amplitude");
        cfg.init.seed = detail::require_field<std::uint64_t>(ji, "seed");
        if (!(cfg.init.amplitude > 0.0)) throw ConfigError("init.amplitude must be positive");
    } else if (ikind == "file") {
        cfg.init.kind = InitConfig::Kind::File;
        cfg.init.path = detail::require_field<std::string>(ji, "path");
    } else {
        throw ConfigError("unknown init.kind: " + ikind);
    }

    if (!j.contains("flow")) throw ConfigError("missing config key: flow");
    const auto& jf = j.at("flow");
    std::string integ = detail::optional_field<std::string>(jf, "integrator", "rk4");
    if (integ == "rk4") {
        cfg.flow.integrator = Integrator::Rk4;
    } else if (integ == "euler") {
        cfg.flow.integrator = Integrator::Euler;
    } else {
        throw ConfigError("unknown flow.integrator: " + integ);
    }
    if (jf.contains("dt")) cfg.flow.dt = detail::require_field<double>(jf, "dt");
    cfg.flow.cfl_factor = detail::optional_field<double>(jf, "cfl_factor", 0.25);
    cfg.flow.t_end = detail::require_field<double>(jf, "t_end");
    cfg.flow.renormalize_stride = detail::optional_field<int>(jf, "renormalize_stride", 1);
    if (cfg.flow.dt && !(*cfg.flow.dt > 0.0)) throw ConfigError("flow.dt must be positive");
    if (!(cfg.flow.cfl_factor > 0.0)) throw ConfigError("flow.cfl_factor must be positive");
    if (!(cfg.flow.t_end > 0.0)) throw ConfigError("flow.t_end must be positive");
    if (cfg.flow.renormalize_stride < 1) throw ConfigError("flow.renormalize_stride must be >= 1");

    const auto& jd = j.contains("diagnostics") ? j.at("diagnostics") : nlohmann::json::object();
    cfg.diagnostics.stride = detail::optional_field<int>(jd, "stride", 1);
    if (cfg.diagnostics.stride < 1) throw ConfigError("diagnostics.stride must be >= 1");
    if (jd.contains("monotonicity")) {
        const auto& jm = jd.at("monotonicity");
        cfg.diagnostics.monotonicity.enabled = detail::optional_field<bool>(jm, "enabled", false);
        if (cfg.diagnostics.monotonicity.enabled) {
            cfg.diagnostics.monotonicity.x0 = detail::require_field<std::vector<int>>(jm, "x0");
            cfg.diagnostics.monotonicity.t0 = detail::require_field<double>(jm, "t0");
            if (cfg.diagnostics.monotonicity.x0.size() !=
                static_cast<std::size_t>(cfg.lattice.dim()))
                throw ConfigError("diagnostics.monotonicity.x0 must have one entry per active axis");
        }
    }

    const auto& jo = j.contains("output") ? j.at("output") : nlohmann::json::object();
    cfg.output.csv = detail::optional_field<std::string>(jo, "csv", "");
    cfg.output.checkpoint = detail::optional_field<std::string>(jo, "checkpoint", "");
    cfg.output.checkpoint_stride = detail::optional_field<int>(jo, "checkpoint_stride", 0);
    if (cfg.output.checkpoint_stride < 0) throw ConfigError("output.checkpoint_stride must be >= 0");

    return cfg;
}

/// Apply "dotted.key=value" overrides onto a parsed JSON config. Values are
/// interpreted as JSON when possible, else taken as strings.
inline void apply_overrides(nlohmann::json& j, const std::vector<std::string>& overrides) {
    for (const std::string& item : overrides) {
        auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("override must look like key=value: " + item);
        std::string key = item.substr(0, eq);
        std::string value = item.substr(eq + 1);

        std::string pointer = "/";
        for (char c : key) pointer += (c == '.') ? '/' : c;

        nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
        if (parsed.is_discarded()) parsed = value;
        try {
            j[nlohmann::json::json_pointer(pointer)] = parsed;
        } catch (const std::exception& e) {
            throw ConfigError("cannot apply override " + item + ": " + e.what());
        }
    }
}

inline nlohmann::json load_config_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + path);
    return j;
}

}  // namespace g2flow
