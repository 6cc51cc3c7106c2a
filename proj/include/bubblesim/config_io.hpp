#pragma once

// Config documents: JSON objects mirroring ModelConfig plus sweep, experiment
// and output sections. Every key is optional; unknown keys are rejected and all
// errors name the dotted field path.
//
//   {
//     "model": {
//       "n_agents": 500,
//       "active": {"fixed": 10}            | {"uniform": {"min": 2, "max": 18}},
//       "periods_per_year": 100,
//       "feedback": {"alpha": 3.01, "beta": 0.34, "equality_tolerance": 1e-12},
//       "annual_bond_rate": 1.0,
//       "initial_price": 1.0,
//       "initial_portfolio": {"stock": 100, "bond": 300}
//                          | [{"stock": .., "bond": .., "target_ratio": ..}, ...],
//       "perturbation": 0.01,
//       "noise_sigma": 0.0,
//       "seed": 42,
//       "horizon_periods": 1000
//     },
//     "sweep": {"cells": 1000, "alpha_range": [0.8, 1.5], "beta_range": [0.8, 1.5],
//               "seeds_per_cell": 1, "workers": 1, "active_counts": [10, 50]},
//     "experiment": {"overrides": { <model keys> }},
//     "output": {"directory": "out"}
//   }

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bubblesim/config.hpp"
#include "bubblesim/error.hpp"
#include "bubblesim/sweep.hpp"

namespace bubblesim {

struct SweepSettings {
    std::size_t cells = 1000;
    GridBounds bounds{};
    std::size_t seeds_per_cell = 1;
    unsigned workers = 1;
    std::vector<std::size_t> active_counts{10, 50};
};

struct OutputSettings {
    std::string directory = "out";
};

struct CliConfig {
    ModelConfig model{};
    SweepSettings sweep{};
    /// Model-shaped overrides applied on top of each experiment's own defaults.
    nlohmann::json experiment_overrides = nlohmann::json::object();
    OutputSettings output{};
};

namespace detail {

using json = nlohmann::json;

inline std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

inline void require_object(const json& j, const std::string& path,
                           std::initializer_list<const char*> allowed) {
    if (!j.is_object()) config_fail((path.empty() ? "config document" : path) + " must be an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items())
        if (!keys.count(key)) config_fail("unknown key " + join(path, key));
}

inline double read_number(const json& j, const std::string& path) {
    if (!j.is_number()) config_fail(path + " must be a number");
    return j.get<double>();
}

inline std::uint64_t read_unsigned(const json& j, const std::string& path) {
    const bool ok = j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0);
    if (!ok) config_fail(path + " must be a nonnegative integer");
    return j.get<std::uint64_t>();
}

inline std::int64_t read_integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) config_fail(path + " must be an integer");
    return j.get<std::int64_t>();
}

inline std::pair<double, double> read_range(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) config_fail(path + " must be a [low, high] pair");
    return {read_number(j[0], path + "[0]"), read_number(j[1], path + "[1]")};
}

inline AgentState read_agent(const json& j, const std::string& path, bool with_target) {
    if (with_target)
        require_object(j, path, {"stock", "bond", "target_ratio"});
    else
        require_object(j, path, {"stock", "bond"});
    if (!j.contains("stock") || !j.contains("bond"))
        config_fail(path + " needs both stock and bond");
    AgentState a;
    a.stock_value = read_number(j["stock"], path + ".stock");
    a.bond_value = read_number(j["bond"], path + ".bond");
    a.target_ratio = j.contains("target_ratio") ? read_number(j["target_ratio"], path + ".target_ratio")
                                                : a.stock_value / a.bond_value;
    return a;
}

inline void read_active(const json& j, const std::string& path, ModelConfig& m) {
    require_object(j, path, {"fixed", "uniform"});
    if (j.size() != 1) config_fail(path + " must hold exactly one of fixed, uniform");
    if (j.contains("fixed")) {
        m.active = FixedActive{static_cast<std::size_t>(read_unsigned(j["fixed"], path + ".fixed"))};
    } else {
        const auto& u = j["uniform"];
        const std::string up = path + ".uniform";
        require_object(u, up, {"min", "max"});
        if (!u.contains("min") || !u.contains("max")) config_fail(up + " needs min and max");
        m.active = UniformActive{static_cast<std::size_t>(read_unsigned(u["min"], up + ".min")),
                                 static_cast<std::size_t>(read_unsigned(u["max"], up + ".max"))};
    }
}

} // namespace detail

/// Applies the keys present in a model object on top of `model`. Does not validate.
inline void apply_model_json(ModelConfig& model, const nlohmann::json& j,
                             const std::string& path = "model") {
    using namespace detail;
    require_object(j, path,
                   {"n_agents", "active", "periods_per_year", "feedback", "annual_bond_rate",
                    "initial_price", "initial_portfolio", "perturbation", "noise_sigma", "seed",
                    "horizon_periods"});
    if (j.contains("n_agents"))
        model.n_agents = static_cast<std::size_t>(read_unsigned(j["n_agents"], join(path, "n_agents")));
    if (j.contains("active")) read_active(j["active"], join(path, "active"), model);
    if (j.contains("periods_per_year"))
        model.periods_per_year =
            static_cast<int>(read_integer(j["periods_per_year"], join(path, "periods_per_year")));
    if (j.contains("feedback")) {
        const auto& f = j["feedback"];
        const std::string fp = join(path, "feedback");
        require_object(f, fp, {"alpha", "beta", "equality_tolerance"});
        if (f.contains("alpha")) model.feedback.alpha = read_number(f["alpha"], fp + ".alpha");
        if (f.contains("beta")) model.feedback.beta = read_number(f["beta"], fp + ".beta");
        if (f.contains("equality_tolerance"))
            model.feedback.equality_tolerance =
                read_number(f["equality_tolerance"], fp + ".equality_tolerance");
    }
    if (j.contains("annual_bond_rate"))
        model.annual_bond_rate = read_number(j["annual_bond_rate"], join(path, "annual_bond_rate"));
    if (j.contains("initial_price"))
        model.initial_price = read_number(j["initial_price"], join(path, "initial_price"));
    if (j.contains("initial_portfolio")) {
        const auto& p = j["initial_portfolio"];
        const std::string pp = join(path, "initial_portfolio");
        if (p.is_array()) {
            model.initial_portfolio.clear();
            for (std::size_t i = 0; i < p.size(); ++i)
                model.initial_portfolio.push_back(
                    read_agent(p[i], pp + "[" + std::to_string(i) + "]", true));
        } else {
            model.portfolio_template = read_agent(p, pp, false);
            model.initial_portfolio.clear();
        }
    }
    if (j.contains("perturbation"))
        model.perturbation = read_number(j["perturbation"], join(path, "perturbation"));
    if (j.contains("noise_sigma"))
        model.noise_sigma = read_number(j["noise_sigma"], join(path, "noise_sigma"));
    if (j.contains("seed")) model.seed = read_unsigned(j["seed"], join(path, "seed"));
    if (j.contains("horizon_periods"))
        model.horizon_periods =
            static_cast<long>(read_integer(j["horizon_periods"], join(path, "horizon_periods")));
}

/// Parses and validates a config document; empty text yields all defaults.
inline CliConfig parse_config(std::string_view text) {
    using namespace detail;
    CliConfig cfg;
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return cfg;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        config_fail(std::string("malformed config document: ") + e.what());
    }
    require_object(doc, "", {"model", "sweep", "experiment", "output"});
    if (doc.contains("model")) apply_model_json(cfg.model, doc["model"]);
    cfg.model.validate();

    if (doc.contains("sweep")) {
        const auto& s = doc["sweep"];
        require_object(s, "sweep",
                       {"cells", "alpha_range", "beta_range", "seeds_per_cell", "workers",
                        "active_counts"});
        if (s.contains("cells"))
            cfg.sweep.cells = static_cast<std::size_t>(read_unsigned(s["cells"], "sweep.cells"));
        if (s.contains("alpha_range")) {
            const auto [lo, hi] = read_range(s["alpha_range"], "sweep.alpha_range");
            cfg.sweep.bounds.alpha_min = lo;
            cfg.sweep.bounds.alpha_max = hi;
        }
        if (s.contains("beta_range")) {
            const auto [lo, hi] = read_range(s["beta_range"], "sweep.beta_range");
            cfg.sweep.bounds.beta_min = lo;
            cfg.sweep.bounds.beta_max = hi;
        }
        if (s.contains("seeds_per_cell"))
            cfg.sweep.seeds_per_cell =
                static_cast<std::size_t>(read_unsigned(s["seeds_per_cell"], "sweep.seeds_per_cell"));
        if (s.contains("workers"))
            cfg.sweep.workers = static_cast<unsigned>(read_unsigned(s["workers"], "sweep.workers"));
        if (s.contains("active_counts")) {
            const auto& a = s["active_counts"];
            if (!a.is_array() || a.empty()) config_fail("sweep.active_counts must be a nonempty array");
            cfg.sweep.active_counts.clear();
            for (std::size_t i = 0; i < a.size(); ++i)
                cfg.sweep.active_counts.push_back(static_cast<std::size_t>(
                    read_unsigned(a[i], "sweep.active_counts[" + std::to_string(i) + "]")));
        }
        if (cfg.sweep.cells < 1) config_fail("sweep.cells must be >= 1");
        if (cfg.sweep.seeds_per_cell < 1) config_fail("sweep.seeds_per_cell must be >= 1");
        const auto& b = cfg.sweep.bounds;
        if (!(b.alpha_min > 0.0) || b.alpha_max < b.alpha_min)
            config_fail("sweep.alpha_range must be positive and ordered");
        if (!(b.beta_min > 0.0) || b.beta_max < b.beta_min)
            config_fail("sweep.beta_range must be positive and ordered");
        for (std::size_t i = 0; i < cfg.sweep.active_counts.size(); ++i) {
            const auto m = cfg.sweep.active_counts[i];
            if (m < 2 || m > cfg.model.n_agents)
                config_fail("sweep.active_counts[" + std::to_string(i) + "] (" + std::to_string(m) +
                            ") must lie in [2, model.n_agents (" +
                            std::to_string(cfg.model.n_agents) + ")]");
        }
    }
    if (doc.contains("experiment")) {
        const auto& e = doc["experiment"];
        require_object(e, "experiment", {"overrides"});
        if (e.contains("overrides")) {
            // Type-check against a scratch config now so errors surface at load.
            ModelConfig scratch;
            apply_model_json(scratch, e["overrides"], "experiment.overrides");
            cfg.experiment_overrides = e["overrides"];
        }
    }
    if (doc.contains("output")) {
        const auto& o = doc["output"];
        require_object(o, "output", {"directory"});
        if (o.contains("directory")) {
            if (!o["directory"].is_string()) config_fail("output.directory must be a string");
            cfg.output.directory = o["directory"].get<std::string>();
        }
    }
    return cfg;
}

/// Config echo written into reports; round-trips through apply_model_json.
inline nlohmann::json to_json(const ModelConfig& m) {
    nlohmann::json j;
    j["n_agents"] = m.n_agents;
    if (const auto* f = std::get_if<FixedActive>(&m.active)) {
        j["active"] = {{"fixed", f->count}};
    } else {
        const auto& u = std::get<UniformActive>(m.active);
        j["active"] = {{"uniform", {{"min", u.min}, {"max", u.max}}}};
    }
    j["periods_per_year"] = m.periods_per_year;
    j["feedback"] = {{"alpha", m.feedback.alpha},
                     {"beta", m.feedback.beta},
                     {"equality_tolerance", m.feedback.equality_tolerance}};
    j["annual_bond_rate"] = m.annual_bond_rate;
    j["initial_price"] = m.initial_price;
    if (m.initial_portfolio.empty()) {
        j["initial_portfolio"] = {{"stock", m.portfolio_template.stock_value},
                                  {"bond", m.portfolio_template.bond_value}};
    } else {
        auto arr = nlohmann::json::array();
        for (const auto& a : m.initial_portfolio)
            arr.push_back({{"stock", a.stock_value}, {"bond", a.bond_value}, {"target_ratio", a.target_ratio}});
        j["initial_portfolio"] = std::move(arr);
    }
    j["perturbation"] = m.perturbation;
    j["noise_sigma"] = m.noise_sigma;
    j["seed"] = m.seed;
    j["horizon_periods"] = m.horizon_periods;
    return j;
}

} // namespace bubblesim
