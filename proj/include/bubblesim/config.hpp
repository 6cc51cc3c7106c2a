#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "bubblesim/error.hpp"
#include "bubblesim/market.hpp"

namespace bubblesim {

/// The same number of agents trades every period.
struct FixedActive {
    std::size_t count = 10;
};

/// The number of active agents is drawn uniformly from [min, max] each period.
struct UniformActive {
    std::size_t min = 2;
    std::size_t max = 18;
};

using ActivePolicy = std::variant<FixedActive, UniformActive>;

inline double mean_active(const ActivePolicy& policy) {
    if (const auto* f = std::get_if<FixedActive>(&policy)) return static_cast<double>(f->count);
    const auto& u = std::get<UniformActive>(policy);
    return 0.5 * static_cast<double>(u.min + u.max);
}

struct ModelConfig {
    std::size_t n_agents = 500;
    ActivePolicy active = FixedActive{10};
    int periods_per_year = 100;
    FeedbackParams feedback{};
    /// Annual gross return r of the bond account; 1 means no interest.
    double annual_bond_rate = 1.0;
    double initial_price = 1.0;
    /// Applied to every agent when initial_portfolio is empty. Its target ratio
    /// is forced to stock/bond so the population starts in equilibrium.
    AgentState portfolio_template{100.0, 300.0, 100.0 / 300.0};
    /// Optional explicit per-agent starting portfolios (size must equal n_agents).
    std::vector<AgentState> initial_portfolio{};
    /// Relative bump applied to agent 0's target ratio to leave the fixed point.
    double perturbation = 0.01;
    /// Per-period log-price standard deviation between sessions; 0 disables.
    double noise_sigma = 0.0;
    std::uint64_t seed = 42;
    long horizon_periods = 1000;

    double bond_rate_per_period() const {
        return std::pow(annual_bond_rate, 1.0 / static_cast<double>(periods_per_year));
    }

    double years() const {
        return static_cast<double>(horizon_periods) / static_cast<double>(periods_per_year);
    }

    /// Throws ConfigError naming the offending field (dotted path as in config files).
    void validate() const;
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& message) { throw ConfigError(message); }

template <typename T>
std::string str(const T& v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

inline void validate_agent(const AgentState& a, const std::string& path) {
    if (!(a.stock_value > 0.0)) config_fail(path + ".stock must be > 0, got " + str(a.stock_value));
    if (!(a.bond_value > 0.0)) config_fail(path + ".bond must be > 0, got " + str(a.bond_value));
    if (!(a.target_ratio > 0.0))
        config_fail(path + ".target_ratio must be > 0, got " + str(a.target_ratio));
}

} // namespace detail

inline void ModelConfig::validate() const {
    using detail::config_fail;
    using detail::str;
    if (n_agents < 2) config_fail("model.n_agents must be >= 2, got " + str(n_agents));
    if (const auto* f = std::get_if<FixedActive>(&active)) {
        if (f->count < 2) config_fail("model.active.fixed must be >= 2, got " + str(f->count));
        if (f->count > n_agents)
            config_fail("model.active.fixed (" + str(f->count) + ") exceeds model.n_agents (" +
                        str(n_agents) + ")");
    } else {
        const auto& u = std::get<UniformActive>(active);
        if (u.min < 2) config_fail("model.active.uniform.min must be >= 2, got " + str(u.min));
        if (u.min > u.max)
            config_fail("model.active.uniform.min (" + str(u.min) +
                        ") exceeds model.active.uniform.max (" + str(u.max) + ")");
        if (u.max > n_agents)
            config_fail("model.active.uniform.max (" + str(u.max) + ") exceeds model.n_agents (" +
                        str(n_agents) + ")");
    }
    if (periods_per_year < 1)
        config_fail("model.periods_per_year must be >= 1, got " + str(periods_per_year));
    if (!(feedback.alpha > 0.0)) config_fail("model.feedback.alpha must be > 0");
    if (!(feedback.beta > 0.0)) config_fail("model.feedback.beta must be > 0");
    if (!(feedback.equality_tolerance >= 0.0))
        config_fail("model.feedback.equality_tolerance must be >= 0");
    if (!(annual_bond_rate > 0.0)) config_fail("model.annual_bond_rate must be > 0");
    if (!(initial_price > 0.0))
        config_fail("model.initial_price must be > 0, got " + str(initial_price));
    if (!(perturbation > -1.0)) config_fail("model.perturbation must be > -1");
    if (!(noise_sigma >= 0.0)) config_fail("model.noise_sigma must be >= 0");
    if (horizon_periods < 1)
        config_fail("model.horizon_periods must be >= 1, got " + str(horizon_periods));
    if (initial_portfolio.empty()) {
        detail::validate_agent(portfolio_template, "model.initial_portfolio");
    } else {
        if (initial_portfolio.size() != n_agents)
            config_fail("model.initial_portfolio has " + str(initial_portfolio.size()) +
                        " entries but model.n_agents is " + str(n_agents));
        for (std::size_t i = 0; i < initial_portfolio.size(); ++i)
            detail::validate_agent(initial_portfolio[i],
                                   "model.initial_portfolio[" + str(i) + "]");
    }
}

} // namespace bubblesim
