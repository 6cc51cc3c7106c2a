#pragma once

// Period-by-period trading loop.
//
// One period:
//   0. (noisy tier) the price takes a log-normal step; all stock holdings follow it
//   1. draw the active set
//   2. clear over the active set
//   3. each active agent: realized ratio at the new price, rebalance, feedback update
//   4. inactive agents: stock marked to the new price, nothing else
//   5. every bond account accrues one period of interest
//   6. price *= gross, period += 1
//
// An active set that is already balanced, or degenerate (no stock to price), is
// recorded as a no-trade period in which the price drifts at the per-period bond
// rate.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ranges>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "bubblesim/config.hpp"
#include "bubblesim/error.hpp"
#include "bubblesim/market.hpp"
#include "bubblesim/rng.hpp"

namespace bubblesim {

struct MarketState {
    double price = 1.0;
    std::vector<AgentState> agents;
    long period = 0;
};

struct PeriodRecord {
    long period = 0;
    /// Price at the start of the trading session (after any noise step).
    double price_before = 0.0;
    double price_after = 0.0;
    double gross_return = 1.0;
    /// Half the sum of |demand| over the active agents.
    double dollar_volume = 0.0;
    /// Sum of signed demands; zero up to rounding on traded periods.
    double net_demand = 0.0;
    std::vector<std::size_t> active_indices;
    double mean_target_ratio = 0.0;
    /// exp(mean log k) over the whole population.
    double geo_mean_target_ratio = 0.0;
    /// Price multiplier from the between-session noise step (1 without noise).
    double noise_factor = 1.0;
    bool traded = false;
};

struct SimulationTrace {
    ModelConfig config;
    double initial_price = 0.0;
    std::vector<PeriodRecord> records;
    MarketState final_state;
};

inline double arithmetic_mean_target(std::span<const AgentState> agents) {
    double sum = 0.0;
    for (const auto& a : agents) sum += a.target_ratio;
    return sum / static_cast<double>(agents.size());
}

inline double geometric_mean_target(std::span<const AgentState> agents) {
    double sum = 0.0;
    for (const auto& a : agents) sum += std::log(a.target_ratio);
    return std::exp(sum / static_cast<double>(agents.size()));
}

/// Starting population: the template portfolio (or the explicit list) with
/// agent 0's target ratio scaled by (1 + perturbation).
inline MarketState initial_state(const ModelConfig& config) {
    MarketState state;
    state.price = config.initial_price;
    if (config.initial_portfolio.empty()) {
        AgentState a = config.portfolio_template;
        a.target_ratio = a.stock_value / a.bond_value;
        state.agents.assign(config.n_agents, a);
    } else {
        state.agents = config.initial_portfolio;
    }
    state.agents.front().target_ratio *= 1.0 + config.perturbation;
    return state;
}

/// Random machinery for one run. Selection and noise use separate streams so
/// switching noise on does not change who trades.
class RunStreams {
public:
    RunStreams(std::uint64_t seed, std::size_t n_agents)
        : selection_(derive_seed(seed, Stream::selection)),
          noise_(derive_seed(seed, Stream::noise)),
          sampler_(n_agents) {}

    RandomStream& selection() { return selection_; }
    RandomStream& noise() { return noise_; }
    IndexSampler& sampler() { return sampler_; }

private:
    RandomStream selection_;
    RandomStream noise_;
    IndexSampler sampler_;
};

/// Distinct, sorted active indices for one period.
inline std::vector<std::size_t> select_active(std::size_t population, const ActivePolicy& policy,
                                              RunStreams& streams) {
    if (population < 2) throw ConfigError("active-set selection needs at least two agents");
    std::size_t m = 0;
    if (const auto* f = std::get_if<FixedActive>(&policy)) {
        m = f->count;
    } else {
        const auto& u = std::get<UniformActive>(policy);
        m = static_cast<std::size_t>(streams.selection().between(
            static_cast<std::int64_t>(u.min), static_cast<std::int64_t>(u.max)));
    }
    if (m > population) throw ConfigError("active-set size exceeds population");
    std::vector<std::size_t> out;
    if (m == population) {
        out.resize(m);
        for (std::size_t i = 0; i < m; ++i) out[i] = i;
        return out;
    }
    const auto drawn = streams.sampler().draw(m, streams.selection());
    out.assign(drawn.begin(), drawn.end());
    std::sort(out.begin(), out.end());
    return out;
}

/// price * exp(sigma * z) with z standard normal.
inline double apply_noise(double price, double sigma, RandomStream& rng) {
    if (sigma == 0.0) return price;
    return price * std::exp(sigma * rng.normal());
}

/// Advances the state by one period in place and returns the period's record.
inline PeriodRecord step(MarketState& state, const ModelConfig& config, RunStreams& streams) {
    PeriodRecord rec;
    rec.period = state.period;

    if (config.noise_sigma > 0.0) {
        const double moved = apply_noise(state.price, config.noise_sigma, streams.noise());
        rec.noise_factor = moved / state.price;
        for (auto& a : state.agents) a.stock_value *= rec.noise_factor;
        state.price = moved;
    }
    rec.price_before = state.price;
    rec.active_indices = select_active(state.agents.size(), config.active, streams);

    const double tol = config.feedback.equality_tolerance;
    const double bond_growth = config.bond_rate_per_period();
    const auto active_view = rec.active_indices |
                             std::views::transform([&](std::size_t i) -> const AgentState& {
                                 return state.agents[i];
                             });

    // A balanced active set does not trade; like a degenerate one, its session
    // moves the price at the bond rate, so an equilibrium grows with the bonds.
    double gross = bond_growth;
    bool traded = false;
    if (!is_equilibrium(active_view, tol)) {
        try {
            gross = clearing_price(active_view, tol).gross();
            traded = true;
        } catch (const ClearingError&) {
        }
    }

    if (traded) {
        const PriceRatio price(gross);
        // Inactive agents are marked below together with everyone else; copy the
        // active agents first so their pre-trade holdings are intact.
        std::vector<AgentState> before;
        before.reserve(rec.active_indices.size());
        for (std::size_t i : rec.active_indices) before.push_back(state.agents[i]);

        for (auto& a : state.agents) a.stock_value *= gross;

        double abs_sum = 0.0;
        for (std::size_t j = 0; j < before.size(); ++j) {
            const AgentState& old = before[j];
            const double x = agent_demand(old, price, tol);
            abs_sum += std::abs(x);
            rec.net_demand += x;
            AgentState next = rebalance(old, price, tol);
            next.target_ratio =
                feedback_update(old.target_ratio, realized_ratio(old, price), config.feedback);
            state.agents[rec.active_indices[j]] = next;
        }
        rec.dollar_volume = 0.5 * abs_sum;
    } else {
        for (auto& a : state.agents) a.stock_value *= gross;
    }

    if (bond_growth != 1.0) {
        for (auto& a : state.agents) a.bond_value *= bond_growth;
    }

    rec.traded = traded;
    state.price *= gross;
    rec.price_after = state.price;
    rec.gross_return = rec.price_after / rec.price_before;
    rec.mean_target_ratio = arithmetic_mean_target(state.agents);
    rec.geo_mean_target_ratio = geometric_mean_target(state.agents);
    ++state.period;
    return rec;
}

/// Stepping loop bound to one configuration and one set of random streams.
class Simulator {
public:
    explicit Simulator(ModelConfig config)
        : Simulator(config, (config.validate(), initial_state(config))) {}

    Simulator(ModelConfig config, MarketState start)
        : config_(std::move(config)),
          state_(std::move(start)),
          streams_(config_.seed, state_.agents.size()) {
        config_.validate();
        if (state_.agents.size() != config_.n_agents)
            throw ConfigError("starting state has " + detail::str(state_.agents.size()) +
                              " agents but model.n_agents is " + detail::str(config_.n_agents));
    }

    const ModelConfig& config() const { return config_; }
    const MarketState& state() const { return state_; }

    PeriodRecord step() { return bubblesim::step(state_, config_, streams_); }

    /// Steps `periods` times, or until `stop(state)` returns true before a step.
    template <typename Stop>
    SimulationTrace run_until(long periods, Stop&& stop) {
        SimulationTrace trace;
        trace.config = config_;
        trace.initial_price = state_.price;
        trace.records.reserve(static_cast<std::size_t>(std::max(0L, periods)));
        for (long n = 0; n < periods && !stop(state_); ++n) trace.records.push_back(step());
        trace.final_state = state_;
        return trace;
    }

    SimulationTrace run(long periods) {
        return run_until(periods, [](const MarketState&) { return false; });
    }

private:
    ModelConfig config_;
    MarketState state_;
    RunStreams streams_;
};

/// Runs config.horizon_periods periods from the configured initial state.
inline SimulationTrace run(const ModelConfig& config) {
    Simulator sim(config);
    return sim.run(config.horizon_periods);
}

/// Instantaneous mark-down to floor_price: stock values scale, nothing trades.
inline MarketState crash(MarketState state, double floor_price) {
    if (!(floor_price > 0.0)) throw ConfigError("crash floor price must be > 0");
    const double scale = floor_price / state.price;
    for (auto& a : state.agents) a.stock_value *= scale;
    state.price = floor_price;
    return state;
}

/// Trades under a pessimistic feedback bias until the price is at or below
/// floor_price or max_periods have elapsed.
inline SimulationTrace deflate(MarketState state, const ModelConfig& config, double floor_price,
                               long max_periods) {
    if (!(config.feedback.bias() < 1.0))
        throw ConfigError("deflation requires model.feedback.alpha * model.feedback.beta < 1, got " +
                          detail::str(config.feedback.bias()));
    if (!(floor_price > 0.0)) throw ConfigError("deflation floor price must be > 0");
    Simulator sim(config, std::move(state));
    return sim.run_until(max_periods,
                         [floor_price](const MarketState& s) { return s.price <= floor_price; });
}

} // namespace bubblesim
