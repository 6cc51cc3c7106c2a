#pragma once

// Pricing, rebalancing and feedback rules of the adaptive-trading market.
// Everything here is a pure function of its arguments.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <ranges>
#include <sstream>

#include "bubblesim/error.hpp"

namespace bubblesim {

/// Relative tolerance used for every "equal" comparison of ratios.
inline constexpr double kDefaultEqualityTolerance = 1e-12;

/// One agent's portfolio, in dollars, plus the stock-to-bond ratio it is aiming for.
struct AgentState {
    double stock_value = 0.0;
    double bond_value = 0.0;
    double target_ratio = 0.0;

    double total() const { return stock_value + bond_value; }
    double ratio() const { return stock_value / bond_value; }

    bool operator==(const AgentState&) const = default;
};

/// Gross price change P(n+1)/P(n) produced by one clearing.
class PriceRatio {
public:
    explicit PriceRatio(double gross) : gross_(gross) {
        if (!(gross > 0.0) || !std::isfinite(gross)) {
            std::ostringstream os;
            os << "price ratio must be positive and finite, got " << gross;
            throw ClearingError(os.str());
        }
    }
    double gross() const { return gross_; }

private:
    double gross_;
};

/// Multipliers applied to an agent's target ratio after a better (alpha) or
/// worse (beta) than expected period.
struct FeedbackParams {
    double alpha = 3.01;
    double beta = 0.34;
    double equality_tolerance = kDefaultEqualityTolerance;

    double bias() const { return alpha * beta; }
};

struct TradeOrder {
    std::size_t agent_index = 0;
    /// Dollars moved from bond to stock; negative means selling stock.
    double demand = 0.0;
};

template <typename R>
concept AgentRange = std::ranges::input_range<R> &&
                     std::convertible_to<std::ranges::range_reference_t<R>, const AgentState&>;

namespace detail {

inline bool nearly_equal(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

} // namespace detail

/// True when stock/bond equals the target ratio within the relative tolerance.
inline bool at_target(const AgentState& agent, double tol = kDefaultEqualityTolerance) {
    return detail::nearly_equal(agent.stock_value, agent.target_ratio * agent.bond_value, tol);
}

/// True when every agent in the collection already holds its target ratio.
template <AgentRange R>
bool is_equilibrium(R&& agents, double tol = kDefaultEqualityTolerance) {
    bool any = false;
    for (const AgentState& a : agents) {
        any = true;
        if (!at_target(a, tol)) return false;
    }
    if (!any) throw ClearingError("equilibrium check on an empty collection");
    return true;
}

/// Clearing price of the two-agent balance equation, taken verbatim:
///   g*s1 - k1*b1 = k2*b2 - g*s2   =>   g = (k1*b1 + k2*b2) / (s1 + s2).
/// The engine does not use this; see clearing_price() for the demand-exact form.
inline PriceRatio two_agent_clearing_price(const AgentState& first, const AgentState& second) {
    const double denom = first.stock_value + second.stock_value;
    if (!(denom > 0.0)) throw ClearingError("two-agent clearing: total stock value is zero");
    return PriceRatio((first.target_ratio * first.bond_value +
                       second.target_ratio * second.bond_value) / denom);
}

/// Price ratio at which the active agents' dollar demands sum to zero:
///   g = sum(k b / (1+k)) / sum(s / (1+k)).
/// Returns exactly 1 when the active set is already in equilibrium.
template <AgentRange R>
PriceRatio clearing_price(R&& active, double tol = kDefaultEqualityTolerance) {
    double num = 0.0;
    double den = 0.0;
    std::size_t count = 0;
    bool balanced = true;
    for (const AgentState& a : active) {
        const double w = 1.0 / (1.0 + a.target_ratio);
        num += a.target_ratio * a.bond_value * w;
        den += a.stock_value * w;
        balanced = balanced && at_target(a, tol);
        ++count;
    }
    if (count < 2) throw ClearingError("clearing needs at least two active agents");
    if (!(den > 0.0)) throw ClearingError("clearing denominator is zero: no active stock");
    if (balanced) return PriceRatio(1.0);
    return PriceRatio(num / den);
}

/// Dollars the agent moves into stock so that, after marking its stock to the
/// new price, it sits at its target ratio: x = (k b - g s) / (1 + k).
inline double agent_demand(const AgentState& agent, PriceRatio price,
                           double tol = kDefaultEqualityTolerance) {
    const double marked = price.gross() * agent.stock_value;
    const double wanted = agent.target_ratio * agent.bond_value;
    if (detail::nearly_equal(marked, wanted, tol)) return 0.0;
    return (wanted - marked) / (1.0 + agent.target_ratio);
}

/// Marks the agent's stock to the new price and trades to its target ratio.
/// Wealth g*s + b is preserved; the result is split as k:1.
inline AgentState rebalance(const AgentState& agent, PriceRatio price,
                            double tol = kDefaultEqualityTolerance) {
    const double marked = price.gross() * agent.stock_value;
    if (agent_demand(agent, price, tol) == 0.0) {
        return {marked, agent.bond_value, agent.target_ratio};
    }
    const double wealth = marked + agent.bond_value;
    const double k = agent.target_ratio;
    return {wealth * k / (1.0 + k), wealth / (1.0 + k), k};
}

/// Adaptive feedback: scale the target by alpha when the realized ratio beat
/// it, by beta when it fell short, leave it alone when they agree.
inline double feedback_update(double target, double realized, const FeedbackParams& params) {
    if (detail::nearly_equal(realized, target, params.equality_tolerance)) return target;
    return realized > target ? params.alpha * target : params.beta * target;
}

/// Pre-trade ratio at the new price, g*s/b. This is what the feedback rule compares.
inline double realized_ratio(const AgentState& agent, PriceRatio price) {
    return price.gross() * agent.stock_value / agent.bond_value;
}

} // namespace bubblesim
