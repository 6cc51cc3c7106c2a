#pragma once

// Statistics over simulation traces and return series.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bubblesim/config.hpp"
#include "bubblesim/engine.hpp"
#include "bubblesim/error.hpp"

namespace bubblesim {

/// Gross per-period returns plus the number of periods in a year.
class ReturnSeries {
public:
    ReturnSeries() = default;
    ReturnSeries(std::vector<double> gross, int periods_per_year)
        : gross_(std::move(gross)), periods_per_year_(periods_per_year) {
        if (periods_per_year_ < 1) throw StatsError("return series needs periods_per_year >= 1");
        for (std::size_t i = 0; i < gross_.size(); ++i) {
            if (!(gross_[i] > 0.0))
                throw StatsError("gross return at index " + std::to_string(i) + " is not positive");
        }
    }

    std::span<const double> values() const { return gross_; }
    std::size_t size() const { return gross_.size(); }
    bool empty() const { return gross_.empty(); }
    int periods_per_year() const { return periods_per_year_; }
    double operator[](std::size_t i) const { return gross_[i]; }

    /// The same returns from index `from` on.
    ReturnSeries tail(std::size_t from) const {
        from = std::min(from, gross_.size());
        return ReturnSeries(std::vector<double>(gross_.begin() + static_cast<std::ptrdiff_t>(from),
                                                gross_.end()),
                            periods_per_year_);
    }

    std::vector<double> log_returns() const {
        std::vector<double> out(gross_.size());
        std::transform(gross_.begin(), gross_.end(), out.begin(), [](double g) { return std::log(g); });
        return out;
    }

private:
    std::vector<double> gross_;
    int periods_per_year_ = 1;
};

// ---------------------------------------------------------------------------
// small numeric helpers

inline double mean(std::span<const double> xs) {
    if (xs.empty()) throw StatsError("mean of an empty sample");
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Population standard deviation.
inline double stddev(std::span<const double> xs) {
    const double mu = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(xs.size()));
}

/// Pearson correlation; empty when fewer than three pairs or either side is constant.
inline std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw StatsError("pearson: samples differ in length");
    if (xs.size() < 3) return std::nullopt;
    const double mx = mean(xs);
    const double my = mean(ys);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Ordinary least-squares slope of ys against their index.
inline double index_slope(std::span<const double> ys) {
    if (ys.size() < 2) throw StatsError("slope needs at least two points");
    const double n = static_cast<double>(ys.size());
    const double tbar = 0.5 * (n - 1.0);
    const double ybar = mean(ys);
    double sty = 0.0, stt = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        const double t = static_cast<double>(i) - tbar;
        sty += t * (ys[i] - ybar);
        stt += t * t;
    }
    return sty / stt;
}

/// Linearly interpolated sample quantile of sorted data, p in [0, 1].
inline double sorted_quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw StatsError("quantile of an empty sample");
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// ---------------------------------------------------------------------------
// series from traces

/// Per-period session returns price_after / price_before, in period order.
inline ReturnSeries gross_returns(const SimulationTrace& trace) {
    if (trace.records.empty()) throw StatsError("gross_returns: empty trace");
    std::vector<double> out;
    out.reserve(trace.records.size());
    for (const auto& r : trace.records) out.push_back(r.gross_return);
    return ReturnSeries(std::move(out), trace.config.periods_per_year);
}

inline std::vector<double> dollar_volume_series(const SimulationTrace& trace) {
    std::vector<double> out;
    out.reserve(trace.records.size());
    for (const auto& r : trace.records) out.push_back(r.dollar_volume);
    return out;
}

inline std::vector<double> geo_mean_target_series(const SimulationTrace& trace) {
    std::vector<double> out;
    out.reserve(trace.records.size());
    for (const auto& r : trace.records) out.push_back(r.geo_mean_target_ratio);
    return out;
}

// ---------------------------------------------------------------------------
// burn-in and mean returns

/// Start of the stationary part of the series.
///
/// The series is cut into consecutive one-year windows. The cutoff is the start
/// of the earliest window from which every consecutive pair of window geometric
/// means differs by less than 1% (relative). Capped at 20% of the length; 0 when
/// the series has fewer than two full windows.
inline std::size_t burn_in_cutoff(const ReturnSeries& series) {
    const auto w = static_cast<std::size_t>(series.periods_per_year());
    const std::size_t n = series.size();
    if (n < 2 * w) return 0;
    const std::size_t windows = n / w;
    std::vector<double> gm(windows);
    const auto vals = series.values();
    for (std::size_t j = 0; j < windows; ++j) {
        double s = 0.0;
        for (std::size_t i = j * w; i < (j + 1) * w; ++i) s += std::log(vals[i]);
        gm[j] = std::exp(s / static_cast<double>(w));
    }
    std::size_t stable_from = windows - 1;
    for (std::size_t j = windows - 1; j-- > 0;) {
        if (std::abs(gm[j + 1] / gm[j] - 1.0) < 0.01) {
            stable_from = j;
        } else {
            break;
        }
    }
    const auto cap = static_cast<std::size_t>(0.2 * static_cast<double>(n));
    return std::min(stable_from * w, cap);
}

/// exp(mean log return) after burn-in; raised to periods_per_year when annualized.
inline double geometric_mean_return(const ReturnSeries& series, bool annualize) {
    const auto stationary = series.tail(burn_in_cutoff(series));
    if (stationary.empty()) throw StatsError("geometric mean of an empty series");
    const auto logs = stationary.log_returns();
    const double per_period = mean(logs);
    return std::exp(annualize ? per_period * series.periods_per_year() : per_period);
}

/// Annual mean return predicted by the closed form r * (alpha beta)^(m tau / 2N);
/// m is the policy's mean for random active-set sizes.
inline double predicted_mean_return(const ModelConfig& config) {
    const double exponent = mean_active(config.active) * config.periods_per_year /
                            (2.0 * static_cast<double>(config.n_agents));
    return config.annual_bond_rate * std::pow(config.feedback.bias(), exponent);
}

/// Annual growth of the population mean stock-to-bond target (the bond rate is
/// not part of it).
inline double predicted_risk_growth(const ModelConfig& config) {
    ModelConfig c = config;
    c.annual_bond_rate = 1.0;
    return predicted_mean_return(c);
}

// ---------------------------------------------------------------------------
// correlation structure and distribution shape

/// Sample autocorrelation of a raw sample at lag `lag`, using the mean product
/// over the n - lag available pairs divided by the variance. Lag 0 is 1.
inline double sample_autocorrelation(std::span<const double> xs, std::size_t lag) {
    if (xs.size() < lag + 2) throw StatsError("autocorrelation: sample too short for lag");
    const double mu = mean(xs);
    double var = 0.0;
    for (double x : xs) var += (x - mu) * (x - mu);
    if (var <= 0.0) throw StatsError("autocorrelation: constant sample");
    double cov = 0.0;
    for (std::size_t t = 0; t + lag < xs.size(); ++t) cov += (xs[t] - mu) * (xs[t + lag] - mu);
    const double n = static_cast<double>(xs.size());
    return (cov / (n - static_cast<double>(lag))) / (var / n);
}

/// Autocorrelation of the post-burn-in gross returns at lags 0..max_lag.
inline std::vector<double> autocorrelation(const ReturnSeries& series, std::size_t max_lag) {
    const auto stationary = series.tail(burn_in_cutoff(series));
    if (stationary.size() < max_lag + 2)
        throw StatsError("autocorrelation: series shorter than max_lag + 2");
    std::vector<double> out(max_lag + 1);
    for (std::size_t l = 0; l <= max_lag; ++l) out[l] = sample_autocorrelation(stationary.values(), l);
    return out;
}

/// 95% band for the autocorrelation of white noise of length n.
inline double white_noise_band(std::size_t n) { return 2.0 / std::sqrt(static_cast<double>(n)); }

struct TailDiagnostics {
    std::size_t samples = 0;
    /// m4 / m2^2 - 3 of the log returns; 0 for a log-normal.
    double excess_kurtosis = 0.0;
    double kurtosis_standard_error = 0.0;
    /// Fraction of gross returns within the equality tolerance of 1.
    double mass_at_one = 0.0;
    /// Fraction within 0.1 sigma of the mean log return, over the normal value (0.0797).
    double center_mass_ratio = 0.0;
    /// Distance of the 1% / 99% log-return quantiles from the mean, in units of
    /// the normal quantile distance sigma * 2.326; above 1 means heavier tails.
    double lower_tail_ratio = 0.0;
    double upper_tail_ratio = 0.0;
};

inline TailDiagnostics tail_diagnostics(const ReturnSeries& series,
                                        double equality_tolerance = kDefaultEqualityTolerance) {
    constexpr double kZ99 = 2.3263478740408408;
    constexpr double kNormalCenterMass = 0.079655674554057; // P(|Z| < 0.1)
    const auto stationary = series.tail(burn_in_cutoff(series));
    if (stationary.size() < 100)
        throw StatsError("tail diagnostics need at least 100 post-burn-in samples, got " +
                         std::to_string(stationary.size()));
    auto logs = stationary.log_returns();
    const double n = static_cast<double>(logs.size());
    const double mu = mean(logs);
    double m2 = 0.0, m4 = 0.0;
    for (double x : logs) {
        const double d = (x - mu) * (x - mu);
        m2 += d;
        m4 += d * d;
    }
    m2 /= n;
    m4 /= n;

    TailDiagnostics out;
    out.samples = logs.size();
    out.kurtosis_standard_error = std::sqrt(24.0 / n);
    std::size_t at_one = 0;
    for (double g : stationary.values())
        if (std::abs(g - 1.0) <= equality_tolerance) ++at_one;
    out.mass_at_one = static_cast<double>(at_one) / n;
    if (m2 <= 0.0) return out;

    const double sigma = std::sqrt(m2);
    out.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    std::size_t center = 0;
    for (double x : logs)
        if (std::abs(x - mu) < 0.1 * sigma) ++center;
    out.center_mass_ratio = (static_cast<double>(center) / n) / kNormalCenterMass;
    std::sort(logs.begin(), logs.end());
    out.lower_tail_ratio = (mu - sorted_quantile(logs, 0.01)) / (sigma * kZ99);
    out.upper_tail_ratio = (sorted_quantile(logs, 0.99) - mu) / (sigma * kZ99);
    return out;
}

// ---------------------------------------------------------------------------
// wealth

struct WealthRow {
    std::size_t agent = 0;
    double stock = 0.0;
    double bond = 0.0;
    double total = 0.0;
    double target_ratio = 0.0;
};

struct WealthSnapshot {
    std::vector<WealthRow> rows;
    double mean_stock = 0.0;
    double mean_bond = 0.0;
    double mean_total = 0.0;
    double mean_target_ratio = 0.0;
    double min_target_ratio = 0.0;
};

inline WealthSnapshot wealth_snapshot(const MarketState& state) {
    WealthSnapshot snap;
    if (state.agents.empty()) return snap;
    snap.rows.reserve(state.agents.size());
    snap.min_target_ratio = state.agents.front().target_ratio;
    for (std::size_t i = 0; i < state.agents.size(); ++i) {
        const auto& a = state.agents[i];
        snap.rows.push_back({i, a.stock_value, a.bond_value, a.total(), a.target_ratio});
        snap.mean_stock += a.stock_value;
        snap.mean_bond += a.bond_value;
        snap.mean_target_ratio += a.target_ratio;
        snap.min_target_ratio = std::min(snap.min_target_ratio, a.target_ratio);
    }
    const double n = static_cast<double>(state.agents.size());
    snap.mean_stock /= n;
    snap.mean_bond /= n;
    snap.mean_target_ratio /= n;
    snap.mean_total = snap.mean_stock + snap.mean_bond;
    return snap;
}

// ---------------------------------------------------------------------------
// agent-versus-market game

/// Payoffs to one agent after n years, indexed (agent action, market action).
struct PayoffMatrix {
    double stay_stay = 0.0;
    double stay_sell = 0.0;
    double sell_stay = 0.0;
    double sell_sell = 0.0;
};

inline PayoffMatrix payoff_matrix(double bond0, double stock0, double annual_return, int years,
                                  double stay_recovery_fraction = 0.1) {
    if (bond0 < 0.0 || stock0 < 0.0 || annual_return < 0.0 || years < 0 ||
        stay_recovery_fraction < 0.0)
        throw StatsError("payoff matrix inputs must be nonnegative");
    const double grown = stock0 * std::pow(annual_return, years);
    return {bond0 + stay_recovery_fraction * grown, 0.0, bond0 + grown, bond0};
}

// ---------------------------------------------------------------------------
// mean/volatility correlation by sign class

struct SignedCorrelation {
    std::size_t positive_count = 0;
    std::size_t negative_count = 0;
    /// Empty when the class has fewer than three members or is degenerate.
    std::optional<double> positive;
    std::optional<double> negative;
};

/// Splits (mean, std) pairs by the sign of the mean (zero means are dropped) and
/// correlates mean with std inside each class.
inline SignedCorrelation correlate_by_sign(std::span<const double> means,
                                           std::span<const double> stds) {
    if (means.size() != stds.size()) throw StatsError("correlate_by_sign: length mismatch");
    std::vector<double> pm, ps, nm, ns;
    for (std::size_t i = 0; i < means.size(); ++i) {
        if (means[i] > 0.0) {
            pm.push_back(means[i]);
            ps.push_back(stds[i]);
        } else if (means[i] < 0.0) {
            nm.push_back(means[i]);
            ns.push_back(stds[i]);
        }
    }
    SignedCorrelation out;
    out.positive_count = pm.size();
    out.negative_count = nm.size();
    out.positive = pearson(pm, ps);
    out.negative = pearson(nm, ns);
    return out;
}

} // namespace bubblesim
