#pragma once

// Mean/volatility correlation across a grid of feedback parameters, and the
// same statistic computed from an external daily price series.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <istream>
#include <mutex>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "bubblesim/analytics.hpp"
#include "bubblesim/config.hpp"
#include "bubblesim/engine.hpp"
#include "bubblesim/error.hpp"
#include "bubblesim/rng.hpp"

namespace bubblesim {

struct FeedbackPoint {
    double alpha = 1.0;
    double beta = 1.0;
};

struct GridBounds {
    double alpha_min = 0.8;
    double alpha_max = 1.5;
    double beta_min = 0.8;
    double beta_max = 1.5;
};

/// `count` independent uniform (alpha, beta) pairs drawn from the sweep-grid stream.
inline std::vector<FeedbackPoint> sample_grid(std::size_t count, const GridBounds& bounds,
                                              std::uint64_t seed) {
    if (!(bounds.alpha_min > 0.0) || bounds.alpha_max < bounds.alpha_min ||
        !(bounds.beta_min > 0.0) || bounds.beta_max < bounds.beta_min)
        throw ConfigError("sweep grid bounds must be positive and ordered");
    RandomStream rng(derive_seed(seed, Stream::sweep_grid));
    std::vector<FeedbackPoint> grid(count);
    for (auto& p : grid) {
        p.alpha = rng.uniform(bounds.alpha_min, bounds.alpha_max);
        p.beta = rng.uniform(bounds.beta_min, bounds.beta_max);
    }
    return grid;
}

struct SweepCell {
    FeedbackPoint point;
    /// Mean and standard deviation of post-burn-in log returns, averaged over seeds.
    double mean_return = 0.0;
    double std_return = 0.0;
    std::size_t samples = 0;
};

struct SweepResult {
    std::vector<SweepCell> cells;
    SignedCorrelation correlation;
};

struct SweepOptions {
    std::size_t seeds_per_cell = 1;
    /// Worker threads; 0 means hardware concurrency.
    unsigned workers = 1;
};

/// Stationary mean and std of one cell's log returns.
inline SweepCell simulate_cell(const ModelConfig& base, FeedbackPoint point, std::size_t cell_index,
                               std::size_t seeds_per_cell) {
    SweepCell cell;
    cell.point = point;
    for (std::size_t s = 0; s < seeds_per_cell; ++s) {
        ModelConfig cfg = base;
        cfg.feedback.alpha = point.alpha;
        cfg.feedback.beta = point.beta;
        cfg.seed = derive_seed(base.seed, Stream::sweep_cell, cell_index * seeds_per_cell + s);
        const auto series = gross_returns(run(cfg));
        const auto logs = series.tail(burn_in_cutoff(series)).log_returns();
        cell.mean_return += mean(logs);
        cell.std_return += stddev(logs);
        cell.samples += logs.size();
    }
    cell.mean_return /= static_cast<double>(seeds_per_cell);
    cell.std_return /= static_cast<double>(seeds_per_cell);
    return cell;
}

/// Simulates every grid cell and correlates mean with std inside the positive
/// and negative mean-return classes. Cells are independent; the result does not
/// depend on the number of workers.
inline SweepResult sweep_correlations(const ModelConfig& base, std::span<const FeedbackPoint> grid,
                                      const SweepOptions& options = {}) {
    if (grid.empty()) throw ConfigError("sweep grid is empty");
    if (options.seeds_per_cell < 1) throw ConfigError("sweep.seeds_per_cell must be >= 1");
    base.validate();

    SweepResult result;
    result.cells.resize(grid.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            try {
                result.cells[i] = simulate_cell(base, grid[i], i, options.seeds_per_cell);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    unsigned workers = options.workers == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                            : options.workers;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, grid.size()));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<double> means, stds;
    means.reserve(result.cells.size());
    stds.reserve(result.cells.size());
    for (const auto& c : result.cells) {
        means.push_back(c.mean_return);
        stds.push_back(c.std_return);
    }
    result.correlation = correlate_by_sign(means, stds);
    return result;
}

// ---------------------------------------------------------------------------
// external index data

struct PriceRow {
    std::string date; // ISO 8601, YYYY-MM-DD
    double price = 0.0;
};

namespace detail {

inline bool is_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    const int month = std::stoi(s.substr(5, 2));
    const int day = std::stoi(s.substr(8, 2));
    return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

inline std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

} // namespace detail

/// Reads "date,price" lines. A first line whose price field is not numeric is
/// taken as a header; blank lines are skipped. Errors cite the 1-based line.
inline std::vector<PriceRow> parse_price_csv(std::istream& in) {
    std::vector<PriceRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw InputError("line " + std::to_string(line_no) + ": expected 'date,price'");
        const std::string date = detail::trim(line.substr(0, comma));
        const std::string price_text = detail::trim(line.substr(comma + 1));
        double price = 0.0;
        std::size_t used = 0;
        bool numeric = true;
        try {
            price = std::stod(price_text, &used);
        } catch (const std::exception&) {
            numeric = false;
        }
        numeric = numeric && used == price_text.size();
        if (!numeric) {
            if (rows.empty() && line_no == 1) continue; // header
            throw InputError("line " + std::to_string(line_no) + ": price '" + price_text +
                             "' is not a number");
        }
        if (!detail::is_iso_date(date))
            throw InputError("line " + std::to_string(line_no) + ": date '" + date +
                             "' is not YYYY-MM-DD");
        rows.push_back({date, price});
    }
    return rows;
}

struct WindowStats {
    std::string first_date;
    std::string last_date;
    /// Mean and std of the window's daily log returns.
    double mean_return = 0.0;
    double std_return = 0.0;
    std::size_t samples = 0;
};

struct IngestResult {
    ReturnSeries daily;
    std::vector<WindowStats> windows;
    SignedCorrelation correlation;
};

inline constexpr std::size_t kSemiAnnualTradingDays = 126;

/// Daily gross returns cut into non-overlapping windows (a trailing partial
/// window is dropped), with per-window mean/std and the sign-class correlation.
inline IngestResult ingest_price_series(std::span<const PriceRow> rows,
                                        std::size_t window = kSemiAnnualTradingDays) {
    if (window < 2) throw InputError("window length must be >= 2");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!(rows[i].price > 0.0))
            throw InputError("row " + std::to_string(i) + ": price must be positive");
        if (i > 0 && !(rows[i - 1].date < rows[i].date))
            throw InputError("row " + std::to_string(i) + ": dates are not strictly increasing");
    }
    IngestResult out;
    std::vector<double> gross;
    if (rows.size() >= 2) gross.reserve(rows.size() - 1);
    for (std::size_t i = 1; i < rows.size(); ++i) gross.push_back(rows[i].price / rows[i - 1].price);
    out.daily = ReturnSeries(gross, 252);

    const auto logs = out.daily.log_returns();
    std::vector<double> means, stds;
    for (std::size_t start = 0; start + window <= logs.size(); start += window) {
        const std::span<const double> chunk(logs.data() + start, window);
        WindowStats w;
        w.first_date = rows[start].date;
        w.last_date = rows[start + window].date;
        w.mean_return = mean(chunk);
        w.std_return = stddev(chunk);
        w.samples = window;
        means.push_back(w.mean_return);
        stds.push_back(w.std_return);
        out.windows.push_back(std::move(w));
    }
    out.correlation = correlate_by_sign(means, stds);
    return out;
}

} // namespace bubblesim
