#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "bubblesim/rng.hpp"
#include "bubblesim/sweep.hpp"

using namespace bubblesim;

namespace {

std::vector<std::string> trading_dates(std::size_t n) {
    std::vector<std::string> out;
    char buf[32];
    for (int y = 1960; out.size() < n; ++y)
        for (int m = 1; m <= 12 && out.size() < n; ++m)
            for (int d = 1; d <= 28 && out.size() < n; ++d) {
                std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
                out.emplace_back(buf);
            }
    return out;
}

ModelConfig small_base() {
    ModelConfig c;
    c.n_agents = 40;
    c.active = FixedActive{4};
    c.horizon_periods = 300;
    return c;
}

}

TEST(SampleGrid, InsideBoundsAndReproducible) {
    const GridBounds b{};
    const auto g1 = sample_grid(500, b, 42);
    const auto g2 = sample_grid(500, b, 42);
    ASSERT_EQ(g1.size(), 500u);
    for (std::size_t i = 0; i < g1.size(); ++i) {
        ASSERT_EQ(g1[i].alpha, g2[i].alpha);
        ASSERT_GE(g1[i].alpha, 0.8);
        ASSERT_LT(g1[i].alpha, 1.5);
        ASSERT_GE(g1[i].beta, 0.8);
        ASSERT_LT(g1[i].beta, 1.5);
    }
    EXPECT_NE(sample_grid(5, b, 43)[0].alpha, g1[0].alpha);
    EXPECT_THROW(sample_grid(5, GridBounds{1.0, 0.5, 0.8, 1.5}, 1), ConfigError);
}

TEST(Sweep, IndependentOfWorkerCount) {
    const auto grid = sample_grid(12, GridBounds{}, 3);
    const auto one = sweep_correlations(small_base(), grid, {1, 1});
    const auto four = sweep_correlations(small_base(), grid, {1, 4});
    ASSERT_EQ(one.cells.size(), 12u);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_EQ(one.cells[i].mean_return, four.cells[i].mean_return);
        EXPECT_EQ(one.cells[i].std_return, four.cells[i].std_return);
        EXPECT_EQ(one.cells[i].point.alpha, grid[i].alpha);
    }
    EXPECT_EQ(one.correlation.positive_count, four.correlation.positive_count);
    EXPECT_EQ(one.correlation.positive, four.correlation.positive);
}

TEST(Sweep, CorrelationsAreBounded) {
    const auto grid = sample_grid(30, GridBounds{}, 8);
    const auto r = sweep_correlations(small_base(), grid, {2, 1});
    EXPECT_EQ(r.correlation.positive_count + r.correlation.negative_count <= 30, true);
    if (r.correlation.positive) {
        EXPECT_GE(*r.correlation.positive, -1.0);
        EXPECT_LE(*r.correlation.positive, 1.0);
    }
    for (const auto& c : r.cells) EXPECT_GT(c.std_return, 0.0);
}

TEST(Sweep, RejectsEmptyGrid) {
    EXPECT_THROW(sweep_correlations(small_base(), std::vector<FeedbackPoint>{}), ConfigError);
}

TEST(ParsePriceCsv, HeaderAndBlankLines) {
    std::istringstream in("date,price\n2001-01-02, 100.5\n\n2001-01-03,101\n");
    const auto rows = parse_price_csv(in);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].date, "2001-01-02");
    EXPECT_EQ(rows[1].price, 101.0);
}

TEST(ParsePriceCsv, ErrorsCiteLine) {
    std::istringstream bad_price("2001-01-02,100\n2001-01-03,abc\n");
    try {
        parse_price_csv(bad_price);
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
    std::istringstream bad_date("2001-13-02,100\n");
    EXPECT_THROW(parse_price_csv(bad_date), InputError);
    std::istringstream no_comma("2001-01-02 100\n");
    EXPECT_THROW(parse_price_csv(no_comma), InputError);
}

TEST(Ingest, RejectsBadRows) {
    std::vector<PriceRow> unordered{{"2001-01-03", 1.0}, {"2001-01-02", 1.0}};
    EXPECT_THROW(ingest_price_series(unordered), InputError);
    std::vector<PriceRow> nonpositive{{"2001-01-02", 1.0}, {"2001-01-03", 0.0}};
    try {
        ingest_price_series(nonpositive);
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
    }
}

TEST(Ingest, WindowStatisticsMatchDirectComputation) {
    RandomStream rng(31);
    const std::size_t days = 126 * 6 + 40;
    const auto dates = trading_dates(days);
    std::vector<PriceRow> rows;
    double p = 100.0;
    for (std::size_t i = 0; i < days; ++i) {
        rows.push_back({dates[i], p});
        p *= std::exp(0.0003 + 0.01 * rng.normal());
    }
    const auto r = ingest_price_series(rows);
    ASSERT_EQ(r.windows.size(), 6u);
    EXPECT_EQ(r.daily.size(), days - 1);
    EXPECT_EQ(r.daily.periods_per_year(), 252);
    for (std::size_t w = 0; w < 6; ++w) {
        double s = 0, s2 = 0;
        for (std::size_t i = w * 126; i < (w + 1) * 126; ++i) {
            const double l = std::log(rows[i + 1].price / rows[i].price);
            s += l;
            s2 += l * l;
        }
        const double mu = s / 126;
        EXPECT_NEAR(r.windows[w].mean_return, mu, 1e-15);
        EXPECT_NEAR(r.windows[w].std_return, std::sqrt(s2 / 126 - mu * mu), 1e-12);
        EXPECT_EQ(r.windows[w].first_date, rows[w * 126].date);
        EXPECT_EQ(r.windows[w].last_date, rows[(w + 1) * 126].date);
    }
}

TEST(Ingest, RecoversPlantedSignCorrelation) {
    // Rising windows: volatility grows with the drift. Falling windows: volatility
    // grows as the drift gets more negative.
    RandomStream rng(37);
    const std::size_t windows = 80, window = 126;
    const auto dates = trading_dates(windows * window + 1);
    std::vector<PriceRow> rows{{dates[0], 100.0}};
    double p = 100.0;
    for (std::size_t w = 0; w < windows; ++w) {
        const double drift = (w % 2 ? -1.0 : 1.0) * rng.uniform(0.001, 0.004);
        const double vol = 0.002 + 2.0 * std::abs(drift);
        // Exact-moment increments: +-vol around the drift, alternating.
        for (std::size_t d = 0; d < window; ++d) {
            p *= std::exp(drift + (d % 2 ? vol : -vol));
            rows.push_back({dates[w * window + d + 1], p});
        }
    }
    const auto r = ingest_price_series(rows);
    ASSERT_EQ(r.windows.size(), windows);
    EXPECT_EQ(r.correlation.positive_count, 40u);
    EXPECT_EQ(r.correlation.negative_count, 40u);
    EXPECT_NEAR(*r.correlation.positive, 1.0, 1e-6);
    EXPECT_NEAR(*r.correlation.negative, -1.0, 1e-6);
}
