#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "bubblesim/analytics.hpp"
#include "bubblesim/rng.hpp"

using namespace bubblesim;

TEST(ReturnSeries, RejectsNonPositiveEntries) {
    EXPECT_THROW(ReturnSeries({1.0, 0.0}, 100), StatsError);
    EXPECT_THROW(ReturnSeries({1.0, -2.0}, 100), StatsError);
    EXPECT_THROW(ReturnSeries({1.0}, 0), StatsError);
    EXPECT_EQ(ReturnSeries({1.0, 2.0, 3.0}, 1).tail(1).size(), 2u);
    EXPECT_TRUE(ReturnSeries({1.0}, 1).tail(5).empty());
}

TEST(Helpers, MeanStdSlope) {
    const std::vector<double> xs{1, 2, 3, 4};
    EXPECT_DOUBLE_EQ(mean(xs), 2.5);
    EXPECT_DOUBLE_EQ(stddev(xs), std::sqrt(1.25));
    std::vector<double> line;
    for (int i = 0; i < 50; ++i) line.push_back(3.0 - 0.25 * i);
    EXPECT_NEAR(index_slope(line), -0.25, 1e-14);
}

TEST(Helpers, PearsonKnownValues) {
    const std::vector<double> x{1, 2, 3, 4, 5};
    const std::vector<double> y{2, 4, 6, 8, 10};
    const std::vector<double> z{5, 4, 3, 2, 1};
    EXPECT_NEAR(*pearson(x, y), 1.0, 1e-15);
    EXPECT_NEAR(*pearson(x, z), -1.0, 1e-15);
    // Hand-computed: cov = 1.0, sx^2 = 2, sy^2 = 0.56 (population moments).
    const std::vector<double> w{1.0, 1.0, 2.0, 2.0, 3.0};
    EXPECT_NEAR(*pearson(x, w), 1.0 / std::sqrt(2.0 * 0.56), 1e-14);
    EXPECT_FALSE(pearson(x, std::vector<double>(5, 1.0)).has_value());
    EXPECT_FALSE(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}).has_value());
}

TEST(GeometricMean, Basics) {
    EXPECT_DOUBLE_EQ(geometric_mean_return(ReturnSeries(std::vector<double>(50, 1.0), 10), false), 1.0);
    std::vector<double> alt;
    for (int i = 0; i < 20; ++i) alt.push_back(i % 2 ? 0.5 : 2.0);
    EXPECT_NEAR(geometric_mean_return(ReturnSeries(alt, 100), false), 1.0, 1e-15);
    EXPECT_NEAR(geometric_mean_return(ReturnSeries(std::vector<double>(20, 1.01), 10), true),
                std::pow(1.01, 10), 1e-12);
    EXPECT_THROW(geometric_mean_return(ReturnSeries({}, 10), false), StatsError);
}

TEST(BurnIn, ConstantSeriesHasNone) {
    EXPECT_EQ(burn_in_cutoff(ReturnSeries(std::vector<double>(1000, 1.02), 100)), 0u);
}

TEST(BurnIn, ShortSeriesHasNone) {
    EXPECT_EQ(burn_in_cutoff(ReturnSeries(std::vector<double>(150, 1.5), 100)), 0u);
}

TEST(BurnIn, StepSeriesCutsAfterTheStep) {
    std::vector<double> v(1000, 1.0);
    for (int i = 0; i < 100; ++i) v[i] = 1.05;
    EXPECT_EQ(burn_in_cutoff(ReturnSeries(v, 10)), 100u);
}

TEST(BurnIn, CappedAtOneFifth) {
    std::vector<double> v(1000, 1.0);
    for (int i = 0; i < 500; ++i) v[i] = 1.0 + 0.05 * (i / 10 % 2);
    EXPECT_EQ(burn_in_cutoff(ReturnSeries(v, 10)), 200u);
}

TEST(Prediction, ClosedForm) {
    ModelConfig c;
    EXPECT_NEAR(predicted_mean_return(c), 3.01 * 0.34, 1e-15);
    c.annual_bond_rate = 1.03;
    EXPECT_NEAR(predicted_mean_return(c), 1.03 * 1.0234, 1e-14);
    EXPECT_NEAR(predicted_risk_growth(c), 1.0234, 1e-15);
    c.periods_per_year = 566;
    c.annual_bond_rate = 1.0;
    EXPECT_NEAR(predicted_mean_return(c), std::pow(1.0234, 5.66), 1e-12);
}

TEST(Autocorrelation, AlternatingSeriesIsMinusOne) {
    std::vector<double> alt;
    for (int i = 0; i < 400; ++i) alt.push_back(i % 2 ? 0.99 : 1.03);
    const auto acf = autocorrelation(ReturnSeries(alt, 100), 3);
    EXPECT_NEAR(acf[0], 1.0, 1e-12);
    EXPECT_NEAR(acf[1], -1.0, 1e-12);
    EXPECT_NEAR(acf[2], 1.0, 1e-12);
    EXPECT_NEAR(acf[3], -1.0, 1e-12);
}

TEST(Autocorrelation, WhiteNoiseInsideBand) {
    RandomStream rng(5);
    std::vector<double> v(5000);
    for (auto& x : v) x = std::exp(0.01 * rng.normal());
    const auto acf = autocorrelation(ReturnSeries(v, 100), 10);
    std::size_t inside = 0;
    for (std::size_t l = 1; l <= 10; ++l)
        if (std::abs(acf[l]) <= white_noise_band(5000)) ++inside;
    EXPECT_GE(inside, 8u);
}

TEST(Autocorrelation, Errors) {
    EXPECT_THROW(autocorrelation(ReturnSeries(std::vector<double>(30, 1.0), 10), 2), StatsError);
    EXPECT_THROW(autocorrelation(ReturnSeries({1.1, 0.9}, 10), 5), StatsError);
}

TEST(TailDiagnostics, LogNormalHasNoExcessKurtosis) {
    RandomStream rng(17);
    std::vector<double> v(20000);
    for (auto& x : v) x = std::exp(0.02 * rng.normal());
    const auto d = tail_diagnostics(ReturnSeries(v, 100000));
    EXPECT_NEAR(d.excess_kurtosis, 0.0, 5 * d.kurtosis_standard_error);
    EXPECT_NEAR(d.center_mass_ratio, 1.0, 0.1);
    EXPECT_NEAR(d.upper_tail_ratio, 1.0, 0.1);
    EXPECT_EQ(d.mass_at_one, 0.0);
}

TEST(TailDiagnostics, ScaleMixtureIsHeavyTailedWithMassAtOne) {
    RandomStream rng(19);
    std::vector<double> v(20000);
    for (auto& x : v) {
        const double u = rng.uniform();
        x = u < 0.2 ? 1.0 : std::exp((u < 0.6 ? 0.005 : 0.03) * rng.normal());
    }
    const auto d = tail_diagnostics(ReturnSeries(v, 100000));
    EXPECT_GT(d.excess_kurtosis, 10 * d.kurtosis_standard_error);
    EXPECT_NEAR(d.mass_at_one, 0.2, 0.02);
    EXPECT_GT(d.center_mass_ratio, 1.5);
}

TEST(TailDiagnostics, NeedsEnoughSamples) {
    EXPECT_THROW(tail_diagnostics(ReturnSeries(std::vector<double>(50, 1.0), 1000)), StatsError);
}

TEST(Payoff, ReferenceValues) {
    const auto p = payoff_matrix(100, 100, 1.1, 10, 0.1);
    EXPECT_NEAR(p.stay_stay, 125.9374246, 1e-6);
    EXPECT_NEAR(p.sell_stay, 359.3742460, 1e-6);
    EXPECT_EQ(p.stay_sell, 0.0);
    EXPECT_EQ(p.sell_sell, 100.0);
}

TEST(Payoff, ZeroYearsAndErrors) {
    const auto p = payoff_matrix(50, 20, 1.5, 0, 0.1);
    EXPECT_DOUBLE_EQ(p.sell_stay, 70.0);
    EXPECT_DOUBLE_EQ(p.stay_stay, 52.0);
    EXPECT_THROW(payoff_matrix(-1, 1, 1, 1), StatsError);
    EXPECT_THROW(payoff_matrix(1, 1, 1, -1), StatsError);
}

TEST(Payoff, SellingDominates) {
    RandomStream rng(23);
    for (int i = 0; i < 10000; ++i) {
        const auto p = payoff_matrix(rng.uniform(0, 1e4), rng.uniform(0, 1e4), rng.uniform(0, 3),
                                     static_cast<int>(rng.between(0, 40)), rng.uniform());
        ASSERT_GE(p.sell_stay, p.stay_stay);
        ASSERT_GE(p.sell_sell, p.stay_sell);
    }
}

TEST(CorrelateBySign, PlantedCorrelations) {
    RandomStream rng(29);
    std::vector<double> means, stds;
    for (int i = 0; i < 300; ++i) {
        const double m = rng.uniform(0.001, 0.01);
        means.push_back(m);
        stds.push_back(2 * m + 0.0001 * rng.normal());
    }
    for (int i = 0; i < 100; ++i) {
        const double m = -rng.uniform(0.001, 0.01);
        means.push_back(m);
        stds.push_back(0.05 + m);
    }
    means.push_back(0.0);
    stds.push_back(1.0);
    const auto c = correlate_by_sign(means, stds);
    EXPECT_EQ(c.positive_count, 300u);
    EXPECT_EQ(c.negative_count, 100u);
    EXPECT_GT(*c.positive, 0.95);
    EXPECT_NEAR(*c.negative, 1.0, 1e-12);
}

TEST(CorrelateBySign, SmallClassesUndefined) {
    const std::vector<double> means{0.1, 0.2, -0.1};
    const std::vector<double> stds{1, 2, 3};
    const auto c = correlate_by_sign(means, stds);
    EXPECT_FALSE(c.positive.has_value());
    EXPECT_FALSE(c.negative.has_value());
    EXPECT_THROW(correlate_by_sign(means, std::vector<double>{1.0}), StatsError);
}

TEST(WealthSnapshot, Means) {
    MarketState s;
    s.agents = {{100, 300, 0.5}, {300, 100, 2.5}};
    const auto w = wealth_snapshot(s);
    ASSERT_EQ(w.rows.size(), 2u);
    EXPECT_EQ(w.mean_stock, 200.0);
    EXPECT_EQ(w.mean_bond, 200.0);
    EXPECT_EQ(w.mean_total, 400.0);
    EXPECT_EQ(w.mean_target_ratio, 1.5);
    EXPECT_EQ(w.min_target_ratio, 0.5);
    EXPECT_EQ(w.rows[1].total, 400.0);
}

TEST(TraceSeries, TelescopeToPrice) {
    ModelConfig c;
    c.n_agents = 40;
    c.active = FixedActive{4};
    c.horizon_periods = 300;
    const auto t = run(c);
    const auto g = gross_returns(t);
    double prod = 1;
    for (double x : g.values()) prod *= x;
    EXPECT_NEAR(prod, t.final_state.price / t.initial_price, 1e-9 * prod);
    EXPECT_EQ(dollar_volume_series(t).size(), 300u);
    EXPECT_EQ(geo_mean_target_series(t).size(), 300u);
}
