#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "bubblesim/experiments.hpp"
#include "test_support.hpp"

using namespace bubblesim;
using namespace bubblesim::experiments;
using test_support::scratch_dir;
using test_support::slurp;

TEST(Experiments, UnknownNameListsValidNames) {
    ExperimentSpec spec;
    spec.name = "fig9";
    spec.output_dir = scratch_dir();
    try {
        run_experiment(spec);
        FAIL();
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        for (const auto& n : experiment_names()) EXPECT_NE(msg.find(n), std::string::npos) << n;
    }
}

TEST(Experiments, OverridesAreTypeChecked) {
    ExperimentSpec spec;
    spec.name = "fig1-top";
    spec.output_dir = scratch_dir();
    spec.overrides = {{"alpah", 2.0}};
    EXPECT_THROW(run_experiment(spec), ConfigError);
    spec.overrides = {{"n_agents", 2}, {"active", {{"fixed", 3}}}};
    EXPECT_THROW(run_experiment(spec), ConfigError);
}

TEST(Experiments, Fig1TopWritesDataAndReport) {
    ExperimentSpec spec;
    spec.name = "fig1-top";
    spec.output_dir = scratch_dir();
    const auto report = run_experiment(spec);
    EXPECT_TRUE(report.pass());
    const auto csv = slurp(spec.output_dir / "fig1-top" / "returns.csv");
    EXPECT_EQ(csv.rfind("# bubblesim seed=42 source=experiment:fig1-top\nperiod,gross_return,mean_line\n", 0), 0u);
    EXPECT_EQ(csv.back(), '\n');
    const auto doc = nlohmann::json::parse(slurp(spec.output_dir / "fig1-top" / "report.json"));
    EXPECT_EQ(doc["experiment"], "fig1-top");
    EXPECT_EQ(doc["config"]["n_agents"], 2);
    EXPECT_EQ(doc["checks"][0]["id"], "two-agent-rate-law");
    EXPECT_TRUE(doc["pass"].get<bool>());
}

TEST(Experiments, SeedOverrideChangesNoisyOutput) {
    const auto dir = scratch_dir();
    ExperimentSpec a{"fig1-mid", nlohmann::json::object(), dir / "a", {}};
    ExperimentSpec b{"fig1-mid", {{"seed", 7}}, dir / "b", {}};
    run_experiment(a);
    run_experiment(b);
    EXPECT_NE(slurp(dir / "a" / "fig1-mid" / "returns.csv"), slurp(dir / "b" / "fig1-mid" / "returns.csv"));
}

TEST(Experiments, RerunIsByteIdentical) {
    const auto dir = scratch_dir();
    for (const char* name : {"fig1-mid", "fig2", "table1"}) {
        const auto r1 = run_experiment({name, nlohmann::json::object(), dir / "one", {}});
        const auto r2 = run_experiment({name, nlohmann::json::object(), dir / "two", {}});
        ASSERT_EQ(r1.files.size(), r2.files.size());
        for (std::size_t i = 0; i < r1.files.size(); ++i)
            EXPECT_EQ(slurp(r1.files[i]), slurp(r2.files[i])) << r1.files[i];
    }
}

TEST(Experiments, ExcessError) {
    EXPECT_DOUBLE_EQ(excess_error(1.02, 1.02), 0.0);
    EXPECT_NEAR(excess_error(1.013, 1.02), 0.35, 1e-12);
    EXPECT_NEAR(excess_error(1.0, 1.02), 1.0, 1e-12);
}

TEST(Experiments, DeflationFeedbackIsPessimistic) {
    const ModelConfig c = ten_year_baseline();
    const auto f = deflation_feedback(c, 5.0, 1.0);
    EXPECT_EQ(f.alpha, c.feedback.alpha);
    EXPECT_LT(f.bias(), 1.0);
    // The closed-form rate reaches the floor in one year.
    ModelConfig d = c;
    d.feedback = f;
    EXPECT_NEAR(predicted_mean_return(d), 1.0 / 5.0, 1e-12);
}

TEST(Experiments, TenYearTauGivesFourteenPercent) {
    EXPECT_NEAR(predicted_mean_return(ten_year_baseline()), 1.14, 0.001);
}

TEST(Experiments, PayoffCheckPasses) { EXPECT_TRUE(check_payoff_table(42).pass); }

TEST(Experiments, EquilibriumCheckPassesOnSmallPopulation) {
    ModelConfig c;
    c.n_agents = 50;
    c.active = FixedActive{5};
    EXPECT_TRUE(check_equilibrium_fixed_point(c).pass);
}
