#pragma once

// Command-line front end. dispatch() never calls exit(); it returns the process
// status so tests can drive it in-process.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bubblesim/config_io.hpp"
#include "bubblesim/engine.hpp"
#include "bubblesim/error.hpp"
#include "bubblesim/experiments.hpp"
#include "bubblesim/io.hpp"
#include "bubblesim/sweep.hpp"

namespace bubblesim::cli {

inline constexpr const char* kOutputEnv = "BUBBLESIM_OUTPUT_DIR";

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// --out, then the environment variable, then the config file, then "out".
inline fs::path resolve_output_dir(const std::string& flag, const CliConfig& cfg) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv(kOutputEnv); env && *env) return env;
    return cfg.output.directory;
}

inline void print_check(std::ostream& out, const experiments::Check& c) {
    out << (c.pass ? "PASS " : "FAIL ") << c.id << ": " << c.measured.dump() << '\n';
}

inline int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Adaptive speculative-trading market simulator", "bubblesim"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    std::string config_path, out_flag;
    app.add_option("-c,--config", config_path, "JSON config document");
    app.add_option("-o,--out", out_flag, "output directory (overrides $BUBBLESIM_OUTPUT_DIR)");

    auto* run_cmd = app.add_subcommand("run", "simulate one trace and write it to CSV");
    std::optional<std::uint64_t> run_seed;
    std::optional<long> run_periods;
    run_cmd->add_option("--seed", run_seed, "seed (default from config)");
    run_cmd->add_option("--periods", run_periods, "horizon in periods (default from config)");

    auto* sweep_cmd = app.add_subcommand("sweep", "mean/std correlation over a feedback grid");
    std::optional<std::size_t> sweep_cells, sweep_seeds;
    std::optional<unsigned> sweep_workers;
    sweep_cmd->add_option("--cells", sweep_cells, "number of (alpha, beta) cells");
    sweep_cmd->add_option("--seeds-per-cell", sweep_seeds, "runs averaged per cell");
    sweep_cmd->add_option("--workers", sweep_workers, "worker threads, 0 = all cores");

    auto* exp_cmd = app.add_subcommand("experiment", "reproduce a named figure or table");
    std::string exp_name;
    std::optional<std::uint64_t> exp_seed;
    exp_cmd->add_option("name", exp_name, experiments::valid_names_text())->required();
    exp_cmd->add_option("--seed", exp_seed, "seed override");

    auto* ingest_cmd = app.add_subcommand("ingest", "statistics of a daily date,price CSV");
    std::string ingest_path;
    std::size_t window = kSemiAnnualTradingDays;
    ingest_cmd->add_option("file", ingest_path, "CSV file")->required();
    ingest_cmd->add_option("--window", window, "window length in trading days");

    auto* payoff_cmd = app.add_subcommand("payoff", "agent vs market payoff matrix");
    double b0 = 0, s0 = 0, annual_return = 0, fraction = 0.1;
    int years = 0;
    payoff_cmd->add_option("--b0", b0, "initial bond dollars")->required();
    payoff_cmd->add_option("--s0", s0, "initial stock dollars")->required();
    payoff_cmd->add_option("--return", annual_return, "annual gross return")->required();
    payoff_cmd->add_option("--years", years, "holding period in years")->required();
    payoff_cmd->add_option("--fraction", fraction, "fraction of stock realized when staying");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    try {
        const CliConfig cfg = parse_config(config_path.empty() ? "" : read_file(config_path));
        const fs::path out_dir = resolve_output_dir(out_flag, cfg);

        if (run_cmd->parsed()) {
            ModelConfig model = cfg.model;
            if (run_seed) model.seed = *run_seed;
            if (run_periods) model.horizon_periods = *run_periods;
            model.validate();
            const auto trace = run(model);
            const auto series = gross_returns(trace);
            write_trace_csv(out_dir / "run" / "trace.csv", trace, "run");
            const nlohmann::json summary{
                {"seed", model.seed},
                {"config", to_json(model)},
                {"final_price", trace.final_state.price},
                {"burn_in", burn_in_cutoff(series)},
                {"geometric_mean_per_period", geometric_mean_return(series, false)},
                {"annual_geometric_mean", geometric_mean_return(series, true)},
                {"predicted_annual_mean", predicted_mean_return(model)}};
            write_json(out_dir / "run" / "summary.json", summary);
            out << summary.dump(2) << '\n';
            return 0;
        }

        if (sweep_cmd->parsed()) {
            SweepSettings settings = cfg.sweep;
            if (sweep_cells) settings.cells = *sweep_cells;
            if (sweep_seeds) settings.seeds_per_cell = *sweep_seeds;
            if (sweep_workers) settings.workers = *sweep_workers;
            if (settings.cells < 1) throw ConfigError("--cells must be >= 1");
            const auto rows = experiments::run_table2(cfg.model, settings);
            const auto check = experiments::check_table2(rows);
            for (const auto& row : rows) {
                std::vector<double> alpha, beta, mu, sd;
                for (const auto& c : row.result.cells) {
                    alpha.push_back(c.point.alpha);
                    beta.push_back(c.point.beta);
                    mu.push_back(c.mean_return);
                    sd.push_back(c.std_return);
                }
                write_series_csv(out_dir / "sweep" / ("sweep_m" + std::to_string(row.active) + ".csv"),
                                 cfg.model.seed, "sweep",
                                 {"alpha", "beta", "mean_log_return", "std_log_return"},
                                 {alpha, beta, mu, sd}, "cell");
            }
            write_json(out_dir / "sweep" / "report.json",
                       {{"seed", cfg.model.seed}, {"config", to_json(cfg.model)},
                        {"correlations", check.measured}});
            out << check.measured.dump(2) << '\n';
            return 0;
        }

        if (exp_cmd->parsed()) {
            experiments::ExperimentSpec spec;
            spec.name = exp_name;
            spec.overrides = cfg.experiment_overrides;
            if (exp_seed) spec.overrides["seed"] = *exp_seed;
            spec.output_dir = out_dir;
            spec.sweep = cfg.sweep;
            const auto report = experiments::run_experiment(spec);
            for (const auto& c : report.checks) print_check(out, c);
            out << (report.pass() ? "PASS " : "FAIL ") << report.name << " (report: "
                << (out_dir / report.name / "report.json").string() << ")\n";
            return report.pass() ? 0 : 1;
        }

        if (ingest_cmd->parsed()) {
            std::ifstream in(ingest_path, std::ios::binary);
            if (!in) throw InputError("cannot read " + ingest_path);
            const auto rows = parse_price_csv(in);
            const auto result = ingest_price_series(rows, window);
            nlohmann::json windows = nlohmann::json::array();
            for (const auto& w : result.windows)
                windows.push_back({{"first_date", w.first_date},
                                   {"last_date", w.last_date},
                                   {"mean_log_return", w.mean_return},
                                   {"std_log_return", w.std_return}});
            const auto& c = result.correlation;
            const nlohmann::json doc{{"source", ingest_path},
                                     {"days", rows.size()},
                                     {"window", window},
                                     {"positive_windows", c.positive_count},
                                     {"negative_windows", c.negative_count},
                                     {"positive_correlation", experiments::optional_json(c.positive)},
                                     {"negative_correlation", experiments::optional_json(c.negative)},
                                     {"windows", windows}};
            write_json(out_dir / "ingest" / "report.json", doc);
            nlohmann::json brief = doc;
            brief.erase("windows");
            out << brief.dump(2) << '\n';
            return 0;
        }

        if (payoff_cmd->parsed()) {
            const auto p = payoff_matrix(b0, s0, annual_return, years, fraction);
            out << std::fixed << std::setprecision(2) << "agent\\market  stay  sell\n"
                << "stay " << p.stay_stay << ' ' << p.stay_sell << '\n'
                << "sell " << p.sell_stay << ' ' << p.sell_sell << '\n';
            return 0;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

} // namespace bubblesim::cli
