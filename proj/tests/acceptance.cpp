// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "bubblesim/experiments.hpp"

using namespace bubblesim;
using namespace bubblesim::experiments;

namespace {

struct Line {
    int number;
    Check check;
    double seconds;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Check check_determinism(const fs::path& scratch) {
    Check c{"determinism", "every experiment rerun with the same seed writes byte-identical files"};
    std::size_t files = 0, mismatches = 0;
    json differing = json::array();
    for (const auto& name : experiment_names()) {
        const auto a = run_experiment({name, json::object(), scratch / "first", {}});
        const auto b = run_experiment({name, json::object(), scratch / "second", {}});
        if (a.files.size() != b.files.size()) {
            ++mismatches;
            differing.push_back(name);
            continue;
        }
        for (std::size_t i = 0; i < a.files.size(); ++i) {
            ++files;
            if (slurp(a.files[i]) != slurp(b.files[i])) {
                ++mismatches;
                differing.push_back(a.files[i].lexically_relative(scratch / "first").string());
            }
        }
    }
    c.measured = {{"files_compared", files}, {"mismatches", mismatches}, {"differing", differing}};
    c.expected = {{"mismatches", 0}};
    c.pass = files > 0 && mismatches == 0;
    return c;
}

template <typename F>
void record(std::vector<Line>& lines, int number, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Check c = f();
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s  %2d  %-26s %6.1fs  measured=%s  expected=%s\n", c.pass ? "PASS" : "FAIL", number,
                c.id.c_str(), s, c.measured.dump().c_str(), c.expected.dump().c_str());
    std::fflush(stdout);
    lines.push_back({number, std::move(c), s});
}

} // namespace

int main() {
    std::vector<Line> lines;
    const ModelConfig two = two_agent_baseline();
    const ModelConfig noisy = noisy_two_agent_baseline();
    const ModelConfig multi = multi_agent_baseline();
    const ModelConfig ten_year = ten_year_baseline();

    record(lines, 1, [&] { return check_rate_law(two); });
    record(lines, 2, [&] { return check_noise_robustness(noisy, 20); });

    std::vector<SeedRun> runs;
    record(lines, 3, [&] {
        runs = run_batch(multi, 10);
        return check_mean_return_law(multi, runs);
    });
    record(lines, 4, [&] { return check_conservation(runs); });
    record(lines, 5, [&] { return check_equilibrium_fixed_point(multi); });
    record(lines, 6, [&] { return check_risk_growth_law(multi, runs); });
    record(lines, 7, [&] { return check_return_autocorrelation(runs); });
    record(lines, 8, [&] { return check_distribution_shape(multi, 10); });
    record(lines, 9, [&] { return check_table2(run_table2(multi, SweepSettings{})); });
    record(lines, 10, [&] { return check_payoff_table(multi.seed); });
    record(lines, 11, [&] {
        ModelConfig c = two;
        c.horizon_periods = 4000;
        return check_volume_saturation(c);
    });
    record(lines, 12, [&] { return check_group_outcome(ten_year, 10); });
    record(lines, 13, [&] { return check_crash_vs_deflation(run_bubble_ending(ten_year)); });

    const fs::path scratch = fs::temp_directory_path() / "bubblesim_acceptance";
    fs::remove_all(scratch);
    record(lines, 14, [&] { return check_determinism(scratch); });
    fs::remove_all(scratch);

    std::size_t passed = 0;
    for (const auto& l : lines) passed += l.check.pass ? 1 : 0;
    std::printf("%zu/%zu criteria passed\n", passed, lines.size());
    return passed == lines.size() ? 0 : 1;
}
