#pragma once

// File emission. Every file is UTF-8 and newline-terminated. CSV files begin
// with a single '#' comment line carrying the seed that reproduces them,
// followed by a header row.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bubblesim/analytics.hpp"
#include "bubblesim/engine.hpp"
#include "bubblesim/error.hpp"

namespace bubblesim {

namespace fs = std::filesystem;

/// Shortest round-trippable text for a double ("%.17g").
inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    return out;
}

inline std::string provenance_line(std::uint64_t seed, const std::string& source) {
    return "# bubblesim seed=" + std::to_string(seed) + " source=" + source + "\n";
}

/// Columns of equal length written as rows, prefixed with a period index column.
inline void write_series_csv(const fs::path& path, std::uint64_t seed, const std::string& source,
                             const std::vector<std::string>& names,
                             const std::vector<std::vector<double>>& columns,
                             const std::string& index_name = "period") {
    if (names.size() != columns.size()) throw Error("series csv: name/column count mismatch");
    auto out = open_output(path);
    out << provenance_line(seed, source) << index_name;
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (std::size_t i = 0; i < rows; ++i) {
        out << i;
        for (const auto& c : columns) out << ',' << format_number(c.at(i));
        out << '\n';
    }
}

inline void write_trace_csv(const fs::path& path, const SimulationTrace& trace,
                            const std::string& source) {
    auto out = open_output(path);
    out << provenance_line(trace.config.seed, source)
        << "period,price_before,price_after,gross_return,dollar_volume,net_demand,"
           "mean_target_ratio,geo_mean_target_ratio,noise_factor,active_count,traded\n";
    for (const auto& r : trace.records) {
        out << r.period << ',' << format_number(r.price_before) << ','
            << format_number(r.price_after) << ',' << format_number(r.gross_return) << ','
            << format_number(r.dollar_volume) << ',' << format_number(r.net_demand) << ','
            << format_number(r.mean_target_ratio) << ',' << format_number(r.geo_mean_target_ratio)
            << ',' << format_number(r.noise_factor) << ',' << r.active_indices.size() << ','
            << (r.traded ? 1 : 0) << '\n';
    }
}

inline void write_scatter_csv(const fs::path& path, const WealthSnapshot& snap, std::uint64_t seed,
                              const std::string& source) {
    auto out = open_output(path);
    out << provenance_line(seed, source) << "agent,stock,bond,total,ratio\n";
    for (const auto& r : snap.rows) {
        out << r.agent << ',' << format_number(r.stock) << ',' << format_number(r.bond) << ','
            << format_number(r.total) << ',' << format_number(r.target_ratio) << '\n';
    }
}

inline void write_json(const fs::path& path, const nlohmann::json& doc) {
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
}

} // namespace bubblesim
