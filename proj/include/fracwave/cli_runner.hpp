#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fracwave/mild_solver.hpp"

namespace fracwave::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* artifact_version = "0.1.0";

// Exit statuses of a run.
inline constexpr int exit_ok = 0;
inline constexpr int exit_error = 1;
inline constexpr int exit_findings = 2;

// Reads a JSON document; parse failures become ConfigError with line and column.
json load_json(const std::filesystem::path& path);

// Rejects keys of `obj` outside `allowed`; `where` names the object in the message.
void require_known_keys(const json& obj, const std::vector<std::string>& allowed, const std::string& where);

// A simulate document after defaults and "auto" values are resolved.
struct SimulationSetup {
    SystemConfig system;
    TimeMesh mesh;
    int picard_sweeps = 0;
    std::optional<std::pair<double, double>> fit_window;
    std::uint64_t seed = 1;
    std::string out_dir;
    bool sequential_mode = false;
    json resolved;  // full document with every default filled in
};

SimulationSetup parse_simulation(const json& doc);

// Runs the setup with the scheme it selects (left point or Picard sweeps).
SolutionHistory run_simulation(const SimulationSetup& setup);

void write_history_csv(const std::filesystem::path& path, const SolutionHistory& history);
// Rebuilds records from history.csv; the termination is taken as Completed.
SolutionHistory read_history_csv(const std::filesystem::path& path);

json summary_json(const SimulationSetup& setup, const SolutionHistory& history);

struct ThresholdSearch {
    double lo = 0.0;  // largest scale seen to complete
    double hi = 0.0;  // smallest scale seen to end otherwise
    double estimate = 0.0;  // geometric midpoint of the final bracket
    int runs = 0;
    json lo_summary;
    json hi_summary;
};

// Geometric bisection on data_scale until hi/lo - 1 <= rel_tol. Throws
// BracketInvalid when lo >= hi or both endpoints end the same way.
ThresholdSearch find_threshold(const json& simulate_doc, double lo, double hi, double rel_tol, int max_runs = 40);

// Entry point of the command-line tool.
int run(int argc, char** argv);

}  // namespace fracwave::cli
