#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "kmeasure/scenario.hpp"

namespace kmeasure {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;

struct RunOptions {
  std::optional<RunKind> command;  // must agree with run.kind when both are given
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  std::string scenario_path;  // echoed into the manifest
  std::ostream* log = nullptr;
};

/// Runs one scenario and writes manifest.json, report.json, trace.csv and
/// snapshot CSVs. Returns 0 on success, 1 on configuration errors and 2 when
/// a numerical check fails. Timings appear only in manifest.json.
int run_scenario(Scenario scenario, const RunOptions& options);

/// Loads the scenario file, then runs it. Parse errors give exit code 1.
int run_scenario_file(const std::filesystem::path& path, RunOptions options);

}  // namespace kmeasure
