#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kmeasure/collision.hpp"
#include "kmeasure/dynamics.hpp"
#include "kmeasure/error.hpp"
#include "kmeasure/measure.hpp"

namespace kmeasure {

enum class RunKind { Fixpoint, Evolve, Metrics, McCompare };

std::string_view to_string(RunKind kind);
std::optional<RunKind> parse_run_kind(std::string_view text);

struct RunSpec {
  RunKind kind = RunKind::Fixpoint;
  bool kind_given = false;
  // fixpoint
  std::size_t max_iter = 60;
  double w1_tol = 1e-3;
  std::size_t stride = 10;
  double collapse_threshold = 1e-3;
  std::size_t support_grid = 64;
  double charfn_t_max = 5.0;
  std::size_t charfn_points = 26;
  // evolve
  double T = 1.0;
  double h = 0.05;
  Scheme scheme = Scheme::ExpEuler;
  std::size_t keep_stride = 1;
  std::size_t reference_iter = 60;  // fixed-point iterations for the decay reference; 0 disables
  bool discretization_check = false;
  // metrics
  std::size_t grid_n = 64;
  std::optional<double> r;
  // mc-compare
  std::size_t n_draws = 100000;
};

struct ScenarioIssue {
  enum class Kind { Syntax, UnknownKey, Range, ModelInvalid };
  std::size_t line = 0;  // 0 when not tied to a line
  Kind kind;
  std::string message;
};

std::string_view to_string(ScenarioIssue::Kind kind);

class ScenarioError : public Error {
 public:
  explicit ScenarioError(std::vector<ScenarioIssue> issues);
  const std::vector<ScenarioIssue>& issues() const noexcept { return issues_; }
  bool has(ScenarioIssue::Kind kind) const;

 private:
  std::vector<ScenarioIssue> issues_;
};

struct ScenarioLine {
  std::size_t line;
  std::string key;
  std::string value;
};

struct Scenario {
  CollisionModel model{{}, std::nullopt, {}};
  bool has_model = false;
  std::vector<Finding> findings;
  DiscreteMeasure initial = DiscreteMeasure::dirac(1.0);
  std::optional<DiscreteMeasure> target;
  RunSpec run;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::vector<ScenarioLine> lines;  // echo of the parsed input
};

/// Parses `key = value` lines (`#` starts a comment). Relative file paths
/// resolve against base_dir. Throws ScenarioError with every issue found.
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = ".");
Scenario load_scenario(const std::filesystem::path& path);

/// Checks that depend on the run kind (model present, initial measure in D,
/// target present for metrics). Empty when the scenario can run.
std::vector<ScenarioIssue> run_requirements(const Scenario& scenario);

}  // namespace kmeasure
