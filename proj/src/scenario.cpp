#include "kmeasure/scenario.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "kmeasure/io.hpp"
#include "kmeasure/mixing_law.hpp"
#include "kmeasure/solver.hpp"

namespace kmeasure {

using nlohmann::json;
using IssueKind = ScenarioIssue::Kind;

std::string_view to_string(RunKind kind) {
  switch (kind) {
    case RunKind::Fixpoint: return "fixpoint";
    case RunKind::Evolve: return "evolve";
    case RunKind::Metrics: return "metrics";
    case RunKind::McCompare: return "mc-compare";
  }
  return "unknown";
}

std::optional<RunKind> parse_run_kind(std::string_view text) {
  if (text == "fixpoint") return RunKind::Fixpoint;
  if (text == "evolve") return RunKind::Evolve;
  if (text == "metrics") return RunKind::Metrics;
  if (text == "mc-compare") return RunKind::McCompare;
  return std::nullopt;
}

std::string_view to_string(ScenarioIssue::Kind kind) {
  switch (kind) {
    case IssueKind::Syntax: return "SyntaxError";
    case IssueKind::UnknownKey: return "UnknownKey";
    case IssueKind::Range: return "RangeError";
    case IssueKind::ModelInvalid: return "ModelInvalid";
  }
  return "Unknown";
}

namespace {

std::string describe(const std::vector<ScenarioIssue>& issues) {
  std::ostringstream out;
  out << issues.size() << " scenario issue" << (issues.size() == 1 ? "" : "s");
  for (const auto& issue : issues) {
    out << "\n  ";
    if (issue.line > 0) out << "line " << issue.line << ": ";
    out << to_string(issue.kind) << ": " << issue.message;
  }
  return out.str();
}

}  // namespace

ScenarioError::ScenarioError(std::vector<ScenarioIssue> issues)
    : Error(ErrorCode::Config, describe(issues)), issues_(std::move(issues)) {}

bool ScenarioError::has(ScenarioIssue::Kind kind) const {
  for (const auto& issue : issues_) {
    if (issue.kind == kind) return true;
  }
  return false;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// JSON if it parses, otherwise the bare text as a string.
json parse_value(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) return json(text);
  return j;
}

// `{key: value, ...}` with unquoted keys and bare-word values.
std::optional<json> parse_relaxed_object(const std::string& text) {
  const std::string body = trim(text);
  if (body.size() < 2 || body.front() != '{' || body.back() != '}') return std::nullopt;
  json out = json::object();
  std::vector<std::string> pieces;
  int depth = 0;
  std::string current;
  for (std::size_t k = 1; k + 1 < body.size(); ++k) {
    const char c = body[k];
    if (c == '[' || c == '{') ++depth;
    if (c == ']' || c == '}') --depth;
    if (c == ',' && depth == 0) {
      pieces.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  if (depth != 0) return std::nullopt;
  if (!trim(current).empty()) pieces.push_back(current);
  for (const auto& piece : pieces) {
    const auto colon = piece.find(':');
    if (colon == std::string::npos) return std::nullopt;
    std::string key = trim(piece.substr(0, colon));
    if (key.size() >= 2 && key.front() == '"' && key.back() == '"') key = key.substr(1, key.size() - 2);
    const std::string value = trim(piece.substr(colon + 1));
    if (key.empty() || value.empty()) return std::nullopt;
    out[key] = parse_value(value);
  }
  return out;
}

struct MeasureSpec {
  std::string kind;
  json params;
  std::optional<std::size_t> n;
  std::string path;
  std::size_t line = 0;
  bool given = false;
};

struct EntrySpec {
  std::size_t line;
  json object;
};

class Parser {
 public:
  explicit Parser(std::filesystem::path base_dir) : base_dir_(std::move(base_dir)) {}

  Scenario run(std::string_view text) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      ++line_no;
      handle_line(line_no, text.substr(start, end - start));
      start = end + 1;
    }
    finish();
    if (!issues_.empty()) throw ScenarioError(issues_);
    return std::move(scenario_);
  }

 private:
  void issue(std::size_t line, IssueKind kind, std::string message) {
    issues_.push_back({line, kind, std::move(message)});
  }

  void handle_line(std::size_t line, std::string_view raw) {
    std::string text(raw);
    if (const auto hash = text.find('#'); hash != std::string::npos) text.resize(hash);
    text = trim(text);
    if (text.empty()) return;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      issue(line, IssueKind::Syntax, "expected `key = value`");
      return;
    }
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty() || value.empty()) {
      issue(line, IssueKind::Syntax, "empty key or value");
      return;
    }
    scenario_.lines.push_back({line, key, value});

    if (key == "model.entries[]") {
      auto object = parse_relaxed_object(value);
      if (!object) {
        issue(line, IssueKind::Syntax, "entry must look like {i: 2, alpha: 1, phi.kind: uniform, ...}");
        return;
      }
      entries_.push_back({line, *object});
      return;
    }
    if (const auto [it, fresh] = seen_.emplace(key, line); !fresh) {
      issue(line, IssueKind::UnknownKey,
            "duplicate key `" + key + "` (first set on line " + std::to_string(it->second) + ")");
      return;
    }
    const json v = parse_value(value);
    if (!assign(line, key, v)) issue(line, IssueKind::UnknownKey, "unknown key `" + key + "`");
  }

  std::optional<double> number(std::size_t line, const std::string& key, const json& v) {
    if (!v.is_number()) {
      issue(line, IssueKind::Syntax, "`" + key + "` expects a number");
      return std::nullopt;
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
      issue(line, IssueKind::Range, "`" + key + "` must be finite");
      return std::nullopt;
    }
    return x;
  }

  std::optional<std::uint64_t> count(std::size_t line, const std::string& key, const json& v) {
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0)) {
      issue(line, IssueKind::Syntax, "`" + key + "` expects a nonnegative integer");
      return std::nullopt;
    }
    return v.get<std::uint64_t>();
  }

  std::optional<std::string> word(std::size_t line, const std::string& key, const json& v) {
    if (!v.is_string()) {
      issue(line, IssueKind::Syntax, "`" + key + "` expects a word");
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  void range_check(std::size_t line, const std::string& key, bool ok, const std::string& rule) {
    if (!ok) issue(line, IssueKind::Range, "`" + key + "` " + rule);
  }

  bool assign_measure(std::size_t line, const std::string& field, const json& v, MeasureSpec& spec) {
    spec.given = true;
    if (spec.line == 0) spec.line = line;
    if (field == "kind") {
      if (auto w = word(line, field, v)) spec.kind = *w;
    } else if (field == "params") {
      spec.params = v;
    } else if (field == "n") {
      if (auto n = count(line, field, v)) {
        range_check(line, field, *n >= 1, "must be >= 1");
        spec.n = *n;
      }
    } else if (field == "path") {
      if (auto w = word(line, field, v)) spec.path = *w;
    } else {
      return false;
    }
    return true;
  }

  bool assign(std::size_t line, const std::string& key, const json& v) {
    auto& settings = settings_;
    auto& run = scenario_.run;
    if (key.rfind("initial.", 0) == 0) return assign_measure(line, key.substr(8), v, initial_);
    if (key.rfind("target.", 0) == 0) return assign_measure(line, key.substr(7), v, target_);

    if (key == "model.r") {
      if (auto x = number(line, key, v)) {
        range_check(line, key, *x > 1.0 && *x < 2.0, "must lie in (1, 2)");
        settings.r = *x;
      }
    } else if (key == "model.atom_budget") {
      if (auto n = count(line, key, v)) {
        range_check(line, key, *n >= 1, "must be >= 1");
        settings.atom_budget = *n;
      }
    } else if (key == "model.hard_cap") {
      if (auto n = count(line, key, v)) settings.hard_cap = *n;
    } else if (key == "model.tail_tolerance") {
      if (auto x = number(line, key, v)) {
        range_check(line, key, *x > 0.0 && *x < 1.0, "must lie in (0, 1)");
        settings.tail_tolerance = *x;
      }
    } else if (key == "model.phi_points") {
      if (auto n = count(line, key, v)) {
        range_check(line, key, *n >= 1, "must be >= 1");
        settings.phi_points = *n;
      }
    } else if (key == "model.max_components") {
      if (auto n = count(line, key, v)) {
        range_check(line, key, *n >= 1, "must be >= 1");
        settings.max_components = *n;
      }
    } else if (key == "model.fine_bins_per_atom") {
      if (auto n = count(line, key, v)) {
        range_check(line, key, *n >= 1, "must be >= 1");
        settings.fine_bins_per_atom = *n;
      }
    } else if (key.rfind("model.tail_rule.", 0) == 0) {
      return assign_tail_rule(line, key, key.substr(16), v);
    } else if (key == "run.kind") {
      if (auto w = word(line, key, v)) {
        if (auto kind = parse_run_kind(*w)) {
          run.kind = *kind;
          run.kind_given = true;
        } else {
          issue(line, IssueKind::Range, "run.kind must be fixpoint, evolve, metrics or mc-compare");
        }
      }
    } else if (key == "run.max_iter") {
      if (auto n = count(line, key, v)) {
        range_check(line, key, *n >= 1, "must be >= 1");
        run.max_iter = *n;
      }
    } else if (key == "run.w1_tol") {
      if (auto x = number(line, key, v)) {
        range_check(line, key, *x > 0.0, "must be > 0");
        run.w1_tol = *x;
      }
    } else if (key == "run.stride") {
      if (auto n = count(line, key, v)) run.stride = *n;
    } else if (key == "run.collapse_threshold") {
      if (auto x = number(line, key, v)) {
        range_check(line, key, *x > 0.0, "must be > 0");
        run.collapse_threshold = *x;
      }
    } else if (key == "run.support_grid") {
      if (auto n = count(line, key, v)) {
        range_check(line, key, *n >= 1, "must be >= 1");
        run.support_grid = *n;
      }
    } else if (key == "run.charfn_t_max") {
      if (auto x = number(line, key, v)) {
        range_check(line, key, *x > 0.0, "must be > 0");
        run.charfn_t_max = *x;
      }
    } else if (key == "run.charfn_points") {
      if (auto n = count(line, key, v)) {
        range_check(line, key, *n >= 2, "must be >= 2");
        run.charfn_points = *n;
      }
    } else if (key == "run.T") {
      if (auto x = number(line, key, v)) {
        range_check(line, key, *x > 0.0, "must be > 0");
        run.T = *x;
      }
    } else if (key == "run.h") {
      if (auto x = number(line, key, v)) {
        range_check(line, key, *x > 0.0 && *x < 1.0, "must lie in (0, 1)");
        run.h = *x;
      }
    } else if (key == "run.scheme") {
      if (auto w = word(line, key, v)) {
        if (auto scheme = parse_scheme(*w)) {
          run.scheme = *scheme;
        } else {
          issue(line, IssueKind::Range, "run.scheme must be euler or exp_euler");
        }
      }
    } else if (key == "run.keep_stride") {
      if (auto n = count(line, key, v)) {
        range_check(line, key, *n >= 1, "must be >= 1");
        run.keep_stride = *n;
      }
    } else if (key == "run.reference_iter") {
      if (auto n = count(line, key, v)) run.reference_iter = *n;
    } else if (key == "run.discretization_check") {
      if (!v.is_boolean()) {
        issue(line, IssueKind::Syntax, "`run.discretization_check` expects true or false");
      } else {
        run.discretization_check = v.get<bool>();
      }
    } else if (key == "run.grid_n") {
      if (auto n = count(line, key, v)) {
        range_check(line, key, *n >= 2, "must be >= 2");
        run.grid_n = *n;
      }
    } else if (key == "run.r") {
      if (auto x = number(line, key, v)) {
        range_check(line, key, *x > 1.0 && *x < 2.0, "must lie in (1, 2)");
        run.r = *x;
      }
    } else if (key == "run.n_draws") {
      if (auto n = count(line, key, v)) {
        range_check(line, key, *n >= 1, "must be >= 1");
        run.n_draws = *n;
      }
    } else if (key == "seed") {
      if (auto n = count(line, key, v)) scenario_.seed = *n;
    } else if (key == "output_dir") {
      if (auto w = word(line, key, v)) scenario_.output_dir = *w;
    } else {
      return false;
    }
    return true;
  }

  bool assign_tail_rule(std::size_t line, const std::string& key, const std::string& field,
                        const json& v) {
    if (!tail_) tail_.emplace();
    tail_line_ = tail_line_ == 0 ? line : tail_line_;
    if (field == "kind") {
      if (auto w = word(line, key, v)) {
        if (*w == "power") {
          tail_->kind = TailRule::Kind::Power;
        } else if (*w == "geometric") {
          tail_->kind = TailRule::Kind::Geometric;
        } else {
          issue(line, IssueKind::Range, "tail_rule.kind must be power or geometric");
        }
      }
    } else if (field == "parameter") {
      if (auto x = number(line, key, v)) tail_->parameter = *x;
    } else if (field == "start") {
      if (auto n = count(line, key, v)) tail_->start = static_cast<unsigned>(*n);
    } else if (field == "mass") {
      if (auto x = number(line, key, v)) {
        range_check(line, key, *x >= 0.0 && *x <= 1.0, "must lie in [0, 1]");
        tail_->mass = *x;
      }
    } else if (field == "base") {
      if (auto mu = atoms_from(line, key, v)) tail_->base_law = *mu;
    } else {
      return false;
    }
    return true;
  }

  std::optional<DiscreteMeasure> atoms_from(std::size_t line, const std::string& what, const json& v) {
    if (!v.is_array()) {
      issue(line, IssueKind::Syntax, what + ": atoms must be [[location, weight], ...]");
      return std::nullopt;
    }
    std::vector<double> xs;
    std::vector<double> ws;
    for (const auto& pair : v) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
        issue(line, IssueKind::Syntax, what + ": atoms must be [[location, weight], ...]");
        return std::nullopt;
      }
      xs.push_back(pair[0].get<double>());
      ws.push_back(pair[1].get<double>());
    }
    try {
      return DiscreteMeasure::make(std::move(xs), std::move(ws));
    } catch (const Error& e) {
      issue(line, IssueKind::Range, what + ": " + e.what());
      return std::nullopt;
    }
  }

  std::vector<double> numbers(std::size_t line, const std::string& what, const json& v,
                              std::size_t expected) {
    std::vector<double> out;
    if (v.is_number()) {
      out.push_back(v.get<double>());
    } else if (v.is_array()) {
      for (const auto& x : v) {
        if (!x.is_number()) {
          issue(line, IssueKind::Syntax, what + ": expected numbers");
          return {};
        }
        out.push_back(x.get<double>());
      }
    } else if (!v.is_null()) {
      issue(line, IssueKind::Syntax, what + ": expected a number list");
      return {};
    }
    if (out.size() != expected) {
      issue(line, IssueKind::Syntax,
            what + ": expected " + std::to_string(expected) + " parameter(s)");
      return {};
    }
    return out;
  }

  std::optional<DiscreteMeasure> build_measure(const MeasureSpec& spec, const std::string& what) {
    const std::size_t line = spec.line;
    const std::string kind = spec.kind.empty() ? "dirac" : spec.kind;
    try {
      if (kind == "dirac") {
        const json params = spec.params.is_null() ? json::array({1.0}) : spec.params;
        auto p = numbers(line, what + ".params", params, 1);
        if (p.empty()) return std::nullopt;
        range_check(line, what + ".params", p[0] >= 0.0, "location must be >= 0");
        if (p[0] < 0.0) return std::nullopt;
        return DiscreteMeasure::dirac(p[0]);
      }
      if (kind == "atoms") return atoms_from(line, what + ".params", spec.params);
      if (kind == "uniform") {
        auto p = numbers(line, what + ".params", spec.params, 2);
        if (p.empty()) return std::nullopt;
        return discretize(MixingLaw::uniform(p[0], p[1], 1), spec.n.value_or(512));
      }
      if (kind == "exponential") {
        const json params = spec.params.is_null() ? json::array({1.0}) : spec.params;
        auto p = numbers(line, what + ".params", params, 1);
        if (p.empty()) return std::nullopt;
        return discretize_exponential(p[0], spec.n.value_or(4096));
      }
      if (kind == "file") {
        if (spec.path.empty()) {
          issue(line, IssueKind::Syntax, what + ".path is required for kind file");
          return std::nullopt;
        }
        const std::filesystem::path path = base_dir_ / spec.path;
        const std::string text = io::read_text_file(path);
        if (path.extension() == ".json") return io::measure_from_json(json::parse(text));
        return io::measure_from_csv(text);
      }
      issue(line, IssueKind::Range,
            what + ".kind must be dirac, atoms, uniform, exponential or file");
    } catch (const Error& e) {
      issue(line, IssueKind::Range, what + ": " + e.what());
    } catch (const json::exception& e) {
      issue(line, IssueKind::Syntax, what + ": " + e.what());
    }
    return std::nullopt;
  }

  std::optional<ModelEntry> build_entry(const EntrySpec& spec) {
    const std::size_t line = spec.line;
    static const char* const known[] = {"i", "alpha", "phi.kind", "phi.params"};
    for (const auto& [k, v] : spec.object.items()) {
      if (std::find(std::begin(known), std::end(known), k) == std::end(known)) {
        issue(line, IssueKind::UnknownKey, "unknown entry field `" + k + "`");
      }
    }
    const json& i = spec.object.contains("i") ? spec.object["i"] : json();
    const json& alpha = spec.object.contains("alpha") ? spec.object["alpha"] : json();
    if (!i.is_number_integer() || i.get<long long>() < 1) {
      issue(line, IssueKind::Syntax, "entry needs an integer index i >= 1");
      return std::nullopt;
    }
    if (!alpha.is_number()) {
      issue(line, IssueKind::Syntax, "entry needs a numeric alpha");
      return std::nullopt;
    }
    const auto index = static_cast<unsigned>(i.get<long long>());
    const std::string kind =
        spec.object.contains("phi.kind") && spec.object["phi.kind"].is_string()
            ? spec.object["phi.kind"].get<std::string>()
            : "standard";
    const json params = spec.object.contains("phi.params") ? spec.object["phi.params"] : json();
    try {
      if (kind == "standard") return ModelEntry{index, alpha.get<double>(), MixingLaw::standard_uniform(index)};
      if (kind == "uniform") {
        auto p = numbers(line, "phi.params", params, 2);
        if (p.empty()) return std::nullopt;
        return ModelEntry{index, alpha.get<double>(), MixingLaw::uniform(p[0], p[1], index)};
      }
      if (kind == "dirac") {
        auto p = numbers(line, "phi.params", params, 1);
        if (p.empty()) return std::nullopt;
        return ModelEntry{index, alpha.get<double>(),
                          MixingLaw::atoms(DiscreteMeasure::dirac(p[0]), index)};
      }
      if (kind == "atoms") {
        auto mu = atoms_from(line, "phi.params", params);
        if (!mu) return std::nullopt;
        return ModelEntry{index, alpha.get<double>(), MixingLaw::atoms(*mu, index)};
      }
      issue(line, IssueKind::Range, "phi.kind must be standard, uniform, dirac or atoms");
    } catch (const Error& e) {
      issue(line, IssueKind::Range, std::string("phi: ") + e.what());
    }
    return std::nullopt;
  }

  void finish() {
    if (settings_.hard_cap < settings_.atom_budget) {
      issue(seen_line("model.hard_cap"), IssueKind::Range, "model.hard_cap must be >= model.atom_budget");
    }
    if (tail_) {
      const bool usable = tail_->kind == TailRule::Kind::Power
                              ? tail_->parameter > 1.0
                              : tail_->parameter > 0.0 && tail_->parameter < 1.0;
      if (!usable) {
        issue(tail_line_, IssueKind::Range,
              "tail_rule.parameter must be > 1 (power) or in (0, 1) (geometric)");
      }
    }

    std::vector<ModelEntry> entries;
    std::map<unsigned, std::size_t> index_line;
    for (const auto& spec : entries_) {
      auto entry = build_entry(spec);
      if (!entry) continue;
      if (const auto [it, fresh] = index_line.emplace(entry->index, spec.line); !fresh) {
        issue(spec.line, IssueKind::UnknownKey,
              "index " + std::to_string(entry->index) + " already defined on line " +
                  std::to_string(it->second));
        continue;
      }
      entries.push_back(std::move(*entry));
    }

    if (initial_.given) {
      if (auto mu = build_measure(initial_, "initial")) scenario_.initial = std::move(*mu);
    }
    if (target_.given) scenario_.target = build_measure(target_, "target");

    if (!issues_.empty()) return;
    if (!entries.empty() || tail_) {
      scenario_.model = CollisionModel(std::move(entries), tail_, settings_);
      scenario_.has_model = true;
      scenario_.findings = validate_model(scenario_.model);
      for (const auto& f : scenario_.findings) {
        if (f.severity == Finding::Severity::Error) {
          issue(0, IssueKind::ModelInvalid, std::string(to_string(f.kind)) + ": " + f.message);
        }
      }
    } else {
      scenario_.model = CollisionModel({}, std::nullopt, settings_);
    }
  }

  std::size_t seen_line(const std::string& key) const {
    const auto it = seen_.find(key);
    return it == seen_.end() ? 0 : it->second;
  }

  std::filesystem::path base_dir_;
  Scenario scenario_;
  ModelSettings settings_;
  std::optional<TailRule> tail_;
  std::size_t tail_line_ = 0;
  std::vector<EntrySpec> entries_;
  MeasureSpec initial_;
  MeasureSpec target_;
  std::map<std::string, std::size_t> seen_;
  std::vector<ScenarioIssue> issues_;
};

}  // namespace

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  return Parser(base_dir).run(text);
}

Scenario load_scenario(const std::filesystem::path& path) {
  const std::string text = io::read_text_file(path);
  return parse_scenario(text, path.has_parent_path() ? path.parent_path() : ".");
}

std::vector<ScenarioIssue> run_requirements(const Scenario& scenario) {
  std::vector<ScenarioIssue> issues;
  const RunKind kind = scenario.run.kind;
  if (kind != RunKind::Metrics && !scenario.has_model) {
    issues.push_back({0, IssueKind::ModelInvalid, "this run needs model.entries[]"});
  }
  if ((kind == RunKind::Fixpoint || kind == RunKind::Evolve) &&
      !in_unit_mean_class(scenario.initial)) {
    issues.push_back({0, IssueKind::Range, "initial measure must have mass 1 and first moment 1"});
  }
  if (kind == RunKind::McCompare && !scenario.initial.is_probability()) {
    issues.push_back({0, IssueKind::Range, "initial measure must be a probability measure"});
  }
  if (kind == RunKind::Metrics && !scenario.target) {
    issues.push_back({0, IssueKind::Syntax, "metrics run needs target.kind / target.params"});
  }
  return issues;
}

}  // namespace kmeasure
