#include "kmeasure/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "kmeasure/dynamics.hpp"
#include "kmeasure/io.hpp"
#include "kmeasure/metrics.hpp"
#include "kmeasure/parallel.hpp"
#include "kmeasure/sampler.hpp"
#include "kmeasure/solver.hpp"

namespace kmeasure {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string snapshot_name(std::size_t index) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "snapshot_%04zu.csv", index);
  return buffer;
}

// NaN and infinities are not valid JSON numbers.
json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

json numbers(const std::vector<double>& xs) {
  json out = json::array();
  for (double x : xs) out.push_back(number(x));
  return out;
}

std::string_view severity_name(Finding::Severity s) {
  switch (s) {
    case Finding::Severity::Info: return "info";
    case Finding::Severity::Warning: return "warning";
    case Finding::Severity::Error: return "error";
  }
  return "unknown";
}

json model_json(const Scenario& s) {
  if (!s.has_model) return nullptr;
  const CollisionModel& m = s.model;
  json out;
  out["r"] = m.settings().r;
  out["atom_budget"] = m.settings().atom_budget;
  out["phi_points"] = m.settings().phi_points;
  out["tail_tolerance"] = m.settings().tail_tolerance;
  out["tail_mass"] = m.tail_mass();
  out["truncation_index"] = m.truncation_index();
  out["lambda"] = number(contraction_factor(m));
  out["lambda_discretized"] = number(contraction_factor(m, MomentSource::Discretized));
  json retained = json::array();
  for (const auto& c : m.retained()) retained.push_back({{"i", c.index}, {"alpha", c.alpha}});
  out["retained"] = retained;
  json findings = json::array();
  for (const auto& f : s.findings) {
    findings.push_back({{"kind", std::string(to_string(f.kind))},
                        {"severity", std::string(severity_name(f.severity))},
                        {"message", f.message}});
  }
  out["findings"] = findings;
  return out;
}

class Outputs {
 public:
  explicit Outputs(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  void write(const std::string& name, std::string_view content) {
    io::write_text_file(dir_ / name, content);
    files_.push_back(name);
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }
  const std::vector<std::string>& files() const { return files_; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

std::string fmt(double x) { return std::isfinite(x) ? io::format_double(x) : (std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf")); }

int run_fixpoint(const Scenario& s, Outputs& out, json& report) {
  const RunSpec& run = s.run;
  IterateOptions options;
  options.max_iter = run.max_iter;
  options.w1_tol = run.w1_tol;
  options.stride = run.stride;
  options.collapse_threshold = run.collapse_threshold;
  const FixedPointReport fp = iterate(s.model, s.initial, options);

  bool m1_conserved = true;
  for (const auto& row : fp.moments) {
    if (std::abs(row.m1 - 1.0) > kUnitMomentTolerance) m1_conserved = false;
  }
  bool nonexpansive = true;
  for (std::size_t k = 1; k < fp.w1_gaps.size(); ++k) {
    const double allowance = fp.step_bounds[k] + fp.step_bounds[k - 1] + 1e-12;
    if (fp.w1_gaps[k] > fp.w1_gaps[k - 1] + allowance) nonexpansive = false;
  }

  const DiscreteMeasure& last = fp.last();
  const SupportDiagnostics support = support_diagnostics(last, run.support_grid);
  std::vector<double> t_grid(run.charfn_points);
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    t_grid[k] = run.charfn_t_max * static_cast<double>(k) / static_cast<double>(t_grid.size() - 1);
  }
  const double residual = charfn_residual(s.model, last, t_grid);

  std::string trace = "iteration,w1_gap,zeta_upper_gap,m1,mr,m2,median,step_bound\n";
  for (std::size_t n = 0; n < fp.moments.size(); ++n) {
    const auto& row = fp.moments[n];
    trace += std::to_string(n) + ',';
    trace += n == 0 ? "," : fmt(fp.w1_gaps[n - 1]) + ',';
    trace += n == 0 ? "," : fmt(fp.zeta_upper_gaps[n - 1]) + ',';
    trace += fmt(row.m1) + ',' + fmt(row.mr) + ',' + fmt(row.m2) + ',' + fmt(row.median) + ',';
    trace += n == 0 ? "" : fmt(fp.step_bounds[n - 1]);
    trace += '\n';
  }
  out.write("trace.csv", trace);

  json snapshots = json::array();
  for (const auto& snap : fp.snapshots) {
    const std::string name = snapshot_name(snap.iteration);
    out.write(name, io::measure_to_csv(snap.measure));
    snapshots.push_back({{"iteration", snap.iteration}, {"file", name}});
  }

  report["converged"] = fp.converged;
  report["collapse_detected"] = fp.collapse_detected;
  report["n_iterations"] = fp.n_iterations;
  report["error_ledger"] = fp.error_ledger;
  report["w1_gaps"] = numbers(fp.w1_gaps);
  report["zeta_upper_gaps"] = numbers(fp.zeta_upper_gaps);
  report["final"] = {{"atoms", last.size()},
                     {"m1", last.mean()},
                     {"mr", last.moment(fp.r)},
                     {"m2", last.moment(2.0)},
                     {"median", median(last)},
                     {"mass_at_zero", last.min_location() == 0.0 ? last.weight(0) : 0.0},
                     {"support",
                      {{"min_atom", support.min_atom},
                       {"max_atom", support.max_atom},
                       {"fill_ratio", support.fill_ratio},
                       {"degenerate", support.degenerate}}},
                     {"charfn_residual", residual}};
  report["checks"] = {{"m1_conserved", m1_conserved}, {"gap_nonexpansive", nonexpansive}};
  report["snapshots"] = snapshots;
  return m1_conserved && nonexpansive ? kExitOk : kExitNumerical;
}

int run_evolve(const Scenario& s, Outputs& out, json& report) {
  const RunSpec& run = s.run;
  std::optional<DiscreteMeasure> reference;
  double reference_gap = 0.0;
  if (run.reference_iter > 0) {
    IterateOptions options;
    options.max_iter = run.reference_iter;
    options.w1_tol = run.w1_tol;
    options.stride = 0;
    const FixedPointReport fp = iterate(s.model, s.initial, options);
    reference = fp.last();
    const ApplyReceipt once = apply(s.model, *reference);
    reference_gap = wasserstein1(once.result, *reference) + once.w1_error_bound;
    report["reference"] = {{"iterations", fp.n_iterations},
                           {"converged", fp.converged},
                           {"gap", reference_gap}};
  }

  EvolveOptions options;
  options.T = run.T;
  options.h = run.h;
  options.scheme = run.scheme;
  options.keep_stride = run.keep_stride;
  options.reference = reference ? &*reference : nullptr;
  const Trajectory traj = evolve(s.model, s.initial, options);

  std::string trace = "t,w1_to_ref,m1,mr,error_ledger\n";
  json snapshots = json::array();
  bool m1_conserved = true;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    trace += fmt(traj.times[k]) + ',';
    trace += traj.w1_to_reference.empty() ? "" : fmt(traj.w1_to_reference[k]);
    trace += ',' + fmt(traj.m1[k]) + ',' + fmt(traj.mr[k]) + ',' + fmt(traj.ledger[k]) + '\n';
    if (std::abs(traj.m1[k] - 1.0) > kUnitMomentTolerance) m1_conserved = false;
    const std::string name = snapshot_name(k);
    out.write(name, io::measure_to_csv(traj.snapshots[k]));
    snapshots.push_back({{"t", traj.times[k]}, {"file", name}});
  }
  out.write("trace.csv", trace);

  report["scheme"] = std::string(to_string(traj.scheme));
  report["T"] = run.T;
  report["h"] = run.h;
  report["error_ledger"] = traj.error_ledger;
  report["snapshots"] = snapshots;
  bool ok = m1_conserved;
  if (reference) {
    try {
      const DecayCheck d = decay_check(s.model, traj, *reference, reference_gap);
      report["decay"] = {{"slope", number(d.slope)},
                         {"bound_slope", number(d.bound_slope)},
                         {"K", number(d.K)},
                         {"lambda", number(d.lambda)},
                         {"window", d.window},
                         {"trivial", d.trivial},
                         {"refused", d.refused},
                         {"monotone", d.monotone},
                         {"max_increase", number(d.max_increase)},
                         {"under_envelope", d.under_envelope},
                         {"ok", d.ok}};
      ok = ok && d.monotone && (d.refused || d.ok);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::WindowTooShort) throw;
      report["decay"] = {{"error", e.what()}};
      ok = false;
    }
  }
  if (run.discretization_check) {
    const DiscretizationCheck c = discretization_error_check(s.model, s.initial, run.T, run.h);
    report["discretization"] = {{"measured", c.measured},
                                {"bound", number(c.bound)},
                                {"K", number(c.K)},
                                {"ledger", c.ledger},
                                {"vacuous", c.vacuous},
                                {"ok", c.ok}};
    ok = ok && c.ok;
  }
  report["checks"] = {{"m1_conserved", m1_conserved}};
  return ok ? kExitOk : kExitNumerical;
}

int run_metrics(const Scenario& s, Outputs& out, json& report) {
  const double r = s.run.r.value_or(s.model.settings().r);
  const DiscreteMeasure& mu = s.initial;
  const DiscreteMeasure& nu = *s.target;
  const MetricReport m = metric_report(mu, nu, r, s.run.grid_n);
  const KrResult kr = kr_potential(mu, nu);

  std::string trace = "x,kr_potential\n";
  for (std::size_t k = 0; k < kr.potential.breakpoints.size(); ++k) {
    trace += fmt(kr.potential.breakpoints[k]) + ',' + fmt(kr.potential.values[k]) + '\n';
  }
  out.write("trace.csv", trace);
  out.write("snapshot_0000.csv", io::measure_to_csv(mu));
  out.write("snapshot_0001.csv", io::measure_to_csv(nu));

  report["w1"] = m.w1;
  report["fm"] = m.fm;
  report["kr_value"] = kr.value;
  if (m.zeta_finite) {
    report["zeta"] = {{"lower", m.zeta.lower},
                      {"estimate", m.zeta.estimate},
                      {"upper", m.zeta.upper},
                      {"r", r},
                      {"grid_n", m.grid_n},
                      {"grid_size", m.zeta.grid_size}};
    report["rio_ok"] = m.rio_ok;
  } else {
    report["zeta"] = {{"finite", false}, {"r", r}, {"grid_n", m.grid_n}};
    report["rio_ok"] = nullptr;
  }
  bool ok = std::abs(kr.value - m.w1) <= 1e-12 * std::max(1.0, m.w1) && m.fm <= m.w1 + 1e-12;
  if (m.zeta_finite) {
    ok = ok && m.rio_ok && m.zeta.lower <= m.zeta.estimate && m.zeta.estimate <= m.zeta.upper;
  }
  report["checks"] = {{"consistent", ok}};
  return ok ? kExitOk : kExitNumerical;
}

int run_mc_compare(const Scenario& s, std::uint64_t seed, Outputs& out, json& report) {
  const std::size_t n_draws = s.run.n_draws;
  const ApplyReceipt exact = apply(s.model, s.initial);
  const DiscreteMeasure empirical = empirical_apply(s.model, s.initial, n_draws, RngStream(seed, 0));
  const double w1 = wasserstein1(empirical, exact.result);

  std::string trace = "n_draws,w1\n";
  json series = json::array();
  std::uint64_t stream = 1;
  for (std::size_t n = 1000; n < n_draws; n *= 10, ++stream) {
    const DiscreteMeasure e = empirical_apply(s.model, s.initial, n, RngStream(seed, stream));
    const double d = wasserstein1(e, exact.result);
    trace += std::to_string(n) + ',' + fmt(d) + '\n';
    series.push_back({{"n_draws", n}, {"w1", d}});
  }
  trace += std::to_string(n_draws) + ',' + fmt(w1) + '\n';
  series.push_back({{"n_draws", n_draws}, {"w1", w1}});
  out.write("trace.csv", trace);
  out.write("snapshot_0000.csv", io::measure_to_csv(exact.result));
  out.write("snapshot_0001.csv", io::measure_to_csv(empirical));

  report["n_draws"] = n_draws;
  report["seed"] = seed;
  report["w1_empirical_exact"] = w1;
  report["apply_error_bound"] = exact.w1_error_bound;
  report["empirical_mean"] = empirical.mean();
  report["exact_mean"] = exact.result.mean();
  report["series"] = series;
  return kExitOk;
}

}  // namespace

int run_scenario(Scenario scenario, const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  auto log = [&](const std::string& message) {
    if (options.log != nullptr) *options.log << message << '\n';
  };

  if (options.command) {
    if (scenario.run.kind_given && scenario.run.kind != *options.command) {
      log("configuration error: scenario run.kind is " + std::string(to_string(scenario.run.kind)) +
          " but the command is " + std::string(to_string(*options.command)));
      return kExitConfig;
    }
    scenario.run.kind = *options.command;
  }
  if (const auto issues = run_requirements(scenario); !issues.empty()) {
    log(ScenarioError(issues).what());
    return kExitConfig;
  }
  const std::uint64_t seed = options.seed.value_or(scenario.seed);
  parallel::set_thread_limit(std::max<std::size_t>(1, options.threads));

  int code = kExitOk;
  json report;
  report["run"] = std::string(to_string(scenario.run.kind));
  report["model"] = model_json(scenario);
  try {
    Outputs out(options.output_dir.value_or(std::filesystem::path(scenario.output_dir)));
    std::string failure;
    try {
      switch (scenario.run.kind) {
        case RunKind::Fixpoint: code = run_fixpoint(scenario, out, report); break;
        case RunKind::Evolve: code = run_evolve(scenario, out, report); break;
        case RunKind::Metrics: code = run_metrics(scenario, out, report); break;
        case RunKind::McCompare: code = run_mc_compare(scenario, seed, out, report); break;
      }
    } catch (const Error& e) {
      failure = e.what();
      code = e.code() == ErrorCode::Config || e.code() == ErrorCode::InvalidArgument ||
                     e.code() == ErrorCode::ModelInvalid || e.code() == ErrorCode::InvalidInitial ||
                     e.code() == ErrorCode::StepOutOfRange
                 ? kExitConfig
                 : kExitNumerical;
      report["error"] = failure;
      log("run failed: " + failure);
    }
    report["exit_code"] = code;
    out.write_json("report.json", report);

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    json manifest;
    manifest["tool"] = "kmeasure";
    manifest["version"] = kVersion;
    manifest["command"] = std::string(to_string(scenario.run.kind));
    manifest["seed"] = seed;
    manifest["threads"] = options.threads;
    manifest["exit_code"] = code;
    json lines = json::array();
    for (const auto& l : scenario.lines) {
      lines.push_back({{"line", l.line}, {"key", l.key}, {"value", l.value}});
    }
    manifest["scenario"] = {{"path", options.scenario_path}, {"entries", lines}};
    manifest["timings"] = {{"total_seconds", seconds}};
    json files = out.files();
    files.push_back("manifest.json");
    manifest["files"] = files;
    out.write_json("manifest.json", manifest);
    log("wrote " + std::to_string(out.files().size()) + " files to " + out.dir().string());
  } catch (const Error& e) {
    log(std::string("output error: ") + e.what());
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    log(std::string("output error: ") + e.what());
    return kExitConfig;
  }
  return code;
}

int run_scenario_file(const std::filesystem::path& path, RunOptions options) {
  try {
    Scenario scenario = load_scenario(path);
    options.scenario_path = path.string();
    return run_scenario(std::move(scenario), options);
  } catch (const Error& e) {
    if (options.log != nullptr) *options.log << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace kmeasure
