#include "kmeasure/solver.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "kmeasure/error.hpp"
#include "kmeasure/metrics.hpp"

namespace kmeasure {

bool in_unit_mean_class(const DiscreteMeasure& mu, double tolerance) {
  return std::abs(mu.total_mass() - 1.0) <= tolerance && std::abs(mu.mean() - 1.0) <= tolerance;
}

namespace {

MomentRow moments_of(const DiscreteMeasure& mu, double r) {
  return {mu.mean(), mu.moment(r), mu.moment(2.0), median(mu)};
}

double zeta_gap(const DiscreteMeasure& a, const DiscreteMeasure& b, double r) {
  try {
    return std::min(zolotarev_upper(a, b, r), zolotarev_upper_cdf(a, b, r));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InfiniteSeminorm) throw;
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

FixedPointReport iterate(const CollisionModel& model, const DiscreteMeasure& mu0,
                         const IterateOptions& options) {
  if (!in_unit_mean_class(mu0)) {
    throw Error(ErrorCode::InvalidInitial,
                "initial measure must have mass 1 and first moment 1, got mass " +
                    std::to_string(mu0.total_mass()) + " and mean " + std::to_string(mu0.mean()));
  }
  if (!(options.w1_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "w1_tol must be > 0");

  FixedPointReport report;
  report.r = options.r.value_or(model.settings().r);
  report.snapshots.push_back({0, mu0});
  report.moments.push_back(moments_of(mu0, report.r));

  DiscreteMeasure current = mu0;
  for (std::size_t n = 1; n <= options.max_iter; ++n) {
    ApplyReceipt step = apply(model, current);
    const double gap = wasserstein1(step.result, current);
    report.w1_gaps.push_back(gap);
    report.zeta_upper_gaps.push_back(zeta_gap(step.result, current, report.r));
    report.step_bounds.push_back(step.w1_error_bound);
    report.error_ledger += step.w1_error_bound;
    const MomentRow row = moments_of(step.result, report.r);
    report.moments.push_back(row);
    if (row.median < options.collapse_threshold && std::abs(row.m1 - 1.0) <= kUnitMomentTolerance) {
      report.collapse_detected = true;
    }
    current = std::move(step.result);
    report.n_iterations = n;
    report.converged = gap <= options.w1_tol;
    const bool last = report.converged || n == options.max_iter;
    if (last || (options.stride > 0 && n % options.stride == 0)) {
      report.snapshots.push_back({n, current});
    }
    if (report.converged) break;
  }
  return report;
}

ContractionCheck verify_contraction(const CollisionModel& model, const DiscreteMeasure& mu,
                                    const DiscreteMeasure& nu) {
  ContractionCheck out;
  out.before = wasserstein1(mu, nu);
  if (mu == nu) {
    out.nonexpansive = true;
    return out;
  }
  const ApplyReceipt a = apply(model, mu);
  const ApplyReceipt b = apply(model, nu);
  out.after = wasserstein1(a.result, b.result);
  out.ledger = a.w1_error_bound + b.w1_error_bound;
  out.strict = out.after < out.before - 1e-12;
  out.nonexpansive = out.after <= out.before + out.ledger + 1e-12;
  return out;
}

SupportDiagnostics support_diagnostics(const DiscreteMeasure& mu, std::size_t fill_grid_n) {
  if (fill_grid_n == 0) throw Error(ErrorCode::InvalidArgument, "fill_grid_n must be >= 1");
  SupportDiagnostics out;
  out.min_atom = mu.min_location();
  out.max_atom = mu.max_location();
  const double top = mu.quantile(0.999);
  if (top <= 0.0) {
    out.degenerate = true;
    out.fill_ratio = 1.0;
    return out;
  }
  std::vector<char> hit(fill_grid_n, 0);
  const double scale = static_cast<double>(fill_grid_n) / top;
  for (double x : mu.locations()) {
    if (x > top) break;
    hit[std::min(fill_grid_n - 1, static_cast<std::size_t>(x * scale))] = 1;
  }
  out.fill_ratio = static_cast<double>(std::count(hit.begin(), hit.end(), 1)) /
                   static_cast<double>(fill_grid_n);
  return out;
}

namespace {

std::complex<double> characteristic(const DiscreteMeasure& mu, double t) {
  double re = 0.0;
  double im = 0.0;
  const auto xs = mu.locations();
  const auto ws = mu.weights();
  for (std::size_t k = 0; k < xs.size(); ++k) {
    re += ws[k] * std::cos(t * xs[k]);
    im += ws[k] * std::sin(t * xs[k]);
  }
  return {re, im};
}

}  // namespace

double charfn_residual(const CollisionModel& model, const DiscreteMeasure& mu,
                       std::span<const double> t_grid) {
  std::vector<DiscreteMeasure> laws;
  for (const auto& c : model.retained()) laws.push_back(model.phi_atoms(c));
  double worst = 0.0;
  for (double t : t_grid) {
    const std::complex<double> psi = characteristic(mu, t);
    std::complex<double> mixed = 0.0;
    for (std::size_t n = 0; n < laws.size(); ++n) {
      const auto& c = model.retained()[n];
      std::complex<double> inner = 0.0;
      for (std::size_t k = 0; k < laws[n].size(); ++k) {
        const std::complex<double> value = characteristic(mu, t * laws[n].location(k));
        inner += laws[n].weight(k) * std::pow(value, static_cast<int>(c.index));
      }
      mixed += c.alpha * inner;
    }
    worst = std::max(worst, std::abs(psi - mixed));
  }
  return worst;
}

}  // namespace kmeasure
