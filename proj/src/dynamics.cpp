#include "kmeasure/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kmeasure/error.hpp"
#include "kmeasure/metrics.hpp"
#include "kmeasure/solver.hpp"

namespace kmeasure {

std::string_view to_string(Scheme scheme) {
  return scheme == Scheme::Euler ? "euler" : "exp_euler";
}

std::optional<Scheme> parse_scheme(std::string_view text) {
  if (text == "euler") return Scheme::Euler;
  if (text == "exp_euler") return Scheme::ExpEuler;
  return std::nullopt;
}

namespace {

StepReceipt blend(const CollisionModel& model, const DiscreteMeasure& mu, double fresh) {
  ApplyReceipt applied = apply(model, mu);
  if (fresh >= 1.0) return {std::move(applied.result), applied.w1_error_bound};
  const WeightedMeasure parts[] = {{1.0 - fresh, &mu}, {fresh, &applied.result}};
  CoarsenReceipt c = coarsen(mix(parts), model.settings().atom_budget);
  return {renormalized(c.result), fresh * applied.w1_error_bound + c.w1_error_bound};
}

}  // namespace

StepReceipt euler_step(const CollisionModel& model, const DiscreteMeasure& mu, double h) {
  if (!(h > 0.0 && h <= 1.0)) {
    throw Error(ErrorCode::StepOutOfRange, "euler step needs h in (0, 1], got " + std::to_string(h));
  }
  return blend(model, mu, h);
}

StepReceipt exp_euler_step(const CollisionModel& model, const DiscreteMeasure& mu, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw Error(ErrorCode::StepOutOfRange, "step needs h > 0, got " + std::to_string(h));
  }
  return blend(model, mu, -std::expm1(-h));
}

Trajectory evolve(const CollisionModel& model, const DiscreteMeasure& mu0,
                  const EvolveOptions& options) {
  if (!in_unit_mean_class(mu0)) {
    throw Error(ErrorCode::InvalidInitial, "initial measure must have mass 1 and first moment 1");
  }
  if (!(options.T > 0.0) || !(options.h > 0.0 && options.h < 1.0)) {
    throw Error(ErrorCode::StepOutOfRange, "evolve needs T > 0 and h in (0, 1)");
  }
  Trajectory traj;
  traj.scheme = options.scheme;
  traj.h = options.h;
  traj.r = options.r.value_or(model.settings().r);

  auto keep = [&](double t, const DiscreteMeasure& mu) {
    traj.times.push_back(t);
    traj.snapshots.push_back(mu);
    if (options.reference != nullptr) {
      traj.w1_to_reference.push_back(wasserstein1(mu, *options.reference));
    }
    traj.m1.push_back(mu.mean());
    traj.mr.push_back(mu.moment(traj.r));
    traj.ledger.push_back(traj.error_ledger);
  };
  keep(0.0, mu0);

  const auto steps = static_cast<std::size_t>(std::ceil(options.T / options.h - 1e-9));
  DiscreteMeasure current = mu0;
  for (std::size_t n = 1; n <= steps; ++n) {
    const double t_prev = static_cast<double>(n - 1) * options.h;
    const double t = n == steps ? options.T : static_cast<double>(n) * options.h;
    const double step = t - t_prev;
    StepReceipt s = options.scheme == Scheme::Euler ? euler_step(model, current, step)
                                                    : exp_euler_step(model, current, step);
    traj.error_ledger += s.w1_error_bound;
    current = std::move(s.result);
    const std::size_t stride = std::max<std::size_t>(1, options.keep_stride);
    if (n == steps || n % stride == 0) keep(t, current);
  }
  return traj;
}

namespace {

double bound_constant(double r, double mr_initial, double mr_limit) {
  return std::pow(2.0, 1.0 + 1.0 / r) * (mr_initial + mr_limit) / r;
}

}  // namespace

DecayCheck decay_check(const CollisionModel& model, const Trajectory& trajectory,
                       const DiscreteMeasure& mu_star, double mu_star_gap) {
  DecayCheck out;
  const double r = trajectory.r;
  out.lambda = contraction_factor(model, r);
  out.bound_slope = -(1.0 - out.lambda) / r;
  out.K = bound_constant(r, trajectory.snapshots.front().moment(r), mu_star.moment(r));

  const std::size_t n = trajectory.snapshots.size();
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) {
    w[k] = trajectory.w1_to_reference.size() == n ? trajectory.w1_to_reference[k]
                                                  : wasserstein1(trajectory.snapshots[k], mu_star);
  }

  out.monotone = true;
  for (std::size_t k = 1; k < n; ++k) {
    const double dt = trajectory.times[k] - trajectory.times[k - 1];
    const double fresh = trajectory.scheme == Scheme::Euler ? dt : -std::expm1(-dt);
    const double allowance =
        trajectory.ledger[k] - trajectory.ledger[k - 1] + fresh * mu_star_gap + 1e-12;
    const double increase = w[k] - w[k - 1];
    out.max_increase = std::max(out.max_increase, increase);
    if (increase > allowance) out.monotone = false;
  }
  if (out.lambda >= 1.0) {
    out.refused = true;
    return out;
  }

  out.under_envelope = true;
  std::vector<double> ts;
  std::vector<double> ys;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = trajectory.times[k];
    if (w[k] > out.K * std::exp(out.bound_slope * t) + trajectory.ledger[k] + mu_star_gap) {
      out.under_envelope = false;
    }
    if (w[k] > 10.0 * trajectory.ledger[k] && w[k] > 0.0) {
      ts.push_back(t);
      ys.push_back(std::log(w[k]));
    }
  }
  out.window = ts.size();
  if (ts.size() < 3) {
    const double floor = 10.0 * trajectory.error_ledger + mu_star_gap + 1e-12;
    if (std::all_of(w.begin(), w.end(), [&](double x) { return x <= floor; })) {
      out.trivial = true;
      out.ok = out.under_envelope;
      return out;
    }
    throw Error(ErrorCode::WindowTooShort,
                "only " + std::to_string(ts.size()) + " kept times have W1 above 10x the ledger");
  }
  double mt = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    mt += ts[k];
    my += ys[k];
  }
  mt /= static_cast<double>(ts.size());
  my /= static_cast<double>(ts.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    sxy += (ts[k] - mt) * (ys[k] - my);
    sxx += (ts[k] - mt) * (ts[k] - mt);
  }
  out.slope = sxy / sxx;
  out.ok = out.under_envelope;
  return out;
}

DiscretizationCheck discretization_error_check(const CollisionModel& model,
                                               const DiscreteMeasure& mu0, double T, double h,
                                               Scheme scheme) {
  const double r = model.settings().r;
  const double lambda = contraction_factor(model, r);
  DiscretizationCheck out;

  EvolveOptions coarse;
  coarse.T = T;
  coarse.h = h;
  coarse.scheme = scheme;
  coarse.keep_stride = static_cast<std::size_t>(-1);
  EvolveOptions fine = coarse;
  fine.h = h / 16.0;
  fine.scheme = Scheme::ExpEuler;
  const Trajectory a = evolve(model, mu0, coarse);
  const Trajectory b = evolve(model, mu0, fine);
  out.measured = wasserstein1(a.last(), b.last());
  out.ledger = a.error_ledger + b.error_ledger;

  if (lambda < 1.0) {
    const ApplyReceipt once = apply(model, mu0);
    const double zeta = std::min(zolotarev_upper(once.result, mu0, r),
                                 zolotarev_upper_cdf(once.result, mu0, r));
    const double mr0 = mu0.moment(r);
    const double kappa = r / (1.0 - lambda) * zeta + mr0;
    out.K = bound_constant(r, mr0, kappa);
    out.bound = 4.0 * out.K * h * std::expm1(2.0 * T);
  } else {
    out.K = INFINITY;
    out.bound = INFINITY;
  }
  out.vacuous = out.bound >= 2.0;
  out.ok = out.measured <= out.bound;
  return out;
}

}  // namespace kmeasure
