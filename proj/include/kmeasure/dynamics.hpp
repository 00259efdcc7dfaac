#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "kmeasure/collision.hpp"
#include "kmeasure/measure.hpp"

namespace kmeasure {

enum class Scheme { Euler, ExpEuler };

std::string_view to_string(Scheme scheme);
std::optional<Scheme> parse_scheme(std::string_view text);

struct StepReceipt {
  DiscreteMeasure result;
  double w1_error_bound = 0.0;
};

/// (1 - h) mu + h apply(model, mu), coarsened to the model's budget.
/// Throws StepOutOfRange unless h lies in (0, 1].
StepReceipt euler_step(const CollisionModel& model, const DiscreteMeasure& mu, double h);

/// e^{-h} mu + (1 - e^{-h}) apply(model, mu): the variation-of-constants
/// formula with the collision term frozen over the step.
StepReceipt exp_euler_step(const CollisionModel& model, const DiscreteMeasure& mu, double h);

struct EvolveOptions {
  double T = 1.0;
  double h = 0.05;
  Scheme scheme = Scheme::ExpEuler;
  std::size_t keep_stride = 1;  // keep every k-th step (the last step is always kept)
  const DiscreteMeasure* reference = nullptr;  // W1 to this measure at kept times
  std::optional<double> r;                     // defaults to the model's r
};

struct Trajectory {
  Scheme scheme = Scheme::ExpEuler;
  double h = 0.0;
  double r = 1.5;
  std::vector<double> times;
  std::vector<DiscreteMeasure> snapshots;
  std::vector<double> w1_to_reference;  // empty without a reference
  std::vector<double> m1;
  std::vector<double> mr;
  std::vector<double> ledger;  // accumulated step bounds up to each kept time
  double error_ledger = 0.0;

  const DiscreteMeasure& last() const { return snapshots.back(); }
};

/// Repeated stepping from mu0 up to time T; the final step is shortened when
/// T is not a multiple of h. Throws InvalidInitial when mu0 is not in D and
/// StepOutOfRange unless T > 0 and h lies in (0, 1).
Trajectory evolve(const CollisionModel& model, const DiscreteMeasure& mu0,
                  const EvolveOptions& options);

struct DecayCheck {
  double slope = 0.0;        // least-squares slope of log W1 against t over the window
  double bound_slope = 0.0;  // -(1 - lambda) / r
  double K = 0.0;
  double lambda = 0.0;
  std::size_t window = 0;   // number of points used in the fit
  bool trivial = false;     // all distances at ledger level
  bool refused = false;     // lambda >= 1: only monotonicity is reported
  bool monotone = false;    // W1 to mu_star nonincreasing up to the per-step allowance
  double max_increase = 0.0;
  bool under_envelope = false;  // W1(t) <= K exp(bound_slope t) + ledger(t) at all kept t
  bool ok = false;
};

/// Compares W1(psi(t), mu_star) with K exp(-(1 - lambda) t / r), where
/// K = (1/r) 2^{1 + 1/r} (m_r(psi_0) + m_r(mu_star)). The slope is fitted
/// over kept times with W1 > 10 ledger(t). mu_star_gap is W1(apply(mu_star),
/// mu_star) plus its bound, used in the per-step monotonicity allowance.
/// Throws WindowTooShort when fewer than three points qualify and the
/// distances are not all at ledger level.
DecayCheck decay_check(const CollisionModel& model, const Trajectory& trajectory,
                       const DiscreteMeasure& mu_star, double mu_star_gap = 0.0);

struct DiscretizationCheck {
  double measured = 0.0;  // W1(psi_h(T), psi_ref(T))
  double bound = 0.0;     // 4 K h (e^{2T} - 1)
  double K = 0.0;
  double ledger = 0.0;    // coarsening bounds of both runs
  bool vacuous = false;   // bound >= 2
  bool ok = false;
};

/// psi_h uses `scheme` at step h; the reference uses exp_euler at h / 16.
/// K is bounded above through m_r(mu*) <= r / (1 - lambda) zeta(P mu0, mu0) + m_r(mu0),
/// with the seminorm replaced by its analytic upper bound.
DiscretizationCheck discretization_error_check(const CollisionModel& model,
                                               const DiscreteMeasure& mu0, double T, double h,
                                               Scheme scheme = Scheme::Euler);

}  // namespace kmeasure
