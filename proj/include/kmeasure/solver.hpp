#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "kmeasure/collision.hpp"
#include "kmeasure/measure.hpp"

namespace kmeasure {

struct IterateOptions {
  std::size_t max_iter = 60;
  double w1_tol = 1e-3;
  std::size_t stride = 10;  // 0 keeps only the first and last iterate
  double collapse_threshold = 1e-3;
  std::optional<double> r;  // defaults to the model's r
};

struct MomentRow {
  double m1 = 0.0;
  double mr = 0.0;
  double m2 = 0.0;
  double median = 0.0;
};

struct Snapshot {
  std::size_t iteration;
  DiscreteMeasure measure;
};

struct FixedPointReport {
  std::vector<Snapshot> snapshots;
  std::vector<double> w1_gaps;          // W1(mu_{n+1}, mu_n)
  std::vector<double> zeta_upper_gaps;  // analytic upper bound of the seminorm gap
  std::vector<double> step_bounds;      // operator approximation bound of each step
  std::vector<MomentRow> moments;       // one row per iterate, starting at mu_0
  bool converged = false;
  bool collapse_detected = false;
  std::size_t n_iterations = 0;
  double error_ledger = 0.0;
  double r = 1.5;

  const DiscreteMeasure& last() const { return snapshots.back().measure; }
};

/// Tolerance for membership in D (mass 1 and first moment 1).
inline constexpr double kUnitMomentTolerance = 1e-9;
bool in_unit_mean_class(const DiscreteMeasure& mu, double tolerance = kUnitMomentTolerance);

/// Picard iteration mu_{n+1} = apply(model, mu_n). Stops at the first W1 gap
/// <= w1_tol or after max_iter steps. Throws InvalidInitial when mu0 is not
/// a probability measure with first moment 1.
FixedPointReport iterate(const CollisionModel& model, const DiscreteMeasure& mu0,
                         const IterateOptions& options = {});

struct ContractionCheck {
  double before = 0.0;
  double after = 0.0;
  double ledger = 0.0;  // approximation bound of both operator evaluations
  bool strict = false;
  bool nonexpansive = false;
};

ContractionCheck verify_contraction(const CollisionModel& model, const DiscreteMeasure& mu,
                                    const DiscreteMeasure& nu);

struct SupportDiagnostics {
  double min_atom = 0.0;
  double max_atom = 0.0;
  double fill_ratio = 0.0;
  bool degenerate = false;  // quantile(0.999) == 0
};

/// fill_ratio: fraction of fill_grid_n equal cells of [0, quantile(0.999)]
/// that contain at least one atom.
SupportDiagnostics support_diagnostics(const DiscreteMeasure& mu, std::size_t fill_grid_n = 64);

/// max over t of |psi(t) - sum_i alpha_i sum_z phi_i(z) psi(t z)^i|, where
/// psi is the characteristic function of mu and phi_i are the laws used by
/// apply.
double charfn_residual(const CollisionModel& model, const DiscreteMeasure& mu,
                       std::span<const double> t_grid);

}  // namespace kmeasure
