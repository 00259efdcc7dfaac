#pragma once

#include <cstddef>
#include <vector>

#include "kmeasure/measure.hpp"

namespace kmeasure {

/// Exact area between the two distribution functions.
double wasserstein1(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Piecewise-linear function on [0, inf), constant after the last breakpoint.
struct Potential {
  std::vector<double> breakpoints;
  std::vector<double> values;

  double operator()(double x) const;
};

struct KrResult {
  Potential potential;
  double value = 0.0;
};

/// f0(x) = integral over [0, x] of sign(F_nu - F_mu), with slope 0 where the
/// distribution functions agree. value = <f0, mu - nu>.
KrResult kr_potential(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// sup <f, mu - nu> over f with |f| <= 1 and Lipschitz constant <= 1.
double fortet_mourier(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// (1/r) sum over merged atoms of |mu - nu|(x) x^r. Throws InfiniteSeminorm
/// when the masses or first moments differ by more than 1e-9.
double zolotarev_upper(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double r);

/// Integral of t^(r-1) |F_mu - F_nu|(t). Never larger than zolotarev_upper.
double zolotarev_upper_cdf(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double r);

/// (1/r) |m_r(mu) - m_r(nu)|.
double zolotarev_lower(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double r);

struct ZetaSandwich {
  double lower = 0.0;
  double estimate = 0.0;
  double upper = 0.0;  // min of the two analytic upper bounds
  std::size_t grid_size = 0;
};

inline constexpr std::size_t kDefaultZetaGrid = 64;
// Above this many merged atoms the estimate grid keeps only the fill points.
inline constexpr std::size_t kZetaAtomGridLimit = 256;

/// Grid lower estimate of the seminorm: the best piecewise-linear derivative
/// on the grid {0} U atoms U fill points, under pairwise Holder(r - 1)
/// constraints. Refining the grid (doubling grid_n) never lowers the
/// estimate. This approximates the supremum from below; it is not exact.
ZetaSandwich zolotarev_estimate(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double r,
                                std::size_t grid_n = kDefaultZetaGrid);

struct RioCheck {
  double w1 = 0.0;
  double bound = 0.0;
  bool ok = false;
};

/// w1 <= 2 (2 zolotarev_upper)^(1/r) + 1e-9.
RioCheck rio_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double r);

struct MetricReport {
  double w1 = 0.0;
  double fm = 0.0;
  ZetaSandwich zeta;
  double r = 1.5;
  std::size_t grid_n = kDefaultZetaGrid;
  bool rio_ok = false;
  bool zeta_finite = true;
};

/// All metrics at once. The seminorm fields are left at zero with
/// zeta_finite = false when masses or means differ.
MetricReport metric_report(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double r,
                           std::size_t grid_n = kDefaultZetaGrid);

}  // namespace kmeasure
