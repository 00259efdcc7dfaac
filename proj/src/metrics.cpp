#include "kmeasure/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kmeasure/error.hpp"
#include "transport.hpp"

namespace kmeasure {

namespace {

constexpr double kSeminormTolerance = 1e-9;

// Union of the two supports with normalized point masses and the normalized
// distribution functions just after each location.
struct MergedGrid {
  std::vector<double> x;
  std::vector<double> mu_mass;
  std::vector<double> nu_mass;
  std::vector<double> mu_cdf;
  std::vector<double> nu_cdf;

  std::size_t size() const { return x.size(); }
  double difference(std::size_t k) const { return mu_cdf[k] - nu_cdf[k]; }
};

MergedGrid merge(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  MergedGrid g;
  const std::size_t n = mu.size() + nu.size();
  g.x.reserve(n);
  g.mu_mass.reserve(n);
  g.nu_mass.reserve(n);
  g.mu_cdf.reserve(n);
  g.nu_cdf.reserve(n);
  const double inv_mu = 1.0 / mu.total_mass();
  const double inv_nu = 1.0 / nu.total_mass();
  std::size_t i = 0;
  std::size_t j = 0;
  double fm = 0.0;
  double fn = 0.0;
  while (i < mu.size() || j < nu.size()) {
    const double xm = i < mu.size() ? mu.location(i) : INFINITY;
    const double xn = j < nu.size() ? nu.location(j) : INFINITY;
    const double x = std::min(xm, xn);
    double wm = 0.0;
    double wn = 0.0;
    if (xm == x) {
      wm = mu.weight(i) * inv_mu;
      fm = mu.cumulative()[i];
      ++i;
    }
    if (xn == x) {
      wn = nu.weight(j) * inv_nu;
      fn = nu.cumulative()[j];
      ++j;
    }
    g.x.push_back(x);
    g.mu_mass.push_back(wm);
    g.nu_mass.push_back(wn);
    g.mu_cdf.push_back(fm);
    g.nu_cdf.push_back(fn);
  }
  return g;
}

void require_equal_mass_and_mean(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const double dm = std::abs(mu.total_mass() - nu.total_mass());
  const double d1 = std::abs(mu.mean() - nu.mean());
  if (!(dm <= kSeminormTolerance) || !(d1 <= kSeminormTolerance)) {
    throw Error(ErrorCode::InfiniteSeminorm,
                "seminorm is infinite: mass difference " + std::to_string(dm) +
                    ", first moment difference " + std::to_string(d1));
  }
}

void require_r(double r) {
  if (!(r > 1.0 && r < 2.0)) {
    throw Error(ErrorCode::InvalidArgument, "r must lie in (1, 2), got " + std::to_string(r));
  }
}

// Concave piecewise-linear function on [-1, 1].
struct ConcavePiecewise {
  std::vector<double> x;
  std::vector<double> v;

  double at(double y) const {
    if (y <= x.front()) return v.front();
    if (y >= x.back()) return v.back();
    const auto it = std::upper_bound(x.begin(), x.end(), y);
    const std::size_t k = static_cast<std::size_t>(it - x.begin());
    const double t = (y - x[k - 1]) / (x[k] - x[k - 1]);
    return v[k - 1] + t * (v[k] - v[k - 1]);
  }

  // y -> max over |z - y| <= delta, z in [-1, 1], restricted to [-1, 1].
  void dilate(double delta) {
    if (delta <= 0.0) return;
    const double top = *std::max_element(v.begin(), v.end());
    std::size_t first = 0;
    while (v[first] != top) ++first;
    std::size_t last = v.size() - 1;
    while (v[last] != top) --last;

    ConcavePiecewise wide;
    for (std::size_t k = 0; k <= first; ++k) {
      wide.x.push_back(x[k] - delta);
      wide.v.push_back(v[k]);
    }
    for (std::size_t k = last; k < x.size(); ++k) {
      wide.x.push_back(x[k] + delta);
      wide.v.push_back(v[k]);
    }

    ConcavePiecewise out;
    out.x.push_back(-1.0);
    out.v.push_back(wide.at(-1.0));
    for (std::size_t k = 0; k < wide.x.size(); ++k) {
      if (wide.x[k] > out.x.back() && wide.x[k] < 1.0) {
        out.x.push_back(wide.x[k]);
        out.v.push_back(wide.v[k]);
      }
    }
    out.x.push_back(1.0);
    out.v.push_back(wide.at(1.0));
    *this = std::move(out);
  }

  void add_linear(double slope) {
    for (std::size_t k = 0; k < x.size(); ++k) v[k] += slope * x[k];
    simplify();
  }

  void simplify() {
    std::size_t w = 1;
    for (std::size_t k = 1; k < x.size(); ++k) {
      if (w >= 2 && k + 1 <= x.size()) {
        const double s1 = (v[w - 1] - v[w - 2]) / (x[w - 1] - x[w - 2]);
        const double s2 = (v[k] - v[w - 1]) / (x[k] - x[w - 1]);
        if (std::abs(s1 - s2) <= 1e-15 * (1.0 + std::abs(s1))) --w;
      }
      x[w] = x[k];
      v[w] = v[k];
      ++w;
    }
    x.resize(w);
    v.resize(w);
  }
};

}  // namespace

double wasserstein1(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const MergedGrid g = merge(mu, nu);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < g.size(); ++k) {
    total += std::abs(g.difference(k)) * (g.x[k + 1] - g.x[k]);
  }
  return total;
}

double Potential::operator()(double x) const {
  if (breakpoints.empty()) return 0.0;
  if (x <= breakpoints.front()) return values.front();
  if (x >= breakpoints.back()) return values.back();
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - breakpoints.begin());
  const double t = (x - breakpoints[k - 1]) / (breakpoints[k] - breakpoints[k - 1]);
  return values[k - 1] + t * (values[k] - values[k - 1]);
}

KrResult kr_potential(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const MergedGrid g = merge(mu, nu);
  KrResult out;
  Potential& f = out.potential;
  if (g.x.front() > 0.0) {
    f.breakpoints.push_back(0.0);
    f.values.push_back(0.0);
  }
  double value = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (k > 0) {
      const double d = -g.difference(k - 1);  // F_nu - F_mu on [x_{k-1}, x_k)
      const double slope = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
      value = f.values.back() + slope * (g.x[k] - g.x[k - 1]);
    }
    f.breakpoints.push_back(g.x[k]);
    f.values.push_back(value);
  }
  double pairing = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const std::size_t b = f.breakpoints.size() - g.size() + k;
    pairing += f.values[b] * (g.mu_mass[k] - g.nu_mass[k]);
  }
  out.value = pairing;
  return out;
}

double fortet_mourier(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu == nu) return 0.0;
  const MergedGrid g = merge(mu, nu);
  ConcavePiecewise best;
  const double d0 = g.mu_mass[0] - g.nu_mass[0];
  best.x = {-1.0, 1.0};
  best.v = {-d0, d0};
  for (std::size_t k = 1; k < g.size(); ++k) {
    best.dilate(g.x[k] - g.x[k - 1]);
    best.add_linear(g.mu_mass[k] - g.nu_mass[k]);
  }
  return std::max(0.0, *std::max_element(best.v.begin(), best.v.end()));
}

double zolotarev_upper(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double r) {
  require_r(r);
  require_equal_mass_and_mean(mu, nu);
  const MergedGrid g = merge(mu, nu);
  double total = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double diff = std::abs(g.mu_mass[k] - g.nu_mass[k]);
    if (diff > 0.0) total += diff * std::pow(g.x[k], r);
  }
  return total / r;
}

double zolotarev_upper_cdf(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double r) {
  require_r(r);
  require_equal_mass_and_mean(mu, nu);
  const MergedGrid g = merge(mu, nu);
  double total = 0.0;
  double left = std::pow(g.x[0], r);
  for (std::size_t k = 0; k + 1 < g.size(); ++k) {
    const double right = std::pow(g.x[k + 1], r);
    total += std::abs(g.difference(k)) * (right - left);
    left = right;
  }
  return total / r;
}

double zolotarev_lower(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double r) {
  require_r(r);
  require_equal_mass_and_mean(mu, nu);
  const double a = mu.moment(r) / mu.total_mass();
  const double b = nu.moment(r) / nu.total_mass();
  return std::abs(a - b) / r;
}

namespace {

// Quantile of the averaged distribution function, linearly interpolated
// between (0, 0) and the atoms.
std::vector<double> fill_points(const MergedGrid& g, std::size_t grid_n) {
  std::vector<double> out;
  if (grid_n < 2) return out;
  std::vector<double> knot_x{0.0};
  std::vector<double> knot_p{0.0};
  for (std::size_t k = 0; k < g.size(); ++k) {
    knot_x.push_back(g.x[k]);
    knot_p.push_back(0.5 * (g.mu_cdf[k] + g.nu_cdf[k]));
  }
  for (std::size_t k = 1; k < grid_n; ++k) {
    const double p = static_cast<double>(k) / static_cast<double>(grid_n);
    const auto it = std::lower_bound(knot_p.begin(), knot_p.end(), p);
    if (it == knot_p.end()) continue;
    const std::size_t j = static_cast<std::size_t>(it - knot_p.begin());
    if (j == 0) {
      out.push_back(0.0);
      continue;
    }
    const double t = (p - knot_p[j - 1]) / (knot_p[j] - knot_p[j - 1]);
    out.push_back(knot_x[j - 1] + t * (knot_x[j] - knot_x[j - 1]));
  }
  return out;
}

}  // namespace

ZetaSandwich zolotarev_estimate(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double r,
                                std::size_t grid_n) {
  ZetaSandwich out;
  out.lower = zolotarev_lower(mu, nu, r);
  out.upper = std::min(zolotarev_upper(mu, nu, r), zolotarev_upper_cdf(mu, nu, r));
  if (mu == nu) {
    out = {0.0, 0.0, 0.0, 1};
    return out;
  }
  const MergedGrid g = merge(mu, nu);

  std::vector<double> grid{0.0};
  if (g.size() <= kZetaAtomGridLimit) {
    grid.insert(grid.end(), g.x.begin(), g.x.end());
  } else {
    grid.push_back(g.x.back());
  }
  const std::vector<double> fill = fill_points(g, grid_n);
  grid.insert(grid.end(), fill.begin(), fill.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const std::size_t m = grid.size();
  out.grid_size = m;

  // coefficient[j] = integral of hat_j * (F_nu - F_mu), with F's piecewise
  // constant between atoms and zero beyond the largest one.
  std::vector<double> coefficient(m, 0.0);
  std::size_t cell = 0;
  for (std::size_t k = 0; k + 1 < g.size(); ++k) {
    const double d = -g.difference(k);
    double u = g.x[k];
    const double end = g.x[k + 1];
    while (u < end) {
      while (cell + 1 < m && grid[cell + 1] <= u) ++cell;
      const double v = std::min(end, grid[cell + 1]);
      const double h = grid[cell + 1] - grid[cell];
      const double a = u - grid[cell];
      const double b = v - grid[cell];
      const double rising = (b * b - a * a) / (2.0 * h);
      coefficient[cell + 1] += d * rising;
      coefficient[cell] += d * ((v - u) - rising);
      u = v;
    }
  }
  double rest = 0.0;
  for (std::size_t j = 1; j < m; ++j) rest += coefficient[j];
  coefficient[0] = -rest;

  std::vector<double> supply;
  std::vector<double> demand;
  std::vector<double> at_supply;
  std::vector<double> at_demand;
  for (std::size_t j = 0; j < m; ++j) {
    if (coefficient[j] > 0.0) {
      supply.push_back(coefficient[j]);
      at_supply.push_back(grid[j]);
    } else if (coefficient[j] < 0.0) {
      demand.push_back(-coefficient[j]);
      at_demand.push_back(grid[j]);
    }
  }
  const double exponent = r - 1.0;
  const double value = detail::min_cost_transport(supply, demand, [&](std::size_t s, std::size_t t) {
    return std::pow(std::abs(at_supply[s] - at_demand[t]), exponent);
  });
  out.estimate = std::clamp(std::max(value, out.lower), out.lower, out.upper);
  return out;
}

RioCheck rio_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double r) {
  RioCheck out;
  const double upper = zolotarev_upper(mu, nu, r);
  out.w1 = wasserstein1(mu, nu);
  out.bound = 2.0 * std::pow(2.0 * upper, 1.0 / r);
  out.ok = out.w1 <= out.bound + 1e-9;
  return out;
}

MetricReport metric_report(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double r,
                           std::size_t grid_n) {
  MetricReport out;
  out.r = r;
  out.grid_n = grid_n;
  out.w1 = wasserstein1(mu, nu);
  out.fm = fortet_mourier(mu, nu);
  try {
    out.zeta = zolotarev_estimate(mu, nu, r, grid_n);
    out.rio_ok = rio_check(mu, nu, r).ok;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InfiniteSeminorm) throw;
    out.zeta_finite = false;
  }
  return out;
}

}  // namespace kmeasure
