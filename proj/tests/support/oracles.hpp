#pragma once

// Reference implementations used only by tests. They share no code with the
// library: linear programs go through a dense two-phase simplex, distances
// through quantile couplings, and convolutions through brute-force pair sums.

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "kmeasure/measure.hpp"

namespace oracle {

struct LpRow {
  std::vector<double> a;
  char sense;  // '<', '=' or '>'
  double b;
};

struct LpResult {
  bool feasible = false;
  bool bounded = true;
  double value = 0.0;
  std::vector<double> x;
};

/// maximize c.x subject to rows and x >= 0 (Bland's rule, dense tableau).
LpResult simplex_max(const std::vector<double>& c, const std::vector<LpRow>& rows);

using Atoms = std::vector<std::pair<double, double>>;  // (location, weight)

Atoms atoms_of(const kmeasure::DiscreteMeasure& mu);

/// Optimal transport cost with |x - y| through the transport LP.
double transport_w1(const Atoms& mu, const Atoms& nu);

/// integral over p in (0, 1) of |Q_mu(p) - Q_nu(p)|, exact on atom breakpoints.
double quantile_w1(const Atoms& mu, const Atoms& nu);

/// sup <f, mu - nu> over |f| <= 1, 1-Lipschitz, as an LP on the merged atoms.
double fortet_mourier_lp(const Atoms& mu, const Atoms& nu);

/// Grid estimate of the Zolotarev seminorm as a primal LP: g on the grid with
/// g(0) = 0 and |g_i - g_j| <= |t_i - t_j|^(r-1) for all pairs, objective
/// <f, mu - nu> where f is the integral of the piecewise-linear g.
double zeta_grid_lp(const Atoms& mu, const Atoms& nu, const std::vector<double>& grid, double r);

/// All pair sums (or products) with product weights, merged exactly.
Atoms pair_sums(const Atoms& a, const Atoms& b);
Atoms pair_products(const Atoms& a, const Atoms& b);

double moment(const Atoms& mu, double r);

// Random instances. Weights are positive and sum to 1.
Atoms random_atoms(std::mt19937_64& rng, std::size_t n, double max_location);
/// Locations rescaled so that the mean is exactly representable as 1.
Atoms random_unit_mean(std::mt19937_64& rng, std::size_t n, double max_location);
kmeasure::DiscreteMeasure to_measure(const Atoms& atoms);

}  // namespace oracle
