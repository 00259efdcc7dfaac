#include "kmeasure/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "cluster.hpp"
#include "kmeasure/error.hpp"

namespace kmeasure {

namespace {

bool near_duplicate(double a, double b) {
  return b - a <= kDuplicateRelTolerance * std::max(std::abs(a), std::abs(b));
}

void check_pair_count(std::size_t n, std::size_t m, std::size_t hard_cap) {
  if (m != 0 && n > hard_cap / m) {
    throw Error(ErrorCode::AtomOverflow, std::to_string(n) + " x " + std::to_string(m) +
                                             " atoms exceeds hard cap " + std::to_string(hard_cap));
  }
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<double> locations, std::vector<double> weights,
                                 double mass_tolerance)
    : locations_(std::move(locations)),
      weights_(std::move(weights)),
      mass_tolerance_(mass_tolerance) {
  cumulative_.resize(weights_.size());
  double running = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    running += weights_[k];
    cumulative_[k] = running;
  }
  mass_ = running;
  for (double& c : cumulative_) c /= mass_;
  cumulative_.back() = 1.0;
}

DiscreteMeasure DiscreteMeasure::make(std::vector<double> locations, std::vector<double> weights,
                                      MakeOptions options) {
  if (locations.size() != weights.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(locations.size()) + " locations vs " +
                                               std::to_string(weights.size()) + " weights");
  }
  for (std::size_t k = 0; k < locations.size(); ++k) {
    if (!std::isfinite(locations[k]) || !std::isfinite(weights[k])) {
      throw Error(ErrorCode::NonFinite, "atom " + std::to_string(k));
    }
    if (locations[k] < 0.0) {
      throw Error(ErrorCode::NegativeLocation, "atom " + std::to_string(k) + " at " +
                                                   std::to_string(locations[k]));
    }
    if (weights[k] < 0.0) {
      throw Error(ErrorCode::NegativeWeight, "atom " + std::to_string(k) + " has weight " +
                                                 std::to_string(weights[k]));
    }
  }

  std::vector<std::size_t> order(locations.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return locations[a] < locations[b]; });
  std::vector<double> sorted_locations(order.size());
  std::vector<double> sorted_weights(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    sorted_locations[k] = locations[order[k]];
    sorted_weights[k] = weights[order[k]];
  }

  DiscreteMeasure mu = MeasureBuilder::from_sorted(std::move(sorted_locations),
                                                   std::move(sorted_weights),
                                                   options.mass_tolerance);
  if (options.probability && !mu.is_probability()) {
    throw Error(ErrorCode::MassOutOfTolerance,
                "total mass " + std::to_string(mu.total_mass()) + " is not 1");
  }
  return mu;
}

DiscreteMeasure DiscreteMeasure::dirac(double location) { return make({location}, {1.0}); }

bool DiscreteMeasure::is_probability() const noexcept {
  return std::abs(mass_ - 1.0) <= mass_tolerance_;
}

double DiscreteMeasure::cdf(double x) const {
  const auto it = std::upper_bound(locations_.begin(), locations_.end(), x);
  if (it == locations_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - locations_.begin()) - 1];
}

double DiscreteMeasure::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::POutOfRange, "p = " + std::to_string(p));
  }
  const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), p);
  const auto k = std::min(static_cast<std::size_t>(it - cumulative_.begin()), size() - 1);
  return locations_[k];
}

double DiscreteMeasure::moment(double r) const {
  double total = 0.0;
  if (r == 1.0) {
    for (std::size_t k = 0; k < size(); ++k) total += weights_[k] * locations_[k];
  } else if (r == 0.0) {
    return mass_;
  } else {
    for (std::size_t k = 0; k < size(); ++k) total += weights_[k] * std::pow(locations_[k], r);
  }
  return total;
}

DiscreteMeasure MeasureBuilder::from_sorted(std::vector<double> locations,
                                            std::vector<double> weights, double mass_tolerance) {
  std::size_t out = 0;
  std::size_t k = 0;
  const std::size_t n = locations.size();
  while (k < n) {
    if (weights[k] == 0.0) {
      ++k;
      continue;
    }
    const double lo = locations[k];
    double hi = lo;
    double weight = weights[k];
    double moment = weights[k] * locations[k];
    std::size_t j = k + 1;
    for (; j < n && near_duplicate(lo, locations[j]); ++j) {
      weight += weights[j];
      moment += weights[j] * locations[j];
      hi = locations[j];
    }
    double location = lo;
    if (hi > lo && weight > 0.0) location = std::clamp(moment / weight, lo, hi);
    locations[out] = location;
    weights[out] = weight;
    ++out;
    k = j;
  }
  if (out == 0) throw Error(ErrorCode::EmptyMeasure, "no atoms with positive weight");
  locations.resize(out);
  weights.resize(out);
  return DiscreteMeasure(std::move(locations), std::move(weights), mass_tolerance);
}

double moment(const DiscreteMeasure& mu, double r) { return mu.moment(r); }

double variance(const DiscreteMeasure& mu) {
  const double m = mu.moment(1.0) / mu.total_mass();
  double total = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const double d = mu.location(k) - m;
    total += mu.weight(k) * d * d;
  }
  return total / mu.total_mass();
}

double cdf(const DiscreteMeasure& mu, double x) { return mu.cdf(x); }

double quantile(const DiscreteMeasure& mu, double p) { return mu.quantile(p); }

double median(const DiscreteMeasure& mu) { return mu.quantile(0.5); }

double tail_first_moment(const DiscreteMeasure& mu, double threshold) {
  double total = 0.0;
  const auto locs = mu.locations();
  const auto first = std::lower_bound(locs.begin(), locs.end(), threshold) - locs.begin();
  for (auto k = static_cast<std::size_t>(first); k < mu.size(); ++k) {
    total += mu.weight(k) * mu.location(k);
  }
  return total;
}

namespace {

template <typename Op>
DiscreteMeasure pairwise_exact(const DiscreteMeasure& a, const DiscreteMeasure& b,
                               std::size_t hard_cap, Op op) {
  check_pair_count(a.size(), b.size(), hard_cap);
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(a.size() * b.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    for (std::size_t k = 0; k < b.size(); ++k) {
      atoms.emplace_back(op(a.location(j), b.location(k)), a.weight(j) * b.weight(k));
    }
  }
  std::sort(atoms.begin(), atoms.end());
  std::vector<double> locations(atoms.size());
  std::vector<double> weights(atoms.size());
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    locations[k] = atoms[k].first;
    weights[k] = atoms[k].second;
  }
  return MeasureBuilder::from_sorted(std::move(locations), std::move(weights),
                                     std::max(a.mass_tolerance(), b.mass_tolerance()));
}

}  // namespace

DiscreteMeasure convolve(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         std::size_t hard_cap) {
  return pairwise_exact(mu, nu, hard_cap, [](double x, double y) { return x + y; });
}

DiscreteMeasure scale_product(const DiscreteMeasure& phi, const DiscreteMeasure& mu,
                              std::size_t hard_cap) {
  return pairwise_exact(phi, mu, hard_cap, [](double z, double x) { return z * x; });
}

DiscreteMeasure mix(std::span<const WeightedMeasure> parts) {
  std::vector<std::pair<double, double>> atoms;
  double tolerance = kDefaultMassTolerance;
  for (const auto& part : parts) {
    if (!(part.coefficient >= 0.0) || !std::isfinite(part.coefficient)) {
      throw Error(ErrorCode::NegativeWeight, "mixture coefficient " +
                                                 std::to_string(part.coefficient));
    }
    if (part.coefficient == 0.0) continue;
    tolerance = std::max(tolerance, part.measure->mass_tolerance());
    for (std::size_t k = 0; k < part.measure->size(); ++k) {
      atoms.emplace_back(part.measure->location(k), part.coefficient * part.measure->weight(k));
    }
  }
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<double> locations(atoms.size());
  std::vector<double> weights(atoms.size());
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    locations[k] = atoms[k].first;
    weights[k] = atoms[k].second;
  }
  return MeasureBuilder::from_sorted(std::move(locations), std::move(weights), tolerance);
}

DiscreteMeasure renormalized(const DiscreteMeasure& mu) {
  const double mass = mu.total_mass();
  std::vector<double> locations(mu.locations().begin(), mu.locations().end());
  std::vector<double> weights(mu.weights().begin(), mu.weights().end());
  for (double& w : weights) w /= mass;
  return MeasureBuilder::from_sorted(std::move(locations), std::move(weights),
                                     mu.mass_tolerance());
}

CoarsenReceipt coarsen(const DiscreteMeasure& mu, std::size_t budget) {
  if (budget == 0) throw Error(ErrorCode::InvalidArgument, "coarsening budget must be >= 1");
  if (mu.size() <= budget) return {mu, 0.0};
  return detail::merge_clusters(detail::clusters_of(mu), budget, mu.mass_tolerance());
}

namespace {

CoarsenReceipt pairwise_budgeted(const DiscreteMeasure& a, const DiscreteMeasure& b,
                                 const BudgetOptions& options, detail::PairOp op,
                                 bool symmetric) {
  if (options.budget == 0) throw Error(ErrorCode::InvalidArgument, "atom budget must be >= 1");
  if (options.budget > options.hard_cap) {
    throw Error(ErrorCode::AtomOverflow, "atom budget exceeds hard cap");
  }
  const double pairs = static_cast<double>(a.size()) * static_cast<double>(b.size());
  const std::size_t fine_bins = options.budget * std::max<std::size_t>(options.fine_bins_per_atom, 1);
  const double exact_limit = static_cast<double>(std::min(options.hard_cap, fine_bins));
  if (pairs <= exact_limit) {
    const DiscreteMeasure exact = op == detail::PairOp::Sum ? convolve(a, b, options.hard_cap)
                                                            : scale_product(a, b, options.hard_cap);
    return coarsen(exact, options.budget);
  }
  return detail::merge_clusters(detail::binned_pairs(a, b, op, fine_bins, symmetric),
                                options.budget,
                                std::max(a.mass_tolerance(), b.mass_tolerance()));
}

}  // namespace

CoarsenReceipt convolve_budgeted(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                 const BudgetOptions& options) {
  return pairwise_budgeted(mu, nu, options, detail::PairOp::Sum, &mu == &nu);
}

CoarsenReceipt scale_product_budgeted(const DiscreteMeasure& phi, const DiscreteMeasure& mu,
                                      const BudgetOptions& options) {
  return pairwise_budgeted(phi, mu, options, detail::PairOp::Product, false);
}

CoarsenReceipt convolve_power(const DiscreteMeasure& mu, unsigned i,
                              const BudgetOptions& options) {
  if (i == 0) throw Error(ErrorCode::InvalidArgument, "convolution power must be >= 1");
  if (i == 1) return {mu, 0.0};
  CoarsenReceipt power = convolve_budgeted(mu, mu, options);
  for (unsigned k = 3; k <= i; ++k) {
    CoarsenReceipt next = convolve_budgeted(power.result, mu, options);
    power.result = std::move(next.result);
    power.w1_error_bound += next.w1_error_bound;
  }
  return power;
}

}  // namespace kmeasure
