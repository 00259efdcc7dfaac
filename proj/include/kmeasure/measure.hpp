#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kmeasure {

inline constexpr double kDefaultMassTolerance = 1e-9;
// Locations closer than this (relative) are treated as one atom.
inline constexpr double kDuplicateRelTolerance = 1e-14;
inline constexpr std::size_t kDefaultHardCap = std::size_t{1} << 20;
inline constexpr std::size_t kDefaultAtomBudget = 4096;

struct MakeOptions {
  bool probability = true;
  double mass_tolerance = kDefaultMassTolerance;
};

/// Finitely-atomic nonnegative measure on [0, inf).
///
/// Atoms are stored sorted by strictly ascending location with strictly
/// positive weights. Instances are immutable; every operation returns a new
/// measure.
class DiscreteMeasure {
 public:
  /// Sorts atoms, merges (near-)duplicate locations by weight addition and
  /// drops zero weights. Throws Error on negative or non-finite input, on an
  /// empty result, and (for probability measures) when the total mass is
  /// outside [1 - tol, 1 + tol].
  static DiscreteMeasure make(std::vector<double> locations, std::vector<double> weights,
                              MakeOptions options = {});
  static DiscreteMeasure dirac(double location);

  std::size_t size() const noexcept { return locations_.size(); }
  std::span<const double> locations() const noexcept { return locations_; }
  std::span<const double> weights() const noexcept { return weights_; }
  double location(std::size_t k) const { return locations_[k]; }
  double weight(std::size_t k) const { return weights_[k]; }
  double min_location() const noexcept { return locations_.front(); }
  double max_location() const noexcept { return locations_.back(); }

  double total_mass() const noexcept { return mass_; }
  double mass_tolerance() const noexcept { return mass_tolerance_; }
  bool is_probability() const noexcept;

  /// Right-continuous distribution function, normalized by the total mass.
  double cdf(double x) const;
  /// Generalized inverse inf{x : cdf(x) >= p}; p must lie in [0, 1].
  double quantile(double p) const;
  /// Normalized cumulative weights, one entry per atom; the last is 1.
  std::span<const double> cumulative() const noexcept { return cumulative_; }

  double moment(double r) const;
  double mean() const { return moment(1.0); }

  friend bool operator==(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    return a.locations_ == b.locations_ && a.weights_ == b.weights_;
  }

 private:
  friend class MeasureBuilder;
  DiscreteMeasure(std::vector<double> locations, std::vector<double> weights,
                  double mass_tolerance);

  std::vector<double> locations_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  double mass_ = 0.0;
  double mass_tolerance_ = kDefaultMassTolerance;
};

/// Internal construction path for atoms that are already sorted ascending
/// (duplicates allowed). Merges near-duplicates and drops zero weights
/// without the validation done by DiscreteMeasure::make.
class MeasureBuilder {
 public:
  static DiscreteMeasure from_sorted(std::vector<double> locations, std::vector<double> weights,
                                     double mass_tolerance = kDefaultMassTolerance);
};

struct CoarsenReceipt {
  DiscreteMeasure result;
  double w1_error_bound = 0.0;
};

struct WeightedMeasure {
  double coefficient;
  const DiscreteMeasure* measure;
};

/// Settings for operations that cap the atom count of their result.
struct BudgetOptions {
  std::size_t budget = kDefaultAtomBudget;
  std::size_t hard_cap = kDefaultHardCap;
  // Pair counts above budget * fine_bins_per_atom are accumulated directly
  // into a fine grid of clusters instead of being materialized.
  std::size_t fine_bins_per_atom = 4;
};

double moment(const DiscreteMeasure& mu, double r);
double variance(const DiscreteMeasure& mu);
double cdf(const DiscreteMeasure& mu, double x);
double quantile(const DiscreteMeasure& mu, double p);
double median(const DiscreteMeasure& mu);
/// Sum of w x over atoms with x >= threshold.
double tail_first_moment(const DiscreteMeasure& mu, double threshold);

/// Exact convolution. Throws AtomOverflow if the pair count exceeds hard_cap.
DiscreteMeasure convolve(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         std::size_t hard_cap = kDefaultHardCap);
/// Exact law of the product of independent variables with laws phi and mu.
DiscreteMeasure scale_product(const DiscreteMeasure& phi, const DiscreteMeasure& mu,
                              std::size_t hard_cap = kDefaultHardCap);
/// Sum of coefficient * measure over the inputs (no coarsening).
DiscreteMeasure mix(std::span<const WeightedMeasure> parts);
/// Divides all weights by the total mass.
DiscreteMeasure renormalized(const DiscreteMeasure& mu);

/// Greedy barycentric merging of contiguous atoms down to at most `budget`
/// atoms. Mass and first moment are preserved; the bound dominates W1 between
/// input and result.
CoarsenReceipt coarsen(const DiscreteMeasure& mu, std::size_t budget);

/// Convolution followed by coarsening to options.budget atoms.
CoarsenReceipt convolve_budgeted(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                 const BudgetOptions& options);
/// scale_product followed by coarsening to options.budget atoms.
CoarsenReceipt scale_product_budgeted(const DiscreteMeasure& phi, const DiscreteMeasure& mu,
                                      const BudgetOptions& options);
/// i-fold convolution power with coarsening after every fold. The bound is the
/// sum of the per-fold bounds (convolution with a fixed law does not increase
/// W1).
CoarsenReceipt convolve_power(const DiscreteMeasure& mu, unsigned i, const BudgetOptions& options);

}  // namespace kmeasure
