#pragma once

#include <functional>
#include <optional>

#include "kmeasure/measure.hpp"

namespace kmeasure {

/// Redistribution law serving collision order `index`: either an explicit
/// atomic law or a uniform law on [lo, hi]. Continuous laws are turned into
/// atoms once, by `discretize`.
class MixingLaw {
 public:
  enum class Kind { Atoms, Uniform };

  static MixingLaw atoms(DiscreteMeasure law, unsigned index);
  static MixingLaw uniform(double lo, double hi, unsigned index);
  /// The default family: uniform on [0, 2/i], so that the mean is 1/i.
  static MixingLaw standard_uniform(unsigned index) { return uniform(0.0, 2.0 / index, index); }

  Kind kind() const noexcept { return kind_; }
  unsigned index() const noexcept { return index_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  const DiscreteMeasure* atom_law() const noexcept { return atoms_ ? &*atoms_ : nullptr; }

  /// Closed form for uniform laws, exact sum for atomic ones.
  double moment(double r) const;
  double mean() const { return moment(1.0); }
  double quantile(double p) const;

 private:
  MixingLaw(Kind kind, unsigned index) : kind_(kind), index_(index) {}

  Kind kind_;
  unsigned index_;
  double lo_ = 0.0;
  double hi_ = 0.0;
  std::optional<DiscreteMeasure> atoms_;
};

/// Quantile-midpoint scheme: atoms at quantile((k + 1/2) / n) with weight
/// 1/n, after which the last atom is shifted so that the first moment equals
/// `exact_mean`.
DiscreteMeasure discretize_quantiles(const std::function<double(double)>& quantile_fn,
                                     double exact_mean, std::size_t n);

/// Atomic laws are returned unchanged; uniform laws use the midpoint scheme.
DiscreteMeasure discretize(const MixingLaw& law, std::size_t n);

/// Exponential law with the given mean, midpoint-discretized and mean-corrected.
DiscreteMeasure discretize_exponential(double mean, std::size_t n);

}  // namespace kmeasure
