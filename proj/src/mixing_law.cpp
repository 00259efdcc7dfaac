#include "kmeasure/mixing_law.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "kmeasure/error.hpp"

namespace kmeasure {

MixingLaw MixingLaw::atoms(DiscreteMeasure law, unsigned index) {
  if (index == 0) throw Error(ErrorCode::InvalidArgument, "mixing law index must be >= 1");
  MixingLaw out(Kind::Atoms, index);
  out.lo_ = law.min_location();
  out.hi_ = law.max_location();
  out.atoms_.emplace(std::move(law));
  return out;
}

MixingLaw MixingLaw::uniform(double lo, double hi, unsigned index) {
  if (index == 0) throw Error(ErrorCode::InvalidArgument, "mixing law index must be >= 1");
  if (!(lo >= 0.0) || !(hi > lo) || !std::isfinite(hi)) {
    throw Error(ErrorCode::InvalidArgument,
                "uniform law needs 0 <= lo < hi, got [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "]");
  }
  MixingLaw out(Kind::Uniform, index);
  out.lo_ = lo;
  out.hi_ = hi;
  return out;
}

double MixingLaw::moment(double r) const {
  if (kind_ == Kind::Atoms) return atoms_->moment(r);
  // (hi^{r+1} - lo^{r+1}) / ((r + 1)(hi - lo))
  return (std::pow(hi_, r + 1.0) - std::pow(lo_, r + 1.0)) / ((r + 1.0) * (hi_ - lo_));
}

double MixingLaw::quantile(double p) const {
  if (kind_ == Kind::Atoms) return atoms_->quantile(p);
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::POutOfRange, "p = " + std::to_string(p));
  return lo_ + p * (hi_ - lo_);
}

DiscreteMeasure discretize_quantiles(const std::function<double(double)>& quantile_fn,
                                     double exact_mean, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "discretization needs n >= 1");
  std::vector<double> locations(n);
  std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    locations[k] = quantile_fn((static_cast<double>(k) + 0.5) / static_cast<double>(n));
  }
  double mean = 0.0;
  for (std::size_t k = 0; k < n; ++k) mean += weights[k] * locations[k];
  locations.back() += (exact_mean - mean) / weights.back();
  if (n > 1 && locations.back() < locations[n - 2]) {
    throw Error(ErrorCode::InvalidArgument, "mean correction would reorder atoms");
  }
  return DiscreteMeasure::make(std::move(locations), std::move(weights));
}

DiscreteMeasure discretize(const MixingLaw& law, std::size_t n) {
  if (law.kind() == MixingLaw::Kind::Atoms) return *law.atom_law();
  const double lo = law.lo();
  const double hi = law.hi();
  return discretize_quantiles([lo, hi](double p) { return lo + p * (hi - lo); },
                              0.5 * (lo + hi), n);
}

DiscreteMeasure discretize_exponential(double mean, std::size_t n) {
  if (!(mean > 0.0)) throw Error(ErrorCode::InvalidArgument, "exponential mean must be > 0");
  return discretize_quantiles([mean](double p) { return -mean * std::log1p(-p); }, mean, n);
}

}  // namespace kmeasure
