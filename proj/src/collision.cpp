#include "kmeasure/collision.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <utility>

#include "kmeasure/error.hpp"
#include "kmeasure/parallel.hpp"

namespace kmeasure {

namespace {

constexpr double kMeanTolerance = 1e-12;
constexpr unsigned long long kMaxTruncationIndex = 1ULL << 40;

// sum_{j >= m} j^{-s} for m >= 1, s > 1: direct terms, then Euler-Maclaurin.
double power_tail_from(unsigned long long m, double s) {
  constexpr unsigned long long direct = 16;
  double total = 0.0;
  for (unsigned long long j = m; j < m + direct; ++j) total += std::pow(static_cast<double>(j), -s);
  const double a = static_cast<double>(m + direct);
  const double fa = std::pow(a, -s);
  total += a * fa / (s - 1.0);                                        // integral from a
  total += 0.5 * fa;                                                  // f(a) / 2
  total += s * fa / a / 12.0;                                         // -f'(a) / 12
  total -= s * (s + 1.0) * (s + 2.0) * fa / (a * a * a) / 720.0;      // f'''(a) / 720
  return total;
}

DiscreteMeasure rescaled_to_mean(const DiscreteMeasure& base, double target_mean) {
  const double factor = target_mean / base.mean();
  std::vector<double> locations(base.locations().begin(), base.locations().end());
  for (double& x : locations) x *= factor;
  return DiscreteMeasure::make(std::move(locations),
                               std::vector<double>(base.weights().begin(), base.weights().end()));
}

}  // namespace

double TailRule::shape_fraction(unsigned long long i) const {
  if (i < start) return 0.0;
  if (kind == Kind::Geometric) {
    return (1.0 - parameter) * std::pow(parameter, static_cast<double>(i - start));
  }
  return std::pow(static_cast<double>(i), -parameter) / power_tail_from(start, parameter);
}

double TailRule::tail_fraction(unsigned long long n) const {
  if (n + 1 <= start) return 1.0;
  if (kind == Kind::Geometric) return std::pow(parameter, static_cast<double>(n + 1 - start));
  return power_tail_from(n + 1, parameter) / power_tail_from(start, parameter);
}

CollisionModel::CollisionModel(std::vector<ModelEntry> entries, std::optional<TailRule> tail_rule,
                               ModelSettings settings)
    : entries_(std::move(entries)), tail_rule_(std::move(tail_rule)), settings_(settings) {
  resolve();
}

CollisionModel CollisionModel::tjon_wu(ModelSettings settings) {
  return CollisionModel({ModelEntry{2, 1.0, MixingLaw::uniform(0.0, 1.0, 2)}}, std::nullopt,
                        settings);
}

namespace {

bool tail_rule_usable(const TailRule& rule) {
  if (rule.kind == TailRule::Kind::Power) return rule.parameter > 1.0 && std::isfinite(rule.parameter);
  return rule.parameter > 0.0 && rule.parameter < 1.0;
}

}  // namespace

void CollisionModel::resolve() {
  std::vector<const ModelEntry*> explicit_entries;
  double explicit_mass = 0.0;
  unsigned max_index = 0;
  for (const auto& e : entries_) {
    max_index = std::max(max_index, e.index);
    if (e.alpha > 0.0 && e.index > 0) {
      explicit_entries.push_back(&e);
      explicit_mass += e.alpha;
    }
  }
  std::stable_sort(explicit_entries.begin(), explicit_entries.end(),
                   [](const ModelEntry* a, const ModelEntry* b) { return a->index < b->index; });

  const bool use_rule = tail_rule_ && tail_rule_usable(*tail_rule_);
  if (use_rule) {
    rule_start_ = tail_rule_->start != 0 ? tail_rule_->start : max_index + 1;
    rule_mass_ = tail_rule_->mass >= 0.0 ? tail_rule_->mass : std::max(0.0, 1.0 - explicit_mass);
  }
  const double total = explicit_mass + rule_mass_;

  // Mass carried by indices strictly above n.
  auto remaining = [&](unsigned long long n) {
    double mass = 0.0;
    for (const auto* e : explicit_entries) {
      if (e->index > n) mass += e->alpha;
    }
    if (use_rule && rule_mass_ > 0.0) {
      TailRule rule = *tail_rule_;
      rule.start = rule_start_;
      mass += rule_mass_ * rule.tail_fraction(n);
    }
    return mass;
  };

  const double eps = settings_.tail_tolerance;
  unsigned long long lo = 0;
  unsigned long long hi = kMaxTruncationIndex;
  if (remaining(hi) > eps) {
    lo = hi;
  } else {
    while (lo < hi) {
      const unsigned long long mid = lo + (hi - lo) / 2;
      if (remaining(mid) <= eps) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
  }
  truncation_index_ = lo;
  tail_mass_ = remaining(truncation_index_);

  retained_.clear();
  retained_mass_ = 0.0;
  component_limit_exceeded_ = false;
  std::size_t generated = 0;
  if (use_rule && rule_mass_ > 0.0 && truncation_index_ >= rule_start_) {
    generated = static_cast<std::size_t>(truncation_index_ - rule_start_ + 1);
  }
  if (explicit_entries.size() + generated > settings_.max_components) {
    component_limit_exceeded_ = true;
    return;
  }

  std::vector<Component> components;
  for (const auto* e : explicit_entries) {
    if (e->index <= truncation_index_) components.push_back({e->index, 0.0, e->alpha, e->phi});
  }
  if (generated > 0) {
    TailRule rule = *tail_rule_;
    rule.start = rule_start_;
    for (unsigned long long i = rule_start_; i <= truncation_index_; ++i) {
      const double alpha = rule_mass_ * rule.shape_fraction(i);
      if (!(alpha > 0.0)) continue;
      const auto index = static_cast<unsigned>(i);
      MixingLaw phi = rule.base_law
                          ? MixingLaw::atoms(rescaled_to_mean(*rule.base_law, 1.0 / index), index)
                          : MixingLaw::standard_uniform(index);
      components.push_back({index, 0.0, alpha, std::move(phi)});
    }
  }
  std::stable_sort(components.begin(), components.end(),
                   [](const Component& a, const Component& b) { return a.index < b.index; });
  for (const auto& c : components) retained_mass_ += c.raw_alpha;
  for (auto& c : components) c.alpha = c.raw_alpha / retained_mass_;
  retained_ = std::move(components);
  (void)total;
}

const Component* CollisionModel::component(unsigned index) const {
  for (const auto& c : retained_) {
    if (c.index == index) return &c;
  }
  return nullptr;
}

BudgetOptions CollisionModel::budget_options() const {
  return {settings_.atom_budget, settings_.hard_cap, settings_.fine_bins_per_atom};
}

DiscreteMeasure CollisionModel::phi_atoms(const Component& c) const {
  return discretize(c.phi, settings_.phi_points);
}

std::string_view to_string(Finding::Kind kind) {
  switch (kind) {
    case Finding::Kind::AlphaSum: return "AlphaSum";
    case Finding::Kind::NegativeAlpha: return "NegativeAlpha";
    case Finding::Kind::DuplicateIndex: return "DuplicateIndex";
    case Finding::Kind::EmptyLambda: return "EmptyLambda";
    case Finding::Kind::MeanMismatch: return "MeanMismatch";
    case Finding::Kind::RExponent: return "RExponent";
    case Finding::Kind::TailRetained: return "TailRetained";
    case Finding::Kind::ComponentLimit: return "ComponentLimit";
    case Finding::Kind::ContractionHypothesis: return "ContractionHypothesis";
    case Finding::Kind::MomentSeriesInfinite: return "MomentSeriesInfinite";
    case Finding::Kind::InvalidTailRule: return "InvalidTailRule";
  }
  return "Unknown";
}

bool has_errors(std::span<const Finding> findings) {
  return std::any_of(findings.begin(), findings.end(), [](const Finding& f) {
    return f.severity == Finding::Severity::Error;
  });
}

std::vector<Finding> validate_model(const CollisionModel& model) {
  using K = Finding::Kind;
  using S = Finding::Severity;
  std::vector<Finding> findings;
  auto add = [&](K kind, S severity, const std::string& message) {
    findings.push_back({kind, severity, message});
  };

  const auto& settings = model.settings();
  if (!(settings.r > 1.0 && settings.r < 2.0)) {
    add(K::RExponent, S::Error, "r = " + std::to_string(settings.r) + " is outside (1, 2)");
  }

  std::map<unsigned, int> seen;
  double explicit_mass = 0.0;
  for (const auto& e : model.entries()) {
    if (e.index == 0) add(K::DuplicateIndex, S::Error, "index 0 is not a collision order");
    if (++seen[e.index] == 2) {
      add(K::DuplicateIndex, S::Error, "index " + std::to_string(e.index) + " listed twice");
    }
    if (e.alpha < 0.0 || !std::isfinite(e.alpha)) {
      add(K::NegativeAlpha, S::Error,
          "alpha_" + std::to_string(e.index) + " = " + std::to_string(e.alpha));
    } else {
      explicit_mass += e.alpha;
    }
    if (e.phi.index() != e.index) {
      add(K::MeanMismatch, S::Error,
          "phi for index " + std::to_string(e.index) + " was built for index " +
              std::to_string(e.phi.index()));
    }
  }

  double rule_mass = 0.0;
  if (const auto& rule = model.tail_rule()) {
    if (!tail_rule_usable(*rule)) {
      add(K::InvalidTailRule, S::Error, "tail rule parameter out of range");
    } else {
      rule_mass = rule->mass >= 0.0 ? rule->mass : std::max(0.0, 1.0 - explicit_mass);
      for (const auto& e : model.entries()) {
        const unsigned start = rule->start;
        if (start != 0 && e.index >= start) {
          add(K::DuplicateIndex, S::Error,
              "index " + std::to_string(e.index) + " is also generated by the tail rule");
        }
      }
    }
  }
  const double total = explicit_mass + rule_mass;
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "alphas sum to " << total << (model.tail_rule() ? "" : " and no tail rule is given");
    add(K::AlphaSum, S::Error, msg.str());
  }

  if (model.exceeds_component_limit()) {
    add(K::ComponentLimit, S::Error,
        "truncation keeps indices up to " + std::to_string(model.truncation_index()) +
            ", more than max_components = " + std::to_string(settings.max_components));
  }
  if (model.tail_mass() > 0.0) {
    std::ostringstream msg;
    msg << "retained indices <= " << model.truncation_index() << ", dropped alpha mass "
        << model.tail_mass() << " (tolerance " << settings.tail_tolerance << ")";
    add(K::TailRetained, S::Info, msg.str());
  }
  if (model.retained().empty()) {
    if (!model.exceeds_component_limit()) add(K::EmptyLambda, S::Error, "no index has alpha > 0");
    return findings;
  }

  for (const auto& c : model.retained()) {
    const double target = 1.0 / c.index;
    const double mean = c.phi.mean();
    if (!(std::abs(mean - target) <= kMeanTolerance)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "m1(phi_" << c.index << ") = " << mean << ", expected " << target;
      add(K::MeanMismatch, S::Error, msg.str());
    }
  }

  if (settings.r > 1.0 && settings.r < 2.0) {
    std::vector<unsigned> violating;
    double series = 0.0;
    for (const auto& c : model.retained()) {
      const double mr = c.phi.moment(settings.r);
      if (!(mr < 1.0 / c.index)) violating.push_back(c.index);
      series += c.alpha * mr * std::pow(static_cast<double>(c.index), settings.r);
    }
    if (!violating.empty()) {
      std::ostringstream msg;
      msg << "m_r(phi_i) >= 1/i for i in {";
      for (std::size_t k = 0; k < violating.size(); ++k) msg << (k ? ", " : "") << violating[k];
      msg << "}; lambda = " << contraction_factor(model) << ", strict contraction not guaranteed";
      add(K::ContractionHypothesis, S::Warning, msg.str());
    }
    if (!std::isfinite(series)) {
      add(K::MomentSeriesInfinite, S::Warning, "sum alpha_i m_r(phi_i) i^r is not finite");
    }
  }
  return findings;
}

namespace {

void require_usable(const CollisionModel& model) {
  if (model.exceeds_component_limit()) {
    throw Error(ErrorCode::ModelInvalid, "retained index set exceeds max_components");
  }
  if (model.retained().empty()) throw Error(ErrorCode::ModelInvalid, "empty index set");
}

void require_probability(const DiscreteMeasure& mu) {
  if (!mu.is_probability()) {
    throw Error(ErrorCode::MassOutOfTolerance,
                "operator input has mass " + std::to_string(mu.total_mass()));
  }
}

ApplyReceipt scale_component(const CollisionModel& model, const Component& c,
                             const CoarsenReceipt& power) {
  const DiscreteMeasure phi = model.phi_atoms(c);
  CoarsenReceipt scaled = scale_product_budgeted(phi, power.result, model.budget_options());
  const double bound = phi.mean() * power.w1_error_bound + scaled.w1_error_bound;
  return {std::move(scaled.result), bound, bound, 0.0};
}

}  // namespace

ApplyReceipt apply_component(const CollisionModel& model, unsigned i, const DiscreteMeasure& mu) {
  require_usable(model);
  require_probability(mu);
  const Component* c = model.component(i);
  if (c == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "index " + std::to_string(i) + " is not retained");
  }
  return scale_component(model, *c, convolve_power(mu, i, model.budget_options()));
}

ApplyReceipt apply(const CollisionModel& model, const DiscreteMeasure& mu) {
  require_usable(model);
  require_probability(mu);
  const auto components = model.retained();
  const BudgetOptions options = model.budget_options();

  // Convolution powers are shared between components: power_k = power_{k-1} * mu.
  std::vector<std::optional<CoarsenReceipt>> powers(components.size());
  {
    std::optional<CoarsenReceipt> current;
    unsigned current_index = 0;
    for (std::size_t n = 0; n < components.size(); ++n) {
      const unsigned target = components[n].index;
      while (current_index < target) {
        if (current_index == 0) {
          current.emplace(CoarsenReceipt{mu, 0.0});
        } else if (current_index == 1) {
          current.emplace(convolve_budgeted(mu, mu, options));
        } else {
          CoarsenReceipt next = convolve_budgeted(current->result, mu, options);
          next.w1_error_bound += current->w1_error_bound;
          current.emplace(std::move(next));
        }
        ++current_index;
      }
      powers[n] = current;
    }
  }

  std::vector<std::optional<ApplyReceipt>> parts(components.size());
  parallel::for_each_task(components.size(), [&](std::size_t n) {
    parts[n].emplace(scale_component(model, components[n], *powers[n]));
  });
  powers.clear();

  std::vector<WeightedMeasure> weighted;
  double bound = 0.0;
  for (std::size_t n = 0; n < components.size(); ++n) {
    weighted.push_back({components[n].alpha, &parts[n]->result});
    bound += components[n].alpha * parts[n]->w1_error_bound;
  }
  CoarsenReceipt mixed = coarsen(weighted.size() == 1 ? parts[0]->result : mix(weighted),
                                 options.budget);
  bound += mixed.w1_error_bound;

  ApplyReceipt out{renormalized(mixed.result), 0.0, bound, 2.0 * model.tail_mass()};
  out.w1_error_bound = out.coarsening_bound + out.truncation_bound;
  return out;
}

double contraction_factor(const CollisionModel& model, MomentSource source) {
  return contraction_factor(model, model.settings().r, source);
}

double contraction_factor(const CollisionModel& model, double r, MomentSource source) {
  double lambda = 0.0;
  for (const auto& c : model.retained()) {
    const double mr =
        source == MomentSource::ClosedForm ? c.phi.moment(r) : model.phi_atoms(c).moment(r);
    lambda += c.alpha * mr * c.index;
  }
  return lambda;
}

double moment_growth_bound(const CollisionModel& model, double r, double mr_mu) {
  double factor = 0.0;
  for (const auto& c : model.retained()) {
    factor += c.alpha * model.phi_atoms(c).moment(r) * std::pow(static_cast<double>(c.index), r);
  }
  return factor * mr_mu;
}

}  // namespace kmeasure
