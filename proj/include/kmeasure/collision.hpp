#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kmeasure/measure.hpp"
#include "kmeasure/mixing_law.hpp"

namespace kmeasure {

struct ModelEntry {
  unsigned index;
  double alpha;
  MixingLaw phi;
};

/// Generates alpha_i for all i >= start from an analytic shape, normalized so
/// that the rule carries `mass` in total.
struct TailRule {
  enum class Kind { Power, Geometric };
  Kind kind = Kind::Power;
  double parameter = 2.0;  // exponent s > 1 (Power) or ratio q in (0, 1) (Geometric)
  unsigned start = 0;      // 0: one past the largest explicit index
  double mass = -1.0;      // negative: 1 - sum of explicit alphas
  // Generated phi_i: uniform on [0, 2/i], or this law rescaled to mean 1/i.
  std::optional<DiscreteMeasure> base_law;

  /// Shape-normalized alpha mass of indices strictly above n (n >= start - 1).
  double tail_fraction(unsigned long long n) const;
  double shape_fraction(unsigned long long i) const;
};

struct ModelSettings {
  double tail_tolerance = 1e-9;
  std::size_t atom_budget = kDefaultAtomBudget;
  std::size_t hard_cap = kDefaultHardCap;
  double r = 1.5;
  std::size_t phi_points = 512;       // discretization size for continuous laws
  std::size_t max_components = 256;   // largest retained index count apply accepts
  std::size_t fine_bins_per_atom = 4;
};

struct Component {
  unsigned index;
  double alpha;      // renormalized over the retained set
  double raw_alpha;  // before renormalization
  MixingLaw phi;
};

/// The collision operator: a mixture over i of i-fold convolution followed by
/// multiplication with an independent draw from phi_i. The alpha series is
/// truncated at the smallest index prefix whose dropped mass is at most
/// tail_tolerance, then renormalized.
class CollisionModel {
 public:
  CollisionModel(std::vector<ModelEntry> entries, std::optional<TailRule> tail_rule = std::nullopt,
                 ModelSettings settings = {});

  /// alpha_2 = 1, phi_2 uniform on [0, 1].
  static CollisionModel tjon_wu(ModelSettings settings = {});

  const ModelSettings& settings() const noexcept { return settings_; }
  std::span<const ModelEntry> entries() const noexcept { return entries_; }
  const std::optional<TailRule>& tail_rule() const noexcept { return tail_rule_; }

  /// The set of indices with positive retained alpha, ascending.
  std::span<const Component> retained() const noexcept { return retained_; }
  const Component* component(unsigned index) const;
  double retained_mass() const noexcept { return retained_mass_; }
  double tail_mass() const noexcept { return tail_mass_; }
  unsigned long long truncation_index() const noexcept { return truncation_index_; }
  /// True when truncation keeps more indices than settings().max_components.
  bool exceeds_component_limit() const noexcept { return component_limit_exceeded_; }

  BudgetOptions budget_options() const;
  DiscreteMeasure phi_atoms(const Component& c) const;

 private:
  void resolve();

  std::vector<ModelEntry> entries_;
  std::optional<TailRule> tail_rule_;
  ModelSettings settings_;
  std::vector<Component> retained_;
  double retained_mass_ = 0.0;
  double tail_mass_ = 0.0;
  double rule_mass_ = 0.0;
  unsigned rule_start_ = 0;
  unsigned long long truncation_index_ = 0;
  bool component_limit_exceeded_ = false;
};

struct Finding {
  enum class Kind {
    AlphaSum,
    NegativeAlpha,
    DuplicateIndex,
    EmptyLambda,
    MeanMismatch,
    RExponent,
    TailRetained,
    ComponentLimit,
    ContractionHypothesis,
    MomentSeriesInfinite,
    InvalidTailRule,
  };
  enum class Severity { Info, Warning, Error };

  Kind kind;
  Severity severity;
  std::string message;
};

std::string_view to_string(Finding::Kind kind);

/// Checks the model invariants. Never throws.
std::vector<Finding> validate_model(const CollisionModel& model);
bool has_errors(std::span<const Finding> findings);

struct ApplyReceipt {
  DiscreteMeasure result;
  double w1_error_bound = 0.0;    // coarsening + truncation
  double coarsening_bound = 0.0;
  double truncation_bound = 0.0;
};

/// phi_i applied to the i-fold convolution of mu. The convolution-stage bound
/// is scaled by m1(phi_i) when passed through the product.
ApplyReceipt apply_component(const CollisionModel& model, unsigned i, const DiscreteMeasure& mu);

/// The full (truncated, renormalized) operator with a final coarsening to the
/// atom budget. The result has total mass 1.
ApplyReceipt apply(const CollisionModel& model, const DiscreteMeasure& mu);

enum class MomentSource { ClosedForm, Discretized };

/// lambda = sum_i alpha_i m_r(phi_i) i over the retained set.
double contraction_factor(const CollisionModel& model, MomentSource source = MomentSource::ClosedForm);
double contraction_factor(const CollisionModel& model, double r,
                          MomentSource source = MomentSource::ClosedForm);

/// sum_i alpha_i m_r(phi_i) i^r m_r(mu), with phi_i as used by apply.
double moment_growth_bound(const CollisionModel& model, double r, double mr_mu);

}  // namespace kmeasure
