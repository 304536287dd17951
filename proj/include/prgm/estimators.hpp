#pragma once

#include <optional>
#include <string>

#include "prgm/exp_family.hpp"
#include "prgm/priors.hpp"

namespace prgm {

enum class Method { bayes, prgm_closed_form, prgm_root_find, iprgm };

std::string to_string(Method method);

struct Diagnostics {
  int iterations = 0;
  /// |rho(delta_lo, estimate) - rho(delta_hi, estimate)|.
  double equalization_residual = 0.0;
  /// Bounds closer than 1e-10 relative; the midpoint was returned.
  bool degenerate_class = false;
  /// Closed form skipped because H(delta_hi) - H(delta_lo) was ill-conditioned.
  bool root_find_fallback = false;
  std::optional<PriorFlavor> prior_flavor;
};

/// Estimate on the natural-parameter scale with the bracketing Bayes bounds.
struct EstimateReport {
  double estimate = 0.0;
  double delta_lo = 0.0;
  double delta_hi = 0.0;
  double equalized_regret = 0.0;
  Method method = Method::bayes;
  Diagnostics diagnostics;
};

/// Bayes estimate H^{-1}(E[H | x]).
EstimateReport bayes_estimate(const FamilySpec& fam, const ConjugatePrior& prior, double x);

/// Minimizer of max(rho(delta_lo, d), rho(delta_hi, d)): the unique d with
/// equal regret against both bounds, in closed form
///   (delta_hi H(delta_hi) - delta_lo H(delta_lo) - log beta(delta_hi) + log beta(delta_lo))
///     / (H(delta_hi) - H(delta_lo)),
/// with a bisection fallback when the denominator is ill-conditioned.
EstimateReport prgm_from_bounds(const FamilySpec& fam, double delta_lo, double delta_hi);

/// Extreme Bayes estimates over a standard-flavor conjugate box.
struct BayesBounds {
  double delta_lo = 0.0;
  double delta_hi = 0.0;
  double h_lo = 0.0;  // H(delta_lo) = largest corner posterior mean of H
  double h_hi = 0.0;  // H(delta_hi) = smallest
};
BayesBounds conjugate_box_bounds(const FamilySpec& fam, const PriorBox& box, double x);

/// PRGM over a standard conjugate class.
EstimateReport prgm_conjugate_box(const FamilySpec& fam, const PriorBox& box, double x);

/// Intrinsic PRGM over a Jeffreys-conjugate class; invariant under smooth
/// one-to-one reparameterization.
EstimateReport iprgm_jcp_box(const FamilySpec& fam, const PriorBox& box, double x);

/// Smooth one-to-one map eta = forward(theta).
struct Reparameterization {
  std::string label;
  ScalarMap forward;
  ScalarMap inverse;
  /// d theta / d eta, needed to carry densities to the eta scale.
  ScalarMap inverse_derivative;
  /// log |d theta / d eta|, stable where inverse_derivative overflows.
  ScalarMap log_abs_jacobian;
  /// Image of a theta interval.
  std::function<Interval(const Interval&)> image;
};

Reparameterization reciprocal_map();
Reparameterization log_map();
/// eta = -(1/a) log theta, the scale on which the intrinsic loss is LINEX.
Reparameterization neg_log_over_a_map(double a);
Reparameterization affine_map(double a, double b);
/// Binomial logit theta -> success probability p = 1 / (1 + e^theta).
Reparameterization logit_to_p_map();

/// Catalog lookup: "reciprocal", "log", "neg_log_over_a:A", "affine:A,B", "logit_to_p".
Reparameterization parse_reparameterization(std::string_view spec);

struct TransportResult {
  double value = 0.0;
  /// True when the report came from a Jeffreys-conjugate class or prior, for
  /// which the transported value is the estimate on the new scale.
  bool invariance_guaranteed = false;
};

/// forward(report.estimate). Warns when no invariance guarantee applies.
TransportResult transport(const EstimateReport& report, const Reparameterization& map);

}  // namespace prgm
