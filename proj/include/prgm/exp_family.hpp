#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "prgm/numerics.hpp"

namespace prgm {

/// sqrt(I(theta)) is proportional to base(theta)^alpha_shift * exp(-lambda_shift * theta),
/// where base is the per-observation factor that hyper-parameters act on.
/// A Jeffreys-conjugate prior (a, l) therefore has the same posterior as the
/// standard conjugate prior (a + alpha_shift, l + lambda_shift).
struct JeffreysShift {
  double alpha_shift = 0.0;
  double lambda_shift = 0.0;
};

enum class FamilyKind { normal, exponential, binomial, poisson, custom };

/// One-parameter exponential family f(x|theta) = beta(theta) t(x) exp(-theta r(x))
/// in its natural parameter. H = beta'/beta must be strictly decreasing on the support.
///
/// Conjugate hyper-parameters act on a per-observation base beta_0 with
/// beta = beta_0^base_power. base_power is the number of Bernoulli trials for
/// the binomial family and 1 for every other family, so that (alpha, lambda)
/// updates to (alpha + base_power, lambda + r(x)).
struct FamilySpec {
  std::string name;
  FamilyKind kind = FamilyKind::custom;
  Interval theta_support;
  /// Closure of H(theta_support); H is decreasing so lo = H(hi end), hi = H(lo end).
  Interval h_range;
  ScalarMap log_beta;
  ScalarMap h;
  ScalarMap h_prime;
  /// log I(theta), when a form stable far into the tails is known.
  std::optional<ScalarMap> log_fisher;
  std::optional<ScalarMap> h_inv;
  ScalarMap r;
  std::optional<JeffreysShift> jeffreys_shift;
  double base_power = 1.0;
  int trials = 0;  // binomial only

  /// Hyper-parameters (alpha, lambda) of a standard conjugate prior that are
  /// acceptable at construction time. Empty means accept everything.
  std::function<bool(double, double)> prior_admissible;
  /// Posterior hyper-parameters (alpha', lambda') giving a proper posterior
  /// with finite E[H | x]. Empty means accept everything.
  std::function<bool(double, double)> posterior_proper;
  /// Human-readable form of the two predicates above, for error messages.
  std::string propriety_note;

  double log_base(double theta) const { return log_beta(theta) / base_power; }
};

/// Built-in families by name: "normal_mean_unitvar" (alias "normal"),
/// "exponential_rate" ("exponential"), "binomial_logit(n)" (also "binomial_logit:n",
/// "binomial:n"), "poisson_neglograte" ("poisson").
FamilySpec builtin_family(std::string_view name);

FamilySpec normal_mean_unitvar();
FamilySpec exponential_rate();
FamilySpec binomial_logit(int n);
/// Poisson with theta = -log(rate). Not one of the worked examples; included
/// because it has the same Jeffreys-shift structure.
FamilySpec poisson_neglograte();

/// Throws DomainError unless theta lies strictly inside the support.
void require_interior(const FamilySpec& fam, double theta, std::string_view what = "theta");

/// H^{-1}(t). Uses the analytic inverse when present, otherwise bracketed
/// bisection on the strictly decreasing H.
double h_inverse(const FamilySpec& fam, double t);

/// I(theta) = -H'(theta).
double fisher_info(const FamilySpec& fam, double theta);

/// log I(theta) from `log_fisher` when present, else log(-H'(theta)).
double log_fisher_info(const FamilySpec& fam, double theta);

/// Central-difference derivative of H, used when a custom family does not
/// supply H'.
ScalarMap finite_difference_h_prime(ScalarMap h);

/// Estimates the closure of H(support) by evaluating H toward each end.
Interval estimate_h_range(const ScalarMap& h, const Interval& support);

}  // namespace prgm
