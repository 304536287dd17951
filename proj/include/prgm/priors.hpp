#pragma once

#include <array>
#include <string>

#include "prgm/exp_family.hpp"

namespace prgm {

/// standard: pi(theta) ∝ base(theta)^alpha exp(-lambda theta)
/// jcp:      the same times sqrt(I(theta)) (Jeffreys-conjugate prior)
enum class PriorFlavor { standard, jcp };

std::string to_string(PriorFlavor flavor);
PriorFlavor parse_flavor(std::string_view text);

struct ConjugatePrior {
  double alpha = 0.0;
  double lambda = 0.0;
  PriorFlavor flavor = PriorFlavor::standard;
};

/// Validates (alpha, lambda) against the family's propriety predicate, applied
/// to the standard-equivalent hyper-parameters for a JCP. Families without a
/// predicate accept with a warning.
ConjugatePrior make_prior(const FamilySpec& fam, double alpha, double lambda,
                          PriorFlavor flavor = PriorFlavor::standard);

/// Rectangle of hyper-parameters. A degenerate lambda edge is the class with
/// fixed lambda; a degenerate alpha edge fixes alpha.
struct PriorBox {
  double alpha_lo = 0.0;
  double alpha_hi = 0.0;
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  PriorFlavor flavor = PriorFlavor::standard;

  /// (alpha_lo, lambda_lo), (alpha_lo, lambda_hi), (alpha_hi, lambda_lo), (alpha_hi, lambda_hi).
  std::array<ConjugatePrior, 4> corners() const;
  bool is_point() const { return alpha_lo == alpha_hi && lambda_lo == lambda_hi; }
};

PriorBox make_box(const FamilySpec& fam, double alpha_lo, double alpha_hi, double lambda_lo, double lambda_hi,
                  PriorFlavor flavor = PriorFlavor::standard);

/// pi_t = t pi0 + (1 - t) pi1 over normalized component densities.
struct MixturePath {
  ConjugatePrior pi0;
  ConjugatePrior pi1;
  double t = 0.0;
};

/// JCP (alpha, lambda) -> the standard prior (alpha + a, lambda + b) with the
/// same posterior, where (a, b) is the family's Jeffreys shift.
ConjugatePrior to_standard(const FamilySpec& fam, const ConjugatePrior& prior);

/// Conjugate update (alpha + base_power, lambda + r(x)); JCP priors are
/// shifted first. Throws ValidationError for an improper posterior.
ConjugatePrior posterior(const FamilySpec& fam, const ConjugatePrior& prior, double x);

/// E[H(theta) | x] = base_power (lambda + r(x)) / (alpha + base_power) for the
/// standard-equivalent prior. A JCP on a family without a Jeffreys shift falls
/// back to quadrature.
double posterior_mean_H(const FamilySpec& fam, const ConjugatePrior& prior, double x);

/// Unnormalized log prior density at theta (sqrt(I) included for a JCP).
double log_prior_density(const FamilySpec& fam, const ConjugatePrior& prior, double theta);

/// Quadrature of the unnormalized posterior over the support. Independent of
/// the closed-form conjugate algebra.
struct PosteriorQuadrature {
  double log_evidence = 0.0;  // log ∫ prior(theta) beta(theta) exp(-theta r(x)) dtheta, prior unnormalized
  double mean_H = 0.0;
  double mean_log_beta = 0.0;
  double mean_theta_H = 0.0;
};
PosteriorQuadrature posterior_quadrature(const FamilySpec& fam, const ConjugatePrior& prior, double x);

/// log ∫ prior(theta) dtheta; throws ConvergenceError when the prior is not normalizable.
double log_prior_mass(const FamilySpec& fam, const ConjugatePrior& prior);

/// psi(t) = (t a0 + (1 - t) a1) / (t m0 + (1 - t) m1), with a_i and m_i from
/// quadrature against the normalized component priors.
double mixture_posterior_mean_H(const FamilySpec& fam, const MixturePath& path, double x);

/// The t-independent pieces of psi(t): per-component log marginal and E[H | x].
struct MixtureComponents {
  double log_marginal0 = 0.0;
  double log_marginal1 = 0.0;
  double mean_H0 = 0.0;
  double mean_H1 = 0.0;

  double psi(double t) const;
};
MixtureComponents mixture_components(const FamilySpec& fam, const ConjugatePrior& pi0, const ConjugatePrior& pi1,
                                     double x);

}  // namespace prgm
