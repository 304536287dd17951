#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prgm/exp_family.hpp"
#include "prgm/priors.hpp"

namespace prgm {

/// boundary_bayes: the PRGM estimate coincides with an extreme Bayes estimate
/// and the witness is that corner itself.
enum class CertificateKind { convex_mixture, connected_path, data_independent, boundary_bayes };

std::string to_string(CertificateKind kind);

/// A prior inside the class whose Bayes estimate reproduces the PRGM estimate.
struct BayesianityCertificate {
  CertificateKind kind = CertificateKind::connected_path;
  /// Mixture weight t*, path parameter s*, or the data-independent alpha*.
  double witness = 0.0;
  /// The witnessing conjugate prior, when the witness is one (path kinds).
  std::optional<ConjugatePrior> witness_prior;
  /// |psi(t*) - H(delta_pr)| or |Psi(witness, x) - delta_pr| (max over x for
  /// data_independent).
  double residual = 0.0;
  /// data_independent only: max - min of the per-x witness alpha(x).
  double constancy_spread = 0.0;
  std::vector<double> per_x_alpha;
  /// data_independent only: the closed-form alpha* when one is known.
  std::optional<double> closed_form_alpha;
  int iterations = 0;
};

/// Convex class: bisection for t* with psi(t*) = H(delta_pr) on the mixture
/// path t pi0 + (1 - t) pi1. Requires the Bayes estimates under pi0 and pi1
/// to straddle delta_pr.
BayesianityCertificate mixture_witness(const FamilySpec& fam, const ConjugatePrior& pi0, const ConjugatePrior& pi1,
                                       double x, double delta_pr);

/// Connected hyper-parameter class: bisection along the straight segment
/// between the box corners with the smallest and largest Bayes estimates.
BayesianityCertificate connected_path_witness(const FamilySpec& fam, const PriorBox& box, double x, double delta_pr);

/// Fixed-lambda box: per-x witnesses alpha(x). When their spread is below
/// 1e-8 the certificate has kind data_independent and witness alpha* = their
/// mean; otherwise kind connected_path, with the spread reported.
BayesianityCertificate data_independent_alpha(const FamilySpec& fam, const PriorBox& box,
                                              std::span<const double> x_grid);

inline constexpr double kDataIndependenceSpread = 1e-8;

/// Closed forms of the data-independent hyper-parameter for fixed-lambda boxes.
double normal_alpha_star(double alpha1, double alpha2);
double exponential_alpha_star(double alpha1, double alpha2);
double exponential_jcp_alpha_star(double alpha1, double alpha2);
/// (b - a) / (log b - log a), with the limit a at a == b.
double logarithmic_mean(double a, double b);

/// Sup-norm continuity of psi(pi) = E_pi[H | x] in the prior density.
/// The prior is perturbed by eps * bump with sup|bump| <= 1; the observed
/// change is compared with eps (K1 + |psi| K2) / (s - eps K2), where
/// K1 = ∫|H| f(x|.), K2 = ∫ f(x|.) and s is the prior's marginal.
struct ContinuityCheck {
  double psi = 0.0;
  double psi_perturbed = 0.0;
  double observed_change = 0.0;
  double bound = 0.0;
  bool holds = false;
};
/// `bump` must vanish outside `bump_support`, a bounded interval.
ContinuityCheck psi_perturbation_check(const FamilySpec& fam, const ConjugatePrior& prior, double x, double eps,
                                       const ScalarMap& bump, const Interval& bump_support);

}  // namespace prgm
