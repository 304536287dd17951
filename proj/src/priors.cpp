#include "prgm/priors.hpp"

#include <cmath>
#include <sstream>

#include "prgm/errors.hpp"

namespace prgm {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string describe(const ConjugatePrior& p) {
  return to_string(p.flavor) + "(alpha=" + num(p.alpha) + ", lambda=" + num(p.lambda) + ")";
}

// Standard-flavor hyper-parameters with the same posterior, when known.
std::optional<ConjugatePrior> standard_equivalent(const FamilySpec& fam, const ConjugatePrior& p) {
  if (p.flavor == PriorFlavor::standard) return p;
  if (!fam.jeffreys_shift) return std::nullopt;
  return ConjugatePrior{p.alpha + fam.jeffreys_shift->alpha_shift, p.lambda + fam.jeffreys_shift->lambda_shift,
                        PriorFlavor::standard};
}

}  // namespace

std::string to_string(PriorFlavor flavor) { return flavor == PriorFlavor::standard ? "standard" : "jcp"; }

PriorFlavor parse_flavor(std::string_view text) {
  if (text == "standard") return PriorFlavor::standard;
  if (text == "jcp") return PriorFlavor::jcp;
  throw ValidationError("unknown prior flavor '" + std::string(text) + "'; expected standard or jcp");
}

ConjugatePrior make_prior(const FamilySpec& fam, double alpha, double lambda, PriorFlavor flavor) {
  if (!std::isfinite(alpha) || !std::isfinite(lambda)) {
    throw ValidationError("prior hyper-parameters must be finite");
  }
  ConjugatePrior p{alpha, lambda, flavor};
  auto eq = standard_equivalent(fam, p);
  if (!fam.prior_admissible || !eq) {
    warn("no propriety check available for " + describe(p) + " on " + fam.name + "; accepting");
    return p;
  }
  if (!fam.prior_admissible(eq->alpha, eq->lambda)) {
    throw ValidationError(describe(p) + " is not admissible for " + fam.name + " (requires " +
                          fam.propriety_note + " on the standard-equivalent hyper-parameters)");
  }
  return p;
}

std::array<ConjugatePrior, 4> PriorBox::corners() const {
  return {ConjugatePrior{alpha_lo, lambda_lo, flavor}, ConjugatePrior{alpha_lo, lambda_hi, flavor},
          ConjugatePrior{alpha_hi, lambda_lo, flavor}, ConjugatePrior{alpha_hi, lambda_hi, flavor}};
}

PriorBox make_box(const FamilySpec& fam, double alpha_lo, double alpha_hi, double lambda_lo, double lambda_hi,
                  PriorFlavor flavor) {
  if (!(alpha_lo <= alpha_hi) || !(lambda_lo <= lambda_hi)) {
    throw ValidationError("prior box needs alpha_lo <= alpha_hi and lambda_lo <= lambda_hi");
  }
  PriorBox box{alpha_lo, alpha_hi, lambda_lo, lambda_hi, flavor};
  for (const auto& c : box.corners()) make_prior(fam, c.alpha, c.lambda, flavor);
  return box;
}

ConjugatePrior to_standard(const FamilySpec& fam, const ConjugatePrior& prior) {
  if (prior.flavor == PriorFlavor::standard) return prior;
  if (!fam.jeffreys_shift) {
    throw UnsupportedFamilyError(fam.name +
                                 " has no Jeffreys shift; use the quadrature posterior path "
                                 "(posterior_quadrature) for Jeffreys-conjugate priors");
  }
  return *standard_equivalent(fam, prior);
}

ConjugatePrior posterior(const FamilySpec& fam, const ConjugatePrior& prior, double x) {
  ConjugatePrior s = to_standard(fam, prior);
  const double rx = fam.r(x);
  if (!std::isfinite(rx)) throw DomainError("r(x) is not finite at x = " + num(x));
  ConjugatePrior post{s.alpha + fam.base_power, s.lambda + rx, PriorFlavor::standard};
  if (!(post.alpha > 0.0)) {
    throw ValidationError("improper posterior for " + describe(prior) + " at x = " + num(x) +
                          ": alpha + " + num(fam.base_power) + " must be positive");
  }
  if (fam.posterior_proper && !fam.posterior_proper(post.alpha, post.lambda)) {
    throw ValidationError("improper posterior for " + describe(prior) + " at x = " + num(x) + " on " + fam.name +
                          " (requires " + fam.propriety_note + ")");
  }
  return post;
}

double posterior_mean_H(const FamilySpec& fam, const ConjugatePrior& prior, double x) {
  if (prior.flavor == PriorFlavor::jcp && !fam.jeffreys_shift) {
    return posterior_quadrature(fam, prior, x).mean_H;
  }
  ConjugatePrior post = posterior(fam, prior, x);
  return fam.base_power * post.lambda / post.alpha;
}

double log_prior_density(const FamilySpec& fam, const ConjugatePrior& prior, double theta) {
  double v = prior.alpha * fam.log_base(theta) - prior.lambda * theta;
  if (prior.flavor == PriorFlavor::jcp) v += 0.5 * log_fisher_info(fam, theta);
  return v;
}

PosteriorQuadrature posterior_quadrature(const FamilySpec& fam, const ConjugatePrior& prior, double x) {
  const double rx = fam.r(x);
  ScalarMap log_post = [&](double th) { return log_prior_density(fam, prior, th) + fam.log_beta(th) - th * rx; };
  const std::array<ScalarMap, 3> weights{
      fam.h,
      fam.log_beta,
      [&](double th) { return th * fam.h(th); },
  };
  LogDensityIntegrals q = integrate_log_density(log_post, fam.theta_support, weights);
  return {q.log_mass, q.means[0], q.means[1], q.means[2]};
}

double log_prior_mass(const FamilySpec& fam, const ConjugatePrior& prior) {
  ScalarMap log_prior = [&](double th) { return log_prior_density(fam, prior, th); };
  return integrate_log_density(log_prior, fam.theta_support).log_mass;
}

double MixtureComponents::psi(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("mixture weight t = " + num(t) + " outside [0, 1]");
  const double m = std::max(log_marginal0, log_marginal1);
  const double w0 = t * std::exp(log_marginal0 - m);
  const double w1 = (1.0 - t) * std::exp(log_marginal1 - m);
  return (w0 * mean_H0 + w1 * mean_H1) / (w0 + w1);
}

MixtureComponents mixture_components(const FamilySpec& fam, const ConjugatePrior& pi0, const ConjugatePrior& pi1,
                                     double x) {
  MixtureComponents out;
  auto one = [&](const ConjugatePrior& p, double& log_marginal, double& mean_H) {
    const double log_z = log_prior_mass(fam, p);
    PosteriorQuadrature q = posterior_quadrature(fam, p, x);
    log_marginal = q.log_evidence - log_z;
    mean_H = q.mean_H;
  };
  one(pi0, out.log_marginal0, out.mean_H0);
  one(pi1, out.log_marginal1, out.mean_H1);
  return out;
}

double mixture_posterior_mean_H(const FamilySpec& fam, const MixturePath& path, double x) {
  return mixture_components(fam, path.pi0, path.pi1, x).psi(path.t);
}

}  // namespace prgm
