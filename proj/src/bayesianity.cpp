#include "prgm/bayesianity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "prgm/errors.hpp"
#include "prgm/estimators.hpp"

namespace prgm {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Tolerance for treating delta_pr as equal to an extreme Bayes estimate.
double coincidence_tol(double v) { return 1e-12 * std::max(1.0, std::abs(v)); }

}  // namespace

std::string to_string(CertificateKind kind) {
  switch (kind) {
    case CertificateKind::convex_mixture:
      return "convex_mixture";
    case CertificateKind::connected_path:
      return "connected_path";
    case CertificateKind::data_independent:
      return "data_independent";
    case CertificateKind::boundary_bayes:
      return "boundary_bayes";
  }
  return "unknown";
}

BayesianityCertificate mixture_witness(const FamilySpec& fam, const ConjugatePrior& pi0, const ConjugatePrior& pi1,
                                       double x, double delta_pr) {
  require_interior(fam, delta_pr, "delta_pr");
  const MixtureComponents comps = mixture_components(fam, pi0, pi1, x);
  const double target = fam.h(delta_pr);
  auto g = [&](double t) { return comps.psi(t) - target; };

  BayesianityCertificate cert;
  cert.kind = CertificateKind::convex_mixture;
  const double g0 = g(0.0);
  const double g1 = g(1.0);
  const double tol = 1e-10 * std::max(1.0, std::abs(target));
  if (std::abs(g1) <= tol) {
    cert.witness = 1.0;
    cert.residual = std::abs(g1);
    return cert;
  }
  if (std::abs(g0) <= tol) {
    cert.witness = 0.0;
    cert.residual = std::abs(g0);
    return cert;
  }
  if ((g0 > 0) == (g1 > 0)) {
    throw ValidationError("mixture_witness: Bayes estimates under pi0 and pi1 do not straddle delta_pr = " +
                          num(delta_pr));
  }
  RootResult root = bisect(g, 0.0, 1.0);
  cert.witness = root.root;
  cert.iterations = root.iterations;
  cert.residual = std::abs(g(root.root));
  return cert;
}

BayesianityCertificate connected_path_witness(const FamilySpec& fam, const PriorBox& box, double x, double delta_pr) {
  require_interior(fam, delta_pr, "delta_pr");
  const auto corners = box.corners();
  std::size_t i_min = 0;
  std::size_t i_max = 0;
  std::array<double, 4> est{};
  for (std::size_t i = 0; i < corners.size(); ++i) {
    est[i] = bayes_estimate(fam, corners[i], x).estimate;
    if (est[i] < est[i_min]) i_min = i;
    if (est[i] > est[i_max]) i_max = i;
  }

  BayesianityCertificate cert;
  cert.kind = CertificateKind::connected_path;
  if (box.is_point()) {
    cert.witness = 0.0;
    cert.witness_prior = corners[0];
    cert.residual = std::abs(est[0] - delta_pr);
    return cert;
  }
  for (std::size_t i : {i_min, i_max}) {
    if (std::abs(est[i] - delta_pr) <= coincidence_tol(delta_pr)) {
      cert.kind = CertificateKind::boundary_bayes;
      cert.witness = i == i_min ? 0.0 : 1.0;
      cert.witness_prior = corners[i];
      cert.residual = std::abs(est[i] - delta_pr);
      return cert;
    }
  }
  if (delta_pr < est[i_min] || delta_pr > est[i_max]) {
    throw ValidationError("connected_path_witness: corner Bayes estimates [" + num(est[i_min]) + ", " +
                          num(est[i_max]) + "] do not straddle delta_pr = " + num(delta_pr));
  }

  const ConjugatePrior from = corners[i_min];
  const ConjugatePrior to = corners[i_max];
  auto at = [&](double s) {
    return ConjugatePrior{from.alpha + s * (to.alpha - from.alpha), from.lambda + s * (to.lambda - from.lambda),
                          box.flavor};
  };
  auto f = [&](double s) { return bayes_estimate(fam, at(s), x).estimate - delta_pr; };
  RootResult root = bisect(f, 0.0, 1.0);
  cert.witness = root.root;
  cert.witness_prior = at(root.root);
  cert.iterations = root.iterations;
  cert.residual = std::abs(f(root.root));
  return cert;
}

BayesianityCertificate data_independent_alpha(const FamilySpec& fam, const PriorBox& box,
                                              std::span<const double> x_grid) {
  if (box.lambda_lo != box.lambda_hi) {
    throw ValidationError("data_independent_alpha needs a fixed-lambda box (lambda_lo == lambda_hi)");
  }
  if (x_grid.size() < 10) throw ValidationError("data_independent_alpha needs at least 10 x values");

  BayesianityCertificate cert;
  cert.per_x_alpha.reserve(x_grid.size());
  for (double x : x_grid) {
    const EstimateReport rep =
        box.flavor == PriorFlavor::jcp ? iprgm_jcp_box(fam, box, x) : prgm_conjugate_box(fam, box, x);
    BayesianityCertificate at_x = connected_path_witness(fam, box, x, rep.estimate);
    cert.per_x_alpha.push_back(at_x.witness_prior->alpha);
    cert.residual = std::max(cert.residual, at_x.residual);
    cert.iterations += at_x.iterations;
  }
  const auto [lo, hi] = std::minmax_element(cert.per_x_alpha.begin(), cert.per_x_alpha.end());
  cert.constancy_spread = *hi - *lo;
  cert.witness = std::accumulate(cert.per_x_alpha.begin(), cert.per_x_alpha.end(), 0.0) /
                 static_cast<double>(cert.per_x_alpha.size());
  cert.kind = cert.constancy_spread < kDataIndependenceSpread ? CertificateKind::data_independent
                                                              : CertificateKind::connected_path;
  cert.witness_prior = ConjugatePrior{cert.witness, box.lambda_lo, box.flavor};

  switch (fam.kind) {
    case FamilyKind::normal:
      cert.closed_form_alpha = normal_alpha_star(box.alpha_lo, box.alpha_hi);
      break;
    case FamilyKind::exponential:
      cert.closed_form_alpha = box.flavor == PriorFlavor::jcp ? exponential_jcp_alpha_star(box.alpha_lo, box.alpha_hi)
                                                              : exponential_alpha_star(box.alpha_lo, box.alpha_hi);
      break;
    default:
      break;
  }
  return cert;
}

double normal_alpha_star(double alpha1, double alpha2) {
  return (alpha1 + alpha2 + 2 * alpha1 * alpha2) / (alpha1 + alpha2 + 2);
}

double exponential_alpha_star(double alpha1, double alpha2) {
  if (alpha1 == alpha2) return alpha1;
  return (alpha1 + 1) * (alpha2 + 1) / (alpha1 - alpha2) * std::log((alpha1 + 1) / (alpha2 + 1)) - 1;
}

double exponential_jcp_alpha_star(double alpha1, double alpha2) {
  if (alpha1 == alpha2) return alpha1;
  return alpha1 * alpha2 / (alpha1 - alpha2) * std::log(alpha1 / alpha2);
}

double logarithmic_mean(double a, double b) {
  if (a == b) return a;
  return (b - a) / (std::log(b) - std::log(a));
}

ContinuityCheck psi_perturbation_check(const FamilySpec& fam, const ConjugatePrior& prior, double x, double eps,
                                       const ScalarMap& bump, const Interval& bump_support) {
  if (!bump_support.bounded_below() || !bump_support.bounded_above()) {
    throw ValidationError("psi_perturbation_check: bump support must be bounded");
  }
  const double rx = fam.r(x);
  const double log_z = log_prior_mass(fam, prior);
  const PosteriorQuadrature q = posterior_quadrature(fam, prior, x);

  // Likelihood in theta with the carrier t(x) dropped; it scales every
  // quantity below by the same factor.
  ScalarMap log_lik = [&](double th) { return fam.log_beta(th) - th * rx; };
  const std::array<ScalarMap, 1> abs_h{[&](double th) { return std::abs(fam.h(th)); }};
  const LogDensityIntegrals lik = integrate_log_density(log_lik, fam.theta_support, abs_h);

  // Work relative to the likelihood's peak to keep magnitudes moderate.
  const double ref = lik.log_mass;
  const double k2 = 1.0;
  const double k1 = lik.means[0];
  const double s = std::exp(q.log_evidence - log_z - ref);
  const double psi = q.mean_H;
  const double r = psi * s;

  auto lik_scaled = [&](double th) { return std::exp(log_lik(th) - ref); };
  const double ds = integrate([&](double th) { return bump(th) * lik_scaled(th); }, bump_support.lo, bump_support.hi)
                        .value;
  const double dr =
      integrate([&](double th) { return bump(th) * fam.h(th) * lik_scaled(th); }, bump_support.lo, bump_support.hi)
          .value;

  ContinuityCheck out;
  out.psi = psi;
  out.psi_perturbed = (r + eps * dr) / (s + eps * ds);
  out.observed_change = std::abs(out.psi_perturbed - psi);
  const double denom = s - eps * k2;
  out.bound = denom > 0 ? eps * (k1 + std::abs(psi) * k2) / denom : kInf;
  out.holds = out.observed_change <= out.bound;
  return out;
}

}  // namespace prgm
