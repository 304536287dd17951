#include "prgm/oracle.hpp"

#include <algorithm>
#include <array>
#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <cmath>
#include <sstream>

#include "prgm/errors.hpp"
#include "prgm/losses.hpp"

namespace prgm {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string label(const ConjugatePrior& p) { return "a=" + num(p.alpha) + ";l=" + num(p.lambda); }

double lattice_value(double lo, double hi, int i, int n) {
  if (i == 0) return lo;
  if (i == n - 1) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

struct Lattice {
  std::vector<double> estimates;
  std::vector<std::string> labels;
  double extreme_lo = 0.0;
  double extreme_hi = 0.0;
};

Lattice box_lattice(const FamilySpec& fam, const PriorBox& box, double x, int n_corner) {
  Lattice lat;
  for (int i = 0; i < n_corner; ++i) {
    for (int j = 0; j < n_corner; ++j) {
      ConjugatePrior p{lattice_value(box.alpha_lo, box.alpha_hi, i, n_corner),
                       lattice_value(box.lambda_lo, box.lambda_hi, j, n_corner), box.flavor};
      lat.estimates.push_back(bayes_estimate(fam, p, x).estimate);
      lat.labels.push_back(label(p));
    }
  }
  lat.extreme_lo = kInf;
  lat.extreme_hi = -kInf;
  for (const auto& c : box.corners()) {
    const double e = bayes_estimate(fam, c, x).estimate;
    lat.extreme_lo = std::min(lat.extreme_lo, e);
    lat.extreme_hi = std::max(lat.extreme_hi, e);
  }
  return lat;
}

Lattice raw_lattice(std::span<const double> estimates) {
  if (estimates.empty()) throw ValidationError("grid_minimax_over needs at least one Bayes estimate");
  Lattice lat;
  lat.estimates.assign(estimates.begin(), estimates.end());
  for (std::size_t k = 0; k < estimates.size(); ++k) lat.labels.push_back("bayes[" + std::to_string(k) + "]");
  const auto [lo, hi] = std::minmax_element(estimates.begin(), estimates.end());
  lat.extreme_lo = *lo;
  lat.extreme_hi = *hi;
  return lat;
}

RegretCurve sweep(const FamilySpec& fam, const Lattice& lat, const GridSpec& grid) {
  validate(grid);
  for (double e : lat.estimates) {
    if (!std::isfinite(e)) throw DomainError("non-finite Bayes estimate in the oracle lattice");
  }
  const double dmin = *std::min_element(lat.estimates.begin(), lat.estimates.end());
  const double dmax = *std::max_element(lat.estimates.begin(), lat.estimates.end());
  const double width = dmax - dmin;
  const double pad = width > 0 ? grid.delta_margin * width : 1e-3 * std::max(1.0, std::abs(dmin));
  double lo = dmin - pad;
  double hi = dmax + pad;
  if (lo <= fam.theta_support.lo) lo = dmin - (dmin - fam.theta_support.lo) / 2;
  if (hi >= fam.theta_support.hi) hi = dmax + (fam.theta_support.hi - dmax) / 2;
  const double h = (hi - lo) / (grid.n_delta - 1);

  RegretCurve curve;
  curve.rows.reserve(static_cast<std::size_t>(grid.n_delta));
  double excess = 0.0;
  for (int i = 0; i < grid.n_delta; ++i) {
    const double d = i == grid.n_delta - 1 ? hi : lo + h * i;
    double sup = -kInf;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < lat.estimates.size(); ++k) {
      const double r = posterior_regret(fam, lat.estimates[k], d);
      if (r > sup) {
        sup = r;
        arg = k;
      }
    }
    const double ext = std::max(posterior_regret(fam, lat.extreme_lo, d), posterior_regret(fam, lat.extreme_hi, d));
    excess = std::max(excess, sup - ext);
    curve.rows.push_back({d, sup, lat.labels[arg]});
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.rows.size(); ++i) {
    if (curve.rows[i].sup_regret < curve.rows[best].sup_regret) best = i;
  }
  double slope = 0.0;
  if (best > 0) slope = std::abs(curve.rows[best].sup_regret - curve.rows[best - 1].sup_regret) / h;
  if (best + 1 < curve.rows.size()) {
    slope = std::max(slope, std::abs(curve.rows[best + 1].sup_regret - curve.rows[best].sup_regret) / h);
  }

  OracleResult& s = curve.summary;
  s.argmin_delta = curve.rows[best].delta;
  s.minimax_value = curve.rows[best].sup_regret;
  s.resolution_bound = 4 * h;
  s.value_resolution_bound = 4 * slope * h;
  s.sup_attained_at = curve.rows[best].argmax_corner;
  s.corner_excess = excess;
  s.delta_spacing = h;
  return curve;
}

double softplus(double v) { return v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

}  // namespace

void validate(const GridSpec& grid) {
  if (grid.n_delta < 3 || grid.n_corner < 3) throw ValidationError("grid counts must be at least 3");
  if (!(grid.delta_margin >= 0.0) || !std::isfinite(grid.delta_margin)) {
    throw ValidationError("grid delta_margin must be finite and non-negative");
  }
}

OracleResult grid_minimax(const FamilySpec& fam, const PriorBox& box, double x, const GridSpec& grid) {
  validate(grid);
  return sweep(fam, box_lattice(fam, box, x, grid.n_corner), grid).summary;
}

OracleResult grid_minimax_over(const FamilySpec& fam, std::span<const double> bayes_estimates, const GridSpec& grid) {
  return sweep(fam, raw_lattice(bayes_estimates), grid).summary;
}

RegretCurve regret_curve(const FamilySpec& fam, const PriorBox& box, double x, const GridSpec& grid) {
  validate(grid);
  return sweep(fam, box_lattice(fam, box, x, grid.n_corner), grid);
}

std::string RegretCurve::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "delta,sup_regret,argmax_corner\n";
  for (const auto& row : rows) os << row.delta << ',' << row.sup_regret << ',' << row.argmax_corner << '\n';
  return os.str();
}

double kl_quadrature(const FamilySpec& fam, double theta, double delta) {
  require_interior(fam, theta, "theta");
  require_interior(fam, delta, "delta");
  if (theta == delta) return 0.0;
  switch (fam.kind) {
    case FamilyKind::normal: {
      auto f = [&](double x) {
        const double dens = std::exp(-0.5 * (x - theta) * (x - theta)) / std::sqrt(2 * M_PI);
        return dens * 0.5 * ((x - delta) * (x - delta) - (x - theta) * (x - theta));
      };
      return integrate(f, theta - 40.0, theta + 40.0).value;
    }
    case FamilyKind::exponential: {
      auto f = [&](double x) {
        const double dens = theta * std::exp(-theta * x);
        return dens * (std::log(theta / delta) - (theta - delta) * x);
      };
      return integrate(f, 0.0, 60.0 / theta).value;
    }
    case FamilyKind::binomial: {
      const int n = fam.trials;
      const double p = 1.0 / (1.0 + std::exp(theta));
      boost::math::binomial_distribution<double> dist(n, p);
      const double log_ratio_p = softplus(delta) - softplus(theta);
      const double log_ratio_q = softplus(-delta) - softplus(-theta);
      double sum = 0.0;
      for (int k = 0; k <= n; ++k) {
        const double w = boost::math::pdf(dist, k);
        if (w > 0) sum += w * (k * log_ratio_p + (n - k) * log_ratio_q);
      }
      return sum;
    }
    case FamilyKind::poisson: {
      const double mu_t = std::exp(-theta);
      const double mu_d = std::exp(-delta);
      boost::math::poisson_distribution<double> dist(mu_t);
      const double k_max = boost::math::quantile(boost::math::complement(dist, 1e-14)) + 1;
      double sum = 0.0;
      for (double k = 0; k <= k_max; ++k) {
        const double w = boost::math::pdf(dist, k);
        if (w > 0) sum += w * (k * (delta - theta) - (mu_t - mu_d));
      }
      return sum;
    }
    case FamilyKind::custom:
      break;
  }
  throw UnsupportedFamilyError("kl_quadrature has no sampling density for custom family " + fam.name);
}

std::string to_string(ExtremeCorner corner) {
  switch (corner) {
    case ExtremeCorner::lower:
      return "lower";
    case ExtremeCorner::upper:
      return "upper";
    case ExtremeCorner::both:
      return "both";
  }
  return "unknown";
}

CornerCheck sup_regret_corner_check(const FamilySpec& fam, const PriorBox& box, double x, double delta,
                                    int n_corner) {
  if (n_corner < 3) throw ValidationError("n_corner must be at least 3");
  const Lattice lat = box_lattice(fam, box, x, n_corner);
  CornerCheck out;
  out.delta_lo = lat.extreme_lo;
  out.delta_hi = lat.extreme_hi;
  out.regret_lo = posterior_regret(fam, lat.extreme_lo, delta);
  out.regret_hi = posterior_regret(fam, lat.extreme_hi, delta);
  const double ext = std::max(out.regret_lo, out.regret_hi);
  out.lattice_sup = 0.0;
  for (double e : lat.estimates) out.lattice_sup = std::max(out.lattice_sup, posterior_regret(fam, e, delta));
  out.interior_excess = std::max(0.0, out.lattice_sup - ext);
  if (std::abs(out.regret_lo - out.regret_hi) <= 1e-10 * std::max(1.0, ext)) {
    out.attained_by = ExtremeCorner::both;
  } else {
    out.attained_by = out.regret_hi > out.regret_lo ? ExtremeCorner::upper : ExtremeCorner::lower;
  }
  if (out.interior_excess > kCornerTolerance * std::max(1.0, out.lattice_sup)) {
    throw VerificationFailure("interior lattice regret " + num(out.lattice_sup) + " exceeds the extreme-corner regret " +
                              num(ext) + " at delta = " + num(delta));
  }
  return out;
}

EtaScaleResult eta_scale_prgm(const FamilySpec& fam, const PriorBox& box, double x, const Reparameterization& map) {
  const Interval eta_support = map.image(fam.theta_support);
  const double rx = fam.r(x);
  auto theta_of = [&](double eta) { return map.inverse(eta); };

  auto eta_bayes = [&](const ConjugatePrior& p) {
    ScalarMap log_post = [&](double eta) {
      const double th = theta_of(eta);
      if (!fam.theta_support.contains(th)) return -kInf;
      double v = p.alpha * fam.log_base(th) - p.lambda * th + fam.log_beta(th) - th * rx;
      if (p.flavor == PriorFlavor::jcp) {
        v += 0.5 * log_fisher_info(fam, th) + map.log_abs_jacobian(eta);
      }
      return v;
    };
    const std::array<ScalarMap, 1> weight{[&](double eta) { return fam.h(theta_of(eta)); }};
    const LogDensityIntegrals q = integrate_log_density(log_post, eta_support, weight);
    const double target = q.means[0];
    ScalarMap foc = [&](double d) { return fam.h(theta_of(d)) - target; };
    const Bracket br = expand_bracket(foc, eta_support, q.mode);
    return bisect(foc, br.lo, br.hi).root;
  };

  EtaScaleResult out;
  out.eta_lo = kInf;
  out.eta_hi = -kInf;
  for (const auto& c : box.corners()) {
    const double e = eta_bayes(c);
    out.eta_lo = std::min(out.eta_lo, e);
    out.eta_hi = std::max(out.eta_hi, e);
  }
  if (out.eta_lo == out.eta_hi) {
    out.estimate = out.eta_lo;
    return out;
  }
  const double th_lo = theta_of(out.eta_lo);
  const double th_hi = theta_of(out.eta_hi);
  auto loss_eta = [&](double th_true, double d) {
    const double th = theta_of(d);
    return fam.log_beta(th_true) - fam.log_beta(th) + (th - th_true) * fam.h(th_true);
  };
  ScalarMap g = [&](double d) { return loss_eta(th_hi, d) - loss_eta(th_lo, d); };
  out.estimate = bisect(g, out.eta_lo, out.eta_hi).root;
  return out;
}

}  // namespace prgm
