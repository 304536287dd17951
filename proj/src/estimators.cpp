#include "prgm/estimators.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <charconv>
#include <cmath>
#include <sstream>
#include <vector>

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

// Unclipped regret; the closed form needs the signed rounding.
double raw_regret(const FamilySpec& fam, double bayes, double d) {
  return fam.log_beta(bayes) - fam.log_beta(d) + (d - bayes) * fam.h(bayes);
}

// raw_regret(hi, lo) - raw_regret(lo, hi) = 2 ∫ H - (hi - lo)(H(lo) + H(hi)).
// On narrow brackets the log beta differences cancel, so the integral is
// taken by Gauss-Legendre instead.
double trapezoid_defect(const FamilySpec& fam, double lo, double hi, double scale) {
  const double w = hi - lo;
  if (w > 1e-3 * scale) return raw_regret(fam, hi, lo) - raw_regret(fam, lo, hi);
  const double mean_h = boost::math::quadrature::gauss<double, 10>::integrate(fam.h, lo, hi) / w;
  return w * ((mean_h - fam.h(lo)) + (mean_h - fam.h(hi)));
}

std::vector<double> parse_numbers(std::string_view text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string_view piece = text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos);
    std::string s(piece);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw ValidationError("cannot parse number '" + s + "' in transform");
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::bayes:
      return "bayes";
    case Method::prgm_closed_form:
      return "prgm_closed_form";
    case Method::prgm_root_find:
      return "prgm_root_find";
    case Method::iprgm:
      return "iprgm";
  }
  return "unknown";
}

EstimateReport bayes_estimate(const FamilySpec& fam, const ConjugatePrior& prior, double x) {
  const double mean_h = posterior_mean_H(fam, prior, x);
  EstimateReport rep;
  rep.estimate = h_inverse(fam, mean_h);
  rep.delta_lo = rep.delta_hi = rep.estimate;
  rep.method = Method::bayes;
  rep.diagnostics.prior_flavor = prior.flavor;
  return rep;
}

EstimateReport prgm_from_bounds(const FamilySpec& fam, double delta_lo, double delta_hi) {
  if (!std::isfinite(delta_lo) || !std::isfinite(delta_hi)) {
    throw DomainError("PRGM bounds must be finite, got [" + num(delta_lo) + ", " + num(delta_hi) + "]");
  }
  require_interior(fam, delta_lo, "delta_lo");
  require_interior(fam, delta_hi, "delta_hi");
  if (delta_lo > delta_hi) {
    throw ValidationError("PRGM bounds out of order: delta_lo = " + num(delta_lo) + " > delta_hi = " + num(delta_hi));
  }

  EstimateReport rep;
  rep.delta_lo = delta_lo;
  rep.delta_hi = delta_hi;
  rep.method = Method::prgm_closed_form;

  const double scale = std::max({1.0, std::abs(delta_lo), std::abs(delta_hi)});
  if (delta_hi - delta_lo < 1e-10 * scale) {
    rep.estimate = delta_lo == delta_hi ? delta_lo : delta_lo + (delta_hi - delta_lo) / 2;
    rep.diagnostics.degenerate_class = true;
    rep.equalized_regret = std::max(posterior_regret(fam, delta_lo, rep.estimate),
                                    posterior_regret(fam, delta_hi, rep.estimate));
    rep.diagnostics.equalization_residual = std::abs(posterior_regret(fam, delta_lo, rep.estimate) -
                                                     posterior_regret(fam, delta_hi, rep.estimate));
    return rep;
  }

  const double h_lo = fam.h(delta_lo);
  const double h_hi = fam.h(delta_hi);
  auto f3 = [&](double d) { return raw_regret(fam, delta_hi, d) - raw_regret(fam, delta_lo, d); };
  auto residual_at = [&](double d) { return std::abs(f3(d)); };
  auto bisect_f3 = [&] {
    RootResult root = bisect(f3, delta_lo, delta_hi);
    rep.diagnostics.iterations = root.iterations;
    rep.diagnostics.root_find_fallback = true;
    rep.method = Method::prgm_root_find;
    return root.root;
  };

  double est = 0.0;
  if (std::abs(h_hi - h_lo) < 1e-13 * std::max(std::abs(h_hi), std::abs(h_lo))) {
    est = bisect_f3();
  } else {
    // f3 is linear in d with slope H(delta_hi) - H(delta_lo); its root written
    // from both ends and averaged, which is the closed form rearranged to keep
    // the midpoint exact when the two regrets agree.
    const double gap = h_lo - h_hi;
    est = delta_lo + (delta_hi - delta_lo) / 2 +
          0.5 * trapezoid_defect(fam, delta_lo, delta_hi, scale) / gap;
    est = std::clamp(est, delta_lo, delta_hi);
    const double r = std::max(posterior_regret(fam, delta_lo, est), posterior_regret(fam, delta_hi, est));
    if (residual_at(est) > 1e-10 * std::max(1.0, r)) {
      const double closed = est;
      const double alt = bisect_f3();
      est = residual_at(alt) < residual_at(closed) ? alt : closed;
      if (est == closed) {
        rep.method = Method::prgm_closed_form;
        rep.diagnostics.root_find_fallback = false;
      }
    }
  }
  rep.estimate = est;
  const double r_lo = posterior_regret(fam, delta_lo, est);
  const double r_hi = posterior_regret(fam, delta_hi, est);
  rep.equalized_regret = std::max(r_lo, r_hi);
  rep.diagnostics.equalization_residual = std::abs(r_lo - r_hi);
  return rep;
}

BayesBounds conjugate_box_bounds(const FamilySpec& fam, const PriorBox& box, double x) {
  // E[H | x] is monotone in each hyper-parameter, so the extremes sit at
  // corners; which corner depends on the sign of lambda + r(x).
  double h_max = -kInf;
  double h_min = kInf;
  for (const auto& c : box.corners()) {
    const double m = posterior_mean_H(fam, c, x);
    h_max = std::max(h_max, m);
    h_min = std::min(h_min, m);
  }
  BayesBounds b;
  b.h_lo = h_max;
  b.h_hi = h_min;
  b.delta_lo = h_inverse(fam, h_max);
  b.delta_hi = h_inverse(fam, h_min);
  return b;
}

EstimateReport prgm_conjugate_box(const FamilySpec& fam, const PriorBox& box, double x) {
  if (box.flavor != PriorFlavor::standard) {
    throw ValidationError("prgm_conjugate_box expects a standard box; use iprgm_jcp_box for Jeffreys-conjugate classes");
  }
  BayesBounds b = conjugate_box_bounds(fam, box, x);
  EstimateReport rep = prgm_from_bounds(fam, b.delta_lo, b.delta_hi);
  rep.diagnostics.prior_flavor = PriorFlavor::standard;
  return rep;
}

EstimateReport iprgm_jcp_box(const FamilySpec& fam, const PriorBox& box, double x) {
  if (box.flavor != PriorFlavor::jcp) {
    throw ValidationError("iprgm_jcp_box expects a Jeffreys-conjugate (jcp) box");
  }
  EstimateReport rep;
  if (fam.jeffreys_shift) {
    const auto& s = *fam.jeffreys_shift;
    PriorBox shifted{box.alpha_lo + s.alpha_shift, box.alpha_hi + s.alpha_shift, box.lambda_lo + s.lambda_shift,
                     box.lambda_hi + s.lambda_shift, PriorFlavor::standard};
    rep = prgm_conjugate_box(fam, shifted, x);
  } else {
    BayesBounds b = conjugate_box_bounds(fam, box, x);
    rep = prgm_from_bounds(fam, b.delta_lo, b.delta_hi);
  }
  rep.method = Method::iprgm;
  rep.diagnostics.prior_flavor = PriorFlavor::jcp;
  return rep;
}

Reparameterization reciprocal_map() {
  Reparameterization m;
  m.label = "reciprocal";
  m.forward = [](double th) { return 1.0 / th; };
  m.inverse = [](double eta) { return 1.0 / eta; };
  m.inverse_derivative = [](double eta) { return -1.0 / (eta * eta); };
  m.log_abs_jacobian = [](double eta) { return -2.0 * std::log(std::abs(eta)); };
  m.image = [](const Interval& iv) {
    if (iv.lo < 0.0) throw DomainError("reciprocal map needs a positive support");
    return Interval{1.0 / iv.hi, iv.lo == 0.0 ? kInf : 1.0 / iv.lo};
  };
  return m;
}

Reparameterization log_map() {
  Reparameterization m;
  m.label = "log";
  m.forward = [](double th) { return std::log(th); };
  m.inverse = [](double eta) { return std::exp(eta); };
  m.inverse_derivative = [](double eta) { return std::exp(eta); };
  m.log_abs_jacobian = [](double eta) { return eta; };
  m.image = [](const Interval& iv) {
    if (iv.lo < 0.0) throw DomainError("log map needs a positive support");
    return Interval{std::log(iv.lo), std::log(iv.hi)};
  };
  return m;
}

Reparameterization neg_log_over_a_map(double a) {
  if (a == 0.0 || !std::isfinite(a)) throw ValidationError("neg_log_over_a needs a finite nonzero a");
  Reparameterization m;
  m.label = "neg_log_over_a(" + num(a) + ")";
  m.forward = [a](double th) { return -std::log(th) / a; };
  m.inverse = [a](double eta) { return std::exp(-a * eta); };
  m.inverse_derivative = [a](double eta) { return -a * std::exp(-a * eta); };
  m.log_abs_jacobian = [a](double eta) { return std::log(std::abs(a)) - a * eta; };
  m.image = [a](const Interval& iv) {
    if (iv.lo < 0.0) throw DomainError("neg_log_over_a map needs a positive support");
    double e1 = -std::log(iv.lo) / a;
    double e2 = -std::log(iv.hi) / a;
    return Interval{std::min(e1, e2), std::max(e1, e2)};
  };
  return m;
}

Reparameterization affine_map(double a, double b) {
  if (a == 0.0 || !std::isfinite(a) || !std::isfinite(b)) throw ValidationError("affine map needs finite a != 0 and b");
  Reparameterization m;
  m.label = "affine(" + num(a) + "," + num(b) + ")";
  m.forward = [a, b](double th) { return a * th + b; };
  m.inverse = [a, b](double eta) { return (eta - b) / a; };
  m.inverse_derivative = [a](double) { return 1.0 / a; };
  m.log_abs_jacobian = [a](double) { return -std::log(std::abs(a)); };
  m.image = [a, b](const Interval& iv) {
    double e1 = a * iv.lo + b;
    double e2 = a * iv.hi + b;
    return Interval{std::min(e1, e2), std::max(e1, e2)};
  };
  return m;
}

Reparameterization logit_to_p_map() {
  Reparameterization m;
  m.label = "logit_to_p";
  m.forward = [](double th) { return 1.0 / (1.0 + std::exp(th)); };
  m.inverse = [](double p) { return std::log1p(-p) - std::log(p); };
  m.inverse_derivative = [](double p) { return -1.0 / (p * (1.0 - p)); };
  m.log_abs_jacobian = [](double p) { return -std::log(p) - std::log1p(-p); };
  m.image = [](const Interval& iv) { return Interval{1.0 / (1.0 + std::exp(iv.hi)), 1.0 / (1.0 + std::exp(iv.lo))}; };
  return m;
}

Reparameterization parse_reparameterization(std::string_view spec) {
  auto args_of = [&](std::string_view name) -> std::optional<std::vector<double>> {
    if (spec.substr(0, name.size()) != name) return std::nullopt;
    std::string_view rest = spec.substr(name.size());
    if (rest.size() >= 2 && rest.front() == '(' && rest.back() == ')') {
      return parse_numbers(rest.substr(1, rest.size() - 2));
    }
    if (rest.size() >= 2 && rest.front() == ':') return parse_numbers(rest.substr(1));
    return std::nullopt;
  };
  if (spec == "reciprocal") return reciprocal_map();
  if (spec == "log") return log_map();
  if (spec == "logit_to_p") return logit_to_p_map();
  if (auto a = args_of("neg_log_over_a")) {
    if (a->size() != 1) throw ValidationError("neg_log_over_a takes one argument");
    return neg_log_over_a_map((*a)[0]);
  }
  if (auto a = args_of("affine")) {
    if (a->size() != 2) throw ValidationError("affine takes two arguments a,b");
    return affine_map((*a)[0], (*a)[1]);
  }
  throw ValidationError("unknown transform '" + std::string(spec) +
                        "'; expected reciprocal, log, neg_log_over_a:A, affine:A,B or logit_to_p");
}

TransportResult transport(const EstimateReport& report, const Reparameterization& map) {
  TransportResult out;
  out.value = map.forward(report.estimate);
  if (!std::isfinite(out.value)) {
    throw DomainError("estimate " + num(report.estimate) + " is outside the domain of " + map.label);
  }
  const bool jcp = report.diagnostics.prior_flavor == PriorFlavor::jcp;
  out.invariance_guaranteed = jcp && (report.method == Method::iprgm || report.method == Method::bayes);
  if (!out.invariance_guaranteed) {
    warn("transport through " + map.label + ": " + to_string(report.method) +
         " estimate does not come from a Jeffreys-conjugate class; no invariance guarantee");
  }
  return out;
}

}  // namespace prgm
