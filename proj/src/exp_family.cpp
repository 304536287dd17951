#include "prgm/exp_family.hpp"

#include <charconv>
#include <cmath>
#include <iostream>
#include <mutex>
#include <sstream>

#include "prgm/errors.hpp"

namespace prgm {

namespace {

std::mutex& warning_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& warning_handler() {
  static WarningHandler handler = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
  return handler;
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

int parse_trials(std::string_view s) {
  int n = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ValidationError("binomial family: cannot parse trial count '" + std::string(s) + "'");
  }
  return n;
}

}  // namespace

void set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(warning_mutex());
  warning_handler() = std::move(handler);
}

void warn(std::string_view message) {
  std::lock_guard lock(warning_mutex());
  if (warning_handler()) warning_handler()(message);
}

FamilySpec normal_mean_unitvar() {
  FamilySpec f;
  f.name = "normal_mean_unitvar";
  f.kind = FamilyKind::normal;
  f.theta_support = {-kInf, kInf};
  f.h_range = {-kInf, kInf};
  f.log_beta = [](double th) { return -0.5 * th * th; };
  f.h = [](double th) { return -th; };
  f.h_prime = [](double) { return -1.0; };
  f.log_fisher = [](double) { return 0.0; };
  f.h_inv = [](double t) { return -t; };
  f.r = [](double x) { return -x; };
  f.jeffreys_shift = JeffreysShift{0.0, 0.0};
  f.prior_admissible = [](double a, double) { return a > -1.0; };
  f.posterior_proper = [](double a, double) { return a > 0.0; };
  f.propriety_note = "alpha > -1";
  return f;
}

FamilySpec exponential_rate() {
  FamilySpec f;
  f.name = "exponential_rate";
  f.kind = FamilyKind::exponential;
  f.theta_support = {0.0, kInf};
  f.h_range = {0.0, kInf};
  f.log_beta = [](double th) { return std::log(th); };
  f.h = [](double th) { return 1.0 / th; };
  f.h_prime = [](double th) { return -1.0 / (th * th); };
  f.log_fisher = [](double th) { return -2.0 * std::log(th); };
  f.h_inv = [](double t) { return 1.0 / t; };
  f.r = [](double x) { return x; };
  f.jeffreys_shift = JeffreysShift{-1.0, 0.0};
  f.prior_admissible = [](double a, double l) { return a > -1.0 && l >= 0.0; };
  // Posterior theta^a' exp(-l' theta): E[1/theta] finite needs a' > 0.
  f.posterior_proper = [](double a, double l) { return a > 0.0 && l > 0.0; };
  f.propriety_note = "alpha > -1, lambda >= 0, lambda + x > 0";
  return f;
}

FamilySpec binomial_logit(int n) {
  if (n < 1) throw ValidationError("binomial family needs n >= 1, got " + std::to_string(n));
  FamilySpec f;
  f.name = "binomial_logit(" + std::to_string(n) + ")";
  f.kind = FamilyKind::binomial;
  f.trials = n;
  f.base_power = n;
  const double nd = n;
  f.theta_support = {-kInf, kInf};
  f.h_range = {0.0, nd};
  f.log_beta = [nd](double th) { return -nd * softplus(-th); };
  f.h = [nd](double th) { return nd / (1.0 + std::exp(th)); };
  f.h_prime = [nd](double th) { return -nd / (2.0 + 2.0 * std::cosh(th)); };
  f.log_fisher = [nd](double th) { return std::log(nd) - std::abs(th) - 2.0 * std::log1p(std::exp(-std::abs(th))); };
  f.h_inv = [nd](double t) { return std::log((nd - t) / t); };
  f.r = [](double x) { return x; };
  f.jeffreys_shift = JeffreysShift{1.0, 0.5};
  f.prior_admissible = [nd](double a, double l) {
    for (int x = 0; x <= static_cast<int>(nd); ++x) {
      if (l + x > 0.0 && l + x < a + nd) return true;
    }
    return false;
  };
  f.posterior_proper = [](double a, double l) { return l > 0.0 && l < a; };
  f.propriety_note = "0 < lambda + x < alpha + n";
  return f;
}

FamilySpec poisson_neglograte() {
  FamilySpec f;
  f.name = "poisson_neglograte";
  f.kind = FamilyKind::poisson;
  f.theta_support = {-kInf, kInf};
  f.h_range = {0.0, kInf};
  f.log_beta = [](double th) { return -std::exp(-th); };
  f.h = [](double th) { return std::exp(-th); };
  f.h_prime = [](double th) { return -std::exp(-th); };
  f.log_fisher = [](double th) { return -th; };
  f.h_inv = [](double t) { return -std::log(t); };
  f.r = [](double x) { return x; };
  f.jeffreys_shift = JeffreysShift{0.0, 0.5};
  f.prior_admissible = [](double a, double l) { return a > -1.0 && l >= 0.0; };
  f.posterior_proper = [](double a, double l) { return a > 0.0 && l > 0.0; };
  f.propriety_note = "alpha > -1, lambda >= 0, lambda + x > 0";
  return f;
}

FamilySpec builtin_family(std::string_view name) {
  if (name == "normal" || name == "normal_mean_unitvar") return normal_mean_unitvar();
  if (name == "exponential" || name == "exponential_rate") return exponential_rate();
  if (name == "poisson" || name == "poisson_neglograte") return poisson_neglograte();
  for (std::string_view prefix : {"binomial_logit", "binomial"}) {
    if (name.substr(0, prefix.size()) != prefix) continue;
    std::string_view rest = name.substr(prefix.size());
    if (rest.size() >= 2 && rest.front() == '(' && rest.back() == ')') {
      return binomial_logit(parse_trials(rest.substr(1, rest.size() - 2)));
    }
    if (rest.size() >= 2 && rest.front() == ':') return binomial_logit(parse_trials(rest.substr(1)));
    if (rest.empty()) throw ValidationError("binomial family needs a trial count, e.g. binomial_logit(5)");
  }
  throw ValidationError("unknown family '" + std::string(name) +
                        "'; expected normal_mean_unitvar, exponential_rate, binomial_logit(n) or "
                        "poisson_neglograte");
}

void require_interior(const FamilySpec& fam, double theta, std::string_view what) {
  if (!fam.theta_support.contains(theta)) {
    throw DomainError(std::string(what) + " = " + num(theta) + " lies outside the support " +
                      fam.theta_support.describe() + " of " + fam.name);
  }
}

double h_inverse(const FamilySpec& fam, double t) {
  const Interval& range = fam.h_range;
  if (!std::isfinite(t) || t < range.lo || t > range.hi) {
    throw DomainError("H^{-1}: t = " + num(t) + " outside the range of H, which is " + range.describe() +
                      " for " + fam.name);
  }
  if (t == range.lo || t == range.hi) {
    throw DomainError("H^{-1}: t = " + num(t) + " is an end of the range of H " + range.describe() +
                      " and maps to a support endpoint of " + fam.name);
  }
  if (fam.h_inv) {
    double theta = (*fam.h_inv)(t);
    if (!fam.theta_support.contains(theta)) {
      throw DomainError("H^{-1}: t = " + num(t) + " maps outside the support of " + fam.name);
    }
    return theta;
  }
  ScalarMap f = [&](double th) { return fam.h(th) - t; };
  Bracket br = expand_bracket(f, fam.theta_support, fam.theta_support.interior_point(), 200);
  RootResult root = bisect(f, br.lo, br.hi, 200);
  double resid = std::abs(fam.h(root.root) - t);
  if (resid > 1e-12 * std::abs(t) + 1e-14) {
    // H may be too flat for the stated tolerance; report the residual we reached.
    warn("H^{-1}: residual " + num(resid) + " at t = " + num(t) + " exceeds 1e-12 relative");
  }
  return root.root;
}

double fisher_info(const FamilySpec& fam, double theta) {
  require_interior(fam, theta);
  return -fam.h_prime(theta);
}

double log_fisher_info(const FamilySpec& fam, double theta) {
  if (fam.log_fisher) return (*fam.log_fisher)(theta);
  return std::log(-fam.h_prime(theta));
}

ScalarMap finite_difference_h_prime(ScalarMap h) {
  return [h = std::move(h)](double th) {
    double step = 1e-5 * std::max(1.0, std::abs(th));
    return (h(th + step) - h(th - step)) / (2 * step);
  };
}

Interval estimate_h_range(const ScalarMap& h, const Interval& support) {
  auto limit = [&](int dir) {
    double end = dir > 0 ? support.hi : support.lo;
    if (std::isfinite(end)) {
      double v = h(end);
      if (std::isfinite(v)) return v;
      // Approach the finite end geometrically.
      double x = support.interior_point();
      double last = h(x);
      for (int k = 0; k < 200; ++k) {
        x = end + (x - end) / 2;
        double hv = h(x);
        if (!std::isfinite(hv)) return dir > 0 ? -kInf : kInf;
        last = hv;
      }
      return last;
    }
    double x = support.interior_point();
    double last = h(x);
    double step = 1.0;
    for (int k = 0; k < 64; ++k) {
      x += dir * step;
      step *= 2;
      double hv = h(x);
      if (!std::isfinite(hv)) return dir > 0 ? -kInf : kInf;
      last = hv;
    }
    return last;
  };
  return {limit(+1), limit(-1)};
}

}  // namespace prgm
