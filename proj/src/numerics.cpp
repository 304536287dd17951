#include "prgm/numerics.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <sstream>

#include "prgm/errors.hpp"

namespace prgm {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Step from `x` toward the upper (dir = +1) or lower (dir = -1) end of
// `support`: additive doubling toward an infinite end, halving the gap
// toward a finite one.
double step_toward(const Interval& support, double x, int dir, double& step) {
  if (dir > 0) {
    if (support.bounded_above()) return x + (support.hi - x) / 2;
    double next = x + step;
    step *= 2;
    return next;
  }
  if (support.bounded_below()) return x - (x - support.lo) / 2;
  double next = x - step;
  step *= 2;
  return next;
}

// Adaptive GK31 by interval halving. Boost's recursive driver reports leaf
// errors in the unit-interval scale; each leaf here is integrated
// non-adaptively and its error rescaled to the leaf width.
double gk31(const ScalarMap& f, double a, double b, double abs_tol, unsigned depth, double& err, double& l1) {
  using boost::math::quadrature::gauss_kronrod;
  double e = 0.0;
  double l = 0.0;
  const double v = gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &e, &l);
  e *= (b - a) / 2;
  if (depth > 0 && e > abs_tol && std::isfinite(v)) {
    const double mid = a + (b - a) / 2;
    if (mid > a && mid < b) {
      double e1 = 0.0, l1a = 0.0, e2 = 0.0, l2 = 0.0;
      const double v1 = gk31(f, a, mid, abs_tol / 2, depth - 1, e1, l1a);
      const double v2 = gk31(f, mid, b, abs_tol / 2, depth - 1, e2, l2);
      err = e1 + e2;
      l1 = l1a + l2;
      return v1 + v2;
    }
  }
  err = e;
  l1 = l;
  return v;
}

double gk31_adaptive(const ScalarMap& f, double a, double b, double rel_tol, unsigned depth, double& err,
                     double& l1) {
  using boost::math::quadrature::gauss_kronrod;
  double e = 0.0;
  double l = 0.0;
  gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &e, &l);
  return gk31(f, a, b, rel_tol * l, depth, err, l1);
}

}  // namespace

double Interval::interior_point() const {
  if (bounded_below() && bounded_above()) return lo + (hi - lo) / 2;
  if (bounded_below()) return lo + std::max(1.0, std::abs(lo));
  if (bounded_above()) return hi - std::max(1.0, std::abs(hi));
  return 0.0;
}

std::string Interval::describe() const { return "(" + fmt(lo) + ", " + fmt(hi) + ")"; }

RootResult bisect(const ScalarMap& f, double lo, double hi, int max_iter) {
  if (lo > hi) std::swap(lo, hi);
  double flo = f(lo);
  double fhi = f(hi);
  if (std::isnan(flo) || std::isnan(fhi)) throw DomainError("bisect: function is NaN at a bracket end");
  if (flo == 0.0) return {lo, 0};
  if (fhi == 0.0) return {hi, 0};
  if ((flo > 0) == (fhi > 0)) {
    throw ConvergenceError("bisect: no sign change on [" + fmt(lo) + ", " + fmt(hi) + "]");
  }
  int it = 0;
  for (; it < max_iter; ++it) {
    double mid = lo + (hi - lo) / 2;
    if (mid <= lo || mid >= hi) break;
    double fm = f(mid);
    if (std::isnan(fm)) throw DomainError("bisect: function is NaN at " + fmt(mid));
    if (fm == 0.0) return {mid, it + 1};
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  return {std::abs(flo) <= std::abs(fhi) ? lo : hi, it};
}

Bracket expand_bracket(const ScalarMap& f, const Interval& support, double start, int max_expansions) {
  if (!support.contains(start)) start = support.interior_point();
  double f0 = f(start);
  if (std::isnan(f0)) throw DomainError("expand_bracket: function is NaN at the start point");
  if (f0 == 0.0) return {start, start, 0};

  // Monotone f: probe once to learn which way f moves toward zero.
  double probe_step = 1e-3 * std::max(1.0, std::abs(start));
  double probe = start + probe_step;
  if (!support.contains(probe)) probe = start + (support.hi - start) / 2;
  double fp = f(probe);
  int dir = ((fp - f0) > 0) == (f0 < 0) ? +1 : -1;

  double step = std::max(1.0, std::abs(start));
  double prev = start;
  double fprev = f0;
  for (int k = 1; k <= max_expansions; ++k) {
    double next = step_toward(support, prev, dir, step);
    if (!std::isfinite(next) || next == prev) break;
    double fn = f(next);
    if (std::isnan(fn)) throw DomainError("expand_bracket: function is NaN at " + fmt(next));
    if (fn == 0.0 || (fn > 0) != (fprev > 0)) {
      return {std::min(prev, next), std::max(prev, next), k};
    }
    prev = next;
    fprev = fn;
  }
  throw ConvergenceError("expand_bracket: no sign change within " + std::to_string(max_expansions) +
                         " expansions on " + support.describe());
}

QuadratureResult integrate(const ScalarMap& f, double a, double b, double rel_tol, unsigned max_depth) {
  QuadratureResult out;
  if (a == b) return out;
  if (a > b) {
    out = integrate(f, b, a, rel_tol, max_depth);
    out.value = -out.value;
    return out;
  }
  ScalarMap g = f;
  double ta = a;
  double tb = b;
  if (std::isinf(a) && std::isinf(b)) {
    g = [&f](double t) {
      const double s = 1 - t * t;
      return f(t / s) * (1 + t * t) / (s * s);
    };
    ta = -1;
    tb = 1;
  } else if (std::isinf(b)) {
    g = [&f, a](double t) { return f(a + t / (1 - t)) / ((1 - t) * (1 - t)); };
    ta = 0;
    tb = 1;
  } else if (std::isinf(a)) {
    g = [&f, b](double t) { return f(b - t / (1 - t)) / ((1 - t) * (1 - t)); };
    ta = 0;
    tb = 1;
  }
  out.value = gk31_adaptive(g, ta, tb, rel_tol, max_depth, out.error, out.l1);
  if (!std::isfinite(out.value)) {
    throw ConvergenceError("quadrature: non-finite integral on [" + fmt(a) + ", " + fmt(b) + "]");
  }
  if (out.error > 1e-8 * out.l1 && out.error > 1e-300) {
    throw ConvergenceError("quadrature: estimated error " + fmt(out.error) + " exceeds tolerance (L1 " +
                           fmt(out.l1) + ")");
  }
  return out;
}

double locate_mode(const ScalarMap& g, const Interval& support) {
  double c = support.interior_point();
  double gc = g(c);
  if (std::isnan(gc)) throw DomainError("locate_mode: log-density is NaN at " + fmt(c));

  double d0 = 1e-3 * std::max(1.0, std::abs(c));
  if (support.bounded_above()) d0 = std::min(d0, (support.hi - c) / 4);
  if (support.bounded_below()) d0 = std::min(d0, (c - support.lo) / 4);

  double a = c - d0;
  double b = c + d0;
  double gr = g(b);
  double gl = g(a);
  if (gr > gc || gl > gc) {
    int dir = gr > gc ? +1 : -1;
    double step = d0;
    double prev = c;
    double cur = dir > 0 ? b : a;
    double gcur = dir > 0 ? gr : gl;
    bool bracketed = false;
    for (int k = 0; k < 400; ++k) {
      double next = step_toward(support, cur, dir, step);
      if (!std::isfinite(next) || next == cur) break;
      double gn = g(next);
      if (gn < gcur || std::isnan(gn)) {
        a = std::min(prev, next);
        b = std::max(prev, next);
        bracketed = true;
        break;
      }
      prev = cur;
      cur = next;
      gcur = gn;
    }
    if (!bracketed) {
      bool toward_finite = dir > 0 ? support.bounded_above() : support.bounded_below();
      if (!toward_finite) throw ConvergenceError("locate_mode: log-density increases without bound");
      return cur;  // mode sits at a finite end of the support
    }
  }

  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double g1 = g(x1);
  double g2 = g(x2);
  for (int it = 0; it < 400; ++it) {
    if (b - a <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x1))) break;
    if (g1 < g2) {
      a = x1;
      x1 = x2;
      g1 = g2;
      x2 = a + kInvPhi * (b - a);
      g2 = g(x2);
    } else {
      b = x2;
      x2 = x1;
      g2 = g1;
      x1 = b - kInvPhi * (b - a);
      g1 = g(x1);
    }
  }
  return g1 >= g2 ? x1 : x2;
}

LogDensityIntegrals integrate_log_density(const ScalarMap& log_density, const Interval& support,
                                          std::span<const ScalarMap> weights) {
  LogDensityIntegrals out;
  const double mode = locate_mode(log_density, support);
  const double gmax = log_density(mode);
  if (!std::isfinite(gmax)) throw DomainError("integrate_log_density: log-density not finite at its mode");

  // Width at which the density falls by a moderate factor; used only to
  // rescale the integration variable.
  auto room = [&](int dir) {
    return dir > 0 ? (support.bounded_above() ? support.hi - mode : kInf)
                   : (support.bounded_below() ? mode - support.lo : kInf);
  };
  double d = 1e-3 * std::max(1.0, std::abs(mode));
  d = std::min({d, room(+1) / 2, room(-1) / 2});
  double drop = 0.0;
  for (int it = 0; it < 200; ++it) {
    double dr = room(+1) > d ? gmax - log_density(mode + d) : 0.0;
    double dl = room(-1) > d ? gmax - log_density(mode - d) : 0.0;
    drop = std::max(std::isnan(dr) ? kInf : dr, std::isnan(dl) ? kInf : dl);
    if (drop > 2.0) {
      d /= 2;
    } else if (drop < 0.125 && 2 * d < std::max(room(+1), room(-1)) / 2) {
      d *= 2;
    } else {
      break;
    }
  }
  const double scale = drop > 0 ? d / std::sqrt(2 * drop) : d;

  const std::size_t nw = weights.size();
  std::vector<double> acc(nw + 1, 0.0);
  std::vector<double> err(nw + 1, 0.0);
  std::vector<double> l1(nw + 1, 0.0);
  thread_local boost::math::quadrature::tanh_sinh<double> tanh_sinh_rule;

  for (int dir : {-1, +1}) {
    const double end = dir > 0 ? support.hi : support.lo;
    const double upper = room(dir) / scale;
    // Scaled offsets from the mode: [0, 2], [2, 8], [8, 32], ... until the
    // pieces stop contributing or the support ends.
    double u0 = 0.0;
    double u1 = 2.0;
    bool converged = false;
    for (int piece = 0; piece < 400 && !converged; ++piece) {
      const bool last = u1 >= upper;
      if (last) u1 = upper;
      bool negligible = true;
      for (std::size_t k = 0; k <= nw; ++k) {
        auto at = [&, k](double theta) {
          if (!support.contains(theta)) return 0.0;
          const double g = log_density(theta);
          if (std::isnan(g)) throw DomainError("integrate_log_density: log-density is NaN at " + fmt(theta));
          const double w = std::exp(g - gmax);
          if (w == 0.0) return 0.0;
          return k == 0 ? w * scale : weights[k - 1](theta) * w * scale;
        };
        double e = 0.0;
        double l = 0.0;
        double v = 0.0;
        if (last) {
          // The piece ends on the support boundary, where the density may be
          // singular; tanh-sinh with the exact distance to that end.
          auto f = [&](double u, double uc) {
            const double theta = uc > 0 ? end - dir * scale * uc : mode + dir * scale * u;
            return at(theta);
          };
          try {
            v = tanh_sinh_rule.integrate(f, u0, u1, 1e-14, &e, &l);
          } catch (const std::exception& ex) {
            throw ConvergenceError(std::string("integrate_log_density: ") + ex.what());
          }
        } else {
          auto f = [&](double u) { return at(mode + dir * scale * u); };
          v = gk31_adaptive(f, u0, u1, 1e-13, 18, e, l);
        }
        acc[k] += v;
        err[k] += e;
        l1[k] += l;
        if (l > 1e-17 * l1[k]) negligible = false;
      }
      if (last || (piece >= 2 && negligible)) converged = true;
      u0 = u1;
      u1 *= 4;
    }
    if (!converged) throw ConvergenceError("integrate_log_density: tail does not decay on " + support.describe());
  }
  if (!(acc[0] > 0.0)) throw ConvergenceError("integrate_log_density: zero mass");
  for (std::size_t k = 0; k <= nw; ++k) {
    if (!std::isfinite(acc[k]) || err[k] > 1e-8 * l1[k]) {
      throw ConvergenceError("integrate_log_density: estimated error " + fmt(err[k]) + " exceeds tolerance (L1 " +
                             fmt(l1[k]) + ")");
    }
  }
  out.log_mass = gmax + std::log(acc[0]);
  out.means.resize(nw);
  for (std::size_t k = 0; k < nw; ++k) out.means[k] = acc[k + 1] / acc[0];
  out.mode = mode;
  out.scale = scale;
  return out;
}

}  // namespace prgm
