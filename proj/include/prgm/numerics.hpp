#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace prgm {

using ScalarMap = std::function<double(double)>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Open real interval (lo, hi); either end may be infinite.
struct Interval {
  double lo = -kInf;
  double hi = kInf;

  bool contains(double v) const { return std::isfinite(v) && v > lo && v < hi; }
  bool bounded_below() const { return std::isfinite(lo); }
  bool bounded_above() const { return std::isfinite(hi); }
  /// A finite interior point usable as a starting guess.
  double interior_point() const;
  std::string describe() const;
};

struct RootResult {
  double root = 0.0;
  int iterations = 0;
};

/// Bisection for a monotone function with f(lo) and f(hi) of opposite sign
/// (a zero at either end is accepted). Stops when the bracket cannot shrink
/// further in floating point or after `max_iter` halvings.
RootResult bisect(const ScalarMap& f, double lo, double hi, int max_iter = 400);

/// Finds a sign change of a monotone `f` inside `support`, starting from
/// `start` and expanding geometrically: doubling steps toward infinite ends,
/// halving the remaining gap toward finite ends. Throws ConvergenceError
/// after `max_expansions` unsuccessful steps.
struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
  int expansions = 0;
};
Bracket expand_bracket(const ScalarMap& f, const Interval& support, double start,
                       int max_expansions = 200);

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
};

/// Adaptive Gauss-Kronrod on [a, b]; either limit may be infinite.
QuadratureResult integrate(const ScalarMap& f, double a, double b, double rel_tol = 1e-13,
                           unsigned max_depth = 18);

/// Integrals of an unnormalized log-density over `support`:
///   log_mass = log ∫ exp(g),  means[k] = ∫ w_k exp(g) / ∫ exp(g).
/// The integration is split at the numerically located mode of g and each half
/// is rescaled by a local width estimate, so narrow or remote peaks are handled.
struct LogDensityIntegrals {
  double log_mass = 0.0;
  std::vector<double> means;
  double mode = 0.0;
  double scale = 1.0;
};
LogDensityIntegrals integrate_log_density(const ScalarMap& log_density, const Interval& support,
                                          std::span<const ScalarMap> weights = {});

/// Golden-section maximizer of a unimodal function over `support`.
double locate_mode(const ScalarMap& g, const Interval& support);

}  // namespace prgm
