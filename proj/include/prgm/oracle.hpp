#pragma once

#include <span>
#include <string>
#include <vector>

#include "prgm/estimators.hpp"
#include "prgm/exp_family.hpp"
#include "prgm/priors.hpp"

namespace prgm {

/// Brute-force grid used by the minimax oracle.
struct GridSpec {
  int n_delta = 2000;
  /// Lattice points per box edge; the exact corners are always included.
  int n_corner = 9;
  /// Padding beyond [min, max] of the Bayes estimates, relative to their spread.
  double delta_margin = 0.1;
};

void validate(const GridSpec& grid);

struct OracleResult {
  double argmin_delta = 0.0;
  double minimax_value = 0.0;
  /// Bound on |argmin_delta - true minimizer|: 4 grid spacings.
  double resolution_bound = 0.0;
  /// Bound on |minimax_value - true minimax|: local three-point Lipschitz
  /// estimate of the sup-regret curve times the spacing, times 4.
  double value_resolution_bound = 0.0;
  /// Hyper-parameters whose Bayes estimate attains the sup at argmin_delta.
  std::string sup_attained_at;
  /// Largest amount by which an interior lattice point's regret exceeded the
  /// larger of the two extreme-corner regrets, over the whole delta sweep.
  double corner_excess = 0.0;
  double delta_spacing = 0.0;
};

/// Grid minimax over the n_corner x n_corner hyper-parameter lattice of `box`.
OracleResult grid_minimax(const FamilySpec& fam, const PriorBox& box, double x, const GridSpec& grid = {});

/// Grid minimax over an explicit set of Bayes estimates.
OracleResult grid_minimax_over(const FamilySpec& fam, std::span<const double> bayes_estimates,
                               const GridSpec& grid = {});

struct RegretCurveRow {
  double delta = 0.0;
  double sup_regret = 0.0;
  std::string argmax_corner;
};

struct RegretCurve {
  std::vector<RegretCurveRow> rows;
  OracleResult summary;

  /// "delta,sup_regret,argmax_corner" header plus one line per row.
  std::string to_csv() const;
};

RegretCurve regret_curve(const FamilySpec& fam, const PriorBox& box, double x, const GridSpec& grid = {});

/// KL divergence between the sampling distributions at theta and delta, by
/// quadrature or summation over the sample space of a built-in family.
double kl_quadrature(const FamilySpec& fam, double theta, double delta);

enum class ExtremeCorner { lower, upper, both };

std::string to_string(ExtremeCorner corner);

struct CornerCheck {
  /// Which extreme Bayes estimate attains the supremum at delta.
  ExtremeCorner attained_by = ExtremeCorner::both;
  double delta_lo = 0.0;
  double delta_hi = 0.0;
  double regret_lo = 0.0;
  double regret_hi = 0.0;
  double lattice_sup = 0.0;
  /// max(0, lattice_sup - max(regret_lo, regret_hi)).
  double interior_excess = 0.0;
};

inline constexpr double kCornerTolerance = 1e-12;

/// Compares the lattice supremum of the regret at `delta` with the regrets of
/// the two extreme corners. Throws VerificationFailure when an interior
/// lattice point exceeds them by more than kCornerTolerance max(1, sup).
CornerCheck sup_regret_corner_check(const FamilySpec& fam, const PriorBox& box, double x, double delta,
                                    int n_corner = 9);

/// PRGM recomputed directly on the eta = map(theta) scale: the prior density
/// is carried to eta (with the Jacobian for a Jeffreys-conjugate box, in the
/// same functional form without it for a standard box), Bayes estimates solve
/// the first-order condition of the eta-scale loss by eta-quadrature, and the
/// PRGM equalizes the eta-scale regrets by bisection.
struct EtaScaleResult {
  double estimate = 0.0;
  double eta_lo = 0.0;
  double eta_hi = 0.0;
};
EtaScaleResult eta_scale_prgm(const FamilySpec& fam, const PriorBox& box, double x, const Reparameterization& map);

}  // namespace prgm
