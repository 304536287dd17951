#include <doctest.h>

#include <array>
#include <cmath>
#include <sstream>
#include <string>

#include "prgm/errors.hpp"
#include "prgm/estimators.hpp"
#include "prgm/losses.hpp"
#include "prgm/oracle.hpp"

using namespace prgm;

TEST_CASE("KL by quadrature") {
  CHECK(kl_quadrature(normal_mean_unitvar(), 1, 3) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(kl_quadrature(exponential_rate(), 1, 2) == doctest::Approx(1 - std::log(2.0)).epsilon(1e-10));
  const FamilySpec b = binomial_logit(20);
  CHECK(kl_quadrature(b, 0.5, -1.0) == doctest::Approx(intrinsic_loss(b, 0.5, -1.0)).epsilon(1e-10));
  const FamilySpec p = poisson_neglograte();
  CHECK(kl_quadrature(p, -2.0, 1.0) == doctest::Approx(intrinsic_loss(p, -2.0, 1.0)).epsilon(1e-10));
  FamilySpec custom = exponential_rate();
  custom.kind = FamilyKind::custom;
  CHECK_THROWS_AS(kl_quadrature(custom, 1, 2), UnsupportedFamilyError);
}

TEST_CASE("grid oracle finds the PRGM estimate") {
  const FamilySpec e = exponential_rate();
  const PriorBox box = make_box(e, 1, 3, 1, 2);
  const EstimateReport r = prgm_conjugate_box(e, box, 2);
  const OracleResult o = grid_minimax(e, box, 2);
  CHECK(std::abs(o.argmin_delta - r.estimate) <= o.resolution_bound);
  CHECK(std::abs(o.minimax_value - r.equalized_regret) <= o.value_resolution_bound);
  CHECK(o.corner_excess == 0.0);
  CHECK(o.resolution_bound == doctest::Approx(4 * o.delta_spacing));
  CHECK(o.sup_attained_at.find("a=") == 0);
}

TEST_CASE("grid oracle over explicit estimates") {
  const FamilySpec n = normal_mean_unitvar();
  const std::array<double, 3> est{-1.0, 0.4, 2.0};
  const OracleResult o = grid_minimax_over(n, est);
  CHECK(std::abs(o.argmin_delta - 0.5) <= o.resolution_bound);
  CHECK(std::abs(o.minimax_value - 0.5 * 1.5 * 1.5) <= o.value_resolution_bound);
  CHECK(o.sup_attained_at.rfind("bayes[", 0) == 0);
}

TEST_CASE("degenerate box") {
  const FamilySpec e = exponential_rate();
  const PriorBox point = make_box(e, 2, 2, 1, 1);
  const OracleResult o = grid_minimax(e, point, 3);
  CHECK(std::abs(o.argmin_delta - 0.75) <= o.resolution_bound);
  CHECK(o.minimax_value <= o.value_resolution_bound + 1e-12);
}

TEST_CASE("grid validation") {
  GridSpec g;
  g.n_delta = 1;
  CHECK_THROWS_AS(validate(g), ValidationError);
  g = GridSpec{};
  g.n_corner = 1;
  CHECK_THROWS_AS(validate(g), ValidationError);
  g = GridSpec{};
  g.delta_margin = -1;
  CHECK_THROWS_AS(validate(g), ValidationError);
  CHECK_NOTHROW(validate(GridSpec{}));
}

TEST_CASE("regret curve CSV") {
  const FamilySpec e = exponential_rate();
  GridSpec g;
  g.n_delta = 50;
  const RegretCurve curve = regret_curve(e, make_box(e, 1, 3, 1, 2), 2, g);
  CHECK(curve.rows.size() == 50);
  const std::string csv = curve.to_csv();
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "delta,sup_regret,argmax_corner");
  int rows = 0;
  double prev = -kInf;
  while (std::getline(in, line)) {
    ++rows;
    const double d = std::stod(line.substr(0, line.find(',')));
    CHECK(d > prev);
    prev = d;
  }
  CHECK(rows == 50);
}

TEST_CASE("sup regret sits on an extreme corner") {
  const FamilySpec e = exponential_rate();
  const PriorBox box = make_box(e, 0.5, 2.5, 0.3, 1.7);
  const EstimateReport r = prgm_conjugate_box(e, box, 1.1);
  CHECK(sup_regret_corner_check(e, box, 1.1, r.delta_lo * 0.9).attained_by == ExtremeCorner::upper);
  CHECK(sup_regret_corner_check(e, box, 1.1, r.delta_hi * 1.1).attained_by == ExtremeCorner::lower);
  const CornerCheck at = sup_regret_corner_check(e, box, 1.1, r.estimate);
  CHECK(at.attained_by == ExtremeCorner::both);
  CHECK(at.interior_excess == 0.0);
  CHECK(to_string(ExtremeCorner::both) == "both");
}

TEST_CASE("eta-scale recomputation") {
  const FamilySpec e = exponential_rate();
  const PriorBox jcp = make_box(e, 1, 3, 1, 2, PriorFlavor::jcp);
  const EstimateReport r = iprgm_jcp_box(e, jcp, 2);
  const EtaScaleResult eta = eta_scale_prgm(e, jcp, 2, reciprocal_map());
  CHECK(eta.estimate == doctest::Approx(1 / r.estimate).epsilon(1e-10));
  CHECK(eta.eta_lo == doctest::Approx(1 / r.delta_hi).epsilon(1e-10));

  const PriorBox standard = make_box(e, 2, 4, 1, 2);
  const EstimateReport s = prgm_conjugate_box(e, standard, 2);
  const EtaScaleResult se = eta_scale_prgm(e, standard, 2, reciprocal_map());
  CHECK(std::abs(se.estimate - 1 / s.estimate) > 1e-3);
}

TEST_CASE("normal regret curve is two quadratics meeting at the midpoint") {
  const FamilySpec n = normal_mean_unitvar();
  const PriorBox box = make_box(n, 0.5, 2, -1, 1);
  GridSpec g;
  g.n_delta = 200;
  const RegretCurve curve = regret_curve(n, box, 0.7, g);
  const BayesBounds bb = conjugate_box_bounds(n, box, 0.7);
  for (const RegretCurveRow& row : curve.rows) {
    const double lo = row.delta - bb.delta_lo;
    const double hi = row.delta - bb.delta_hi;
    CHECK(row.sup_regret == doctest::Approx(0.5 * std::max(lo * lo, hi * hi)).epsilon(1e-9));
  }
  const double mid = (bb.delta_lo + bb.delta_hi) / 2;
  CHECK(std::abs(curve.summary.argmin_delta - mid) <= curve.summary.resolution_bound);
}
