#include <doctest.h>

#include <cmath>
#include <random>

#include "prgm/errors.hpp"
#include "prgm/exp_family.hpp"

using namespace prgm;

namespace {

void check_consistent(const FamilySpec& fam, double lo, double hi) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(lo, hi);
  for (int i = 0; i < 50; ++i) {
    const double th = u(rng);
    const double step = 1e-5 * std::max(1.0, std::abs(th));
    const double dlogb = (fam.log_beta(th + step) - fam.log_beta(th - step)) / (2 * step);
    CHECK(fam.h(th) == doctest::Approx(dlogb).epsilon(1e-7));
    const double dh = (fam.h(th + step) - fam.h(th - step)) / (2 * step);
    CHECK(fam.h_prime(th) == doctest::Approx(dh).epsilon(1e-6));
    CHECK(fam.h_prime(th) < 0.0);
    CHECK(h_inverse(fam, fam.h(th)) == doctest::Approx(th).epsilon(1e-12));
    CHECK(log_fisher_info(fam, th) == doctest::Approx(std::log(fisher_info(fam, th))).epsilon(1e-12));
  }
}

}  // namespace

TEST_CASE("built-in families are internally consistent") {
  check_consistent(normal_mean_unitvar(), -5, 5);
  check_consistent(exponential_rate(), 0.05, 8);
  check_consistent(binomial_logit(1), -6, 6);
  check_consistent(binomial_logit(5), -6, 6);
  check_consistent(poisson_neglograte(), -3, 4);
}

TEST_CASE("frozen values") {
  const FamilySpec n = normal_mean_unitvar();
  CHECK(n.h(1.5) == doctest::Approx(-1.5));
  CHECK(fisher_info(n, 0.3) == doctest::Approx(1.0));
  const FamilySpec e = exponential_rate();
  CHECK(e.h(2.0) == doctest::Approx(0.5));
  CHECK(e.r(3.0) == 3.0);
  CHECK(h_inverse(e, 0.25) == doctest::Approx(4.0));
  const FamilySpec b = binomial_logit(5);
  CHECK(h_inverse(b, 2.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(b.h(0.0) == doctest::Approx(2.5));
  CHECK(b.base_power == 5.0);
  CHECK(b.trials == 5);
  const FamilySpec p = poisson_neglograte();
  CHECK(p.h(0.0) == doctest::Approx(1.0));
}

TEST_CASE("Jeffreys shifts") {
  CHECK(exponential_rate().jeffreys_shift->alpha_shift == -1.0);
  CHECK(exponential_rate().jeffreys_shift->lambda_shift == 0.0);
  CHECK(binomial_logit(3).jeffreys_shift->alpha_shift == 1.0);
  CHECK(binomial_logit(3).jeffreys_shift->lambda_shift == 0.5);
  CHECK(normal_mean_unitvar().jeffreys_shift->alpha_shift == 0.0);
  CHECK(poisson_neglograte().jeffreys_shift->lambda_shift == 0.5);
}

TEST_CASE("sqrt(I) matches base^a exp(-b theta) up to a constant") {
  for (const FamilySpec& fam : {exponential_rate(), binomial_logit(4), poisson_neglograte(), normal_mean_unitvar()}) {
    const JeffreysShift s = *fam.jeffreys_shift;
    auto g = [&](double th) { return 0.5 * log_fisher_info(fam, th) - s.alpha_shift * fam.log_base(th) + s.lambda_shift * th; };
    const double ref = g(0.7);
    for (double th : {0.2, 1.1, 2.5, 4.0}) CHECK(g(th) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("stable tails of the log Fisher information") {
  const FamilySpec b = binomial_logit(2);
  CHECK(std::isfinite(log_fisher_info(b, 800.0)));
  CHECK(log_fisher_info(b, 800.0) == doctest::Approx(std::log(2.0) - 800.0));
  CHECK(log_fisher_info(poisson_neglograte(), -900.0) == doctest::Approx(900.0));
}

TEST_CASE("lookup by name") {
  CHECK(builtin_family("normal").kind == FamilyKind::normal);
  CHECK(builtin_family("exponential_rate").kind == FamilyKind::exponential);
  CHECK(builtin_family("binomial:7").trials == 7);
  CHECK(builtin_family("binomial_logit(3)").trials == 3);
  CHECK(builtin_family("binomial_logit:2").trials == 2);
  CHECK(builtin_family("poisson").kind == FamilyKind::poisson);
  CHECK_THROWS_AS(builtin_family("cauchy"), ValidationError);
  CHECK_THROWS_AS(builtin_family("binomial:0"), Error);
}

TEST_CASE("interior checks") {
  const FamilySpec e = exponential_rate();
  CHECK_NOTHROW(require_interior(e, 1e-300));
  CHECK_THROWS_AS(require_interior(e, 0.0), DomainError);
  CHECK_THROWS_AS(require_interior(e, -1.0), DomainError);
  CHECK_THROWS_AS(require_interior(e, std::nan("")), DomainError);
  CHECK_THROWS_AS(h_inverse(e, -1.0), DomainError);
}

TEST_CASE("finite differences and range estimation") {
  const ScalarMap h = [](double th) { return 1.0 / th; };
  const ScalarMap dh = finite_difference_h_prime(h);
  CHECK(dh(2.0) == doctest::Approx(-0.25).epsilon(1e-7));
  const Interval r = estimate_h_range(h, Interval{0.0, kInf});
  CHECK(r.lo == doctest::Approx(0.0));
  CHECK(r.hi > 1e6);
  const Interval logistic = estimate_h_range([](double th) { return 1.0 / (1.0 + std::exp(th)); }, Interval{});
  CHECK(logistic.lo == doctest::Approx(0.0));
  CHECK(logistic.hi == doctest::Approx(1.0));
}
