#include "prgm/suites.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "prgm/bayesianity.hpp"
#include "prgm/config.hpp"
#include "prgm/errors.hpp"
#include "prgm/estimators.hpp"
#include "prgm/losses.hpp"
#include "prgm/oracle.hpp"

namespace prgm {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

Json box_json(const PriorBox& box) {
  return {{"alpha", {box.alpha_lo, box.alpha_hi}}, {"lambda", {box.lambda_lo, box.lambda_hi}},
          {"flavor", to_string(box.flavor)}};
}

Json prior_json(const ConjugatePrior& p) {
  return {{"alpha", p.alpha}, {"lambda", p.lambda}, {"flavor", to_string(p.flavor)}};
}

struct Instance {
  FamilySpec fam;
  PriorBox box;
  double x = 0.0;

  Json json() const { return {{"family", fam.name}, {"box", box_json(box)}, {"x", x}}; }
};

// Random standard box and observation with proper corners for each built-in.
Instance random_instance(Rng& rng, int which) {
  Instance in;
  switch (which % 4) {
    case 0: {
      in.fam = normal_mean_unitvar();
      const double a = uniform(rng, 0.0, 2.0);
      const double l = uniform(rng, -2.0, 2.0);
      in.box = make_box(in.fam, a, a + uniform(rng, 0.1, 2.0), l, l + uniform(rng, 0.1, 2.0));
      in.x = uniform(rng, -3.0, 3.0);
      break;
    }
    case 1: {
      in.fam = exponential_rate();
      const double a = uniform(rng, 0.2, 2.0);
      const double l = uniform(rng, 0.1, 2.0);
      in.box = make_box(in.fam, a, a + uniform(rng, 0.1, 3.0), l, l + uniform(rng, 0.1, 2.0));
      in.x = uniform(rng, 0.1, 4.0);
      break;
    }
    case 2: {
      const int ns[] = {1, 5, 20};
      const int n = ns[uniform_int(rng, 0, 2)];
      in.fam = binomial_logit(n);
      const double a = uniform(rng, 1.0, 2.0);
      const double l = uniform(rng, 0.05, 0.45);
      in.box = make_box(in.fam, a, a + uniform(rng, 0.1, 2.0), l, l + uniform(rng, 0.05, 0.45));
      in.x = uniform_int(rng, 0, n);
      break;
    }
    default: {
      in.fam = poisson_neglograte();
      const double a = uniform(rng, 0.2, 2.0);
      const double l = uniform(rng, 0.1, 2.0);
      in.box = make_box(in.fam, a, a + uniform(rng, 0.1, 2.0), l, l + uniform(rng, 0.1, 2.0));
      in.x = uniform_int(rng, 0, 8);
      break;
    }
  }
  return in;
}

class Emitter {
 public:
  Emitter(std::string suite, std::ostream& out) : suite_(std::move(suite)), out_(out) {}

  void check(const std::string& name, bool pass, Json instance, Json metrics) {
    Json line;
    line["suite"] = suite_;
    line["check"] = name;
    line["pass"] = pass;
    line["instance"] = std::move(instance);
    line["metrics"] = std::move(metrics);
    out_ << line.dump() << '\n';
    (pass ? summary_.passed : summary_.failed) += 1;
  }

  // Runs `body`; a library exception fails the check with its message.
  void guarded(const std::string& name, const Json& instance, const std::function<void()>& body) {
    try {
      body();
    } catch (const Error& e) {
      check(name, false, instance, {{"error", e.what()}});
    }
  }

  SuiteSummary finish() {
    SuiteSummary s = summary_;
    check("summary", s.ok(), Json::object(), {{"passed", s.passed}, {"failed", s.failed}});
    return s;
  }

 private:
  std::string suite_;
  std::ostream& out_;
  SuiteSummary summary_;
};

SuiteSummary minimax_suite(std::uint64_t seed, std::ostream& out) {
  Emitter em("minimax", out);
  Rng rng(seed);
  for (int i = 0; i < 100; ++i) {
    const Instance in = random_instance(rng, i);
    em.guarded("oracle_agreement", in.json(), [&] {
      const EstimateReport rep = prgm_conjugate_box(in.fam, in.box, in.x);
      const OracleResult orc = grid_minimax(in.fam, in.box, in.x);
      const double argmin_gap = std::abs(orc.argmin_delta - rep.estimate);
      const double sup_at_est = std::max(posterior_regret(in.fam, rep.delta_lo, rep.estimate),
                                         posterior_regret(in.fam, rep.delta_hi, rep.estimate));
      const bool pass = argmin_gap <= orc.resolution_bound &&
                        rep.diagnostics.equalization_residual <= 1e-10 * std::max(1.0, rep.equalized_regret) &&
                        orc.corner_excess <= kCornerTolerance * std::max(1.0, orc.minimax_value) &&
                        rep.delta_lo <= rep.estimate && rep.estimate <= rep.delta_hi &&
                        sup_at_est <= orc.minimax_value + 1e-12 * std::max(1.0, orc.minimax_value);
      em.check("oracle_agreement", pass, in.json(),
               {{"estimate", rep.estimate},
                {"oracle_argmin", orc.argmin_delta},
                {"argmin_gap", argmin_gap},
                {"resolution_bound", orc.resolution_bound},
                {"equalization_residual", rep.diagnostics.equalization_residual},
                {"corner_excess", orc.corner_excess},
                {"sup_regret_at_estimate", sup_at_est},
                {"oracle_minimax_value", orc.minimax_value}});
    });
  }
  return em.finish();
}

struct MapCase {
  std::function<FamilySpec(Rng&)> family;
  std::function<Reparameterization()> map;
};

PriorBox random_jcp_box(Rng& rng, const FamilySpec& fam) {
  switch (fam.kind) {
    case FamilyKind::normal: {
      const double a = uniform(rng, 0.0, 2.0);
      const double l = uniform(rng, -2.0, 2.0);
      return make_box(fam, a, a + uniform(rng, 0.1, 2.0), l, l + uniform(rng, 0.1, 2.0), PriorFlavor::jcp);
    }
    case FamilyKind::exponential: {
      const double a = uniform(rng, 1.0, 2.5);
      const double l = uniform(rng, 0.1, 2.0);
      return make_box(fam, a, a + uniform(rng, 0.1, 3.0), l, l + uniform(rng, 0.1, 2.0), PriorFlavor::jcp);
    }
    case FamilyKind::binomial: {
      const double a = uniform(rng, 2.0, 3.0);
      const double l = uniform(rng, 0.6, 1.0);
      return make_box(fam, a, a + uniform(rng, 0.1, 2.0), l, l + uniform(rng, 0.05, 0.4), PriorFlavor::jcp);
    }
    default: {
      const double a = uniform(rng, 0.5, 2.0);
      const double l = uniform(rng, 0.5, 2.0);
      return make_box(fam, a, a + uniform(rng, 0.1, 2.0), l, l + uniform(rng, 0.1, 2.0), PriorFlavor::jcp);
    }
  }
}

double random_x(Rng& rng, const FamilySpec& fam) {
  switch (fam.kind) {
    case FamilyKind::normal:
      return uniform(rng, -3.0, 3.0);
    case FamilyKind::exponential:
      return uniform(rng, 0.1, 4.0);
    case FamilyKind::binomial:
      return uniform_int(rng, 0, fam.trials);
    default:
      return uniform_int(rng, 0, 8);
  }
}

SuiteSummary invariance_suite(std::uint64_t seed, std::ostream& out) {
  Emitter em("invariance", out);
  Rng rng(seed);
  auto fixed = [](FamilySpec f) { return [f](Rng&) { return f; }; };
  auto binomial = [](Rng& r) {
    const int ns[] = {1, 5, 20};
    return binomial_logit(ns[uniform_int(r, 0, 2)]);
  };
  const std::vector<MapCase> cases{
      {fixed(exponential_rate()), reciprocal_map},
      {fixed(exponential_rate()), [] { return neg_log_over_a_map(1.0); }},
      {fixed(exponential_rate()), [] { return neg_log_over_a_map(-0.5); }},
      {fixed(exponential_rate()), [] { return neg_log_over_a_map(-2.0); }},
      {fixed(exponential_rate()), [] { return affine_map(2.0, 1.0); }},
      {binomial, logit_to_p_map},
      {binomial, [] { return affine_map(-1.0, 0.5); }},
      {fixed(normal_mean_unitvar()), [] { return affine_map(2.0, 1.0); }},
      {fixed(normal_mean_unitvar()), logit_to_p_map},
      {fixed(poisson_neglograte()), logit_to_p_map},
      {fixed(poisson_neglograte()), [] { return affine_map(0.5, -1.0); }},
  };
  for (const auto& c : cases) {
    const Reparameterization map = c.map();
    for (int i = 0; i < 10; ++i) {
      const FamilySpec fam = c.family(rng);
      const PriorBox box = random_jcp_box(rng, fam);
      const double x = random_x(rng, fam);
      Json inst{{"family", fam.name}, {"box", box_json(box)}, {"x", x}, {"transform", map.label}};
      em.guarded("jcp_transport", inst, [&] {
        const EstimateReport rep = iprgm_jcp_box(fam, box, x);
        const TransportResult moved = transport(rep, map);
        const EtaScaleResult direct = eta_scale_prgm(fam, box, x, map);
        const double gap = rel_gap(moved.value, direct.estimate);
        em.check("jcp_transport", gap <= 1e-9 && moved.invariance_guaranteed, inst,
                 {{"transported", moved.value}, {"eta_direct", direct.estimate}, {"relative_gap", gap}});
      });
    }
  }

  // Standard boxes are not invariant; at least one instance must show it.
  const FamilySpec fam = exponential_rate();
  const Reparameterization map = reciprocal_map();
  double worst = 0.0;
  Json worst_instance = Json::object();
  for (int i = 0; i < 20; ++i) {
    const double a = uniform(rng, 2.0, 3.0);
    const double l = uniform(rng, 0.1, 2.0);
    const PriorBox box = make_box(fam, a, a + uniform(rng, 0.5, 3.0), l, l + uniform(rng, 0.5, 2.0));
    const double x = uniform(rng, 0.1, 4.0);
    Json inst{{"family", fam.name}, {"box", box_json(box)}, {"x", x}, {"transform", map.label}};
    em.guarded("standard_control", inst, [&] {
      const double moved = map.forward(prgm_conjugate_box(fam, box, x).estimate);
      const double direct = eta_scale_prgm(fam, box, x, map).estimate;
      const double gap = rel_gap(moved, direct);
      if (gap > worst) {
        worst = gap;
        worst_instance = inst;
      }
    });
  }
  em.check("standard_control_discrepancy", worst > 1e-3, worst_instance,
           {{"max_relative_gap", worst}, {"expected_discrepancy", true}});
  return em.finish();
}

double bump(double th, double c, double w) { return std::max(0.0, 1.0 - std::abs(th - c) / w); }

SuiteSummary bayesianity_suite(std::uint64_t seed, std::ostream& out) {
  Emitter em("bayesianity", out);
  Rng rng(seed);

  struct Fixed {
    FamilySpec fam;
    PriorBox box;
    std::vector<double> xs;
  };
  std::vector<double> normal_xs;
  std::vector<double> positive_xs;
  for (int k = 0; k < 20; ++k) {
    normal_xs.push_back(-4.0 + 0.4 * k + 0.13);
    positive_xs.push_back(0.25 + 0.3 * k);
  }
  std::vector<Fixed> fixed;
  {
    const FamilySpec n = normal_mean_unitvar();
    const FamilySpec e = exponential_rate();
    fixed.push_back({n, make_box(n, 1, 3, 0.5, 0.5), normal_xs});
    fixed.push_back({e, make_box(e, 1, 3, 1, 1), positive_xs});
    fixed.push_back({e, make_box(e, 1, 3, 1, 1, PriorFlavor::jcp), positive_xs});
    for (int i = 0; i < 4; ++i) {
      const double a = uniform(rng, 0.2, 3.0);
      const double b = a + uniform(rng, 0.1, 3.0);
      const double l0 = uniform(rng, -1.0, 1.0);
      fixed.push_back({n, make_box(n, a, b, l0, l0), normal_xs});
      fixed.push_back({e, make_box(e, a, b, 1.0, 1.0), positive_xs});
      fixed.push_back({e, make_box(e, a + 0.5, b + 0.5, 0.5, 0.5, PriorFlavor::jcp), positive_xs});
    }
  }
  for (const auto& f : fixed) {
    Json inst{{"family", f.fam.name}, {"box", box_json(f.box)}, {"x_count", f.xs.size()}};
    em.guarded("data_independent_alpha", inst, [&] {
      const BayesianityCertificate cert = data_independent_alpha(f.fam, f.box, f.xs);
      const double closed = cert.closed_form_alpha.value_or(NAN);
      const bool pass = cert.kind == CertificateKind::data_independent && cert.residual < 1e-8 &&
                        std::abs(cert.witness - closed) <= 1e-8 * std::max(1.0, std::abs(closed)) &&
                        closed >= f.box.alpha_lo && closed <= f.box.alpha_hi;
      em.check("data_independent_alpha", pass, inst,
               {{"alpha_star", cert.witness},
                {"closed_form_alpha", closed},
                {"constancy_spread", cert.constancy_spread},
                {"residual", cert.residual}});
    });
  }

  {
    const FamilySpec fam = binomial_logit(5);
    const PriorBox box = make_box(fam, 1, 3, 0.5, 0.5);
    const std::vector<double> xs{0, 1, 2, 3, 4, 5, 0, 1, 2, 3};
    Json inst{{"family", fam.name}, {"box", box_json(box)}, {"x_count", xs.size()}};
    em.guarded("binomial_spread_reported", inst, [&] {
      const BayesianityCertificate cert = data_independent_alpha(fam, box, xs);
      em.check("binomial_spread_reported", cert.residual < 1e-8, inst,
               {{"constancy_spread", cert.constancy_spread}, {"kind", to_string(cert.kind)}, {"residual", cert.residual}});
    });
  }

  for (int i = 0; i < 30; ++i) {
    FamilySpec fam;
    ConjugatePrior p0;
    ConjugatePrior p1;
    double x = 0.0;
    switch (i % 4) {
      case 0:
        fam = normal_mean_unitvar();
        p0 = make_prior(fam, uniform(rng, 0.2, 2.0), uniform(rng, -1.0, 1.0));
        p1 = make_prior(fam, uniform(rng, 0.2, 2.0), uniform(rng, -1.0, 1.0));
        x = uniform(rng, -2.0, 2.0);
        break;
      case 1:
        fam = exponential_rate();
        p0 = make_prior(fam, uniform(rng, 0.5, 3.0), uniform(rng, 0.5, 2.0));
        p1 = make_prior(fam, uniform(rng, 0.5, 3.0), uniform(rng, 0.5, 2.0));
        x = uniform(rng, 0.2, 3.0);
        break;
      case 2: {
        fam = binomial_logit(5);
        const double a0 = uniform(rng, 1.0, 3.0);
        const double a1 = uniform(rng, 1.0, 3.0);
        p0 = make_prior(fam, a0, uniform(rng, 0.2, 0.8) * a0);
        p1 = make_prior(fam, a1, uniform(rng, 0.2, 0.8) * a1);
        x = uniform_int(rng, 0, 5);
        break;
      }
      default:
        fam = poisson_neglograte();
        p0 = make_prior(fam, uniform(rng, 0.5, 3.0), uniform(rng, 0.5, 2.0));
        p1 = make_prior(fam, uniform(rng, 0.5, 3.0), uniform(rng, 0.5, 2.0));
        x = uniform_int(rng, 0, 6);
        break;
    }
    Json inst{{"family", fam.name}, {"pi0", prior_json(p0)}, {"pi1", prior_json(p1)}, {"x", x}};
    em.guarded("mixture_witness", inst, [&] {
      const double d0 = bayes_estimate(fam, p0, x).estimate;
      const double d1 = bayes_estimate(fam, p1, x).estimate;
      const double delta_pr = prgm_from_bounds(fam, std::min(d0, d1), std::max(d0, d1)).estimate;
      const BayesianityCertificate cert = mixture_witness(fam, p0, p1, x, delta_pr);
      const bool pass = cert.residual < 1e-8 && cert.witness >= 0.0 && cert.witness <= 1.0;
      em.check("mixture_witness", pass, inst,
               {{"delta_pr", delta_pr}, {"t_star", cert.witness}, {"residual", cert.residual}});
    });
  }

  for (int i = 0; i < 20; ++i) {
    const Instance in = random_instance(rng, i);
    em.guarded("connected_path_witness", in.json(), [&] {
      const EstimateReport rep = prgm_conjugate_box(in.fam, in.box, in.x);
      const BayesianityCertificate cert = connected_path_witness(in.fam, in.box, in.x, rep.estimate);
      const double again = bayes_estimate(in.fam, *cert.witness_prior, in.x).estimate;
      const double gap = rel_gap(again, rep.estimate);
      em.check("connected_path_witness", cert.residual < 1e-8 && gap <= 1e-8, in.json(),
               {{"delta_pr", rep.estimate},
                {"kind", to_string(cert.kind)},
                {"witness", cert.witness},
                {"witness_prior", prior_json(*cert.witness_prior)},
                {"residual", cert.residual},
                {"rerun_relative_gap", gap}});
    });
  }

  for (int i = 0; i < 6; ++i) {
    const FamilySpec fam = i % 2 == 0 ? exponential_rate() : normal_mean_unitvar();
    const ConjugatePrior prior = make_prior(fam, uniform(rng, 1.0, 3.0), uniform(rng, 0.5, 2.0));
    const double x = uniform(rng, 0.5, 2.0);
    const double eps = i < 3 ? 1e-3 : 1e-5;
    const double c = fam.kind == FamilyKind::exponential ? uniform(rng, 0.5, 1.5) : uniform(rng, -1.0, 1.0);
    const double w = 0.25;
    Json inst{{"family", fam.name}, {"prior", prior_json(prior)}, {"x", x}, {"eps", eps}, {"bump_center", c}};
    em.guarded("psi_continuity", inst, [&] {
      const ContinuityCheck chk =
          psi_perturbation_check(fam, prior, x, eps, [&](double th) { return bump(th, c, w); }, Interval{c - w, c + w});
      em.check("psi_continuity", chk.holds, inst,
               {{"psi", chk.psi}, {"observed_change", chk.observed_change}, {"bound", chk.bound}});
    });
  }
  return em.finish();
}

}  // namespace

SuiteSummary run_suite(std::string_view name, std::uint64_t seed, std::ostream& out) {
  if (name == "minimax") return minimax_suite(seed, out);
  if (name == "invariance") return invariance_suite(seed, out);
  if (name == "bayesianity") return bayesianity_suite(seed, out);
  if (name == "all") {
    SuiteSummary total;
    for (auto* suite : {minimax_suite, invariance_suite, bayesianity_suite}) {
      const SuiteSummary s = suite(seed, out);
      total.passed += s.passed;
      total.failed += s.failed;
    }
    return total;
  }
  throw ValidationError("unknown suite '" + std::string(name) + "'; expected minimax, invariance, bayesianity or all");
}

}  // namespace prgm
