#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "prgm/bayesianity.hpp"
#include "prgm/config.hpp"
#include "prgm/errors.hpp"
#include "prgm/estimators.hpp"
#include "prgm/losses.hpp"
#include "prgm/oracle.hpp"
#include "prgm/suites.hpp"

namespace {

using namespace prgm;

enum ExitCode { kOk = 0, kVerificationFailed = 1, kConfigError = 2, kNumericError = 3, kIoError = 4 };

struct Flags {
  std::string config;
  std::string family;
  std::optional<double> x;
  std::string prior;
  std::string box;
  std::string flavor;
  std::string transform;
  std::optional<int> grid_n;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
  // loss
  std::optional<double> theta;
  std::optional<double> delta;
  bool with_oracle = false;
  // certify
  std::vector<double> x_grid;
  // verify
  std::string suite = "all";
  std::string curve_out;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration");
  cmd->add_option("--family", f.family, "normal, exponential, poisson, binomial:N");
  cmd->add_option("--x", f.x, "Observation");
  cmd->add_option("--flavor", f.flavor, "Prior flavor: standard or jcp");
  cmd->add_option("--out", f.out, "Output file (default stdout)");
  cmd->add_option("--format", f.format, "json or csv");
}

RunConfig resolve(const Flags& f, PriorFlavor default_flavor) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : load_run_config(f.config);
  if (!f.family.empty()) cfg.family = builtin_family(f.family);
  if (f.x) cfg.x = *f.x;
  const PriorFlavor flavor = f.flavor.empty() ? default_flavor : parse_flavor(f.flavor);
  if ((!f.prior.empty() || !f.box.empty()) && !cfg.family) throw ValidationError("--family is required");
  if (!f.prior.empty()) cfg.prior = parse_prior_flag(*cfg.family, f.prior, flavor);
  if (!f.box.empty()) cfg.box = parse_box_flag(*cfg.family, f.box, flavor);
  if (!f.transform.empty()) cfg.transform = f.transform;
  if (f.grid_n) {
    cfg.grid.n_delta = *f.grid_n;
    validate(cfg.grid);
  }
  if (f.seed) cfg.seed = *f.seed;
  if (!f.out.empty()) cfg.output_path = f.out;
  if (!f.format.empty()) cfg.format = parse_format(f.format);
  return cfg;
}

const FamilySpec& need_family(const RunConfig& cfg) {
  if (!cfg.family) throw ValidationError("a family is required (--family or config)");
  return *cfg.family;
}

double need_x(const RunConfig& cfg) {
  if (!cfg.x) throw ValidationError("an observation is required (--x or config)");
  return *cfg.x;
}

const PriorBox& need_box(const RunConfig& cfg) {
  if (!cfg.box) throw ValidationError("a prior box is required (--box or config)");
  return *cfg.box;
}

void emit(const RunConfig& cfg, const std::string& text) {
  if (!cfg.output_path) {
    std::cout << text;
    return;
  }
  std::ofstream out(*cfg.output_path);
  if (!out) throw IoError("cannot open " + *cfg.output_path + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + *cfg.output_path);
}

void require_json(const RunConfig& cfg, const char* command) {
  if (cfg.format != OutputFormat::json) throw ValidationError(std::string(command) + " only writes json");
}

void emit_report(const RunConfig& cfg, const EstimateReport& rep) {
  require_json(cfg, "this command");
  Json j;
  if (cfg.transform) {
    const Reparameterization map = parse_reparameterization(*cfg.transform);
    j = to_json(rep, map.label, transport(rep, map));
  } else {
    j = to_json(rep);
  }
  emit(cfg, j.dump(2) + "\n");
}

int run_bayes(const Flags& f) {
  const RunConfig cfg = resolve(f, PriorFlavor::standard);
  if (!cfg.prior) throw ValidationError("a prior is required (--prior or config)");
  emit_report(cfg, bayes_estimate(need_family(cfg), *cfg.prior, need_x(cfg)));
  return kOk;
}

int run_prgm(const Flags& f) {
  const RunConfig cfg = resolve(f, PriorFlavor::standard);
  const PriorBox& box = need_box(cfg);
  const EstimateReport rep = box.flavor == PriorFlavor::jcp ? iprgm_jcp_box(need_family(cfg), box, need_x(cfg))
                                                            : prgm_conjugate_box(need_family(cfg), box, need_x(cfg));
  emit_report(cfg, rep);
  return kOk;
}

int run_iprgm(const Flags& f) {
  const RunConfig cfg = resolve(f, PriorFlavor::jcp);
  const FamilySpec& fam = need_family(cfg);
  PriorBox box = need_box(cfg);
  if (box.flavor != PriorFlavor::jcp) {
    if (!f.flavor.empty()) throw ValidationError("iprgm needs a Jeffreys-conjugate box; drop --flavor standard");
    box = make_box(fam, box.alpha_lo, box.alpha_hi, box.lambda_lo, box.lambda_hi, PriorFlavor::jcp);
  }
  emit_report(cfg, iprgm_jcp_box(fam, box, need_x(cfg)));
  return kOk;
}

int run_certify(const Flags& f) {
  const RunConfig cfg = resolve(f, PriorFlavor::standard);
  require_json(cfg, "certify");
  const FamilySpec& fam = need_family(cfg);
  const PriorBox& box = need_box(cfg);
  BayesianityCertificate cert;
  if (!f.x_grid.empty()) {
    cert = data_independent_alpha(fam, box, f.x_grid);
  } else {
    const double x = need_x(cfg);
    const EstimateReport rep =
        box.flavor == PriorFlavor::jcp ? iprgm_jcp_box(fam, box, x) : prgm_conjugate_box(fam, box, x);
    cert = connected_path_witness(fam, box, x, rep.estimate);
  }
  emit(cfg, to_json(cert).dump(2) + "\n");
  return kOk;
}

int run_loss(const Flags& f) {
  const RunConfig cfg = resolve(f, PriorFlavor::standard);
  require_json(cfg, "loss");
  const FamilySpec& fam = need_family(cfg);
  if (!f.theta || !f.delta) throw ValidationError("loss eval needs --theta and --delta");
  Json j;
  j["family"] = fam.name;
  j["theta"] = *f.theta;
  j["delta"] = *f.delta;
  j["loss"] = intrinsic_loss(fam, *f.theta, *f.delta);
  if (f.with_oracle) j["kl_quadrature"] = kl_quadrature(fam, *f.theta, *f.delta);
  emit(cfg, j.dump(2) + "\n");
  return kOk;
}

int run_regret_curve(const Flags& f) {
  Flags g = f;
  if (g.format.empty()) g.format = "csv";
  const RunConfig cfg = resolve(g, PriorFlavor::standard);
  const RegretCurve curve = regret_curve(need_family(cfg), need_box(cfg), need_x(cfg), cfg.grid);
  if (cfg.format == OutputFormat::csv) {
    emit(cfg, curve.to_csv());
  } else {
    Json rows = Json::array();
    for (const auto& r : curve.rows) {
      rows.push_back({{"delta", r.delta}, {"sup_regret", r.sup_regret}, {"argmax_corner", r.argmax_corner}});
    }
    emit(cfg, Json{{"summary", to_json(curve.summary)}, {"rows", rows}}.dump() + "\n");
  }
  return kOk;
}

int run_verify(const Flags& f) {
  const RunConfig cfg = resolve(f, PriorFlavor::standard);
  require_json(cfg, "verify");
  std::ostringstream lines;
  const SuiteSummary summary = run_suite(f.suite, cfg.seed, lines);
  emit(cfg, lines.str());
  if (!f.curve_out.empty()) {
    const FamilySpec fam = exponential_rate();
    const RegretCurve curve = regret_curve(fam, make_box(fam, 1, 3, 1, 2), 2.0, cfg.grid);
    std::ofstream out(f.curve_out);
    if (!out) throw IoError("cannot open " + f.curve_out + " for writing");
    out << curve.to_csv();
    if (!out) throw IoError("failed writing " + f.curve_out);
  }
  return summary.ok() ? kOk : kVerificationFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayes, posterior-regret gamma-minimax and intrinsic PRGM estimators for exponential families"};
  app.require_subcommand(1);
  Flags f;

  auto* bayes = app.add_subcommand("bayes", "Bayes estimate under one conjugate prior");
  add_common(bayes, f);
  bayes->add_option("--prior", f.prior, "a=ALPHA,l=LAMBDA");
  bayes->add_option("--transform", f.transform, "Report the estimate on a transformed scale too");

  auto* prgm_cmd = app.add_subcommand("prgm", "PRGM estimate over a conjugate box");
  add_common(prgm_cmd, f);
  prgm_cmd->add_option("--box", f.box, "a=LO:HI,l=LO:HI (a0= or l0= for a fixed edge)");
  prgm_cmd->add_option("--transform", f.transform, "Report the estimate on a transformed scale too");

  auto* iprgm = app.add_subcommand("iprgm", "Intrinsic PRGM over a Jeffreys-conjugate box");
  add_common(iprgm, f);
  iprgm->add_option("--box", f.box, "a=LO:HI,l=LO:HI (a0= or l0= for a fixed edge)");
  iprgm->add_option("--transform", f.transform, "reciprocal, log, neg_log_over_a:A, affine:A,B, logit_to_p");

  auto* certify = app.add_subcommand("certify", "Bayesianity certificate for the PRGM estimate");
  add_common(certify, f);
  certify->add_option("--box", f.box, "a=LO:HI,l=LO:HI (a0= or l0= for a fixed edge)");
  certify->add_option("--x-grid", f.x_grid, "Observations for a data-independent certificate")->delimiter(',');

  auto* loss = app.add_subcommand("loss", "Evaluate the intrinsic loss");
  add_common(loss, f);
  std::string loss_action = "eval";
  loss->add_option("action", loss_action, "eval")->check(CLI::IsMember({"eval"}));
  loss->add_option("--theta", f.theta, "True natural parameter");
  loss->add_option("--delta", f.delta, "Reported value");
  loss->add_flag("--oracle", f.with_oracle, "Also integrate the divergence numerically");

  auto* curve = app.add_subcommand("regret-curve", "Sup-regret over a delta grid");
  add_common(curve, f);
  curve->add_option("--box", f.box, "a=LO:HI,l=LO:HI (a0= or l0= for a fixed edge)");
  curve->add_option("--grid-n", f.grid_n, "Number of delta points");

  auto* verify = app.add_subcommand("verify", "Run verification suites");
  add_common(verify, f);
  verify->add_option("suite", f.suite, "minimax, invariance, bayesianity or all")
      ->check(CLI::IsMember({"minimax", "invariance", "bayesianity", "all"}));
  verify->add_option("--seed", f.seed, "64-bit seed (default 42)");
  verify->add_option("--grid-n", f.grid_n, "Delta points for --curve-out");
  verify->add_option("--curve-out", f.curve_out, "Also write a reference regret curve as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (bayes->parsed()) return run_bayes(f);
    if (prgm_cmd->parsed()) return run_prgm(f);
    if (iprgm->parsed()) return run_iprgm(f);
    if (certify->parsed()) return run_certify(f);
    if (loss->parsed()) return run_loss(f);
    if (curve->parsed()) return run_regret_curve(f);
    if (verify->parsed()) return run_verify(f);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const VerificationFailure& e) {
    std::cerr << "verification failed: " << e.what() << '\n';
    return kVerificationFailed;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const UnsupportedFamilyError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumericError;
  } catch (const ConvergenceError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumericError;
  }
  return kConfigError;
}
