#include "prgm/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "prgm/expression.hpp"

namespace prgm {

namespace {

double parse_number(std::string_view text, std::string_view what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw ValidationError("cannot parse " + std::string(what) + " '" + std::string(text) + "' as a number");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t next = text.find(sep, pos);
    out.push_back(text.substr(pos, next == std::string_view::npos ? text.npos : next - pos));
    if (next == std::string_view::npos) return out;
    pos = next + 1;
  }
}

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ValidationError("unknown key '" + key + "' in " + where);
  }
}

double number_at(const Json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ValidationError(where + " is missing '" + key + "'");
  const Json& v = j.at(key);
  if (!v.is_number()) throw ValidationError(where + "." + key + " must be a number");
  return v.get<double>();
}

// Interval end: a number, null or "-inf"/"inf".
double interval_end(const Json& v, double infinite, const std::string& where) {
  if (v.is_null()) return infinite;
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw ValidationError(where + " ends must be numbers, null, \"-inf\" or \"inf\"");
}

Interval interval_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ValidationError(where + " must be a two-element array");
  Interval iv{interval_end(j[0], -kInf, where), interval_end(j[1], kInf, where)};
  if (!(iv.lo < iv.hi)) throw ValidationError(where + " needs lo < hi");
  return iv;
}

ScalarMap expression_at(const Json& j, const std::string& key, const std::vector<std::string>& vars,
                        const std::string& where) {
  const Json& v = j.at(key);
  if (!v.is_string()) throw ValidationError(where + "." + key + " must be an expression string");
  try {
    return parse_expression(v.get<std::string>(), vars);
  } catch (const ParseError& e) {
    throw ParseError(where + "." + key + ": " + e.what(), e.position());
  }
}

std::pair<double, double> edge_from_json(const Json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), v.get<double>()};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ValidationError(where + " must be a number or a [lo, hi] array");
}

PriorFlavor flavor_from_json(const Json& j) {
  if (!j.contains("flavor")) return PriorFlavor::standard;
  if (!j.at("flavor").is_string()) throw ValidationError("flavor must be a string");
  return parse_flavor(j.at("flavor").get<std::string>());
}

}  // namespace

OutputFormat parse_format(std::string_view text) {
  if (text == "json") return OutputFormat::json;
  if (text == "csv") return OutputFormat::csv;
  throw ValidationError("unknown output format '" + std::string(text) + "'; expected json or csv");
}

FamilySpec family_from_json(const Json& j) {
  if (j.is_string()) return builtin_family(j.get<std::string>());
  const std::string where = "family";
  check_keys(j, {"name", "support", "log_beta", "h", "h_prime", "h_inv", "r", "jeffreys_shift", "h_range"}, where);
  for (const char* key : {"name", "support", "log_beta", "h", "r"}) {
    if (!j.contains(key)) throw ValidationError("custom family is missing '" + std::string(key) + "'");
  }
  FamilySpec fam;
  if (!j.at("name").is_string()) throw ValidationError("family.name must be a string");
  fam.name = j.at("name").get<std::string>();
  fam.kind = FamilyKind::custom;
  fam.theta_support = interval_from_json(j.at("support"), "family.support");
  fam.log_beta = expression_at(j, "log_beta", theta_variables(), where);
  fam.h = expression_at(j, "h", theta_variables(), where);
  fam.r = expression_at(j, "r", {"x"}, where);
  if (j.contains("h_prime")) {
    fam.h_prime = expression_at(j, "h_prime", theta_variables(), where);
  } else {
    warn("family " + fam.name + " has no h_prime; using a central finite difference of h");
    fam.h_prime = finite_difference_h_prime(fam.h);
  }
  if (j.contains("h_inv")) fam.h_inv = expression_at(j, "h_inv", {"y"}, where);
  if (j.contains("jeffreys_shift")) {
    const Json& s = j.at("jeffreys_shift");
    if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number()) {
      throw ValidationError("family.jeffreys_shift must be [alpha_shift, lambda_shift]");
    }
    fam.jeffreys_shift = JeffreysShift{s[0].get<double>(), s[1].get<double>()};
  }
  fam.h_range = j.contains("h_range") ? interval_from_json(j.at("h_range"), "family.h_range")
                                      : estimate_h_range(fam.h, fam.theta_support);
  fam.propriety_note = "no propriety check for custom families";
  return fam;
}

RunConfig run_config_from_json(const Json& j) {
  check_keys(j, {"family", "x", "prior", "box", "transform", "output", "grid", "seed"}, "config");
  RunConfig cfg;
  if (j.contains("family")) cfg.family = family_from_json(j.at("family"));
  if (j.contains("x")) cfg.x = number_at(j, "x", "config");
  if ((j.contains("prior") || j.contains("box")) && !cfg.family) {
    throw ValidationError("config needs a family to validate prior or box");
  }
  if (j.contains("prior")) {
    const Json& p = j.at("prior");
    check_keys(p, {"alpha", "lambda", "flavor"}, "prior");
    cfg.prior = make_prior(*cfg.family, number_at(p, "alpha", "prior"), number_at(p, "lambda", "prior"),
                           flavor_from_json(p));
  }
  if (j.contains("box")) {
    const Json& b = j.at("box");
    check_keys(b, {"alpha", "lambda", "flavor"}, "box");
    if (!b.contains("alpha") || !b.contains("lambda")) throw ValidationError("box needs alpha and lambda");
    auto [alo, ahi] = edge_from_json(b.at("alpha"), "box.alpha");
    auto [llo, lhi] = edge_from_json(b.at("lambda"), "box.lambda");
    cfg.box = make_box(*cfg.family, alo, ahi, llo, lhi, flavor_from_json(b));
  }
  if (j.contains("transform")) {
    if (!j.at("transform").is_string()) throw ValidationError("transform must be a string");
    cfg.transform = j.at("transform").get<std::string>();
    parse_reparameterization(*cfg.transform);
  }
  if (j.contains("output")) {
    const Json& o = j.at("output");
    if (o.is_string()) {
      cfg.output_path = o.get<std::string>();
    } else {
      check_keys(o, {"path", "format"}, "output");
      if (o.contains("path")) cfg.output_path = o.at("path").get<std::string>();
      if (o.contains("format")) cfg.format = parse_format(o.at("format").get<std::string>());
    }
  }
  if (j.contains("grid")) {
    const Json& g = j.at("grid");
    check_keys(g, {"n_delta", "n_corner", "delta_margin"}, "grid");
    if (g.contains("n_delta")) cfg.grid.n_delta = g.at("n_delta").get<int>();
    if (g.contains("n_corner")) cfg.grid.n_corner = g.at("n_corner").get<int>();
    if (g.contains("delta_margin")) cfg.grid.delta_margin = g.at("delta_margin").get<double>();
    validate(cfg.grid);
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ValidationError("seed must be a non-negative integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  Json j;
  try {
    j = Json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("config " + path + ": " + e.what(), e.byte > 0 ? e.byte - 1 : 0);
  }
  try {
    return run_config_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config " + path + ": " + e.what());
  }
}

ConjugatePrior parse_prior_flag(const FamilySpec& fam, std::string_view text, PriorFlavor flavor) {
  std::optional<double> alpha;
  std::optional<double> lambda;
  for (auto part : split(text, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) throw ValidationError("prior entry '" + std::string(part) + "' needs key=value");
    const auto key = part.substr(0, eq);
    const double v = parse_number(part.substr(eq + 1), "prior value");
    if (key == "a" || key == "alpha") {
      alpha = v;
    } else if (key == "l" || key == "lambda") {
      lambda = v;
    } else {
      throw ValidationError("unknown prior key '" + std::string(key) + "'; expected a or l");
    }
  }
  if (!alpha || !lambda) throw ValidationError("prior needs both a= and l=");
  return make_prior(fam, *alpha, *lambda, flavor);
}

PriorBox parse_box_flag(const FamilySpec& fam, std::string_view text, PriorFlavor flavor) {
  std::optional<std::pair<double, double>> alpha;
  std::optional<std::pair<double, double>> lambda;
  for (auto part : split(text, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) throw ValidationError("box entry '" + std::string(part) + "' needs key=value");
    const auto key = part.substr(0, eq);
    const auto value = part.substr(eq + 1);
    std::pair<double, double> edge;
    const auto colon = value.find(':');
    if (colon == std::string_view::npos) {
      const double v = parse_number(value, "box value");
      edge = {v, v};
    } else {
      edge = {parse_number(value.substr(0, colon), "box value"), parse_number(value.substr(colon + 1), "box value")};
    }
    if (key == "a" || key == "a0" || key == "alpha") {
      alpha = edge;
    } else if (key == "l" || key == "l0" || key == "lambda") {
      lambda = edge;
    } else {
      throw ValidationError("unknown box key '" + std::string(key) + "'; expected a, a0, l or l0");
    }
  }
  if (!alpha || !lambda) throw ValidationError("box needs an alpha edge (a= or a0=) and a lambda edge (l= or l0=)");
  return make_box(fam, alpha->first, alpha->second, lambda->first, lambda->second, flavor);
}

Json to_json(const Diagnostics& d) {
  Json j;
  j["iterations"] = d.iterations;
  j["equalization_residual"] = d.equalization_residual;
  j["degenerate_class"] = d.degenerate_class;
  j["root_find_fallback"] = d.root_find_fallback;
  j["prior_flavor"] = d.prior_flavor ? Json(to_string(*d.prior_flavor)) : Json(nullptr);
  return j;
}

Json to_json(const EstimateReport& rep) {
  Json j;
  j["estimate"] = rep.estimate;
  j["delta_lo"] = rep.delta_lo;
  j["delta_hi"] = rep.delta_hi;
  j["equalized_regret"] = rep.equalized_regret;
  j["method"] = to_string(rep.method);
  j["diagnostics"] = to_json(rep.diagnostics);
  return j;
}

Json to_json(const EstimateReport& rep, const std::string& map_label, const TransportResult& moved) {
  Json j = to_json(rep);
  j["transformed"] = {{"label", map_label},
                      {"estimate", moved.value},
                      {"invariance_guaranteed", moved.invariance_guaranteed}};
  return j;
}

Json to_json(const BayesianityCertificate& cert) {
  Json j;
  j["kind"] = to_string(cert.kind);
  j["witness"] = cert.witness;
  j["residual"] = cert.residual;
  j["constancy_spread"] = cert.constancy_spread;
  if (cert.witness_prior) {
    j["witness_prior"] = {{"alpha", cert.witness_prior->alpha},
                          {"lambda", cert.witness_prior->lambda},
                          {"flavor", to_string(cert.witness_prior->flavor)}};
  } else {
    j["witness_prior"] = nullptr;
  }
  if (!cert.per_x_alpha.empty()) j["per_x_alpha"] = cert.per_x_alpha;
  if (cert.closed_form_alpha) j["closed_form_alpha"] = *cert.closed_form_alpha;
  return j;
}

Json to_json(const OracleResult& res) {
  Json j;
  j["argmin_delta"] = res.argmin_delta;
  j["minimax_value"] = res.minimax_value;
  j["resolution_bound"] = res.resolution_bound;
  j["value_resolution_bound"] = res.value_resolution_bound;
  j["sup_attained_at"] = res.sup_attained_at;
  j["corner_excess"] = res.corner_excess;
  return j;
}

}  // namespace prgm
