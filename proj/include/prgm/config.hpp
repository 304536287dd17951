#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "prgm/bayesianity.hpp"
#include "prgm/errors.hpp"
#include "prgm/estimators.hpp"
#include "prgm/exp_family.hpp"
#include "prgm/oracle.hpp"
#include "prgm/priors.hpp"

namespace prgm {

using Json = nlohmann::ordered_json;

enum class OutputFormat { json, csv };

OutputFormat parse_format(std::string_view text);

/// Declarative description of one run. Anything left empty can be supplied
/// by command-line flags.
struct RunConfig {
  std::optional<FamilySpec> family;
  std::optional<double> x;
  std::optional<ConjugatePrior> prior;
  std::optional<PriorBox> box;
  std::optional<std::string> transform;
  std::optional<std::string> output_path;
  OutputFormat format = OutputFormat::json;
  GridSpec grid;
  std::uint64_t seed = 42;
};

/// Family from a name or from a custom object
///   {"name", "support": [lo, hi], "log_beta", "h", "h_prime"?, "h_inv"?, "r",
///    "jeffreys_shift": [a, b]?, "h_range": [lo, hi]?}
/// where log_beta, h and h_prime are expressions in theta, h_inv in y and r in x.
/// Support and range ends may be null or "-inf" / "inf".
FamilySpec family_from_json(const Json& j);

/// Parses a whole config document. Family must come before prior/box, which
/// are validated against it.
RunConfig run_config_from_json(const Json& j);

/// Reads and parses a config file. Syntax errors become ParseError with the
/// byte offset; unreadable files raise IoError.
RunConfig load_run_config(const std::string& path);

/// "a=1,l=2" (also alpha=, lambda=).
ConjugatePrior parse_prior_flag(const FamilySpec& fam, std::string_view text, PriorFlavor flavor);

/// "a=1:3,l=1:2"; a fixed edge may be written "a0=2" or "l0=1".
PriorBox parse_box_flag(const FamilySpec& fam, std::string_view text, PriorFlavor flavor);

Json to_json(const Diagnostics& d);
Json to_json(const EstimateReport& rep);
/// Report plus {"transformed": {label, estimate, invariance_guaranteed}}.
Json to_json(const EstimateReport& rep, const std::string& map_label, const TransportResult& moved);
Json to_json(const BayesianityCertificate& cert);
Json to_json(const OracleResult& res);

}  // namespace prgm
