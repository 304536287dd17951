#pragma once

#include <cstdint>
#include <ostream>
#include <string_view>

namespace prgm {

inline constexpr std::uint64_t kDefaultSeed = 42;

struct SuiteSummary {
  int passed = 0;
  int failed = 0;
  bool ok() const { return failed == 0; }
};

/// Runs "minimax", "invariance", "bayesianity" or "all". Every check writes
/// one JSON line {"suite", "check", "pass", "instance", "metrics"}; each suite
/// ends with a "summary" line. Output depends only on `seed`.
SuiteSummary run_suite(std::string_view name, std::uint64_t seed, std::ostream& out);

}  // namespace prgm
