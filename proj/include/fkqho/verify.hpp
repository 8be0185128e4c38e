#pragma once

#include "fkqho/model.hpp"

#include <string>
#include <vector>

namespace fkqho {

struct VerifyResult {
  std::string name;
  bool passed;
  std::string detail;
};

/// Runs every module's invariant suite against one model. `full` adds the
/// quadrature- and sampling-heavy checks (kernel normalization, generator
/// finite differences, ensemble determinism).
std::vector<VerifyResult> run_verification(const ModelParams& params, bool full);

inline bool all_passed(const std::vector<VerifyResult>& results) {
  for (const auto& r : results)
    if (!r.passed) return false;
  return true;
}

}  // namespace fkqho
