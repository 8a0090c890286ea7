// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

namespace spectrarec {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Names a gradient check (prefix match) whose analytic gradient is
/// deliberately perturbed, e.g. SPECTRAREC_INJECT_FAULT=gradient_dense.
inline constexpr const char* kInjectFaultEnv = "SPECTRAREC_INJECT_FAULT";

/// Built-in verification: parameter counts, metric oracles, gradient
/// checks, scheduler endpoints and serialization round-trips. Each result
/// is reported through `on_result` as soon as it is known.
std::vector<CheckResult> run_checks(const std::function<void(const CheckResult&)>& on_result = {});

}  // namespace spectrarec
