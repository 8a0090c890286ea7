// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace spectrarec::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Parses argv and runs one subcommand: gen, train, finetune, eval,
/// report, spectra or check.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spectrarec::cli
