#pragma once

#include <iosfwd>

namespace hsi {

/// Exit codes of run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

/// hsi [--config PATH] [--out DIR] [--seed N] [--threads N] [--print-config] <subcommand>
///
/// Subcommands: generate, calibrate, segment, preprocess, annotate, pca, train,
/// predict, gridsearch, report.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hsi
