#pragma once

#include "slowfast/config.hpp"

#include <string>

namespace slowfast {

// Exit codes shared by the library runner and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericError = 3;
inline constexpr int kExitAcceptanceFailure = 4;

struct RunOutcome {
    int exit_code = kExitOk;
    std::string out_dir;
    std::string message;
};

// Execute one experiment command (simulate | frozen | average | skeleton |
// rate | sweep | flow | check) against a parsed config. Artifacts land in
// <out>/<command>-<confighash>/ together with a manifest; a persisted config
// re-runs to byte-identical numeric outputs at any parallelism setting.
RunOutcome run_command(const std::string& command, Config cfg);

}  // namespace slowfast
