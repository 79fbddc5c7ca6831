#pragma once

#include <optional>
#include <string>

#include "config.hpp"

namespace rwdre::cli {

enum ExitCode : int { kPass = 0, kAcceptanceFailure = 1, kConfigFailure = 2, kOverrunFailure = 3 };

struct RunOptions {
    std::size_t replica = 0;  // replica simulated by `simulate`
    bool write = true;        // write artifacts to config.out_dir
};

struct RunResult {
    int exit_code = kPass;
    Json summary;
    std::string summary_text;  // exact bytes of summary.json
    std::string summary_hash;
};

// Runs one of simulate, estimate, verify, mixing and writes summary.json, the
// command's CSV tables and manifest.json into the output directory.
RunResult run_experiment(const std::string& command, const ExperimentConfig& config, const RunOptions& options = {});

// Reruns the command recorded in a manifest and compares summary hashes.
// Returns kPass on a match and kAcceptanceFailure otherwise.
int replay(const std::string& manifest_path, const std::optional<std::string>& out_dir);

}  // namespace rwdre::cli
