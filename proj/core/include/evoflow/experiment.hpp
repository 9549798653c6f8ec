#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace evoflow {

/// The experiment kinds the batch runner understands.
std::vector<std::string> experiment_kinds();

/// The JSON schema fragment and a runnable example config for a kind,
/// pretty-printed. Throws UsageError on unknown kinds.
std::string describe_kind(const std::string& kind);

struct RunResult {
    std::string run_dir;
    std::vector<std::string> artifacts;  // file names written inside run_dir
};

/// Parses, validates, and executes a config file. Output goes to a fresh
/// run directory (named kind-confighash-timestamp) under the output root:
/// the OUT_DIR environment variable if set, else the config's output_dir,
/// else "runs". Validation failures throw UsageError naming the field.
RunResult run_experiment(const std::string& config_path);

/// Same, from in-memory JSON text. A non-empty out_root_override wins
/// over every other root resolution (used by tests).
RunResult run_experiment_text(const std::string& config_json,
                              const std::string& out_root_override = "");

/// Runs the built-in oracle suite (digit arithmetic, triple-sum mixing,
/// eigenvalue checks), printing one pass/fail line per check. Returns
/// true iff all pass. A non-empty inject_fault forces the named check to
/// fail (test hook).
bool run_verify(std::ostream& os, const std::string& inject_fault = "");

} // namespace evoflow
