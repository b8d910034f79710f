#pragma once

#include "ledgersim/metrics.hpp"
#include "ledgersim/scenario.hpp"

namespace ledgersim {

struct RunOptions {
  bool write_artifacts = true;
  bool tracing = true;
};

struct RunResult {
  Metrics metrics;
  Bytes ledger_hash;  // reference peer chain (hashes + verdict metadata)
  Bytes state_hash;
  Bytes trace_hash;
  uint64_t final_height = 0;
  bool faults_healed = true;  // every fault healed before the run ended
  std::vector<std::string> violations;  // safety invariant breaches, empty = ok

  bool ok() const { return violations.empty(); }
};

// Runs one scenario to completion and, when out_dir is non-empty, writes the
// artifact set: blocks.dat, index.dat, state.dump, verdicts.csv, trace.log,
// metrics.csv, blacklist.csv, summary.txt.
RunResult run_scenario(const ScenarioConfig& config,
                       const std::filesystem::path& out_dir,
                       const RunOptions& options = {});

// Rebuilds state from a saved ledger and compares against state.dump.
struct ReplayReport {
  bool chain_ok = false;
  bool state_ok = false;
  std::string detail;
};
ReplayReport replay_run_dir(const std::filesystem::path& run_dir);

}  // namespace ledgersim
