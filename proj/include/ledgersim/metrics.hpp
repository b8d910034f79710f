#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace ledgersim {

struct Metrics {
  uint64_t blocks_committed = 0;
  uint64_t committed_valid = 0;
  std::map<std::string, uint64_t> committed_invalid;   // reason -> count
  std::map<uint64_t, uint64_t> valid_per_window;       // window index -> txs
  std::map<uint64_t, uint64_t> invalid_per_window;
  std::map<uint64_t, uint64_t> forks_per_window;
  std::map<std::string, uint64_t> invalid_by_client;
  std::vector<std::string> blacklisted;                // threshold crossers
  uint64_t endorsement_failures = 0;
  uint64_t broadcast_denied = 0;
  uint32_t max_gossip_hops = 0;
  uint64_t fork_events = 0;
  double fork_persistence_mean = 0.0;
  uint64_t duration = 0;
  uint64_t window_size = 50;

  uint64_t committed_invalid_total() const {
    uint64_t n = 0;
    for (const auto& [reason, count] : committed_invalid) n += count;
    return n;
  }
};

// metrics.csv: window,committed_valid,committed_invalid,forks
void write_metrics_csv(const std::filesystem::path& file, const Metrics& m);
// blacklist.csv: client,invalid_count
void write_blacklist_csv(const std::filesystem::path& file, const Metrics& m,
                         uint32_t threshold);
void write_summary(const std::filesystem::path& file, const Metrics& m);

std::string metrics_csv_string(const Metrics& m);

// Rebuilds ledger-derived counters from a run directory (blocks + verdicts);
// the audit path behind the `report` subcommand.
Metrics recompute_metrics(const std::filesystem::path& run_dir,
                          uint64_t window_size);

}  // namespace ledgersim
