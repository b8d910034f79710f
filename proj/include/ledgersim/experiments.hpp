#pragma once

#include "ledgersim/runner.hpp"

namespace ledgersim {

// Randomized crash/partition run against a 3-orderer CFT channel (f = 1).
// Faults stay within tolerance and always heal, so both the safety properties
// and Validity must hold.
struct SafetyRunReport {
  std::vector<std::string> violations;
  uint64_t final_height = 0;
  uint64_t delivered_txs = 0;
};
SafetyRunReport ordering_safety_run(uint64_t seed);

// Single-miner difficulty feedback loop.
struct PowConvergenceReport {
  std::vector<uint64_t> intervals;  // ticks between consecutive blocks
  double mean_interval_after_warmup = 0.0;  // after 3 retarget windows
  uint32_t final_difficulty = 0;
  std::vector<uint32_t> difficulty_trajectory;
};
PowConvergenceReport pow_convergence_run(uint64_t seed, PowParams params,
                                         uint64_t attempts_per_tick,
                                         uint32_t measured_windows = 10);

// Two competing branches; rational validators extend only the fork-choice
// winner when slashing is armed, everything otherwise (plus one greedy
// validator who double-signs and gets slashed). Returns slots until one
// branch leads by 3 blocks.
uint64_t nothing_at_stake_run(uint64_t seed, bool slashing_enabled,
                              uint64_t max_slots = 400);

struct GossipReport {
  uint32_t rounds = 0;  // max hop count at first receipt
  bool all_received = false;
};
GossipReport gossip_dissemination_run(uint64_t seed, size_t peer_count,
                                      uint32_t fanout);

// Delivered valid transactions per tick for a CFT channel of the given size
// under a per-node per-tick message cap (the bandwidth bound).
double ordering_throughput_run(uint64_t seed, size_t orderer_count,
                               uint64_t msg_cap);

// Shared scenario builders (used by tests, the acceptance suite and sample
// configs).
ScenarioConfig happy_token_scenario(uint64_t seed, const std::string& pipeline =
                                                       "execute-order-validate");
ScenarioConfig double_spend_scenario(uint64_t seed);
ScenarioConfig loop_dos_scenario(uint64_t seed, const std::string& pipeline,
                                 uint64_t step_budget);
ScenarioConfig dos_blacklist_scenario(uint64_t seed, uint64_t dos_rate,
                                      uint64_t dos_from, uint64_t dos_until);

}  // namespace ledgersim
