#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ledgersim/bytes.hpp"
#include "ledgersim/forktree.hpp"
#include "ledgersim/identity.hpp"
#include "ledgersim/rng.hpp"

namespace ledgersim {

// ------------------------------------------------------------------- PoW

struct PowParams {
  uint32_t difficulty = 8;        // required leading zero bits
  uint64_t target_interval = 10;  // ticks per block
  uint32_t retarget_window = 20;  // blocks per adjustment
  double clamp = 4.0;             // max adjustment ratio per retarget
};

Bytes pow_header_bytes(const ForkBlock& header);

// Solved iff sha256(header || nonce) has >= difficulty leading zero bits.
bool pow_attempt(const ForkBlock& header, uint64_t nonce, uint32_t difficulty);
bool pow_verify(const ForkBlock& header, uint32_t difficulty);  // uses header.nonce

// Difficulty scaled by log2(target elapsed / actual elapsed), rounded to the
// nearest bit, clamped to +-log2(clamp) bits, floored at 1.
uint32_t retarget_difficulty(const PowParams& params, uint64_t actual_elapsed);

// ------------------------------------------------------------------- PoS

struct ValidatorStake {
  uint64_t coins = 0;
  uint64_t acquired_at = 0;  // tick the coins entered the wallet
  uint64_t deposit = 0;
  bool slashed = false;
};

struct SlashEvidence {
  ForkBlock block_a;
  ForkBlock block_b;
  Signature sig_a;  // producer's signature over each header
  Signature sig_b;
};

enum class PosWeightMode { RelativeValue, CoinAge };

class StakeLedger {
 public:
  void set(const std::string& validator, ValidatorStake stake);
  const ValidatorStake* find(const std::string& validator) const;

  uint64_t weight_of(const std::string& validator, PosWeightMode mode,
                     uint64_t now, uint64_t ticks_per_day) const;

  // Stake-weighted lottery over unslashed validators with positive weight.
  // Deterministic for a given rng state. Returns nullopt when nobody is
  // eligible.
  std::optional<std::string> select_validator(PosWeightMode mode, uint64_t now,
                                              uint64_t ticks_per_day, Rng& rng) const;

  // Coin age resets once a validator is selected to produce.
  void mark_selected(const std::string& validator, uint64_t now);

  // Double-sign evidence: both headers signed by the validator, equal height,
  // different parents. Valid evidence forfeits the deposit and excludes the
  // validator; anything else is recorded and ignored.
  bool slash(const std::string& validator, const SlashEvidence& evidence,
             const IdentityRegistry& registry);

  const std::vector<std::string>& audit_log() const { return audit_; }
  std::vector<std::string> validators() const;  // sorted ids

 private:
  std::map<std::string, ValidatorStake> stakes_;
  std::vector<std::string> audit_;
};

Bytes fork_header_signing_digest(const ForkBlock& header);

// ------------------------------------------------------------------ DPoS

struct WitnessCandidate {
  std::string id;
  uint64_t approval_stake = 0;
  int64_t reputation = 0;
};

struct WitnessRoster {
  std::vector<WitnessCandidate> candidates;
  std::vector<std::string> active;  // round-robin producer schedule
  uint32_t witness_count = 3;       // N
  uint32_t epoch_length = 10;       // blocks per epoch
  int64_t reputation_floor = -2;
};

struct WitnessVote {
  std::string stakeholder;
  std::string witness;
  uint64_t stake = 0;
};

struct ElectionResult {
  std::vector<std::string> active;
  std::vector<std::string> rejected_votes;  // duplicates, one entry per reject
  bool underfull = false;  // fewer candidates than N
};

// Tally (one vote per stakeholder per witness), drop candidates below the
// reputation floor, pick the top-N by approval stake (ties to lowest id).
ElectionResult elect_witnesses(WitnessRoster& roster,
                               const std::vector<WitnessVote>& votes);

// A missed production slot costs one reputation point.
void record_missed_slot(WitnessRoster& roster, const std::string& witness);

// Governance vote on N: adopted iff approving stake exceeds half of the
// total stake.
bool vote_witness_count(WitnessRoster& roster, uint32_t proposed_count,
                        uint64_t approving_stake, uint64_t total_stake);

// ------------------------------------------------------------------- PoI

struct ImportanceParams {
  uint64_t min_vested_coins = 100;
  uint64_t min_vest_days = 10;
  uint64_t min_tx_size = 10;
  uint64_t window_days = 30;
  double w_vested = 0.5;
  double w_partners = 0.25;
  double w_volume = 0.25;
};

struct Holding {
  uint64_t coins = 0;
  uint64_t since_day = 0;
};

struct PoiAccount {
  std::string address;
  std::vector<Holding> holdings;
};

struct PoiTransfer {
  std::string from;
  std::string to;
  uint64_t size = 0;
  uint64_t day = 0;
};

struct ImportanceBreakdown {
  uint64_t vested = 0;
  uint64_t net_positive_partners = 0;
  uint64_t qualifying_volume = 0;
  uint64_t qualifying_tx_count = 0;
  bool eligible = false;
  double score = 0.0;
};

// score = w_vested * max(0, vested - min_vested)
//       + w_partners * |partners with positive net outflow|
//       + w_volume * sum(qualifying tx sizes), zero when ineligible.
// Wash trading cancels: only net transfers count toward the partner factor.
ImportanceBreakdown importance_score(const PoiAccount& account,
                                     const ImportanceParams& params,
                                     const std::vector<PoiTransfer>& transfers,
                                     uint64_t now_day);

}  // namespace ledgersim
