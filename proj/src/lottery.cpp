#include "ledgersim/lottery.hpp"

#include <algorithm>
#include <cmath>

#include "ledgersim/codec.hpp"
#include "ledgersim/crypto.hpp"

namespace ledgersim {

Bytes pow_header_bytes(const ForkBlock& header) {
  Writer w;
  w.blob(header.parent);
  w.u64(header.height);
  w.str(header.producer);
  w.u64(header.tick);
  return w.take();
}

bool pow_attempt(const ForkBlock& header, uint64_t nonce, uint32_t difficulty) {
  Writer w;
  w.raw(pow_header_bytes(header));
  w.u64(nonce);
  Bytes digest = sha256(w.bytes());
  return leading_zero_bits(digest) >= static_cast<int>(difficulty);
}

bool pow_verify(const ForkBlock& header, uint32_t difficulty) {
  return pow_attempt(header, header.nonce, difficulty);
}

uint32_t retarget_difficulty(const PowParams& params, uint64_t actual_elapsed) {
  uint64_t target_elapsed =
      params.target_interval * static_cast<uint64_t>(params.retarget_window);
  if (actual_elapsed == 0) actual_elapsed = 1;
  double raw_bits = std::log2(static_cast<double>(target_elapsed) /
                              static_cast<double>(actual_elapsed));
  double clamp_bits = std::log2(params.clamp);
  double clamped = std::max(-clamp_bits, std::min(clamp_bits, raw_bits));
  long delta = std::lround(clamped);
  long next = static_cast<long>(params.difficulty) + delta;
  if (next < 1) next = 1;
  return static_cast<uint32_t>(next);
}

void StakeLedger::set(const std::string& validator, ValidatorStake stake) {
  stakes_[validator] = stake;
}

const ValidatorStake* StakeLedger::find(const std::string& validator) const {
  auto it = stakes_.find(validator);
  return it == stakes_.end() ? nullptr : &it->second;
}

uint64_t StakeLedger::weight_of(const std::string& validator, PosWeightMode mode,
                                uint64_t now, uint64_t ticks_per_day) const {
  const ValidatorStake* stake = find(validator);
  if (stake == nullptr || stake->slashed) return 0;
  if (mode == PosWeightMode::RelativeValue) {
    // coins / total coins; the normalization cancels in a weighted lottery,
    // so raw coins serve as the weight.
    return stake->coins;
  }
  uint64_t held_ticks = now > stake->acquired_at ? now - stake->acquired_at : 0;
  uint64_t held_days = ticks_per_day == 0 ? 0 : held_ticks / ticks_per_day;
  return stake->coins * held_days;
}

std::optional<std::string> StakeLedger::select_validator(PosWeightMode mode,
                                                         uint64_t now,
                                                         uint64_t ticks_per_day,
                                                         Rng& rng) const {
  uint64_t total = 0;
  std::vector<std::pair<std::string, uint64_t>> weighted;
  for (const auto& [validator, stake] : stakes_) {  // sorted, deterministic
    uint64_t w = weight_of(validator, mode, now, ticks_per_day);
    if (w == 0) continue;
    weighted.emplace_back(validator, w);
    total += w;
  }
  if (total == 0) return std::nullopt;
  uint64_t draw = rng.below(total);
  for (const auto& [validator, w] : weighted) {
    if (draw < w) return validator;
    draw -= w;
  }
  return weighted.back().first;  // unreachable
}

void StakeLedger::mark_selected(const std::string& validator, uint64_t now) {
  auto it = stakes_.find(validator);
  if (it != stakes_.end()) it->second.acquired_at = now;
}

Bytes fork_header_signing_digest(const ForkBlock& header) {
  Writer w;
  w.raw(pow_header_bytes(header));
  w.u64(header.nonce);
  return sha256(w.bytes());
}

bool StakeLedger::slash(const std::string& validator, const SlashEvidence& evidence,
                        const IdentityRegistry& registry) {
  auto reject = [&](const std::string& why) {
    audit_.push_back("rejected evidence against " + validator + ": " + why);
    return false;
  };
  if (evidence.sig_a.signer != validator || evidence.sig_b.signer != validator) {
    return reject("signer mismatch");
  }
  if (!registry.verify(evidence.sig_a, fork_header_signing_digest(evidence.block_a)) ||
      !registry.verify(evidence.sig_b, fork_header_signing_digest(evidence.block_b))) {
    return reject("bad signature");
  }
  if (evidence.block_a.producer != validator || evidence.block_b.producer != validator) {
    return reject("producer mismatch");
  }
  if (evidence.block_a.height != evidence.block_b.height) {
    return reject("heights differ");
  }
  if (evidence.block_a.parent == evidence.block_b.parent &&
      evidence.block_a.hash == evidence.block_b.hash) {
    return reject("same block twice");
  }
  if (evidence.block_a.parent == evidence.block_b.parent) {
    return reject("same parent");
  }
  auto it = stakes_.find(validator);
  if (it == stakes_.end()) return reject("unknown validator");
  if (it->second.slashed) return reject("already slashed");
  it->second.deposit = 0;
  it->second.slashed = true;
  audit_.push_back("slashed " + validator);
  return true;
}

std::vector<std::string> StakeLedger::validators() const {
  std::vector<std::string> out;
  for (const auto& [validator, stake] : stakes_) out.push_back(validator);
  return out;
}

ElectionResult elect_witnesses(WitnessRoster& roster,
                               const std::vector<WitnessVote>& votes) {
  ElectionResult result;
  std::map<std::string, uint64_t> tally;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& vote : votes) {
    if (!seen.emplace(vote.stakeholder, vote.witness).second) {
      result.rejected_votes.push_back(vote.stakeholder + "->" + vote.witness);
      continue;  // one vote per (stakeholder, witness)
    }
    tally[vote.witness] += vote.stake;
  }
  for (auto& candidate : roster.candidates) {
    auto it = tally.find(candidate.id);
    candidate.approval_stake = it == tally.end() ? 0 : it->second;
  }

  std::vector<const WitnessCandidate*> eligible;
  for (const auto& candidate : roster.candidates) {
    if (candidate.reputation < roster.reputation_floor) continue;
    eligible.push_back(&candidate);
  }
  std::sort(eligible.begin(), eligible.end(),
            [](const WitnessCandidate* a, const WitnessCandidate* b) {
              if (a->approval_stake != b->approval_stake) {
                return a->approval_stake > b->approval_stake;
              }
              return a->id < b->id;
            });
  result.underfull = eligible.size() < roster.witness_count;
  size_t take = std::min<size_t>(roster.witness_count, eligible.size());
  roster.active.clear();
  for (size_t i = 0; i < take; ++i) roster.active.push_back(eligible[i]->id);
  result.active = roster.active;
  return result;
}

void record_missed_slot(WitnessRoster& roster, const std::string& witness) {
  for (auto& candidate : roster.candidates) {
    if (candidate.id == witness) {
      candidate.reputation -= 1;
      return;
    }
  }
}

bool vote_witness_count(WitnessRoster& roster, uint32_t proposed_count,
                        uint64_t approving_stake, uint64_t total_stake) {
  if (proposed_count == 0) return false;
  if (approving_stake * 2 <= total_stake) return false;  // needs > 50%
  roster.witness_count = proposed_count;
  return true;
}

ImportanceBreakdown importance_score(const PoiAccount& account,
                                     const ImportanceParams& params,
                                     const std::vector<PoiTransfer>& transfers,
                                     uint64_t now_day) {
  ImportanceBreakdown out;
  for (const Holding& h : account.holdings) {
    uint64_t held = now_day >= h.since_day ? now_day - h.since_day : 0;
    if (held >= params.min_vest_days) out.vested += h.coins;
  }
  if (out.vested < params.min_vested_coins) {
    out.eligible = false;
    out.score = 0.0;
    return out;
  }
  out.eligible = true;

  uint64_t window_start =
      now_day >= params.window_days ? now_day - params.window_days : 0;
  std::map<std::string, int64_t> net;  // counterparty -> net outflow
  for (const PoiTransfer& t : transfers) {
    if (t.day < window_start || t.day > now_day) continue;
    if (t.from == account.address && t.to != account.address) {
      net[t.to] += static_cast<int64_t>(t.size);
    } else if (t.to == account.address && t.from != account.address) {
      net[t.from] -= static_cast<int64_t>(t.size);
    }
    if (t.from == account.address && t.size >= params.min_tx_size) {
      out.qualifying_volume += t.size;
      ++out.qualifying_tx_count;
    }
  }
  for (const auto& [partner, flow] : net) {
    if (flow > 0) ++out.net_positive_partners;
  }

  out.score = params.w_vested *
                  static_cast<double>(out.vested - params.min_vested_coins) +
              params.w_partners * static_cast<double>(out.net_positive_partners) +
              params.w_volume * static_cast<double>(out.qualifying_volume);
  return out;
}

}  // namespace ledgersim
