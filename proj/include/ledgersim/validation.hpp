#pragma once

#include <map>
#include <string>
#include <vector>

#include "ledgersim/ledger.hpp"
#include "ledgersim/state.hpp"

namespace ledgersim {

enum class InvalidReason {
  None,
  PolicyUnsatisfied,
  MvccConflict,
  BadSignature,
  Malformed,
  ExecutionFailed,  // order-execute pipeline only
};

std::string reason_string(InvalidReason reason);

struct ValidationVerdict {
  Bytes tx_id;
  bool valid = false;
  InvalidReason reason = InvalidReason::None;
  std::string detail;

  TxValidity to_validity() const;
};

// Default VSCC: structural checks, client + endorsement signature
// verification, endorsement policy evaluation over the verified signers.
// Forged endorsements are excluded; the transaction still passes when the
// remainder satisfies the policy.
ValidationVerdict vscc_check(const TransactionEnvelope& tx,
                             const ChannelConfig& config);

// Versions written by earlier valid transactions of the same block; later
// transactions' reads are checked against these first (first-wins).
using VersionOverlay = std::map<Bytes, Version>;

ValidationVerdict mvcc_check(const TransactionEnvelope& tx,
                             const StateStore& state,
                             const VersionOverlay& overlay);

// VSCC per transaction, then the sequential MVCC pass.
std::vector<ValidationVerdict> validate_block(const Block& block,
                                              const ChannelConfig& config,
                                              const StateStore& state);

// Appends the block with verdicts embedded and applies the write sets of
// valid transactions in order. All-or-nothing per block.
void commit_block(BlockStore& store, StateStore& state, Block block,
                  const std::vector<ValidationVerdict>& verdicts);

std::vector<ValidationVerdict> validate_and_commit(BlockStore& store,
                                                   StateStore& state,
                                                   const ChannelConfig& config,
                                                   Block block);

}  // namespace ledgersim
