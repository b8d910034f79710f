#include "ledgersim/validation.hpp"

#include <algorithm>

#include "ledgersim/crypto.hpp"

namespace ledgersim {

std::string reason_string(InvalidReason reason) {
  switch (reason) {
    case InvalidReason::None: return "none";
    case InvalidReason::PolicyUnsatisfied: return "policy-unsatisfied";
    case InvalidReason::MvccConflict: return "mvcc-conflict";
    case InvalidReason::BadSignature: return "bad-signature";
    case InvalidReason::Malformed: return "malformed";
    case InvalidReason::ExecutionFailed: return "execution-failed";
  }
  return "unknown";
}

TxValidity ValidationVerdict::to_validity() const {
  if (valid) return TxValidity{TxFlag::Valid, ""};
  return TxValidity{TxFlag::Invalid, reason_string(reason)};
}

namespace {

ValidationVerdict fail(const Bytes& tx_id, InvalidReason reason, std::string detail) {
  return ValidationVerdict{tx_id, false, reason, std::move(detail)};
}

}  // namespace

ValidationVerdict vscc_check(const TransactionEnvelope& tx,
                             const ChannelConfig& config) {
  if (tx.client.empty() || tx.tx_id.empty()) {
    return fail(tx.tx_id, InvalidReason::Malformed, "missing client or tx-id");
  }
  if (tx.tx_id != derive_tx_id(tx.client, tx.nonce)) {
    return fail(tx.tx_id, InvalidReason::Malformed, "tx-id derivation mismatch");
  }
  if (tx.endorsements.empty()) {
    return fail(tx.tx_id, InvalidReason::Malformed, "no endorsements");
  }
  // All endorsements aggregated into one transaction must agree byte-for-byte
  // on what was read and written.
  Bytes digest0 = rwset_digest(tx.endorsements.front());
  for (const Endorsement& e : tx.endorsements) {
    if (rwset_digest(e) != digest0) {
      return fail(tx.tx_id, InvalidReason::Malformed, "rwset mismatch in envelope");
    }
    if (e.tx_id != tx.tx_id) {
      return fail(tx.tx_id, InvalidReason::Malformed, "endorsement for wrong tx");
    }
  }

  IdentityRegistry registry(config.identities);
  if (!registry.contains(tx.client)) {
    return fail(tx.tx_id, InvalidReason::Malformed, "unknown client " + tx.client);
  }
  if (tx.client_sig.signer != tx.client || !registry.verify(tx.client_sig, tx.tx_id)) {
    return fail(tx.tx_id, InvalidReason::BadSignature, "client signature invalid");
  }

  auto policy_it = config.endorsement_policies.find(tx.chaincode_id);
  if (policy_it == config.endorsement_policies.end()) {
    return fail(tx.tx_id, InvalidReason::Malformed,
                "no endorsement policy for " + tx.chaincode_id);
  }
  PolicyNode policy = parse_policy(policy_it->second);

  std::vector<Signer> signers;
  size_t forged = 0;
  for (const Endorsement& e : tx.endorsements) {
    if (!verify_endorsement(e, registry)) {
      ++forged;
      continue;
    }
    bool duplicate = std::any_of(signers.begin(), signers.end(),
                                 [&](const Signer& s) { return s.id == e.endorser; });
    if (duplicate) continue;
    signers.push_back(Signer{e.endorser, registry.find(e.endorser)->org});
  }
  if (!evaluate_policy(policy, signers)) {
    if (forged > 0) {
      return fail(tx.tx_id, InvalidReason::BadSignature,
                  "endorsement signatures invalid");
    }
    return fail(tx.tx_id, InvalidReason::PolicyUnsatisfied,
                "endorsement policy unsatisfied");
  }
  return ValidationVerdict{tx.tx_id, true, InvalidReason::None, ""};
}

ValidationVerdict mvcc_check(const TransactionEnvelope& tx,
                             const StateStore& state,
                             const VersionOverlay& overlay) {
  const ReadSet& reads = tx.endorsements.front().read_set;
  for (const auto& [key, observed] : reads.entries) {
    std::optional<Version> current;
    auto it = overlay.find(key);
    if (it != overlay.end()) {
      current = it->second;
    } else {
      current = state.committed_version(key);
    }
    if (current != observed) {
      return fail(tx.tx_id, InvalidReason::MvccConflict,
                  "stale read of " + escape_bytes(key));
    }
  }
  return ValidationVerdict{tx.tx_id, true, InvalidReason::None, ""};
}

std::vector<ValidationVerdict> validate_block(const Block& block,
                                              const ChannelConfig& config,
                                              const StateStore& state) {
  std::vector<ValidationVerdict> verdicts;
  verdicts.reserve(block.txs.size());
  VersionOverlay overlay;
  for (size_t i = 0; i < block.txs.size(); ++i) {
    const TransactionEnvelope& tx = block.txs[i];
    ValidationVerdict verdict = vscc_check(tx, config);
    if (verdict.valid) {
      verdict = mvcc_check(tx, state, overlay);
    }
    if (verdict.valid) {
      // Later transactions in this block see this one's writes.
      for (const WriteEntry& e : tx.endorsements.front().write_set.entries) {
        overlay[e.key] = Version{block.seq, i};
      }
    }
    verdicts.push_back(std::move(verdict));
  }
  return verdicts;
}

void commit_block(BlockStore& store, StateStore& state, Block block,
                  const std::vector<ValidationVerdict>& verdicts) {
  if (verdicts.size() != block.txs.size()) {
    throw std::logic_error("commit: verdict count mismatch");
  }
  std::vector<TxValidity> flags;
  flags.reserve(verdicts.size());
  for (const auto& v : verdicts) flags.push_back(v.to_validity());
  uint64_t seq = block.seq;
  store.append_block(std::move(block), std::move(flags));  // throws before any state change
  const Block& committed = store.at(seq);
  for (size_t i = 0; i < committed.txs.size(); ++i) {
    if (!verdicts[i].valid) continue;
    state.apply_writeset(committed.txs[i].endorsements.front().write_set,
                         Version{seq, i}, committed.txs[i].tx_id);
  }
}

std::vector<ValidationVerdict> validate_and_commit(BlockStore& store,
                                                   StateStore& state,
                                                   const ChannelConfig& config,
                                                   Block block) {
  std::vector<ValidationVerdict> verdicts = validate_block(block, config, state);
  commit_block(store, state, std::move(block), verdicts);
  return verdicts;
}

}  // namespace ledgersim
