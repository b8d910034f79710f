#include "ledgersim/endorsement.hpp"

#include <algorithm>

#include "ledgersim/collect.hpp"
#include "ledgersim/crypto.hpp"

namespace ledgersim {

void encode_endorsement(Writer& w, const Endorsement& e) {
  w.str(e.endorser);
  encode_read_set(w, e.read_set);
  encode_write_set(w, e.write_set);
  w.blob(e.response);
  w.str(e.chaincode_id);
  w.blob(e.tx_id);
  w.str(e.signature.signer);
  w.blob(e.signature.bytes);
}

Endorsement decode_endorsement(Reader& r) {
  Endorsement e;
  e.endorser = r.str();
  e.read_set = decode_read_set(r);
  e.write_set = decode_write_set(r);
  e.response = r.blob();
  e.chaincode_id = r.str();
  e.tx_id = r.blob();
  e.signature.signer = r.str();
  e.signature.bytes = r.blob();
  return e;
}

Bytes endorsement_signing_digest(const Endorsement& e) {
  Writer w;
  w.str(e.endorser);
  encode_read_set(w, e.read_set);
  encode_write_set(w, e.write_set);
  w.blob(e.response);
  w.str(e.chaincode_id);
  w.blob(e.tx_id);
  return sha256(w.bytes());
}

Bytes rwset_digest(const Endorsement& e) {
  Writer w;
  encode_read_set(w, e.read_set);
  encode_write_set(w, e.write_set);
  w.blob(e.response);
  return sha256(w.bytes());
}

bool verify_endorsement(const Endorsement& e, const IdentityRegistry& registry) {
  if (e.signature.signer != e.endorser) return false;
  return registry.verify(e.signature, endorsement_signing_digest(e));
}

ProposalResponse endorse(const IdentityRegistry& registry,
                         const std::string& endorser_id,
                         const std::string& chaincode_id, const Bytes& tx_id,
                         const ReadSet& rs, const WriteSet& ws,
                         const Bytes& response) {
  Endorsement e;
  e.endorser = endorser_id;
  e.read_set = rs;
  e.write_set = ws;
  e.response = response;
  e.chaincode_id = chaincode_id;
  e.tx_id = tx_id;
  e.signature = registry.sign(endorser_id, endorsement_signing_digest(e));
  return ProposalResponse{std::move(e), "",};
}

EndorsementCollector::EndorsementCollector(const IdentityRegistry& registry,
                                           PolicyNode policy, Bytes tx_id,
                                           size_t target_count)
    : registry_(registry),
      policy_(std::move(policy)),
      tx_id_(std::move(tx_id)),
      target_count_(target_count) {}

EndorsementCollector::Status EndorsementCollector::add_response(
    const ProposalResponse& response) {
  if (status_ != Status::Pending) return status_;
  ++responses_seen_;
  if (!response.ok()) {
    if (responses_seen_ >= target_count_) return finish();
    return status_;
  }
  const Endorsement& e = *response.endorsement;
  if (e.tx_id != tx_id_ || !verify_endorsement(e, registry_)) {
    ++rejected_signatures_;
    if (responses_seen_ >= target_count_) return finish();
    return status_;
  }
  if (std::find(seen_endorsers_.begin(), seen_endorsers_.end(), e.endorser) !=
      seen_endorsers_.end()) {
    if (responses_seen_ >= target_count_) return finish();
    return status_;  // duplicate endorser, first one stands
  }
  seen_endorsers_.push_back(e.endorser);

  auto& group = groups_[rwset_digest(e)];
  group.push_back(e);

  std::vector<Signer> signers;
  for (const auto& member : group) {
    const Identity* identity = registry_.find(member.endorser);
    signers.push_back(Signer{member.endorser, identity ? identity->org : ""});
  }
  if (evaluate_policy(policy_, signers)) {
    winner_ = group;
    status_ = Status::Done;
  } else if (responses_seen_ >= target_count_) {
    return finish();
  }
  return status_;
}

EndorsementCollector::Status EndorsementCollector::finish() {
  if (status_ != Status::Pending) return status_;
  status_ = Status::Failed;
  if (groups_.size() > 1) {
    failure_ = "rwset-mismatch";
  } else if (responses_seen_ < target_count_) {
    failure_ = "timeout";
  } else {
    failure_ = "policy-unsatisfied";
  }
  return status_;
}

}  // namespace ledgersim
