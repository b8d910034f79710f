#pragma once

#include <optional>
#include <string>

#include "ledgersim/identity.hpp"
#include "ledgersim/policy.hpp"
#include "ledgersim/state.hpp"

namespace ledgersim {

// A peer's signed statement of what a proposal simulation read and wrote.
struct Endorsement {
  std::string endorser;
  ReadSet read_set;
  WriteSet write_set;
  Bytes response;
  std::string chaincode_id;
  Bytes tx_id;
  Signature signature;  // over endorsement_signing_digest of the above
};

void encode_endorsement(Writer& w, const Endorsement& e);
Endorsement decode_endorsement(Reader& r);

// Digest the ESCC signs: everything except the signature itself.
Bytes endorsement_signing_digest(const Endorsement& e);

// Digest of (read set, write set, response) only. Endorsements from peers
// with identical committed state agree on this; clients group by it.
Bytes rwset_digest(const Endorsement& e);

bool verify_endorsement(const Endorsement& e, const IdentityRegistry& registry);

struct ProposalResponse {
  std::optional<Endorsement> endorsement;
  std::string failure;  // set iff endorsement is absent
  bool ok() const { return endorsement.has_value(); }
};

// Default ESCC: sign the simulation result with the peer's identity.
ProposalResponse endorse(const IdentityRegistry& registry,
                         const std::string& endorser_id,
                         const std::string& chaincode_id, const Bytes& tx_id,
                         const ReadSet& rs, const WriteSet& ws,
                         const Bytes& response);

}  // namespace ledgersim
