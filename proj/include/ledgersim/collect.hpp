#pragma once

#include <map>
#include <string>
#include <vector>

#include "ledgersim/ledger.hpp"

namespace ledgersim {

// Client-side endorsement collection. Responses arrive in any order; the
// collector verifies signatures, de-duplicates by endorser, groups by RWSet
// digest and completes on the first group satisfying the policy. Divergent
// groups (high contention, or a byzantine endorser) never mix: an envelope
// only ever carries byte-identical RWSets.
class EndorsementCollector {
 public:
  EndorsementCollector(const IdentityRegistry& registry, PolicyNode policy,
                       Bytes tx_id, size_t target_count);

  enum class Status { Pending, Done, Failed };

  Status add_response(const ProposalResponse& response);

  // Call when no further responses can arrive (timeout tick, or all targets
  // answered). Decides between mismatch and timeout failure.
  Status finish();

  Status status() const { return status_; }
  const std::string& failure_reason() const { return failure_; }

  // Endorsements of the winning group, ready to embed in an envelope.
  const std::vector<Endorsement>& winning_group() const { return winner_; }

  size_t responses_seen() const { return responses_seen_; }
  size_t group_count() const { return groups_.size(); }
  size_t rejected_signatures() const { return rejected_signatures_; }

 private:
  const IdentityRegistry& registry_;
  PolicyNode policy_;
  Bytes tx_id_;
  size_t target_count_;
  size_t responses_seen_ = 0;
  size_t rejected_signatures_ = 0;
  std::map<Bytes, std::vector<Endorsement>> groups_;  // rwset digest -> group
  std::vector<std::string> seen_endorsers_;
  std::vector<Endorsement> winner_;
  Status status_ = Status::Pending;
  std::string failure_;
};

}  // namespace ledgersim
