#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ledgersim {

// Endorsement policy tree. Serialized form is nested prefix notation, e.g.
//   AND(org1,KOF(2,org2,org3,org4))
// A bare token is an org principal; `id:alice` names a single identity.
struct PolicyNode {
  enum class Kind { Org, Id, And, Or, Kof };
  Kind kind = Kind::Org;
  std::string name;                  // Org / Id principals
  uint32_t k = 0;                    // Kof threshold
  std::vector<PolicyNode> children;  // And / Or / Kof
};

class PolicyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

PolicyNode parse_policy(const std::string& text);  // throws PolicyError
std::string policy_to_string(const PolicyNode& node);

struct Signer {
  std::string id;
  std::string org;
};

// Pure: true iff the signer set satisfies the tree. Callers de-duplicate by
// endorser and pre-verify signatures.
bool evaluate_policy(const PolicyNode& policy, const std::vector<Signer>& signers);

// Structural checks: k <= n at every KOF node, at least one reachable
// principal. Returns an error message or empty string.
std::string check_policy(const PolicyNode& policy);

}  // namespace ledgersim
