#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ledgersim/bytes.hpp"

namespace ledgersim {

struct Identity {
  std::string id;
  std::string org;
  Bytes public_key;
};

struct Signature {
  std::string signer;
  Bytes bytes;
};

// Per-channel identity registry; stands in for the MSP. Keys are the
// simulation MAC keys, so the registry can both sign (for in-process actors)
// and verify.
class IdentityRegistry {
 public:
  IdentityRegistry() = default;
  explicit IdentityRegistry(const std::vector<Identity>& identities);

  bool add(Identity identity);  // false on duplicate id or empty key
  const Identity* find(const std::string& id) const;
  bool contains(const std::string& id) const { return find(id) != nullptr; }

  Signature sign(const std::string& id, ByteSpan digest) const;
  bool verify(const Signature& sig, ByteSpan digest) const;

  std::vector<Identity> all() const;  // sorted by id
  size_t size() const { return by_id_.size(); }

 private:
  std::map<std::string, Identity> by_id_;
};

}  // namespace ledgersim
