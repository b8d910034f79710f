#include "ledgersim/identity.hpp"

#include <stdexcept>

#include "ledgersim/crypto.hpp"

namespace ledgersim {

IdentityRegistry::IdentityRegistry(const std::vector<Identity>& identities) {
  for (const auto& identity : identities) {
    if (!add(identity)) {
      throw std::invalid_argument("duplicate or invalid identity: " +
                                  identity.id);
    }
  }
}

bool IdentityRegistry::add(Identity identity) {
  if (identity.id.empty() || identity.public_key.empty()) return false;
  auto [it, inserted] = by_id_.emplace(identity.id, std::move(identity));
  (void)it;
  return inserted;
}

const Identity* IdentityRegistry::find(const std::string& id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &it->second;
}

Signature IdentityRegistry::sign(const std::string& id, ByteSpan digest) const {
  const Identity* identity = find(id);
  if (identity == nullptr) throw std::invalid_argument("unknown signer: " + id);
  return Signature{id, sim_sign(identity->public_key, digest)};
}

bool IdentityRegistry::verify(const Signature& sig, ByteSpan digest) const {
  const Identity* identity = find(sig.signer);
  if (identity == nullptr) return false;
  return sim_verify(identity->public_key, digest, sig.bytes);
}

std::vector<Identity> IdentityRegistry::all() const {
  std::vector<Identity> out;
  out.reserve(by_id_.size());
  for (const auto& [id, identity] : by_id_) out.push_back(identity);
  return out;
}

}  // namespace ledgersim
