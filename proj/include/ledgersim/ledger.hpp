#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ledgersim/endorsement.hpp"
#include "ledgersim/identity.hpp"
#include "ledgersim/state.hpp"

namespace ledgersim {

// Consensus parameters carried in the channel configuration.
struct OrderingParams {
  std::string backend = "solo";  // "solo" | "cft-replicated"
  uint32_t batch_max_txs = 10;
  uint64_t batch_timeout = 20;  // ticks
  uint32_t f_tolerated = 0;
};

struct ChannelConfig {
  std::string channel_id;
  std::vector<Identity> identities;
  std::vector<std::string> orderer_addresses;
  OrderingParams ordering;
  std::string broadcast_policy;     // who may broadcast
  std::string deliver_policy;       // who may fetch blocks
  std::string modification_policy;  // who may change this config
  std::map<std::string, std::string> endorsement_policies;  // ccid -> grammar
  std::map<std::string, std::vector<std::string>> chaincode_authorizations;
};

// Field-level validation errors; empty means the config is usable.
std::vector<std::string> validate_config(const ChannelConfig& config);

void encode_config(Writer& w, const ChannelConfig& config);
ChannelConfig decode_config(Reader& r);
Bytes config_digest(const ChannelConfig& config);

enum class TxFlag : uint8_t { Pending = 0, Valid = 1, Invalid = 2 };

struct TxValidity {
  TxFlag flag = TxFlag::Pending;
  std::string reason;
};

struct TransactionEnvelope {
  Bytes tx_id;
  std::string client;
  std::string chaincode_id;
  std::string operation;
  std::vector<Bytes> args;
  uint64_t nonce = 0;
  uint64_t timestamp = 0;  // client-chosen tick, fixed at proposal time
  std::vector<Endorsement> endorsements;
  Signature client_sig;            // over tx_id
  TxValidity validity;             // commit-time metadata, not hashed
};

Bytes derive_tx_id(const std::string& client, uint64_t nonce);

void encode_tx(Writer& w, const TransactionEnvelope& tx);  // canonical, no validity
TransactionEnvelope decode_tx(Reader& r);

struct Block {
  uint64_t seq = 0;
  Bytes prev_hash;  // 32 bytes; all zero for genesis
  std::vector<TransactionEnvelope> txs;
  std::optional<ChannelConfig> config;  // config blocks carry no txs
  Bytes block_hash;                     // filled by seal()/hash_block
};

// Digest of the canonical serialization (header + txs + optional config).
// Per-transaction validity flags are commit metadata and are not hashed:
// orderers hash-chain blocks before verdicts exist, and all correct peers
// reach identical verdicts anyway.
Bytes hash_block(const Block& block);

Bytes zero_hash();

// Fills block_hash; returns the block for chaining convenience.
Block& seal_block(Block& block);

// Canonical block bytes (header + txs + optional config, no verdicts); what
// hash_block digests and what gossip carries.
Bytes encode_block(const Block& block);
Block decode_block(ByteSpan data);  // seals the hash; throws CodecError

struct GenesisError {
  std::vector<std::string> problems;
};

std::variant<Block, GenesisError> build_genesis(const ChannelConfig& config);

// A config delta plus the signatures authorizing it under the current rules.
struct ConfigUpdate {
  ChannelConfig new_config;
  std::vector<Signature> signatures;  // over config_digest(new_config)
};

// Returns the adopted config, or an error string when signatures do not
// satisfy the current modification policy.
std::variant<ChannelConfig, std::string> apply_config_update(
    const ChannelConfig& current, const ConfigUpdate& update);

struct ChainFault {
  uint64_t seq = 0;
  std::string what;
};

class AppendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Hash-chained block store. Single writer, append only.
class BlockStore {
 public:
  // Enforces seq contiguity and prev-hash linkage; throws AppendError on a
  // gap ("skipping") or hash mismatch.
  void append_block(Block block);
  void append_block(Block block, std::vector<TxValidity> verdicts);

  std::optional<uint64_t> height() const;  // last seq, nullopt when empty
  size_t size() const { return blocks_.size(); }
  const Block& at(uint64_t seq) const;
  std::optional<Block> deliver(uint64_t seq) const;  // nullopt until present

  // Re-hashes every block and checks links + contiguity.
  std::optional<ChainFault> verify_chain() const;

  // Block file format: records of [u32 BE length || canonical block bytes ||
  // metadata bytes || 32-byte record digest]; index maps seq -> offset.
  void save(const std::filesystem::path& dir) const;
  static BlockStore load(const std::filesystem::path& dir);
  static std::optional<ChainFault> verify_chain_files(
      const std::filesystem::path& dir);

  Bytes chain_hash() const;  // digest over all block hashes + metadata

 private:
  std::vector<Block> blocks_;
};

// Replays every valid transaction's write set in ledger order onto an empty
// state; the reconstruction the state store promises.
StateStore replay_ledger(const BlockStore& store);

}  // namespace ledgersim
