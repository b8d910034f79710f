#include "ledgersim/ledger.hpp"

#include <fstream>

#include "ledgersim/crypto.hpp"

namespace ledgersim {

std::vector<std::string> validate_config(const ChannelConfig& config) {
  std::vector<std::string> problems;
  if (config.channel_id.empty()) problems.push_back("channel_id: empty");
  if (config.identities.empty()) problems.push_back("identities: empty");
  {
    std::map<std::string, int> seen;
    for (size_t i = 0; i < config.identities.size(); ++i) {
      const Identity& identity = config.identities[i];
      std::string at = "identities[" + std::to_string(i) + "]";
      if (identity.id.empty()) problems.push_back(at + ".id: empty");
      if (identity.public_key.empty()) problems.push_back(at + ".public_key: empty");
      if (++seen[identity.id] > 1) problems.push_back(at + ".id: duplicate '" + identity.id + "'");
    }
  }
  if (config.orderer_addresses.empty()) problems.push_back("orderer_addresses: empty");
  if (config.ordering.backend != "solo" && config.ordering.backend != "cft-replicated") {
    problems.push_back("ordering.backend: unknown '" + config.ordering.backend + "'");
  }
  if (config.ordering.backend == "cft-replicated" &&
      config.orderer_addresses.size() < 2 * config.ordering.f_tolerated + 1) {
    problems.push_back("ordering.f_tolerated: needs >= 2f+1 orderers");
  }
  if (config.ordering.batch_max_txs == 0) problems.push_back("ordering.batch_max_txs: zero");
  if (config.modification_policy.empty()) {
    problems.push_back("modification_policy: missing");
  }
  auto check = [&problems](const std::string& field, const std::string& text) {
    if (text.empty()) return;
    try {
      parse_policy(text);
    } catch (const PolicyError& e) {
      problems.push_back(field + ": " + e.what());
    }
  };
  check("modification_policy", config.modification_policy);
  check("broadcast_policy", config.broadcast_policy);
  check("deliver_policy", config.deliver_policy);
  for (const auto& [ccid, text] : config.endorsement_policies) {
    check("endorsement_policies[" + ccid + "]", text);
  }
  return problems;
}

void encode_config(Writer& w, const ChannelConfig& config) {
  w.str(config.channel_id);
  w.u32(static_cast<uint32_t>(config.identities.size()));
  for (const auto& identity : config.identities) {
    w.str(identity.id);
    w.str(identity.org);
    w.blob(identity.public_key);
  }
  w.u32(static_cast<uint32_t>(config.orderer_addresses.size()));
  for (const auto& addr : config.orderer_addresses) w.str(addr);
  w.str(config.ordering.backend);
  w.u32(config.ordering.batch_max_txs);
  w.u64(config.ordering.batch_timeout);
  w.u32(config.ordering.f_tolerated);
  w.str(config.broadcast_policy);
  w.str(config.deliver_policy);
  w.str(config.modification_policy);
  w.u32(static_cast<uint32_t>(config.endorsement_policies.size()));
  for (const auto& [ccid, policy] : config.endorsement_policies) {
    w.str(ccid);
    w.str(policy);
  }
  w.u32(static_cast<uint32_t>(config.chaincode_authorizations.size()));
  for (const auto& [caller, callees] : config.chaincode_authorizations) {
    w.str(caller);
    w.u32(static_cast<uint32_t>(callees.size()));
    for (const auto& callee : callees) w.str(callee);
  }
}

ChannelConfig decode_config(Reader& r) {
  ChannelConfig config;
  config.channel_id = r.str();
  uint32_t n = r.u32();
  for (uint32_t i = 0; i < n; ++i) {
    Identity identity;
    identity.id = r.str();
    identity.org = r.str();
    identity.public_key = r.blob();
    config.identities.push_back(std::move(identity));
  }
  n = r.u32();
  for (uint32_t i = 0; i < n; ++i) config.orderer_addresses.push_back(r.str());
  config.ordering.backend = r.str();
  config.ordering.batch_max_txs = r.u32();
  config.ordering.batch_timeout = r.u64();
  config.ordering.f_tolerated = r.u32();
  config.broadcast_policy = r.str();
  config.deliver_policy = r.str();
  config.modification_policy = r.str();
  n = r.u32();
  for (uint32_t i = 0; i < n; ++i) {
    std::string ccid = r.str();
    config.endorsement_policies[ccid] = r.str();
  }
  n = r.u32();
  for (uint32_t i = 0; i < n; ++i) {
    std::string caller = r.str();
    uint32_t m = r.u32();
    std::vector<std::string> callees;
    for (uint32_t j = 0; j < m; ++j) callees.push_back(r.str());
    config.chaincode_authorizations[caller] = std::move(callees);
  }
  return config;
}

Bytes config_digest(const ChannelConfig& config) {
  Writer w;
  encode_config(w, config);
  return sha256(w.bytes());
}

Bytes derive_tx_id(const std::string& client, uint64_t nonce) {
  Writer w;
  w.str(client);
  w.u64(nonce);
  return sha256(w.bytes());
}

void encode_tx(Writer& w, const TransactionEnvelope& tx) {
  w.blob(tx.tx_id);
  w.str(tx.client);
  w.str(tx.chaincode_id);
  w.str(tx.operation);
  w.u32(static_cast<uint32_t>(tx.args.size()));
  for (const auto& arg : tx.args) w.blob(arg);
  w.u64(tx.nonce);
  w.u64(tx.timestamp);
  w.u32(static_cast<uint32_t>(tx.endorsements.size()));
  for (const auto& e : tx.endorsements) encode_endorsement(w, e);
  w.str(tx.client_sig.signer);
  w.blob(tx.client_sig.bytes);
}

TransactionEnvelope decode_tx(Reader& r) {
  TransactionEnvelope tx;
  tx.tx_id = r.blob();
  tx.client = r.str();
  tx.chaincode_id = r.str();
  tx.operation = r.str();
  uint32_t n = r.u32();
  for (uint32_t i = 0; i < n; ++i) tx.args.push_back(r.blob());
  tx.nonce = r.u64();
  tx.timestamp = r.u64();
  n = r.u32();
  for (uint32_t i = 0; i < n; ++i) tx.endorsements.push_back(decode_endorsement(r));
  tx.client_sig.signer = r.str();
  tx.client_sig.bytes = r.blob();
  return tx;
}

namespace {

void encode_block_canonical(Writer& w, const Block& block) {
  w.u64(block.seq);
  w.blob(block.prev_hash);
  w.boolean(block.config.has_value());
  if (block.config) encode_config(w, *block.config);
  w.u32(static_cast<uint32_t>(block.txs.size()));
  for (const auto& tx : block.txs) encode_tx(w, tx);
}

Block decode_block_canonical(Reader& r) {
  Block block;
  block.seq = r.u64();
  block.prev_hash = r.blob();
  if (r.boolean()) block.config = decode_config(r);
  uint32_t n = r.u32();
  for (uint32_t i = 0; i < n; ++i) block.txs.push_back(decode_tx(r));
  return block;
}

void encode_block_metadata(Writer& w, const Block& block) {
  w.u32(static_cast<uint32_t>(block.txs.size()));
  for (const auto& tx : block.txs) {
    w.u8(static_cast<uint8_t>(tx.validity.flag));
    w.str(tx.validity.reason);
  }
}

void decode_block_metadata(Reader& r, Block& block) {
  uint32_t n = r.u32();
  if (n != block.txs.size()) throw CodecError("metadata tx count mismatch");
  for (uint32_t i = 0; i < n; ++i) {
    block.txs[i].validity.flag = static_cast<TxFlag>(r.u8());
    block.txs[i].validity.reason = r.str();
  }
}

}  // namespace

Bytes hash_block(const Block& block) {
  Writer w;
  encode_block_canonical(w, block);
  return sha256(w.bytes());
}

Bytes encode_block(const Block& block) {
  Writer w;
  encode_block_canonical(w, block);
  return w.take();
}

Block decode_block(ByteSpan data) {
  Reader r(data);
  Block block = decode_block_canonical(r);
  if (!r.done()) throw CodecError("block: trailing bytes");
  seal_block(block);
  return block;
}

Bytes zero_hash() { return Bytes(32, 0); }

Block& seal_block(Block& block) {
  block.block_hash = hash_block(block);
  return block;
}

std::variant<Block, GenesisError> build_genesis(const ChannelConfig& config) {
  std::vector<std::string> problems = validate_config(config);
  if (!problems.empty()) return GenesisError{std::move(problems)};
  Block genesis;
  genesis.seq = 0;
  genesis.prev_hash = zero_hash();
  genesis.config = config;
  seal_block(genesis);
  return genesis;
}

std::variant<ChannelConfig, std::string> apply_config_update(
    const ChannelConfig& current, const ConfigUpdate& update) {
  std::vector<std::string> problems = validate_config(update.new_config);
  if (!problems.empty()) return "invalid config: " + problems.front();

  // Authorization is judged entirely under the *current* rules; an update may
  // change the modification policy itself.
  IdentityRegistry registry(current.identities);
  Bytes digest = config_digest(update.new_config);
  std::vector<Signer> signers;
  for (const auto& sig : update.signatures) {
    if (!registry.verify(sig, digest)) continue;
    const Identity* identity = registry.find(sig.signer);
    signers.push_back(Signer{identity->id, identity->org});
  }
  PolicyNode policy = parse_policy(current.modification_policy);
  if (!evaluate_policy(policy, signers)) {
    return std::string("config update rejected: modification policy unsatisfied");
  }
  return update.new_config;
}

void BlockStore::append_block(Block block) {
  if (blocks_.empty()) {
    if (block.seq != 0) {
      throw AppendError("append: gap, expected genesis seq 0, got " +
                        std::to_string(block.seq));
    }
    if (block.prev_hash != zero_hash()) {
      throw AppendError("append: genesis prev-hash must be zero");
    }
  } else {
    uint64_t expect = blocks_.back().seq + 1;
    if (block.seq != expect) {
      throw AppendError("append: gap, expected seq " + std::to_string(expect) +
                        ", got " + std::to_string(block.seq));
    }
    if (block.prev_hash != blocks_.back().block_hash) {
      throw AppendError("append: prev-hash mismatch at seq " +
                        std::to_string(block.seq));
    }
  }
  if (block.config && !block.txs.empty()) {
    throw AppendError("append: config block carries transactions");
  }
  Bytes expect_hash = hash_block(block);
  if (block.block_hash.empty()) {
    block.block_hash = expect_hash;
  } else if (block.block_hash != expect_hash) {
    throw AppendError("append: block hash mismatch at seq " +
                      std::to_string(block.seq));
  }
  blocks_.push_back(std::move(block));
}

void BlockStore::append_block(Block block, std::vector<TxValidity> verdicts) {
  if (verdicts.size() != block.txs.size()) {
    throw AppendError("append: verdict count mismatch");
  }
  for (size_t i = 0; i < verdicts.size(); ++i) {
    block.txs[i].validity = std::move(verdicts[i]);
  }
  append_block(std::move(block));
}

std::optional<uint64_t> BlockStore::height() const {
  if (blocks_.empty()) return std::nullopt;
  return blocks_.back().seq;
}

const Block& BlockStore::at(uint64_t seq) const {
  if (seq >= blocks_.size()) throw std::out_of_range("block seq out of range");
  return blocks_[seq];
}

std::optional<Block> BlockStore::deliver(uint64_t seq) const {
  if (seq >= blocks_.size()) return std::nullopt;
  return blocks_[seq];
}

std::optional<ChainFault> BlockStore::verify_chain() const {
  Bytes prev;
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const Block& b = blocks_[i];
    if (b.seq != i) return ChainFault{i, "sequence gap"};
    if (i == 0) {
      if (b.prev_hash != zero_hash()) return ChainFault{0, "genesis prev-hash not zero"};
    } else if (b.prev_hash != prev) {
      return ChainFault{i, "prev-hash link broken"};
    }
    if (hash_block(b) != b.block_hash) return ChainFault{i, "block hash mismatch"};
    if (b.config && !b.txs.empty()) return ChainFault{i, "config block with txs"};
    prev = b.block_hash;
  }
  return std::nullopt;
}

namespace {

Bytes block_record(const Block& block) {
  Writer canonical;
  encode_block_canonical(canonical, block);
  Writer meta;
  encode_block_metadata(meta, block);
  Bytes record = canonical.take();
  const Bytes& m = meta.bytes();
  record.insert(record.end(), m.begin(), m.end());
  Bytes digest = sha256(record);
  record.insert(record.end(), digest.begin(), digest.end());
  return record;
}

void write_u32_be(std::ostream& os, uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    os.put(static_cast<char>(v >> shift & 0xff));
  }
}

void write_u64_be(std::ostream& os, uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    os.put(static_cast<char>(v >> shift & 0xff));
  }
}

uint64_t read_u64_be(std::istream& is) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    int c = is.get();
    if (c == EOF) throw CodecError("index: truncated");
    v = v << 8 | static_cast<uint8_t>(c);
  }
  return v;
}

}  // namespace

void BlockStore::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::ofstream blocks(dir / "blocks.dat", std::ios::binary | std::ios::trunc);
  std::ofstream index(dir / "index.dat", std::ios::binary | std::ios::trunc);
  if (!blocks || !index) throw std::runtime_error("cannot open ledger files in " + dir.string());
  uint64_t offset = 0;
  for (const Block& b : blocks_) {
    Bytes record = block_record(b);
    write_u64_be(index, b.seq);
    write_u64_be(index, offset);
    write_u32_be(blocks, static_cast<uint32_t>(record.size()));
    blocks.write(reinterpret_cast<const char*>(record.data()),
                 static_cast<std::streamsize>(record.size()));
    offset += 4 + record.size();
  }
}

namespace {

// Reads and digest-checks every record in blocks.dat.
std::vector<Block> read_block_file(const std::filesystem::path& dir,
                                   std::optional<ChainFault>* fault) {
  std::ifstream in(dir / "blocks.dat", std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + (dir / "blocks.dat").string());
  std::vector<Block> blocks;
  uint64_t seq_guess = 0;
  while (true) {
    int c0 = in.get();
    if (c0 == EOF) break;
    uint32_t len = static_cast<uint8_t>(c0);
    for (int i = 0; i < 3; ++i) {
      int c = in.get();
      if (c == EOF) throw CodecError("blocks.dat: truncated length");
      len = len << 8 | static_cast<uint8_t>(c);
    }
    Bytes record(len);
    in.read(reinterpret_cast<char*>(record.data()), len);
    if (in.gcount() != static_cast<std::streamsize>(len)) {
      throw CodecError("blocks.dat: truncated record");
    }
    if (record.size() < 32) throw CodecError("blocks.dat: record too small");
    Bytes payload(record.begin(), record.end() - 32);
    Bytes digest(record.end() - 32, record.end());
    if (sha256(payload) != digest) {
      if (fault && !*fault) *fault = ChainFault{seq_guess, "record digest mismatch"};
      ++seq_guess;
      blocks.push_back(Block{});  // placeholder; chain verify reports above
      continue;
    }
    Reader r(payload);
    Block b = decode_block_canonical(r);
    decode_block_metadata(r, b);
    if (!r.done()) throw CodecError("blocks.dat: trailing bytes in record");
    seal_block(b);
    seq_guess = b.seq + 1;
    blocks.push_back(std::move(b));
  }
  return blocks;
}

}  // namespace

BlockStore BlockStore::load(const std::filesystem::path& dir) {
  std::optional<ChainFault> fault;
  std::vector<Block> blocks = read_block_file(dir, &fault);
  if (fault) throw std::runtime_error("ledger corrupt at seq " +
                                      std::to_string(fault->seq) + ": " + fault->what);
  BlockStore store;
  for (Block& b : blocks) store.append_block(std::move(b));
  return store;
}

std::optional<ChainFault> BlockStore::verify_chain_files(
    const std::filesystem::path& dir) {
  std::optional<ChainFault> fault;
  std::vector<Block> blocks;
  try {
    blocks = read_block_file(dir, &fault);
  } catch (const std::exception& e) {
    return ChainFault{0, e.what()};
  }
  if (fault) return fault;

  BlockStore store;
  for (size_t i = 0; i < blocks.size(); ++i) {
    try {
      store.append_block(std::move(blocks[i]));
    } catch (const AppendError& e) {
      return ChainFault{i, e.what()};
    }
  }
  if (auto chain_fault = store.verify_chain()) return chain_fault;

  // Cross-check the sidecar index.
  std::ifstream index(dir / "index.dat", std::ios::binary);
  if (!index) return ChainFault{0, "index.dat missing"};
  size_t rows = 0;
  while (index.peek() != EOF) {
    uint64_t seq = read_u64_be(index);
    read_u64_be(index);  // offset; length-prefix walk already proved layout
    if (seq != rows) return ChainFault{rows, "index.dat sequence mismatch"};
    ++rows;
  }
  if (rows != store.size()) return ChainFault{rows, "index.dat row count mismatch"};
  return std::nullopt;
}

Bytes BlockStore::chain_hash() const {
  Writer w;
  for (const Block& b : blocks_) {
    w.blob(b.block_hash);
    encode_block_metadata(w, b);
  }
  return sha256(w.bytes());
}

StateStore replay_ledger(const BlockStore& store) {
  StateStore state;
  for (size_t s = 0; s < store.size(); ++s) {
    const Block& b = store.at(s);
    for (size_t i = 0; i < b.txs.size(); ++i) {
      const TransactionEnvelope& tx = b.txs[i];
      if (tx.validity.flag != TxFlag::Valid) continue;
      if (tx.endorsements.empty()) continue;
      state.apply_writeset(tx.endorsements.front().write_set,
                           Version{b.seq, i}, tx.tx_id);
    }
  }
  return state;
}

}  // namespace ledgersim
