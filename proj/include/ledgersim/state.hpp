#pragma once

#include <compare>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ledgersim/bytes.hpp"
#include "ledgersim/codec.hpp"

namespace ledgersim {

// Commit position of a write: block sequence number plus the transaction's
// position inside that block.
struct Version {
  uint64_t block_seq = 0;
  uint64_t tx_seq = 0;
  auto operator<=>(const Version&) const = default;
};

struct VersionedValue {
  Bytes key;
  Bytes value;
  Version version;
  bool tombstone = false;
};

// Keys read during simulation, with the committed version observed (absent
// for keys that have never been written).
struct ReadSet {
  std::vector<std::pair<Bytes, std::optional<Version>>> entries;
};

struct WriteEntry {
  Bytes key;
  bool is_delete = false;
  Bytes value;
};

struct WriteSet {
  std::vector<WriteEntry> entries;
};

struct HistoryEntry {
  Bytes key;
  Version version;
  bool is_delete = false;
  Bytes value;
  Bytes tx_id;
};

void encode_version(Writer& w, const Version& v);
Version decode_version(Reader& r);
void encode_read_set(Writer& w, const ReadSet& rs);
ReadSet decode_read_set(Reader& r);
void encode_write_set(Writer& w, const WriteSet& ws);
WriteSet decode_write_set(Reader& r);

// The peer transaction manager: versioned key-value state plus an append-only
// history index that survives deletion.
class StateStore {
 public:
  // Live entry for a key, or nullopt when the key is absent or tombstoned.
  std::optional<VersionedValue> get_committed(const Bytes& key) const;

  // Version of the latest commit touching the key, including tombstones.
  // Deletes bump versions like writes do, so MVCC can conflict on them.
  std::optional<Version> committed_version(const Bytes& key) const;

  // Applies one transaction's write set at version `at`. Version regression
  // is a simulator bug and aborts.
  void apply_writeset(const WriteSet& ws, Version at, const Bytes& tx_id);

  std::vector<HistoryEntry> get_history_for_key(const Bytes& key) const;

  // key<TAB>hex(value)<TAB>block.tx lines, sorted by key (escaped form).
  void dump(std::ostream& os) const;
  std::string dump_string() const;
  Bytes state_hash() const;  // digest of the dump, for equality checks

  size_t live_key_count() const;

 private:
  std::map<Bytes, VersionedValue> entries_;  // includes tombstones
  std::map<Bytes, std::vector<HistoryEntry>> history_;
};

}  // namespace ledgersim
