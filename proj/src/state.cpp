#include "ledgersim/state.hpp"

#include <sstream>
#include <stdexcept>

#include "ledgersim/crypto.hpp"

namespace ledgersim {

void encode_version(Writer& w, const Version& v) {
  w.u64(v.block_seq);
  w.u64(v.tx_seq);
}

Version decode_version(Reader& r) {
  Version v;
  v.block_seq = r.u64();
  v.tx_seq = r.u64();
  return v;
}

void encode_read_set(Writer& w, const ReadSet& rs) {
  w.u32(static_cast<uint32_t>(rs.entries.size()));
  for (const auto& [key, version] : rs.entries) {
    w.blob(key);
    w.boolean(version.has_value());
    if (version) encode_version(w, *version);
  }
}

ReadSet decode_read_set(Reader& r) {
  ReadSet rs;
  uint32_t n = r.u32();
  rs.entries.reserve(n);
  for (uint32_t i = 0; i < n; ++i) {
    Bytes key = r.blob();
    std::optional<Version> v;
    if (r.boolean()) v = decode_version(r);
    rs.entries.emplace_back(std::move(key), v);
  }
  return rs;
}

void encode_write_set(Writer& w, const WriteSet& ws) {
  w.u32(static_cast<uint32_t>(ws.entries.size()));
  for (const auto& e : ws.entries) {
    w.blob(e.key);
    w.boolean(e.is_delete);
    w.blob(e.value);
  }
}

WriteSet decode_write_set(Reader& r) {
  WriteSet ws;
  uint32_t n = r.u32();
  ws.entries.reserve(n);
  for (uint32_t i = 0; i < n; ++i) {
    WriteEntry e;
    e.key = r.blob();
    e.is_delete = r.boolean();
    e.value = r.blob();
    ws.entries.push_back(std::move(e));
  }
  return ws;
}

std::optional<VersionedValue> StateStore::get_committed(const Bytes& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end() || it->second.tombstone) return std::nullopt;
  return it->second;
}

std::optional<Version> StateStore::committed_version(const Bytes& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.version;
}

void StateStore::apply_writeset(const WriteSet& ws, Version at, const Bytes& tx_id) {
  for (const auto& e : ws.entries) {
    auto it = entries_.find(e.key);
    if (it != entries_.end() && !(it->second.version < at)) {
      throw std::logic_error("state: version regression on key " +
                             escape_bytes(e.key));
    }
    VersionedValue vv;
    vv.key = e.key;
    vv.version = at;
    vv.tombstone = e.is_delete;
    if (!e.is_delete) vv.value = e.value;
    entries_[e.key] = vv;

    HistoryEntry h;
    h.key = e.key;
    h.version = at;
    h.is_delete = e.is_delete;
    h.value = e.is_delete ? Bytes{} : e.value;
    h.tx_id = tx_id;
    history_[e.key].push_back(std::move(h));
  }
}

std::vector<HistoryEntry> StateStore::get_history_for_key(const Bytes& key) const {
  auto it = history_.find(key);
  if (it == history_.end()) return {};
  return it->second;  // appended in commit order == version order
}

void StateStore::dump(std::ostream& os) const {
  for (const auto& [key, vv] : entries_) {
    if (vv.tombstone) continue;
    os << escape_bytes(key) << '\t' << to_hex(vv.value) << '\t'
       << vv.version.block_seq << '.' << vv.version.tx_seq << '\n';
  }
}

std::string StateStore::dump_string() const {
  std::ostringstream oss;
  dump(oss);
  return oss.str();
}

Bytes StateStore::state_hash() const {
  return sha256(dump_string());
}

size_t StateStore::live_key_count() const {
  size_t n = 0;
  for (const auto& [key, vv] : entries_) {
    if (!vv.tombstone) ++n;
  }
  return n;
}

}  // namespace ledgersim
