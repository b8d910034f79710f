#include "ledgersim/metrics.hpp"

#include <fstream>
#include <sstream>

#include "ledgersim/ledger.hpp"

namespace ledgersim {

std::string metrics_csv_string(const Metrics& m) {
  std::ostringstream out;
  out << "window,committed_valid,committed_invalid,forks\n";
  uint64_t windows = m.window_size == 0 ? 0 : (m.duration + m.window_size - 1) / m.window_size;
  for (uint64_t w = 0; w < windows; ++w) {
    auto get = [w](const std::map<uint64_t, uint64_t>& map) -> uint64_t {
      auto it = map.find(w);
      return it == map.end() ? 0 : it->second;
    };
    out << w << ',' << get(m.valid_per_window) << ',' << get(m.invalid_per_window)
        << ',' << get(m.forks_per_window) << '\n';
  }
  return out.str();
}

void write_metrics_csv(const std::filesystem::path& file, const Metrics& m) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << metrics_csv_string(m);
}

void write_blacklist_csv(const std::filesystem::path& file, const Metrics& m,
                         uint32_t threshold) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "client,invalid_count\n";
  for (const std::string& client : m.blacklisted) {
    out << client << ',' << m.invalid_by_client.at(client) << '\n';
  }
  (void)threshold;
}

void write_summary(const std::filesystem::path& file, const Metrics& m) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "blocks committed:      " << m.blocks_committed << '\n';
  out << "valid transactions:    " << m.committed_valid << '\n';
  out << "invalid transactions:  " << m.committed_invalid_total() << '\n';
  for (const auto& [reason, count] : m.committed_invalid) {
    out << "  " << reason << ": " << count << '\n';
  }
  out << "endorsement failures:  " << m.endorsement_failures << '\n';
  out << "broadcasts denied:     " << m.broadcast_denied << '\n';
  out << "max gossip hops:       " << m.max_gossip_hops << '\n';
  out << "fork events:           " << m.fork_events << '\n';
  if (m.fork_events > 0) {
    out << "fork persistence mean: " << m.fork_persistence_mean << '\n';
  }
  out << "blacklisted clients:   " << m.blacklisted.size() << '\n';
  for (const std::string& client : m.blacklisted) {
    out << "  " << client << " (" << m.invalid_by_client.at(client) << " invalid)\n";
  }
}

Metrics recompute_metrics(const std::filesystem::path& run_dir, uint64_t window_size) {
  Metrics m;
  m.window_size = window_size;
  BlockStore store = BlockStore::load(run_dir);
  m.blocks_committed = store.size();
  for (size_t s = 0; s < store.size(); ++s) {
    const Block& b = store.at(s);
    for (const auto& tx : b.txs) {
      if (tx.validity.flag == TxFlag::Valid) {
        ++m.committed_valid;
      } else if (tx.validity.flag == TxFlag::Invalid) {
        ++m.committed_invalid[tx.validity.reason];
        ++m.invalid_by_client[tx.client];
      }
    }
  }
  return m;
}

}  // namespace ledgersim
