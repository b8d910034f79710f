#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ledgersim/bytes.hpp"

namespace ledgersim {

// Block header of the permissionless mode. Weight is total difficulty for
// PoW and 1 (a vote) for the stake-based protocols.
struct ForkBlock {
  Bytes hash;
  Bytes parent;
  uint64_t height = 0;
  std::string producer;
  uint64_t weight = 1;
  uint64_t tick = 0;
  uint64_t nonce = 0;
};

// Tree of competing chains. Losing branches are marked discarded but kept
// for audit; the main tip is the fork-choice winner.
class ForkTree {
 public:
  explicit ForkTree(ForkBlock genesis);

  // Parent must exist; duplicate hashes are ignored. Returns true when added.
  bool add_block(const ForkBlock& block);
  bool contains(const Bytes& hash) const { return nodes_.count(hash) > 0; }
  const ForkBlock& block(const Bytes& hash) const;
  uint64_t cumulative_weight(const Bytes& hash) const;

  // Greatest cumulative weight wins; ties break to the lowest block hash.
  // Pure function of the tree contents.
  Bytes fork_choice() const;
  const Bytes& main_tip() const { return main_tip_; }
  uint64_t main_height() const;

  const std::set<Bytes>& tips() const { return tips_; }
  std::vector<Bytes> discarded_tips() const;  // tips off the main chain
  bool on_main_chain(const Bytes& hash) const;
  std::vector<Bytes> main_chain() const;  // genesis..tip

  size_t size() const { return nodes_.size(); }

 private:
  struct NodeRec {
    ForkBlock block;
    uint64_t cumulative = 0;
  };
  std::map<Bytes, NodeRec> nodes_;
  std::set<Bytes> tips_;
  Bytes root_;
  Bytes main_tip_;
};

}  // namespace ledgersim
