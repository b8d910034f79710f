#include "ledgersim/forktree.hpp"

#include <stdexcept>

namespace ledgersim {

ForkTree::ForkTree(ForkBlock genesis) {
  root_ = genesis.hash;
  main_tip_ = genesis.hash;
  tips_.insert(genesis.hash);
  NodeRec rec;
  rec.cumulative = genesis.weight;
  rec.block = std::move(genesis);
  nodes_.emplace(root_, std::move(rec));
}

bool ForkTree::add_block(const ForkBlock& block) {
  if (nodes_.count(block.hash)) return false;
  auto parent = nodes_.find(block.parent);
  if (parent == nodes_.end()) {
    throw std::invalid_argument("fork tree: unknown parent");
  }
  NodeRec rec;
  rec.block = block;
  rec.cumulative = parent->second.cumulative + block.weight;
  nodes_.emplace(block.hash, std::move(rec));
  tips_.erase(block.parent);
  tips_.insert(block.hash);
  main_tip_ = fork_choice();
  return true;
}

const ForkBlock& ForkTree::block(const Bytes& hash) const {
  auto it = nodes_.find(hash);
  if (it == nodes_.end()) throw std::out_of_range("fork tree: unknown block");
  return it->second.block;
}

uint64_t ForkTree::cumulative_weight(const Bytes& hash) const {
  auto it = nodes_.find(hash);
  if (it == nodes_.end()) throw std::out_of_range("fork tree: unknown block");
  return it->second.cumulative;
}

Bytes ForkTree::fork_choice() const {
  const Bytes* best = nullptr;
  uint64_t best_weight = 0;
  for (const Bytes& tip : tips_) {
    uint64_t w = nodes_.at(tip).cumulative;
    if (best == nullptr || w > best_weight ||
        (w == best_weight && tip < *best)) {
      best = &tip;
      best_weight = w;
    }
  }
  return *best;
}

uint64_t ForkTree::main_height() const { return nodes_.at(main_tip_).block.height; }

bool ForkTree::on_main_chain(const Bytes& hash) const {
  Bytes cursor = main_tip_;
  for (;;) {
    if (cursor == hash) return true;
    const NodeRec& rec = nodes_.at(cursor);
    if (cursor == root_) return false;
    cursor = rec.block.parent;
  }
}

std::vector<Bytes> ForkTree::discarded_tips() const {
  std::vector<Bytes> out;
  for (const Bytes& tip : tips_) {
    if (tip != main_tip_) out.push_back(tip);
  }
  return out;
}

std::vector<Bytes> ForkTree::main_chain() const {
  std::vector<Bytes> chain;
  Bytes cursor = main_tip_;
  for (;;) {
    chain.push_back(cursor);
    if (cursor == root_) break;
    cursor = nodes_.at(cursor).block.parent;
  }
  return std::vector<Bytes>(chain.rbegin(), chain.rend());
}

}  // namespace ledgersim
