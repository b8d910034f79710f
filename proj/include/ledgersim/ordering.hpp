#pragma once

#include <optional>
#include <set>

#include "ledgersim/ledger.hpp"
#include "ledgersim/netsim.hpp"

namespace ledgersim {

struct OrderedBatch {
  uint64_t seq = 0;
  std::vector<TransactionEnvelope> txs;
};

// ---- message bodies ------------------------------------------------------

struct BroadcastMsg {
  TransactionEnvelope tx;
};

struct BroadcastAck {
  Bytes tx_id;
  bool accepted = false;
  std::string reason;
};

struct LogEntry {
  uint64_t term = 0;
  std::vector<TransactionEnvelope> txs;
};

struct AppendEntriesMsg {
  uint64_t term = 0;
  NodeId leader;
  uint64_t prev_index = 0;  // 1-based; 0 = before first entry
  uint64_t prev_term = 0;
  std::vector<LogEntry> entries;
  uint64_t leader_commit = 0;
};

struct AppendAckMsg {
  uint64_t term = 0;
  bool success = false;
  uint64_t match_index = 0;
  uint64_t log_size = 0;
};

struct VoteRequestMsg {
  uint64_t term = 0;
  NodeId candidate;
  uint64_t last_log_index = 0;
  uint64_t last_log_term = 0;
};

struct VoteGrantMsg {
  uint64_t term = 0;
  bool granted = false;
};

struct DeliverBlockMsg {
  Block block;
};

struct FetchBlocksMsg {
  uint64_t from_seq = 0;
};

namespace msg {
inline constexpr const char* kBroadcast = "ord-broadcast";
inline constexpr const char* kBroadcastAck = "ord-broadcast-ack";
inline constexpr const char* kAppend = "cft-append-entries";
inline constexpr const char* kAppendAck = "cft-append-ack";
inline constexpr const char* kVoteRequest = "cft-vote-request";
inline constexpr const char* kVoteGrant = "cft-vote-grant";
inline constexpr const char* kDeliverBlock = "ord-deliver-block";
inline constexpr const char* kFetchBlocks = "ord-fetch-blocks";
}  // namespace msg

// Ordering service node. `solo` is a single sequencer; `cft-replicated` runs
// a leader-based replicated log (terms, votes, majority commit). Either way
// the node materializes committed entries into the hash-chained block
// sequence and pushes new blocks to the channel's peers. The ordering layer
// never validates or executes transactions.
class OrdererNode : public Node {
 public:
  OrdererNode(NodeId id, const ChannelConfig& config, std::vector<NodeId> peers,
              Rng rng);

  void on_start(Sim& sim) override;
  void on_message(Sim& sim, const Message& msg) override;
  void on_timer(Sim& sim, const std::string& name, uint64_t tag) override;
  void on_recover(Sim& sim) override;

  const BlockStore& store() const { return store_; }
  std::optional<Block> deliver(uint64_t seq) const { return store_.deliver(seq); }
  bool is_leader() const { return role_ == Role::Leader; }
  uint64_t term() const { return term_; }
  size_t pool_size() const { return pool_.size(); }
  uint64_t committed_entries() const { return commit_index_; }

  // Direct (non-netsim) broadcast entry point for tests.
  bool accept_broadcast(Sim& sim, const TransactionEnvelope& tx);

  static constexpr Tick kHeartbeatPeriod = 5;
  static constexpr Tick kElectionBase = 30;
  static constexpr Tick kElectionJitter = 30;

 private:
  enum class Role { Follower, Candidate, Leader };

  bool solo() const { return config_.ordering.backend == "solo"; }
  size_t majority() const { return orderers_.size() / 2 + 1; }
  uint64_t last_log_index() const { return log_.size(); }
  uint64_t last_log_term() const { return log_.empty() ? 0 : log_.back().term; }

  void arm_election_timer(Sim& sim);
  void become_follower(Sim& sim, uint64_t term);
  void become_candidate(Sim& sim);
  void become_leader(Sim& sim);
  void send_append_entries(Sim& sim, const NodeId& follower);
  void broadcast_heartbeats(Sim& sim);
  void try_cut(Sim& sim, bool timeout_fired);
  void cut_batch(Sim& sim);
  void advance_commit_leader(Sim& sim);
  void set_commit_index(Sim& sim, uint64_t index);
  void materialize(Sim& sim);
  void handle_broadcast(Sim& sim, const Message& m);
  void handle_append(Sim& sim, const Message& m);
  void handle_append_ack(Sim& sim, const Message& m);
  void handle_vote_request(Sim& sim, const Message& m);
  void handle_vote_grant(Sim& sim, const Message& m);
  void pool_tx(Sim& sim, const TransactionEnvelope& tx);
  void forward_pool_to_leader(Sim& sim);
  void rebuild_log_ids();

  ChannelConfig config_;
  IdentityRegistry registry_;
  std::optional<PolicyNode> broadcast_policy_;
  std::optional<PolicyNode> deliver_policy_;
  std::vector<NodeId> orderers_;
  std::vector<NodeId> peers_;
  BlockStore store_;
  std::set<Bytes> delivered_tx_ids_;

  std::vector<TransactionEnvelope> pool_;
  std::set<Bytes> pool_ids_;
  std::set<Bytes> log_ids_;
  bool cut_timer_armed_ = false;

  Role role_ = Role::Follower;
  uint64_t term_ = 0;
  std::optional<NodeId> voted_for_;
  NodeId current_leader_;
  std::vector<LogEntry> log_;  // log_[i] holds raft index i+1
  uint64_t commit_index_ = 0;
  std::map<NodeId, uint64_t> next_index_;
  std::map<NodeId, uint64_t> match_index_;
  std::set<NodeId> votes_;
  uint64_t election_epoch_ = 0;
  uint64_t rank_ = 0;  // position among sorted orderer ids
  Rng rng_;
};

}  // namespace ledgersim
