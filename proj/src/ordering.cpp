#include "ledgersim/ordering.hpp"

#include <algorithm>

namespace ledgersim {

OrdererNode::OrdererNode(NodeId id, const ChannelConfig& config,
                         std::vector<NodeId> peers, Rng rng)
    : Node(std::move(id)),
      config_(config),
      registry_(config.identities),
      orderers_(config.orderer_addresses),
      peers_(std::move(peers)),
      rng_(rng) {
  if (!config_.broadcast_policy.empty()) {
    broadcast_policy_ = parse_policy(config_.broadcast_policy);
  }
  if (!config_.deliver_policy.empty()) {
    deliver_policy_ = parse_policy(config_.deliver_policy);
  }
  auto genesis = build_genesis(config_);
  store_.append_block(std::get<Block>(genesis));
  std::vector<NodeId> sorted = orderers_;
  std::sort(sorted.begin(), sorted.end());
  rank_ = static_cast<uint64_t>(
      std::find(sorted.begin(), sorted.end(), this->id()) - sorted.begin());
}

void OrdererNode::on_start(Sim& sim) {
  if (solo()) {
    role_ = Role::Leader;
    current_leader_ = id();
    return;
  }
  become_follower(sim, 0);
}

void OrdererNode::on_recover(Sim& sim) {
  // Crash-recovery keeps term/vote/log (stable storage); volatile leadership
  // state restarts from follower. Pending timers were dropped while down, so
  // the cut-timer flag must not claim one is still outstanding.
  cut_timer_armed_ = false;
  if (!solo()) {
    role_ = Role::Follower;
    votes_.clear();
    arm_election_timer(sim);
  }
  if (!pool_.empty() && role_ == Role::Leader) try_cut(sim, false);
}

void OrdererNode::arm_election_timer(Sim& sim) {
  ++election_epoch_;
  // The rank term breaks simultaneous-candidacy ties in favor of the lowest
  // node id, deterministically under a fixed seed.
  Tick timeout = kElectionBase + rank_ + rng_.below(kElectionJitter + 1);
  sim.set_timer(id(), "election", sim.now() + timeout, election_epoch_);
}

void OrdererNode::become_follower(Sim& sim, uint64_t term) {
  if (term > term_) {
    term_ = term;
    voted_for_.reset();
  }
  role_ = Role::Follower;
  votes_.clear();
  arm_election_timer(sim);
}

void OrdererNode::become_candidate(Sim& sim) {
  role_ = Role::Candidate;
  ++term_;
  voted_for_ = id();
  votes_ = {id()};
  current_leader_.clear();
  sim.trace_note(id(), "candidacy", "term " + std::to_string(term_));
  VoteRequestMsg req{term_, id(), last_log_index(), last_log_term()};
  for (const NodeId& other : orderers_) {
    if (other != id()) sim.send(id(), other, msg::kVoteRequest, req);
  }
  arm_election_timer(sim);  // retry on split vote
  if (votes_.size() >= majority()) become_leader(sim);  // single-orderer group
}

void OrdererNode::become_leader(Sim& sim) {
  role_ = Role::Leader;
  current_leader_ = id();
  sim.trace_note(id(), "leader", "term " + std::to_string(term_));
  next_index_.clear();
  match_index_.clear();
  for (const NodeId& other : orderers_) {
    if (other == id()) continue;
    next_index_[other] = last_log_index() + 1;
    match_index_[other] = 0;
  }
  // Commit barrier: entries only count toward commitment in their own term,
  // so a fresh leader appends an empty entry of the new term to pull any
  // uncommitted older-term entries through with it.
  if (!solo() && commit_index_ < last_log_index()) {
    log_.push_back(LogEntry{term_, {}});
    if (orderers_.size() == 1) set_commit_index(sim, last_log_index());
  }
  broadcast_heartbeats(sim);
  sim.set_timer(id(), "heartbeat", sim.now() + kHeartbeatPeriod, term_);
  if (!pool_.empty()) try_cut(sim, false);
}

void OrdererNode::send_append_entries(Sim& sim, const NodeId& follower) {
  uint64_t next = next_index_[follower];
  AppendEntriesMsg m;
  m.term = term_;
  m.leader = id();
  m.prev_index = next - 1;
  m.prev_term = m.prev_index == 0 ? 0 : log_[m.prev_index - 1].term;
  for (uint64_t i = next; i <= last_log_index(); ++i) {
    m.entries.push_back(log_[i - 1]);
  }
  m.leader_commit = commit_index_;
  sim.send(id(), follower, msg::kAppend, std::move(m));
}

void OrdererNode::broadcast_heartbeats(Sim& sim) {
  for (const NodeId& other : orderers_) {
    if (other != id()) send_append_entries(sim, other);
  }
}

bool OrdererNode::accept_broadcast(Sim& sim, const TransactionEnvelope& tx) {
  // Access control: the client must be registered, its signature must check
  // out, and the channel's broadcast policy (when present) must admit it.
  const Identity* client = registry_.find(tx.client);
  if (client == nullptr) return false;
  if (tx.client_sig.signer != tx.client || !registry_.verify(tx.client_sig, tx.tx_id)) {
    return false;
  }
  if (broadcast_policy_ &&
      !evaluate_policy(*broadcast_policy_, {Signer{client->id, client->org}})) {
    return false;
  }
  pool_tx(sim, tx);
  return true;
}

void OrdererNode::pool_tx(Sim& sim, const TransactionEnvelope& tx) {
  if (pool_ids_.count(tx.tx_id) || log_ids_.count(tx.tx_id) ||
      delivered_tx_ids_.count(tx.tx_id)) {
    return;  // idempotent by tx-id
  }
  pool_.push_back(tx);
  pool_ids_.insert(tx.tx_id);
  if (role_ == Role::Leader) {
    try_cut(sim, false);
  } else if (!current_leader_.empty()) {
    forward_pool_to_leader(sim);
  }
}

void OrdererNode::forward_pool_to_leader(Sim& sim) {
  if (current_leader_.empty() || current_leader_ == id()) return;
  for (const auto& tx : pool_) {
    sim.send(id(), current_leader_, msg::kBroadcast, BroadcastMsg{tx});
  }
  // Keep nothing locally: the leader owns cutting. Client retry plus the
  // idempotent pool make the occasional loss during leader churn harmless.
  for (const auto& tx : pool_) pool_ids_.erase(tx.tx_id);
  pool_.clear();
}

void OrdererNode::try_cut(Sim& sim, bool timeout_fired) {
  if (role_ != Role::Leader) return;
  while (pool_.size() >= config_.ordering.batch_max_txs) cut_batch(sim);
  if (timeout_fired && !pool_.empty()) cut_batch(sim);
  if (!pool_.empty() && !cut_timer_armed_) {
    cut_timer_armed_ = true;
    sim.set_timer(id(), "cut", sim.now() + config_.ordering.batch_timeout);
  }
}

void OrdererNode::cut_batch(Sim& sim) {
  size_t take = std::min<size_t>(pool_.size(), config_.ordering.batch_max_txs);
  if (take == 0) return;
  LogEntry entry;
  entry.term = term_;
  entry.txs.assign(pool_.begin(), pool_.begin() + take);
  pool_.erase(pool_.begin(), pool_.begin() + take);
  for (const auto& tx : entry.txs) {
    pool_ids_.erase(tx.tx_id);
    log_ids_.insert(tx.tx_id);
  }
  log_.push_back(std::move(entry));
  if (solo() || orderers_.size() == 1) {
    set_commit_index(sim, last_log_index());
  } else {
    broadcast_heartbeats(sim);
  }
}

void OrdererNode::advance_commit_leader(Sim& sim) {
  // Majority-replicated entries of the current term commit; earlier terms
  // commit transitively.
  for (uint64_t n = last_log_index(); n > commit_index_; --n) {
    if (log_[n - 1].term != term_) break;
    size_t replicas = 1;  // self
    for (const auto& [node, match] : match_index_) {
      if (match >= n) ++replicas;
    }
    if (replicas >= majority()) {
      set_commit_index(sim, n);
      break;
    }
  }
}

void OrdererNode::set_commit_index(Sim& sim, uint64_t index) {
  if (index <= commit_index_) return;
  commit_index_ = index;
  materialize(sim);
}

void OrdererNode::materialize(Sim& sim) {
  // Committed entry k becomes block k (genesis is block 0). Duplicate tx-ids
  // that survived leader churn are dropped at emission so the ledger carries
  // each transaction exactly once; all orderers compute identical blocks from
  // the identical committed log.
  while (store_.height().value_or(0) < commit_index_) {
    uint64_t seq = *store_.height() + 1;
    const LogEntry& entry = log_[seq - 1];
    Block block;
    block.seq = seq;
    block.prev_hash = store_.at(seq - 1).block_hash;
    for (const auto& tx : entry.txs) {
      if (delivered_tx_ids_.count(tx.tx_id)) continue;
      delivered_tx_ids_.insert(tx.tx_id);
      block.txs.push_back(tx);
    }
    seal_block(block);
    store_.append_block(block);
    sim.trace_note(id(), "block-cut",
                   "seq " + std::to_string(seq) + " txs " + std::to_string(block.txs.size()));
    if (role_ == Role::Leader) {
      for (const NodeId& peer : peers_) {
        sim.send(id(), peer, msg::kDeliverBlock, DeliverBlockMsg{block});
      }
    }
  }
}

void OrdererNode::handle_broadcast(Sim& sim, const Message& m) {
  const auto& body = std::any_cast<const BroadcastMsg&>(m.body);
  bool accepted = accept_broadcast(sim, body.tx);
  bool from_orderer =
      std::find(orderers_.begin(), orderers_.end(), m.from) != orderers_.end();
  if (!from_orderer) {
    sim.send(id(), m.from, msg::kBroadcastAck,
             BroadcastAck{body.tx.tx_id, accepted,
                          accepted ? "" : "access denied"});
  }
}

void OrdererNode::handle_append(Sim& sim, const Message& m) {
  const auto& body = std::any_cast<const AppendEntriesMsg&>(m.body);
  AppendAckMsg ack;
  ack.log_size = last_log_index();
  if (body.term < term_) {
    ack.term = term_;
    ack.success = false;
    sim.send(id(), m.from, msg::kAppendAck, ack);
    return;
  }
  if (body.term > term_ || role_ != Role::Follower) {
    become_follower(sim, body.term);
  } else {
    arm_election_timer(sim);
  }
  term_ = body.term;
  current_leader_ = body.leader;
  ack.term = term_;

  bool consistent =
      body.prev_index == 0 ||
      (body.prev_index <= last_log_index() &&
       log_[body.prev_index - 1].term == body.prev_term);
  if (!consistent) {
    ack.success = false;
    ack.log_size = last_log_index();
    sim.send(id(), m.from, msg::kAppendAck, ack);
    forward_pool_to_leader(sim);
    return;
  }

  // Drop a conflicting suffix, then append what is new. Transactions from
  // truncated entries flow back into the pool so they are not lost.
  uint64_t index = body.prev_index;
  for (const LogEntry& entry : body.entries) {
    ++index;
    if (index <= last_log_index()) {
      if (log_[index - 1].term == entry.term) continue;
      std::vector<TransactionEnvelope> orphaned;
      for (uint64_t i = index; i <= last_log_index(); ++i) {
        for (const auto& tx : log_[i - 1].txs) orphaned.push_back(tx);
      }
      log_.resize(index - 1);
      rebuild_log_ids();
      for (const auto& tx : orphaned) pool_tx(sim, tx);
    }
    log_.push_back(entry);
    for (const auto& tx : entry.txs) {
      log_ids_.insert(tx.tx_id);
      pool_ids_.erase(tx.tx_id);
    }
    std::erase_if(pool_, [&](const TransactionEnvelope& tx) {
      return log_ids_.count(tx.tx_id) > 0;
    });
  }
  ack.success = true;
  ack.match_index = body.prev_index + body.entries.size();
  ack.log_size = last_log_index();
  if (body.leader_commit > commit_index_) {
    set_commit_index(sim, std::min(body.leader_commit, last_log_index()));
  }
  sim.send(id(), m.from, msg::kAppendAck, ack);
  forward_pool_to_leader(sim);
}

void OrdererNode::handle_append_ack(Sim& sim, const Message& m) {
  const auto& body = std::any_cast<const AppendAckMsg&>(m.body);
  if (body.term > term_) {
    become_follower(sim, body.term);
    return;
  }
  if (role_ != Role::Leader || body.term != term_) return;
  if (body.success) {
    match_index_[m.from] = std::max(match_index_[m.from], body.match_index);
    next_index_[m.from] = match_index_[m.from] + 1;
    advance_commit_leader(sim);
  } else {
    uint64_t next = next_index_[m.from];
    next_index_[m.from] = std::min<uint64_t>(body.log_size + 1,
                                             next > 1 ? next - 1 : 1);
    send_append_entries(sim, m.from);
  }
}

void OrdererNode::handle_vote_request(Sim& sim, const Message& m) {
  const auto& body = std::any_cast<const VoteRequestMsg&>(m.body);
  if (body.term > term_) become_follower(sim, body.term);
  VoteGrantMsg grant;
  grant.term = term_;
  grant.granted = false;
  if (body.term == term_ && (!voted_for_ || *voted_for_ == body.candidate)) {
    bool up_to_date =
        body.last_log_term > last_log_term() ||
        (body.last_log_term == last_log_term() &&
         body.last_log_index >= last_log_index());
    if (up_to_date) {
      grant.granted = true;
      voted_for_ = body.candidate;
      arm_election_timer(sim);
    }
  }
  sim.send(id(), m.from, msg::kVoteGrant, grant);
}

void OrdererNode::handle_vote_grant(Sim& sim, const Message& m) {
  const auto& body = std::any_cast<const VoteGrantMsg&>(m.body);
  if (body.term > term_) {
    become_follower(sim, body.term);
    return;
  }
  if (role_ != Role::Candidate || body.term != term_ || !body.granted) return;
  votes_.insert(m.from);
  if (votes_.size() >= majority()) become_leader(sim);
}

void OrdererNode::rebuild_log_ids() {
  log_ids_.clear();
  for (const auto& entry : log_) {
    for (const auto& tx : entry.txs) log_ids_.insert(tx.tx_id);
  }
}

void OrdererNode::on_message(Sim& sim, const Message& m) {
  if (m.kind == msg::kBroadcast) {
    handle_broadcast(sim, m);
  } else if (m.kind == msg::kAppend) {
    handle_append(sim, m);
  } else if (m.kind == msg::kAppendAck) {
    handle_append_ack(sim, m);
  } else if (m.kind == msg::kVoteRequest) {
    handle_vote_request(sim, m);
  } else if (m.kind == msg::kVoteGrant) {
    handle_vote_grant(sim, m);
  } else if (m.kind == msg::kFetchBlocks) {
    // peer orderers always may sync; everyone else passes the deliver rule
    if (deliver_policy_ &&
        std::find(orderers_.begin(), orderers_.end(), m.from) == orderers_.end()) {
      const Identity* requester = registry_.find(m.from);
      if (requester == nullptr ||
          !evaluate_policy(*deliver_policy_,
                           {Signer{requester->id, requester->org}})) {
        sim.trace_note(id(), "deliver-denied", m.from);
        return;
      }
    }
    const auto& body = std::any_cast<const FetchBlocksMsg&>(m.body);
    uint64_t height = store_.height().value_or(0);
    for (uint64_t s = body.from_seq; s <= height && s < body.from_seq + 10; ++s) {
      sim.send(id(), m.from, msg::kDeliverBlock, DeliverBlockMsg{store_.at(s)});
    }
  }
}

void OrdererNode::on_timer(Sim& sim, const std::string& name, uint64_t tag) {
  if (name == "election") {
    if (solo() || tag != election_epoch_ || role_ == Role::Leader) return;
    become_candidate(sim);
  } else if (name == "heartbeat") {
    if (role_ != Role::Leader || tag != term_) return;
    broadcast_heartbeats(sim);
    sim.set_timer(id(), "heartbeat", sim.now() + kHeartbeatPeriod, term_);
  } else if (name == "cut") {
    cut_timer_armed_ = false;
    try_cut(sim, true);
  }
}

}  // namespace ledgersim
