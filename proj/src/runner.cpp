#include "ledgersim/runner.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <set>

#include "ledgersim/chaincode.hpp"
#include "ledgersim/collect.hpp"
#include "ledgersim/contracts.hpp"
#include "ledgersim/crypto.hpp"
#include "ledgersim/ordering.hpp"
#include "ledgersim/validation.hpp"

namespace ledgersim {

namespace {

constexpr const char* kProposeKind = "propose";
constexpr const char* kProposeResponseKind = "propose-response";
constexpr const char* kTxCommittedKind = "tx-committed";

// Internal cap standing in for "no budget": in the execute-order-validate
// pipeline hitting it is an endorsement failure (the endorser aborts the
// simulation and stays up); in order-execute it models a transaction that
// never finishes, freezing the executing peer.
constexpr uint64_t kUnbudgetedCap = 1000000;

struct ProposeResponseMsg {
  Bytes tx_id;
  ProposalResponse response;
};

struct TxCommittedMsg {
  Bytes tx_id;
};

struct PlannedTx {
  Tick at = 0;
  std::string chaincode_id;
  std::string operation;
  std::vector<Bytes> args;
};

std::vector<Bytes> to_args(const std::vector<std::string>& strings) {
  std::vector<Bytes> out;
  out.reserve(strings.size());
  for (const auto& s : strings) out.push_back(to_bytes(s));
  return out;
}

// ------------------------------------------------------------------ peer

class PeerNode : public Node {
 public:
  PeerNode(NodeId id, const ScenarioConfig& cfg, std::vector<NodeId> peer_ids,
           std::vector<NodeId> orderer_ids, std::set<NodeId> client_ids,
           bool endorser, Rng rng)
      : Node(std::move(id)),
        cfg_(&cfg),
        registry_(cfg.channel.identities),
        orderers_(std::move(orderer_ids)),
        clients_(std::move(client_ids)),
        endorser_(endorser),
        gossip_(this->id(), std::move(peer_ids), cfg.gossip_fanout,
                cfg.anti_entropy_period, rng.fork(1)),
        rng_(rng) {
    auto genesis = build_genesis(cfg.channel);
    store_.append_block(std::get<Block>(genesis));
    for (const auto& spec : cfg.chaincodes) {
      chaincodes_.install(spec.id, make_chaincode(spec.kind, spec.options));
    }
    gossip_.on_item = [this](Sim& sim, const Bytes&, const Bytes& payload) {
      if (frozen_) return;
      enqueue_block(sim, decode_block(payload));
    };
  }

  void on_start(Sim& sim) override {
    gossip_.start(sim);
    sim.set_timer(id(), "pull", sim.now() + cfg_->anti_entropy_period +
                                    rng_.below(cfg_->anti_entropy_period + 1));
  }

  void on_message(Sim& sim, const Message& m) override {
    if (frozen_) return;
    if (gossip_.handle_message(sim, m)) return;
    if (m.kind == kProposeKind) {
      handle_propose(sim, m);
    } else if (m.kind == msg::kDeliverBlock) {
      enqueue_block(sim, std::any_cast<const DeliverBlockMsg&>(m.body).block);
    }
  }

  void on_timer(Sim& sim, const std::string& name, uint64_t tag) override {
    (void)tag;
    if (frozen_) return;
    if (gossip_.handle_timer(sim, name)) return;
    if (name == "pull") {
      if (!orderers_.empty()) {
        const NodeId& target = orderers_[rng_.below(orderers_.size())];
        sim.send(id(), target, msg::kFetchBlocks,
                 FetchBlocksMsg{store_.height().value_or(0) + 1});
      }
      sim.set_timer(id(), "pull", sim.now() + cfg_->anti_entropy_period);
    }
  }

  const BlockStore& store() const { return store_; }
  const StateStore& state() const { return state_; }
  bool frozen() const { return frozen_; }
  const std::vector<std::string>& verdict_rows() const { return verdict_rows_; }
  const std::vector<std::pair<uint64_t, Tick>>& commit_ticks() const {
    return commit_ticks_;
  }
  uint32_t max_gossip_hops() const { return gossip_.max_hops(); }

 private:
  void handle_propose(Sim& sim, const Message& m) {
    if (!endorser_ || cfg_->pipeline != "execute-order-validate") return;
    const auto& proposal = std::any_cast<const Proposal&>(m.body);
    StepBudget budget{cfg_->step_budget ? cfg_->step_budget : kUnbudgetedCap};
    SimulationOutcome outcome =
        simulate_proposal(state_, chaincodes_, cfg_->channel, proposal, budget);

    ProposeResponseMsg reply;
    reply.tx_id = proposal.tx_id;
    if (auto* failure = std::get_if<SimulationFailure>(&outcome)) {
      reply.response.failure = failure->reason;
    } else {
      SimulationResult& result = std::get<SimulationResult>(outcome);
      const FaultSpec* byz =
          sim.active_fault(id(), FaultSpec::Kind::ByzantineEndorser);
      if (byz != nullptr && byz->strategy == "forge-writeset") {
        result.write_set.entries.push_back(
            WriteEntry{to_bytes("forged-by-" + id()), false, to_bytes("1")});
      }
      reply.response = endorse(registry_, id(), proposal.chaincode_id,
                               proposal.tx_id, result.read_set,
                               result.write_set, result.response);
      if (byz != nullptr && byz->strategy == "wrong-signature") {
        reply.response.endorsement->signature.bytes[0] ^= 0xff;
      }
    }
    sim.send(id(), m.from, kProposeResponseKind, std::move(reply));
  }

  void enqueue_block(Sim& sim, Block block) {
    uint64_t height = store_.height().value_or(0);
    if (block.seq <= height) return;
    pending_.emplace(block.seq, std::move(block));
    for (;;) {
      auto it = pending_.find(store_.height().value_or(0) + 1);
      if (it == pending_.end()) break;
      Block next = std::move(it->second);
      pending_.erase(it);
      commit_one(sim, std::move(next));
      if (frozen_) return;
    }
  }

  void commit_one(Sim& sim, Block block) {
    Bytes gossip_payload = encode_block(block);
    Bytes gossip_id = block.block_hash;
    uint64_t seq = block.seq;

    std::vector<ValidationVerdict> verdicts;
    if (cfg_->pipeline == "execute-order-validate") {
      verdicts = validate_block(block, cfg_->channel, state_);
      commit_block(store_, state_, std::move(block), verdicts);
    } else {
      // Order-execute: every peer executes sequentially at commit time.
      for (size_t i = 0; i < block.txs.size(); ++i) {
        const TransactionEnvelope& tx = block.txs[i];
        Proposal proposal{tx.client, tx.chaincode_id, tx.operation,
                          tx.args,   tx.nonce,        tx.timestamp,
                          tx.tx_id};
        StepBudget budget{cfg_->step_budget ? cfg_->step_budget : kUnbudgetedCap};
        SimulationOutcome outcome =
            simulate_proposal(state_, chaincodes_, cfg_->channel, proposal, budget);
        if (auto* failure = std::get_if<SimulationFailure>(&outcome)) {
          if (cfg_->step_budget == 0 &&
              failure->reason == std::string("step-budget-exhausted")) {
            // Unbounded execution: this peer never gets past the transaction.
            frozen_ = true;
            sim.trace_note(id(), "frozen", "non-terminating tx at block " +
                                               std::to_string(seq));
            return;
          }
          verdicts.push_back(ValidationVerdict{tx.tx_id, false,
                                               InvalidReason::ExecutionFailed,
                                               failure->reason});
        } else {
          const SimulationResult& result = std::get<SimulationResult>(outcome);
          state_.apply_writeset(result.write_set, Version{seq, i}, tx.tx_id);
          verdicts.push_back(
              ValidationVerdict{tx.tx_id, true, InvalidReason::None, ""});
        }
      }
      std::vector<TxValidity> flags;
      for (const auto& v : verdicts) flags.push_back(v.to_validity());
      store_.append_block(std::move(block), std::move(flags));
    }

    const Block& committed = store_.at(seq);
    commit_ticks_.emplace_back(seq, sim.now());
    for (size_t i = 0; i < committed.txs.size(); ++i) {
      const TransactionEnvelope& tx = committed.txs[i];
      const TxValidity& validity = tx.validity;
      verdict_rows_.push_back(
          std::to_string(seq) + "," + std::to_string(i) + "," +
          to_hex(tx.tx_id) + "," +
          (validity.flag == TxFlag::Valid ? "valid" : "invalid") + "," +
          validity.reason);
      if (clients_.count(tx.client)) {
        sim.send(id(), tx.client, kTxCommittedKind, TxCommittedMsg{tx.tx_id});
      }
    }
    gossip_.publish(sim, gossip_id, gossip_payload);
  }

  const ScenarioConfig* cfg_;
  IdentityRegistry registry_;
  ChaincodeRegistry chaincodes_;
  std::vector<NodeId> orderers_;
  std::set<NodeId> clients_;
  bool endorser_;
  BlockStore store_;
  StateStore state_;
  std::map<uint64_t, Block> pending_;
  bool frozen_ = false;
  std::vector<std::string> verdict_rows_;
  std::vector<std::pair<uint64_t, Tick>> commit_ticks_;
  GossipComponent gossip_;
  Rng rng_;
};

// ---------------------------------------------------------------- client

class ClientNode : public Node {
 public:
  ClientNode(NodeId id, const ScenarioConfig& cfg, std::vector<NodeId> endorsers,
             std::vector<NodeId> orderers, std::vector<PlannedTx> plan,
             std::set<Bytes>* provenance, Rng rng)
      : Node(std::move(id)),
        cfg_(&cfg),
        registry_(cfg.channel.identities),
        endorsers_(std::move(endorsers)),
        orderers_(std::move(orderers)),
        plan_(std::move(plan)),
        provenance_(provenance),
        rng_(rng) {}

  void on_start(Sim& sim) override {
    for (size_t i = 0; i < plan_.size(); ++i) {
      sim.set_timer(id(), "issue", plan_[i].at, i);
    }
    sim.set_timer(id(), "retry", sim.now() + cfg_->client_retry);
    for (const FaultSpec& fault : cfg_->faults) {
      if (fault.kind == FaultSpec::Kind::DosClient && fault.target == id()) {
        sim.set_timer(id(), "dos", fault.from);
      }
    }
  }

  void on_timer(Sim& sim, const std::string& name, uint64_t tag) override {
    if (name == "issue") {
      issue(sim, plan_[tag]);
    } else if (name == "collect") {
      auto it = collecting_.find(tag);
      if (it != collecting_.end()) {
        it->second.collector.finish();
        settle_collector(sim, tag);
      }
    } else if (name == "retry") {
      for (const auto& [tx_id, envelope] : awaiting_commit_) {
        for (const NodeId& orderer : orderers_) {
          sim.send(id(), orderer, msg::kBroadcast, BroadcastMsg{envelope});
        }
      }
      sim.set_timer(id(), "retry", sim.now() + cfg_->client_retry);
    } else if (name == "dos") {
      const FaultSpec* fault = sim.active_fault(id(), FaultSpec::Kind::DosClient);
      if (fault != nullptr) {
        std::string chaincode =
            fault->strategy == "forge-writeset" ? "kv" : fault->strategy;
        for (uint64_t i = 0; i < fault->rate; ++i) {
          if (cfg_->pipeline == "order-execute") {
            issue(sim, PlannedTx{sim.now(), chaincode, "loop", {}});
          } else {
            // Rapid-fire read-modify-writes of one key: at most one per block
            // survives the MVCC check, the rest land as invalid.
            issue(sim, PlannedTx{sim.now(), chaincode, "touch",
                                 {to_bytes("dos:" + id())}});
          }
        }
        sim.set_timer(id(), "dos", sim.now() + 1);
      }
    }
  }

  void on_message(Sim& sim, const Message& m) override {
    if (m.kind == kProposeResponseKind) {
      const auto& body = std::any_cast<const ProposeResponseMsg&>(m.body);
      auto nonce_it = txid_to_nonce_.find(body.tx_id);
      if (nonce_it == txid_to_nonce_.end()) return;
      uint64_t nonce = nonce_it->second;
      auto it = collecting_.find(nonce);
      if (it == collecting_.end()) return;
      it->second.collector.add_response(body.response);
      settle_collector(sim, nonce);
    } else if (m.kind == msg::kBroadcastAck) {
      const auto& ack = std::any_cast<const BroadcastAck&>(m.body);
      if (!ack.accepted) ++broadcasts_denied_;
    } else if (m.kind == kTxCommittedKind) {
      const auto& body = std::any_cast<const TxCommittedMsg&>(m.body);
      awaiting_commit_.erase(body.tx_id);
      committed_.insert(body.tx_id);
    }
  }

  uint64_t endorsement_failures() const { return endorsement_failures_; }
  uint64_t broadcasts_denied() const { return broadcasts_denied_; }

 private:
  struct Collecting {
    Proposal proposal;
    EndorsementCollector collector;
  };

  void issue(Sim& sim, const PlannedTx& planned) {
    Proposal proposal = make_proposal(id(), planned.chaincode_id,
                                      planned.operation, planned.args,
                                      ++nonce_, sim.now());
    if (cfg_->pipeline == "order-execute") {
      TransactionEnvelope envelope;
      envelope.tx_id = proposal.tx_id;
      envelope.client = id();
      envelope.chaincode_id = proposal.chaincode_id;
      envelope.operation = proposal.operation;
      envelope.args = proposal.args;
      envelope.nonce = proposal.nonce;
      envelope.timestamp = proposal.timestamp;
      broadcast(sim, std::move(envelope));
      return;
    }
    auto policy_it = cfg_->channel.endorsement_policies.find(planned.chaincode_id);
    PolicyNode policy = parse_policy(policy_it->second);
    uint64_t nonce = proposal.nonce;
    txid_to_nonce_[proposal.tx_id] = nonce;
    collecting_.emplace(
        nonce, Collecting{proposal, EndorsementCollector(registry_, policy,
                                                         proposal.tx_id,
                                                         endorsers_.size())});
    for (const NodeId& endorser : endorsers_) {
      sim.send(id(), endorser, kProposeKind, proposal);
    }
    sim.set_timer(id(), "collect", sim.now() + cfg_->collect_timeout, nonce);
  }

  void settle_collector(Sim& sim, uint64_t nonce) {
    auto it = collecting_.find(nonce);
    if (it == collecting_.end()) return;
    EndorsementCollector& collector = it->second.collector;
    if (collector.status() == EndorsementCollector::Status::Pending) return;
    if (collector.status() == EndorsementCollector::Status::Done) {
      TransactionEnvelope envelope;
      const Proposal& p = it->second.proposal;
      envelope.tx_id = p.tx_id;
      envelope.client = id();
      envelope.chaincode_id = p.chaincode_id;
      envelope.operation = p.operation;
      envelope.args = p.args;
      envelope.nonce = p.nonce;
      envelope.timestamp = p.timestamp;
      envelope.endorsements = collector.winning_group();
      broadcast(sim, std::move(envelope));
    } else {
      ++endorsement_failures_;
      sim.trace_note(id(), "endorse-failed", collector.failure_reason());
    }
    txid_to_nonce_.erase(it->second.proposal.tx_id);
    collecting_.erase(it);
  }

  void broadcast(Sim& sim, TransactionEnvelope envelope) {
    envelope.client_sig = registry_.sign(id(), envelope.tx_id);
    provenance_->insert(envelope.tx_id);
    awaiting_commit_[envelope.tx_id] = envelope;
    for (const NodeId& orderer : orderers_) {
      sim.send(id(), orderer, msg::kBroadcast, BroadcastMsg{envelope});
    }
  }

  const ScenarioConfig* cfg_;
  IdentityRegistry registry_;
  std::vector<NodeId> endorsers_;
  std::vector<NodeId> orderers_;
  std::vector<PlannedTx> plan_;
  std::set<Bytes>* provenance_;
  uint64_t nonce_ = 0;
  std::map<uint64_t, Collecting> collecting_;
  std::map<Bytes, uint64_t> txid_to_nonce_;
  std::map<Bytes, TransactionEnvelope> awaiting_commit_;
  std::set<Bytes> committed_;
  uint64_t endorsement_failures_ = 0;
  uint64_t broadcasts_denied_ = 0;
  Rng rng_;
};

std::vector<PlannedTx> build_plan(const ScenarioConfig& cfg, const NodeId& client,
                                  size_t client_index) {
  std::vector<PlannedTx> plan;
  Tick init_tick = 2;
  for (const InitTx& init : cfg.init_txs) {
    if (init.client != client) continue;
    plan.push_back(PlannedTx{init_tick, init.chaincode_id, init.operation,
                             to_args(init.args)});
  }
  const WorkloadSpec& w = cfg.workload;
  if (w.kind == "token-transfers") {
    std::string recipient =
        w.accounts.empty() ? "sink" : w.accounts[client_index % w.accounts.size()];
    for (uint64_t k = 0; k < w.count; ++k) {
      plan.push_back(PlannedTx{w.start + k * w.rate, w.chaincode, "transfer",
                               {to_bytes(recipient),
                                to_bytes(std::to_string(w.amount))}});
    }
  } else if (w.kind == "double-spend") {
    for (const std::string& spender : w.spenders) {
      if (spender != client) continue;
      plan.push_back(PlannedTx{w.start, w.chaincode, "transferFrom",
                               {to_bytes(w.shared_account), to_bytes(client),
                                to_bytes(std::to_string(w.amount))}});
    }
  } else if (w.kind == "kv-random") {
    Rng rng(cfg.seed * 1000003 + client_index);
    for (uint64_t k = 0; k < w.count; ++k) {
      std::string key = "k" + std::to_string(client_index) + "-" +
                        std::to_string(rng.below(64));
      plan.push_back(PlannedTx{w.start + k * w.rate, w.chaincode, "put",
                               {to_bytes(key),
                                to_bytes(std::to_string(rng.below(1000)))}});
    }
  } else if (w.kind == "loop-dos") {
    if (client_index == 0) {
      plan.push_back(PlannedTx{w.loop_at, w.loop_chaincode, "loop", {}});
    }
    std::string recipient =
        w.accounts.empty() ? "sink" : w.accounts[client_index % w.accounts.size()];
    for (uint64_t k = 0; k < w.count; ++k) {
      plan.push_back(PlannedTx{w.start + k * w.rate, w.chaincode, "transfer",
                               {to_bytes(recipient),
                                to_bytes(std::to_string(w.amount))}});
    }
  }
  std::sort(plan.begin(), plan.end(),
            [](const PlannedTx& a, const PlannedTx& b) { return a.at < b.at; });
  return plan;
}

struct LedgerView {
  std::vector<std::pair<Bytes, std::string>> blocks;  // hash + flags string
  std::set<Bytes> tx_ids;
};

LedgerView ledger_view(const BlockStore& store) {
  LedgerView view;
  for (size_t s = 0; s < store.size(); ++s) {
    const Block& b = store.at(s);
    std::string flags;
    for (const auto& tx : b.txs) {
      flags += std::to_string(static_cast<int>(tx.validity.flag)) + ":" +
               tx.validity.reason + ";";
      view.tx_ids.insert(tx.tx_id);
    }
    view.blocks.emplace_back(b.block_hash, flags);
  }
  return view;
}

RunResult run_permissioned(const ScenarioConfig& cfg,
                           const std::filesystem::path& out_dir,
                           const RunOptions& options);
RunResult run_lottery(const ScenarioConfig& cfg,
                      const std::filesystem::path& out_dir,
                      const RunOptions& options);

}  // namespace

RunResult run_scenario(const ScenarioConfig& config,
                       const std::filesystem::path& out_dir,
                       const RunOptions& options) {
  std::vector<std::string> problems = validate_scenario(config);
  if (!problems.empty()) {
    std::string message = "invalid scenario:";
    for (const auto& p : problems) message += "\n  " + p;
    throw std::invalid_argument(message);
  }
  if (config.mode == "lottery") return run_lottery(config, out_dir, options);
  return run_permissioned(config, out_dir, options);
}

namespace {

RunResult run_permissioned(const ScenarioConfig& cfg,
                           const std::filesystem::path& out_dir,
                           const RunOptions& options) {
  Sim sim(cfg.seed, cfg.link, cfg.per_tick_msg_cap);
  sim.set_tracing(options.tracing);

  std::vector<NodeId> orderer_ids = cfg.channel.orderer_addresses;
  std::sort(orderer_ids.begin(), orderer_ids.end());
  std::vector<NodeId> peer_ids, endorser_ids;
  for (const auto& peer : cfg.peers) peer_ids.push_back(peer.id);
  std::sort(peer_ids.begin(), peer_ids.end());
  for (const auto& peer : cfg.peers) {
    if (peer.endorser) endorser_ids.push_back(peer.id);
  }
  std::sort(endorser_ids.begin(), endorser_ids.end());
  std::set<NodeId> client_ids;
  for (const auto& client : cfg.clients) client_ids.insert(client.id);

  std::set<Bytes> provenance;
  std::vector<std::unique_ptr<OrdererNode>> orderers;
  std::vector<std::unique_ptr<PeerNode>> peers;
  std::vector<std::unique_ptr<ClientNode>> clients;

  for (const NodeId& id : orderer_ids) {
    orderers.push_back(
        std::make_unique<OrdererNode>(id, cfg.channel, peer_ids, sim.fork_rng()));
    sim.add_node(orderers.back().get());
  }
  for (const NodeId& id : peer_ids) {
    bool endorser = std::find(endorser_ids.begin(), endorser_ids.end(), id) !=
                    endorser_ids.end();
    peers.push_back(std::make_unique<PeerNode>(id, cfg, peer_ids, orderer_ids,
                                               client_ids, endorser,
                                               sim.fork_rng()));
    sim.add_node(peers.back().get());
  }
  {
    std::vector<ClientSpec> sorted_clients = cfg.clients;
    std::sort(sorted_clients.begin(), sorted_clients.end(),
              [](const ClientSpec& a, const ClientSpec& b) { return a.id < b.id; });
    for (size_t i = 0; i < sorted_clients.size(); ++i) {
      clients.push_back(std::make_unique<ClientNode>(
          sorted_clients[i].id, cfg, endorser_ids, orderer_ids,
          build_plan(cfg, sorted_clients[i].id, i), &provenance, sim.fork_rng()));
      sim.add_node(clients.back().get());
    }
  }
  for (const FaultSpec& fault : cfg.faults) sim.schedule_fault(fault);

  sim.start();
  sim.run_until(cfg.duration);

  RunResult result;
  result.metrics.duration = cfg.duration;
  result.metrics.window_size = cfg.metrics_window;

  // Faults heal iff they have an end tick inside the run.
  for (const FaultSpec& fault : cfg.faults) {
    if (fault.until == 0 || fault.until > cfg.duration) result.faults_healed = false;
  }

  bool any_frozen = false;
  for (const auto& peer : peers) any_frozen = any_frozen || peer->frozen();

  // --- safety invariants ------------------------------------------------
  std::vector<LedgerView> views;
  for (const auto& peer : peers) {
    if (auto fault = peer->store().verify_chain()) {
      result.violations.push_back("peer " + peer->id() + ": chain fault at seq " +
                                  std::to_string(fault->seq) + ": " + fault->what);
    }
    views.push_back(ledger_view(peer->store()));
  }
  for (size_t a = 0; a < views.size(); ++a) {
    for (size_t b = a + 1; b < views.size(); ++b) {
      size_t common = std::min(views[a].blocks.size(), views[b].blocks.size());
      for (size_t s = 0; s < common; ++s) {
        if (views[a].blocks[s] != views[b].blocks[s]) {
          result.violations.push_back(
              "agreement violated at seq " + std::to_string(s) + " between " +
              peers[a]->id() + " and " + peers[b]->id());
          break;
        }
      }
    }
  }
  for (size_t i = 0; i < views.size(); ++i) {
    for (const Bytes& tx_id : views[i].tx_ids) {
      if (!provenance.count(tx_id)) {
        result.violations.push_back("no-creation violated: peer " + peers[i]->id() +
                                    " delivered unknown tx " + to_hex(tx_id));
      }
    }
  }

  // Reference peer: first peer the fault plan never crashes.
  size_t ref = 0;
  for (size_t i = 0; i < peers.size(); ++i) {
    bool crashed_ever = false;
    for (const FaultSpec& fault : cfg.faults) {
      if (fault.kind == FaultSpec::Kind::Crash && fault.target == peers[i]->id()) {
        crashed_ever = true;
      }
    }
    if (!crashed_ever) {
      ref = i;
      break;
    }
  }
  PeerNode& ref_peer = *peers[ref];

  if (result.faults_healed && !any_frozen) {
    for (const Bytes& tx_id : provenance) {
      if (!views[ref].tx_ids.count(tx_id)) {
        result.violations.push_back("validity violated: broadcast tx " +
                                    to_hex(tx_id) + " never delivered");
      }
    }
  }

  // State reconstruction from the recorded write sets must reproduce the live
  // state. Order-execute ledgers carry operations, not write sets; their
  // replay is re-execution, so the fold check applies to the EOV pipeline.
  if (!ref_peer.frozen() && cfg.pipeline == "execute-order-validate") {
    StateStore replayed = replay_ledger(ref_peer.store());
    if (replayed.dump_string() != ref_peer.state().dump_string()) {
      result.violations.push_back("state replay mismatch on peer " + ref_peer.id());
    }
  }

  // --- metrics ------------------------------------------------------------
  Metrics& m = result.metrics;
  std::map<uint64_t, Tick> tick_of_block;
  for (const auto& [seq, tick] : ref_peer.commit_ticks()) tick_of_block[seq] = tick;
  m.blocks_committed = ref_peer.store().size();
  for (size_t s = 0; s < ref_peer.store().size(); ++s) {
    const Block& b = ref_peer.store().at(s);
    uint64_t window = cfg.metrics_window == 0
                          ? 0
                          : tick_of_block.count(s) ? tick_of_block[s] / cfg.metrics_window
                                                   : 0;
    for (const auto& tx : b.txs) {
      if (tx.validity.flag == TxFlag::Valid) {
        ++m.committed_valid;
        ++m.valid_per_window[window];
      } else if (tx.validity.flag == TxFlag::Invalid) {
        ++m.committed_invalid[tx.validity.reason];
        ++m.invalid_per_window[window];
        ++m.invalid_by_client[tx.client];
      }
    }
  }
  for (const auto& [client, count] : m.invalid_by_client) {
    if (count > cfg.blacklist_threshold) m.blacklisted.push_back(client);
  }
  for (const auto& client : clients) {
    m.endorsement_failures += client->endorsement_failures();
    m.broadcast_denied += client->broadcasts_denied();
  }
  for (const auto& peer : peers) {
    m.max_gossip_hops = std::max(m.max_gossip_hops, peer->max_gossip_hops());
  }

  result.final_height = ref_peer.store().height().value_or(0);
  result.ledger_hash = ref_peer.store().chain_hash();
  result.state_hash = ref_peer.state().state_hash();
  result.trace_hash = sim.trace_digest();

  if (const char* debug_trace = std::getenv("LEDGERSIM_DEBUG_TRACE")) {
    std::ofstream out(debug_trace, std::ios::trunc);
    for (const auto& line : sim.trace()) out << line << '\n';
  }

  // --- artifacts ------------------------------------------------------------
  if (options.write_artifacts && !out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    ref_peer.store().save(out_dir);
    {
      std::ofstream dump(out_dir / "state.dump", std::ios::trunc);
      ref_peer.state().dump(dump);
    }
    {
      std::ofstream verdicts(out_dir / "verdicts.csv", std::ios::trunc);
      verdicts << "block,txseq,txid,flag,reason\n";
      for (const auto& row : ref_peer.verdict_rows()) verdicts << row << '\n';
    }
    {
      std::ofstream trace(out_dir / "trace.log", std::ios::trunc);
      for (const auto& line : sim.trace()) trace << line << '\n';
    }
    write_metrics_csv(out_dir / "metrics.csv", m);
    write_blacklist_csv(out_dir / "blacklist.csv", m, cfg.blacklist_threshold);
    write_summary(out_dir / "summary.txt", m);
  }
  return result;
}

// ------------------------------------------------------------- lottery mode

struct MinerGenesis {
  static ForkBlock make(const std::string& tag) {
    ForkBlock genesis;
    genesis.hash = sha256("lottery-genesis:" + tag);
    genesis.height = 0;
    genesis.weight = 1;
    return genesis;
  }
};

Bytes encode_fork_block(const ForkBlock& b) {
  Writer w;
  w.blob(b.hash);
  w.blob(b.parent);
  w.u64(b.height);
  w.str(b.producer);
  w.u64(b.weight);
  w.u64(b.tick);
  w.u64(b.nonce);
  return w.take();
}

ForkBlock decode_fork_block(ByteSpan data) {
  Reader r(data);
  ForkBlock b;
  b.hash = r.blob();
  b.parent = r.blob();
  b.height = r.u64();
  b.producer = r.str();
  b.weight = r.u64();
  b.tick = r.u64();
  b.nonce = r.u64();
  return b;
}

class MinerNode : public Node {
 public:
  MinerNode(NodeId id, const ScenarioConfig& cfg, std::vector<NodeId> miners, Rng rng)
      : Node(std::move(id)),
        cfg_(&cfg),
        tree_(MinerGenesis::make(cfg.name)),
        gossip_(this->id(), std::move(miners), cfg.gossip_fanout,
                cfg.anti_entropy_period, rng.fork(1)),
        difficulty_(cfg.lottery.pow.difficulty),
        rng_(rng) {
    gossip_.on_item = [this](Sim& sim, const Bytes&, const Bytes& payload) {
      receive_block(sim, decode_fork_block(payload));
    };
  }

  void on_start(Sim& sim) override {
    gossip_.start(sim);
    sim.set_timer(id(), "mine", sim.now() + 1);
  }

  void on_timer(Sim& sim, const std::string& name, uint64_t) override {
    if (gossip_.handle_timer(sim, name)) return;
    if (name != "mine") return;
    mine_tick(sim);
    sim.set_timer(id(), "mine", sim.now() + 1);
  }

  void on_message(Sim& sim, const Message& m) override {
    gossip_.handle_message(sim, m);
  }

  const ForkTree& tree() const { return tree_; }
  uint64_t fork_events() const { return fork_events_; }

 private:
  void mine_tick(Sim& sim) {
    ForkBlock header;
    header.parent = tree_.main_tip();
    header.height = tree_.block(header.parent).height + 1;
    header.producer = id();
    header.tick = sim.now();
    for (uint64_t attempt = 0; attempt < cfg_->lottery.attempts_per_tick; ++attempt) {
      uint64_t nonce = rng_.next();
      if (!pow_attempt(header, nonce, difficulty_)) continue;
      header.nonce = nonce;
      Writer w;
      w.raw(pow_header_bytes(header));
      w.u64(nonce);
      header.hash = sha256(w.bytes());
      header.weight = uint64_t{1} << std::min<uint32_t>(difficulty_, 32);
      add_block(sim, header, true);
      break;  // one block per tick per miner
    }
  }

  void receive_block(Sim& sim, const ForkBlock& block) {
    if (tree_.contains(block.hash)) return;
    if (!pow_verify(block, 1)) return;  // sanity; weight carries difficulty
    orphans_.push_back(block);
    drain_orphans(sim);
  }

  void drain_orphans(Sim& sim) {
    bool progressed = true;
    while (progressed) {
      progressed = false;
      for (size_t i = 0; i < orphans_.size(); ++i) {
        if (!tree_.contains(orphans_[i].parent)) continue;
        ForkBlock block = orphans_[i];
        orphans_.erase(orphans_.begin() + i);
        add_block(sim, block, false);
        progressed = true;
        break;
      }
    }
  }

  void add_block(Sim& sim, const ForkBlock& block, bool mined_here) {
    size_t tips_before = tree_.tips().size();
    if (!tree_.add_block(block)) return;
    if (tree_.tips().size() > tips_before) {
      ++fork_events_;
      sim.trace_note(id(), "fork", "height " + std::to_string(block.height));
    }
    retarget(block);
    if (mined_here) {
      sim.trace_note(id(), "mined", "height " + std::to_string(block.height));
      gossip_.publish(sim, block.hash, encode_fork_block(block));
    }
  }

  void retarget(const ForkBlock&) {
    const PowParams& pow = cfg_->lottery.pow;
    std::vector<Bytes> chain = tree_.main_chain();
    if (chain.size() < pow.retarget_window + 1) return;
    if ((chain.size() - 1) % pow.retarget_window != 0) return;
    uint64_t newest = tree_.block(chain.back()).tick;
    uint64_t oldest = tree_.block(chain[chain.size() - 1 - pow.retarget_window]).tick;
    PowParams current = pow;
    current.difficulty = difficulty_;
    difficulty_ = retarget_difficulty(current, newest - oldest);
  }

  const ScenarioConfig* cfg_;
  ForkTree tree_;
  GossipComponent gossip_;
  uint32_t difficulty_;
  std::vector<ForkBlock> orphans_;
  uint64_t fork_events_ = 0;
  Rng rng_;
};

RunResult run_lottery(const ScenarioConfig& cfg,
                      const std::filesystem::path& out_dir,
                      const RunOptions& options) {
  RunResult result;
  Metrics& m = result.metrics;
  m.duration = cfg.duration;
  m.window_size = cfg.metrics_window;
  std::vector<std::string> fork_log;
  for (const FaultSpec& fault : cfg.faults) {
    if (fault.until == 0 || fault.until > cfg.duration) result.faults_healed = false;
  }

  if (cfg.lottery.protocol == "pow") {
    Sim sim(cfg.seed, cfg.link, cfg.per_tick_msg_cap);
    sim.set_tracing(options.tracing);
    std::vector<NodeId> miner_ids = cfg.lottery.producers;
    std::sort(miner_ids.begin(), miner_ids.end());
    std::vector<std::unique_ptr<MinerNode>> miners;
    for (const NodeId& id : miner_ids) {
      miners.push_back(std::make_unique<MinerNode>(id, cfg, miner_ids, sim.fork_rng()));
      sim.add_node(miners.back().get());
    }
    for (const FaultSpec& fault : cfg.faults) sim.schedule_fault(fault);
    sim.start();
    sim.run_until(cfg.duration);

    const MinerNode& ref = *miners.front();
    m.blocks_committed = ref.tree().main_height();
    for (const auto& miner : miners) m.fork_events += miner->fork_events();
    for (const Bytes& hash : ref.tree().main_chain()) {
      const ForkBlock& b = ref.tree().block(hash);
      uint64_t window = cfg.metrics_window ? b.tick / cfg.metrics_window : 0;
      ++m.valid_per_window[window];
      fork_log.push_back(std::to_string(b.tick) + ",block," + to_hex(b.hash));
    }
    // Flat block reward per main-chain block, credited to its producer.
    {
      std::map<std::string, uint64_t> rewards;
      for (const Bytes& hash : ref.tree().main_chain()) {
        const ForkBlock& b = ref.tree().block(hash);
        if (!b.producer.empty()) rewards[b.producer] += cfg.lottery.block_reward;
      }
      for (const auto& [producer, reward] : rewards) {
        fork_log.push_back("0,reward," + producer + ":" + std::to_string(reward));
      }
    }
    // Fork persistence: how many blocks a losing branch grew past its fork
    // point before being discarded.
    {
      uint64_t samples = 0, total = 0;
      for (const Bytes& tip : ref.tree().discarded_tips()) {
        uint64_t depth = 0;
        Bytes cursor = tip;
        while (!ref.tree().on_main_chain(cursor)) {
          cursor = ref.tree().block(cursor).parent;
          ++depth;
        }
        total += depth;
        ++samples;
        fork_log.push_back(std::to_string(ref.tree().block(tip).tick) +
                           ",discarded-tip,depth " + std::to_string(depth));
      }
      if (samples > 0) {
        m.fork_persistence_mean = static_cast<double>(total) / samples;
      }
    }
    // Every miner converges on one main tip once faults have healed.
    if (result.faults_healed) {
      for (const auto& miner : miners) {
        if (miner->tree().main_tip() != ref.tree().main_tip()) {
          result.violations.push_back("fork convergence: " + miner->id() +
                                      " disagrees on the main tip");
        }
      }
    }
    Writer w;
    for (const Bytes& hash : ref.tree().main_chain()) w.blob(hash);
    result.ledger_hash = sha256(w.bytes());
    result.trace_hash = sim.trace_digest();
    result.final_height = ref.tree().main_height();
  } else {
    // Stake-based protocols run as a deterministic slot lottery.
    Rng rng(cfg.seed);
    ForkTree tree(MinerGenesis::make(cfg.name));
    std::map<std::string, uint64_t> rewards;
    StakeLedger stake;
    for (const auto& [validator, coins] : cfg.lottery.stakes) {
      stake.set(validator, ValidatorStake{coins, 0, coins / 10, false});
    }
    WitnessRoster roster;
    roster.witness_count = cfg.lottery.witness_count;
    std::vector<WitnessVote> votes;
    for (const auto& [validator, coins] : cfg.lottery.stakes) {
      roster.candidates.push_back(WitnessCandidate{validator, 0, 0});
      votes.push_back(WitnessVote{validator, validator, coins});
    }
    if (cfg.lottery.protocol == "dpos") elect_witnesses(roster, votes);

    // poi: a seeded transfer history among the producers drives the
    // importance factors; holdings vest from day zero.
    std::vector<PoiTransfer> history;
    std::vector<std::string> producer_ids;
    if (cfg.lottery.protocol == "poi") {
      for (const auto& [validator, coins] : cfg.lottery.stakes) {
        producer_ids.push_back(validator);
      }
      uint64_t days = cfg.lottery.ticks_per_day == 0
                          ? 0
                          : cfg.duration / cfg.lottery.ticks_per_day;
      for (uint64_t day = 0; day <= days; ++day) {
        uint64_t transfers = rng.below(3);
        for (uint64_t i = 0; i < transfers && producer_ids.size() >= 2; ++i) {
          std::string from = producer_ids[rng.below(producer_ids.size())];
          std::string to = producer_ids[rng.below(producer_ids.size())];
          if (from == to) continue;
          history.push_back(PoiTransfer{from, to, 5 + rng.below(46), day});
        }
      }
    }
    auto poi_harvester = [&](Tick t) -> std::optional<std::string> {
      uint64_t day = cfg.lottery.ticks_per_day == 0
                         ? 0
                         : t / cfg.lottery.ticks_per_day;
      std::vector<PoiTransfer> visible;
      for (const auto& transfer : history) {
        if (transfer.day <= day) visible.push_back(transfer);
      }
      std::vector<std::pair<std::string, uint64_t>> weighted;
      uint64_t total = 0;
      for (const auto& id : producer_ids) {
        PoiAccount account{id, {Holding{cfg.lottery.stakes.at(id), 0}}};
        auto breakdown = importance_score(account, cfg.lottery.poi, visible, day);
        if (!breakdown.eligible || breakdown.score <= 0.0) continue;
        uint64_t weight = static_cast<uint64_t>(breakdown.score * 1000.0) + 1;
        weighted.emplace_back(id, weight);
        total += weight;
      }
      if (total == 0) return std::nullopt;
      uint64_t draw = rng.below(total);
      for (const auto& [id, weight] : weighted) {
        if (draw < weight) return id;
        draw -= weight;
      }
      return weighted.back().first;
    };

    for (Tick t = 1; t <= cfg.duration; ++t) {
      std::optional<std::string> producer;
      if (cfg.lottery.protocol == "pos") {
        producer = stake.select_validator(cfg.lottery.pos_mode, t,
                                          cfg.lottery.ticks_per_day, rng);
        if (producer) stake.mark_selected(*producer, t);
      } else if (cfg.lottery.protocol == "dpos") {
        if (!roster.active.empty()) {
          producer = roster.active[t % roster.active.size()];
        }
      } else {  // poi: harvesting chance follows the importance score
        producer = poi_harvester(t);
      }
      if (!producer) continue;
      ForkBlock block;
      block.parent = tree.main_tip();
      block.height = tree.block(block.parent).height + 1;
      block.producer = *producer;
      block.tick = t;
      block.nonce = rng.next();
      Writer w;
      w.raw(pow_header_bytes(block));
      w.u64(block.nonce);
      block.hash = sha256(w.bytes());
      block.weight = 1;
      tree.add_block(block);
      fork_log.push_back(std::to_string(t) + ",block," + to_hex(block.hash));
      uint64_t window = cfg.metrics_window ? t / cfg.metrics_window : 0;
      ++m.valid_per_window[window];
      // flat reward; for stake-based modes it compounds into the stake
      if (cfg.lottery.protocol == "pos") {
        ValidatorStake updated = *stake.find(*producer);
        updated.coins += cfg.lottery.block_reward;
        stake.set(*producer, updated);
      }
      rewards[*producer] += cfg.lottery.block_reward;
    }
    for (const auto& [producer, reward] : rewards) {
      fork_log.push_back("0,reward," + producer + ":" + std::to_string(reward));
    }
    m.blocks_committed = tree.main_height();
    result.final_height = tree.main_height();
    Writer w;
    for (const Bytes& hash : tree.main_chain()) w.blob(hash);
    result.ledger_hash = sha256(w.bytes());
    result.trace_hash = result.ledger_hash;
  }

  if (options.write_artifacts && !out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    {
      std::ofstream forks(out_dir / "forks.csv", std::ios::trunc);
      forks << "tick,event,detail\n";
      for (const auto& row : fork_log) forks << row << '\n';
    }
    write_metrics_csv(out_dir / "metrics.csv", m);
    write_summary(out_dir / "summary.txt", m);
  }
  return result;
}

}  // namespace

ReplayReport replay_run_dir(const std::filesystem::path& run_dir) {
  ReplayReport report;
  if (auto fault = BlockStore::verify_chain_files(run_dir)) {
    report.detail = "chain fault at seq " + std::to_string(fault->seq) + ": " +
                    fault->what;
    return report;
  }
  report.chain_ok = true;
  BlockStore store = BlockStore::load(run_dir);
  StateStore replayed = replay_ledger(store);
  std::ifstream dump_file(run_dir / "state.dump");
  if (!dump_file) {
    report.detail = "state.dump missing";
    return report;
  }
  std::string recorded((std::istreambuf_iterator<char>(dump_file)),
                       std::istreambuf_iterator<char>());
  if (replayed.dump_string() == recorded) {
    report.state_ok = true;
  } else {
    report.detail = "replayed state differs from state.dump";
  }
  return report;
}

}  // namespace ledgersim
