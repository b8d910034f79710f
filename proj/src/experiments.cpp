#include "ledgersim/experiments.hpp"

#include <algorithm>

#include "ledgersim/codec.hpp"
#include "ledgersim/crypto.hpp"
#include "ledgersim/lottery.hpp"

namespace ledgersim {

namespace {

Identity ident(const std::string& id, const std::string& org) {
  return Identity{id, org, sim_keygen("exp:" + id)};
}

}  // namespace

ScenarioConfig happy_token_scenario(uint64_t seed, const std::string& pipeline) {
  ScenarioConfig cfg;
  cfg.name = "happy-token";
  cfg.seed = seed;
  cfg.duration = 280;
  cfg.pipeline = pipeline;
  cfg.channel.channel_id = "ch-happy";
  cfg.channel.identities = {ident("alice", "org3"), ident("bob", "org3"),
                            ident("peer1", "org1"), ident("peer2", "org2")};
  cfg.channel.orderer_addresses = {"orderer1"};
  cfg.channel.ordering = OrderingParams{"solo", 8, 15, 0};
  cfg.channel.modification_policy = "id:alice";
  cfg.channel.endorsement_policies["token"] = "OR(org1,org2)";
  cfg.peers = {{"peer1", "org1", true}, {"peer2", "org2", true}};
  cfg.clients = {{"alice", "org3"}, {"bob", "org3"}};
  cfg.chaincodes = {{"token", "token-erc20", {}}};
  cfg.init_txs = {{"alice", "token", "init", {"alice", "500", "bob", "500"}}};
  cfg.workload.kind = "token-transfers";
  cfg.workload.chaincode = "token";
  cfg.workload.start = 45;
  cfg.workload.rate = 30;
  cfg.workload.count = 5;
  cfg.workload.amount = 3;
  cfg.workload.accounts = {"sink-a", "sink-b"};
  derive_identities(cfg);
  return cfg;
}

ScenarioConfig double_spend_scenario(uint64_t seed) {
  ScenarioConfig cfg;
  cfg.name = "double-spend";
  cfg.seed = seed;
  cfg.duration = 180;
  cfg.channel.channel_id = "ch-race";
  cfg.channel.identities = {ident("shared", "org3"), ident("racer1", "org3"),
                            ident("racer2", "org3"), ident("peer1", "org1"),
                            ident("peer2", "org2")};
  cfg.channel.orderer_addresses = {"orderer1"};
  cfg.channel.ordering = OrderingParams{"solo", 10, 20, 0};
  cfg.channel.modification_policy = "id:shared";
  cfg.channel.endorsement_policies["token"] = "AND(org1,org2)";
  cfg.peers = {{"peer1", "org1", true}, {"peer2", "org2", true}};
  cfg.clients = {{"shared", "org3"}, {"racer1", "org3"}, {"racer2", "org3"}};
  cfg.chaincodes = {{"token", "token-erc20", {}}};
  cfg.init_txs = {{"shared", "token", "init", {"shared", "100"}},
                  {"shared", "token", "approve", {"racer1", "90"}},
                  {"shared", "token", "approve", {"racer2", "90"}}};
  cfg.workload.kind = "double-spend";
  cfg.workload.chaincode = "token";
  cfg.workload.start = 60;
  cfg.workload.amount = 80;
  cfg.workload.shared_account = "shared";
  cfg.workload.spenders = {"racer1", "racer2"};
  derive_identities(cfg);
  return cfg;
}

ScenarioConfig loop_dos_scenario(uint64_t seed, const std::string& pipeline,
                                 uint64_t step_budget) {
  ScenarioConfig cfg;
  cfg.name = "loop-dos";
  cfg.seed = seed;
  cfg.duration = 320;
  cfg.pipeline = pipeline;
  cfg.step_budget = step_budget;
  cfg.channel.channel_id = "ch-dos";
  cfg.channel.identities = {ident("attacker", "org3"), ident("worker", "org3"),
                            ident("peer1", "org1"), ident("peer2", "org2")};
  cfg.channel.orderer_addresses = {"orderer1"};
  cfg.channel.ordering = OrderingParams{"solo", 6, 15, 0};
  cfg.channel.modification_policy = "id:worker";
  cfg.channel.endorsement_policies["token"] = "OR(org1,org2)";
  cfg.channel.endorsement_policies["looper"] = "OR(org1,org2)";
  cfg.peers = {{"peer1", "org1", true}, {"peer2", "org2", true}};
  cfg.clients = {{"attacker", "org3"}, {"worker", "org3"}};
  cfg.chaincodes = {{"token", "token-erc20", {}}, {"looper", "looper", {}}};
  cfg.init_txs = {{"worker", "token", "init",
                   {"worker", "1000", "attacker", "500"}}};
  cfg.workload.kind = "loop-dos";
  cfg.workload.chaincode = "token";
  cfg.workload.loop_chaincode = "looper";
  cfg.workload.loop_at = 70;
  cfg.workload.start = 40;
  cfg.workload.rate = 30;
  cfg.workload.count = 7;
  cfg.workload.amount = 2;
  cfg.workload.accounts = {"sink-a", "sink-b"};
  derive_identities(cfg);
  return cfg;
}

ScenarioConfig dos_blacklist_scenario(uint64_t seed, uint64_t dos_rate,
                                      uint64_t dos_from, uint64_t dos_until) {
  ScenarioConfig cfg;
  cfg.name = "dos-blacklist";
  cfg.seed = seed;
  cfg.duration = dos_until + 160;
  cfg.channel.channel_id = "ch-blacklist";
  cfg.channel.identities = {ident("mallory", "org3"), ident("worker", "org3"),
                            ident("peer1", "org1")};
  cfg.channel.orderer_addresses = {"orderer1"};
  cfg.channel.ordering = OrderingParams{"solo", 10, 10, 0};
  cfg.channel.modification_policy = "id:worker";
  cfg.channel.endorsement_policies["kv"] = "OR(org1)";
  cfg.peers = {{"peer1", "org1", true}};
  cfg.clients = {{"mallory", "org3"}, {"worker", "org3"}};
  cfg.chaincodes = {{"kv", "kv", {}}};
  cfg.workload.kind = "none";
  FaultSpec dos;
  dos.kind = FaultSpec::Kind::DosClient;
  dos.target = "mallory";
  dos.strategy = "kv";
  dos.rate = dos_rate;
  dos.from = dos_from;
  dos.until = dos_until;
  cfg.faults.push_back(dos);
  derive_identities(cfg);
  return cfg;
}

SafetyRunReport ordering_safety_run(uint64_t seed) {
  Rng rng(seed ^ 0x5afe7e57ull);

  ScenarioConfig cfg;
  cfg.name = "ordering-safety";
  cfg.seed = seed;
  cfg.duration = 520;
  cfg.collect_timeout = 25;
  cfg.client_retry = 40;
  cfg.anti_entropy_period = 20;
  cfg.channel.channel_id = "ch-safety";
  cfg.channel.identities = {ident("c1", "org1"), ident("c2", "org1"),
                            ident("p1", "org1"), ident("p2", "org1")};
  cfg.channel.orderer_addresses = {"o1", "o2", "o3"};
  cfg.channel.ordering = OrderingParams{"cft-replicated", 4, 12, 1};
  cfg.channel.modification_policy = "id:c1";
  cfg.channel.endorsement_policies["kv"] = "OR(org1)";
  cfg.peers = {{"p1", "org1", true}, {"p2", "org1", true}};
  cfg.clients = {{"c1", "org1"}, {"c2", "org1"}};
  cfg.chaincodes = {{"kv", "kv", {}}};
  cfg.workload.kind = "kv-random";
  cfg.workload.chaincode = "kv";
  cfg.workload.start = 10;
  cfg.workload.rate = 16;
  cfg.workload.count = 7;

  // Fault plan: crashes and single-node partitions, one at a time (f = 1),
  // all healed with enough slack to re-elect, retry and catch up.
  std::vector<NodeId> orderers = {"o1", "o2", "o3"};
  uint64_t fault_count = 1 + rng.below(2);
  uint64_t cursor = 30 + rng.below(40);
  for (uint64_t i = 0; i < fault_count && cursor < 240; ++i) {
    FaultSpec fault;
    uint64_t duration = 40 + rng.below(80);
    uint64_t kind = rng.below(3);
    if (kind == 0) {
      fault.kind = FaultSpec::Kind::Crash;
      fault.target = orderers[rng.below(orderers.size())];
    } else if (kind == 1) {
      fault.kind = FaultSpec::Kind::Partition;
      NodeId isolated = orderers[rng.below(orderers.size())];
      fault.group_a = {isolated};
      for (const NodeId& n : {std::string("o1"), std::string("o2"),
                              std::string("o3"), std::string("p1"),
                              std::string("p2"), std::string("c1"),
                              std::string("c2")}) {
        if (n != isolated) fault.group_b.push_back(n);
      }
    } else {
      fault.kind = FaultSpec::Kind::Crash;
      fault.target = "p2";
    }
    fault.from = cursor;
    fault.until = cursor + duration;
    cfg.faults.push_back(fault);
    cursor = fault.until + 10 + rng.below(30);  // one concurrent fault at most
  }
  derive_identities(cfg);

  RunOptions options;
  options.write_artifacts = false;
  options.tracing = false;
  RunResult run = run_scenario(cfg, {}, options);

  SafetyRunReport report;
  report.violations = run.violations;
  report.final_height = run.final_height;
  report.delivered_txs = run.metrics.committed_valid +
                         run.metrics.committed_invalid_total();
  return report;
}

PowConvergenceReport pow_convergence_run(uint64_t seed, PowParams params,
                                         uint64_t attempts_per_tick,
                                         uint32_t measured_windows) {
  Rng rng(seed);
  PowConvergenceReport report;
  uint32_t difficulty = params.difficulty;
  report.difficulty_trajectory.push_back(difficulty);

  uint64_t warmup_blocks = 3ull * params.retarget_window;
  uint64_t total_blocks =
      warmup_blocks + uint64_t{measured_windows} * params.retarget_window;

  ForkBlock tip;
  tip.hash = sha256("pow-convergence-genesis");
  tip.height = 0;
  uint64_t tick = 0;
  uint64_t last_block_tick = 0;
  uint64_t window_start_tick = 0;
  uint64_t blocks = 0;
  const uint64_t tick_cap = 10000000;

  while (blocks < total_blocks && tick < tick_cap) {
    ++tick;
    ForkBlock header;
    header.parent = tip.hash;
    header.height = tip.height + 1;
    header.producer = "miner";
    header.tick = tick;
    for (uint64_t a = 0; a < attempts_per_tick; ++a) {
      uint64_t nonce = rng.next();
      if (!pow_attempt(header, nonce, difficulty)) continue;
      header.nonce = nonce;
      Writer w;
      w.raw(pow_header_bytes(header));
      w.u64(nonce);
      header.hash = sha256(w.bytes());
      ++blocks;
      report.intervals.push_back(tick - last_block_tick);
      last_block_tick = tick;
      tip = header;
      if (blocks % params.retarget_window == 0) {
        PowParams current = params;
        current.difficulty = difficulty;
        difficulty = retarget_difficulty(current, tick - window_start_tick);
        report.difficulty_trajectory.push_back(difficulty);
        window_start_tick = tick;
      }
      break;  // one block per tick
    }
  }

  if (report.intervals.size() > warmup_blocks) {
    uint64_t sum = 0;
    size_t n = 0;
    for (size_t i = warmup_blocks; i < report.intervals.size(); ++i) {
      sum += report.intervals[i];
      ++n;
    }
    report.mean_interval_after_warmup = static_cast<double>(sum) / n;
  }
  report.final_difficulty = difficulty;
  return report;
}

uint64_t nothing_at_stake_run(uint64_t seed, bool slashing_enabled,
                              uint64_t max_slots) {
  Rng rng(seed * 2654435761ull + 17);
  std::vector<std::string> validators = {"v0", "v1", "v2", "v3"};
  std::vector<Identity> identities;
  for (const auto& v : validators) identities.push_back(ident(v, "stake"));
  IdentityRegistry registry(identities);
  StakeLedger stake;
  for (const auto& v : validators) stake.set(v, ValidatorStake{100, 0, 50, false});

  // Two branches rooted at a simultaneous-production fork.
  struct Branch {
    uint64_t height = 1;
    Bytes tip;
  };
  Branch branch_a{1, sha256("nas-a")};
  Branch branch_b{1, sha256("nas-b")};

  // (validator, height) -> first signed header, for double-sign evidence.
  std::map<std::pair<std::string, uint64_t>, std::pair<ForkBlock, Signature>> signed_at;

  const double production_chance = 0.9;
  for (uint64_t slot = 1; slot <= max_slots; ++slot) {
    for (int which = 0; which < 2; ++which) {
      Branch& branch = which == 0 ? branch_a : branch_b;
      const Branch& other = which == 0 ? branch_b : branch_a;
      auto drawn = stake.select_validator(PosWeightMode::RelativeValue, slot, 1, rng);
      if (!drawn) continue;
      const std::string& v = *drawn;
      bool produce;
      bool is_main = branch.height > other.height ||
                     (branch.height == other.height && branch.tip < other.tip);
      if (!slashing_enabled) {
        produce = true;  // nothing at stake: extend every branch, risk free
      } else if (v == "v0" && !stake.find("v0")->slashed) {
        produce = true;  // the greedy one; slashing will catch it below
      } else {
        produce = is_main;  // rational under slashing: main branch only
      }
      if (!produce || !rng.chance(production_chance)) continue;

      uint64_t height = branch.height + 1;
      ForkBlock header;
      header.parent = branch.tip;
      header.height = height;
      header.producer = v;
      header.tick = slot;
      header.nonce = rng.next();
      Writer w;
      w.raw(pow_header_bytes(header));
      w.u64(header.nonce);
      header.hash = sha256(w.bytes());
      Signature sig = registry.sign(v, fork_header_signing_digest(header));

      if (slashing_enabled) {
        auto key = std::make_pair(v, height);
        auto prior = signed_at.find(key);
        if (prior != signed_at.end() &&
            prior->second.first.parent != header.parent) {
          SlashEvidence evidence{prior->second.first, header,
                                 prior->second.second, sig};
          stake.slash(v, evidence, registry);
        } else {
          signed_at.emplace(key, std::make_pair(header, sig));
        }
      }

      branch.height = height;
      branch.tip = header.hash;
    }
    uint64_t gap = branch_a.height > branch_b.height
                       ? branch_a.height - branch_b.height
                       : branch_b.height - branch_a.height;
    if (gap >= 3) return slot;
  }
  return max_slots;
}

namespace {

class GossipTestNode : public Node {
 public:
  GossipTestNode(NodeId id, std::vector<NodeId> peers, uint32_t fanout, Rng rng)
      : Node(std::move(id)),
        gossip_(this->id(), std::move(peers), fanout, 0, rng) {}
  void on_message(Sim& sim, const Message& m) override {
    gossip_.handle_message(sim, m);
  }
  void on_timer(Sim& sim, const std::string& name, uint64_t) override {
    gossip_.handle_timer(sim, name);
  }
  GossipComponent& gossip() { return gossip_; }

 private:
  GossipComponent gossip_;
};

}  // namespace

GossipReport gossip_dissemination_run(uint64_t seed, size_t peer_count,
                                      uint32_t fanout) {
  Sim sim(seed, LinkModel{1, 1}, 0);
  sim.set_tracing(false);
  std::vector<NodeId> ids;
  for (size_t i = 0; i < peer_count; ++i) ids.push_back("g" + std::to_string(i));
  std::sort(ids.begin(), ids.end());
  std::vector<std::unique_ptr<GossipTestNode>> nodes;
  for (const NodeId& id : ids) {
    nodes.push_back(std::make_unique<GossipTestNode>(id, ids, fanout, sim.fork_rng()));
    sim.add_node(nodes.back().get());
  }
  sim.start();
  Bytes item_id = sha256("gossip-item");
  nodes.front()->gossip().publish(sim, item_id, to_bytes("payload"));
  sim.run_all();

  GossipReport report;
  report.all_received = true;
  for (const auto& node : nodes) {
    if (!node->gossip().has(item_id)) {
      report.all_received = false;
      continue;
    }
    report.rounds = std::max(report.rounds, node->gossip().hops_of(item_id));
  }
  return report;
}

double ordering_throughput_run(uint64_t seed, size_t orderer_count, uint64_t msg_cap) {
  ScenarioConfig cfg;
  cfg.name = "throughput";
  cfg.seed = seed;
  cfg.duration = 400;
  cfg.per_tick_msg_cap = msg_cap;
  cfg.client_retry = 80;
  cfg.channel.channel_id = "ch-throughput";
  cfg.channel.identities = {ident("c1", "org1"), ident("c2", "org1"),
                            ident("p1", "org1")};
  for (size_t i = 1; i <= orderer_count; ++i) {
    cfg.channel.orderer_addresses.push_back("o" + std::to_string(i));
  }
  cfg.channel.ordering =
      OrderingParams{"cft-replicated", 6, 10, 1};
  cfg.channel.modification_policy = "id:c1";
  cfg.channel.endorsement_policies["kv"] = "OR(org1)";
  cfg.peers = {{"p1", "org1", true}};
  cfg.clients = {{"c1", "org1"}, {"c2", "org1"}};
  cfg.chaincodes = {{"kv", "kv", {}}};
  cfg.workload.kind = "kv-random";
  cfg.workload.chaincode = "kv";
  cfg.workload.start = 10;
  cfg.workload.rate = 4;
  cfg.workload.count = 60;
  derive_identities(cfg);

  RunOptions options;
  options.write_artifacts = false;
  options.tracing = false;
  RunResult run = run_scenario(cfg, {}, options);
  return static_cast<double>(run.metrics.committed_valid) /
         static_cast<double>(cfg.duration);
}

}  // namespace ledgersim
