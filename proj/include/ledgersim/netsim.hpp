#pragma once

#include <any>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "ledgersim/bytes.hpp"
#include "ledgersim/rng.hpp"

namespace ledgersim {

using NodeId = std::string;
using Tick = uint64_t;

struct Message {
  NodeId from;
  NodeId to;
  std::string kind;
  std::any body;
};

struct FaultSpec {
  enum class Kind { Crash, Partition, ByzantineEndorser, DosClient };
  Kind kind = Kind::Crash;
  NodeId target;                          // crash / byzantine / dos
  std::vector<NodeId> group_a, group_b;   // partition
  std::string strategy;                   // "forge-writeset" | "wrong-signature"
  uint64_t rate = 0;                      // dos transactions per injection tick
  Tick from = 0;
  Tick until = 0;  // 0 = never heals
};

class Sim;

class Node {
 public:
  explicit Node(NodeId id) : id_(std::move(id)) {}
  virtual ~Node() = default;
  const NodeId& id() const { return id_; }

  virtual void on_start(Sim&) {}
  virtual void on_message(Sim&, const Message&) {}
  virtual void on_timer(Sim&, const std::string& name, uint64_t tag) {
    (void)name;
    (void)tag;
  }
  virtual void on_recover(Sim&) {}

 private:
  NodeId id_;
};

struct LinkModel {
  uint64_t base_latency = 1;
  uint64_t jitter = 2;  // uniform extra latency in [0, jitter]
};

// Deterministic discrete-event loop. Events are processed in strict
// (tick, insertion-seq) order; identical (scenario, seed) pairs replay the
// same trace byte for byte. Crashed nodes drop inbound traffic and fire no
// timers; partitioned pairs drop messages until the partition heals.
class Sim {
 public:
  explicit Sim(uint64_t seed, LinkModel link = {}, uint64_t per_tick_msg_cap = 0);

  void add_node(Node* node);  // non-owning; register before start()
  void schedule_fault(const FaultSpec& fault);

  void send(const NodeId& from, const NodeId& to, std::string kind, std::any body);
  void set_timer(const NodeId& node, std::string name, Tick at, uint64_t tag = 0);

  void start();  // on_start in node-id order
  bool step();   // process one event; false when drained
  void run_until(Tick t);
  void run_all();

  Tick now() const { return now_; }
  Rng& rng() { return rng_; }
  Rng fork_rng() { return rng_.fork(++rng_forks_); }

  bool crashed(const NodeId& node) const { return crashed_.count(node) > 0; }
  bool partitioned(const NodeId& a, const NodeId& b) const;
  const FaultSpec* active_fault(const NodeId& target, FaultSpec::Kind kind) const;

  void trace_note(const NodeId& node, const std::string& kind,
                  const std::string& detail);
  const std::vector<std::string>& trace() const { return trace_; }
  Bytes trace_digest() const;
  void set_tracing(bool on) { tracing_ = on; }

  uint64_t messages_delivered() const { return delivered_count_; }
  uint64_t messages_dropped() const { return dropped_count_; }

 private:
  struct Event {
    Tick at = 0;
    uint64_t seq = 0;
    enum class Type { Deliver, Timer, FaultInject, FaultHeal } type = Type::Deliver;
    Message msg;
    NodeId timer_node;
    std::string timer_name;
    uint64_t timer_tag = 0;
    size_t fault_index = 0;
  };
  struct EventOrder {
    bool operator()(const Event& a, const Event& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.seq > b.seq;
    }
  };

  void push(Event e);
  void apply_fault(size_t index, bool inject);
  Tick departure_tick(const NodeId& from);

  Tick now_ = 0;
  uint64_t next_seq_ = 0;
  uint64_t rng_forks_ = 0;
  std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;
  std::map<NodeId, Node*> nodes_;
  std::set<NodeId> crashed_;
  std::vector<FaultSpec> faults_;
  std::set<size_t> active_faults_;
  LinkModel link_;
  uint64_t per_tick_msg_cap_;
  std::map<NodeId, std::pair<Tick, uint64_t>> send_load_;  // node -> (tick, count)
  Rng rng_;
  bool started_ = false;
  bool tracing_ = true;
  std::vector<std::string> trace_;
  uint64_t delivered_count_ = 0;
  uint64_t dropped_count_ = 0;
};

// Epidemic dissemination building block: push new items to `fanout` random
// peers, count hops, and periodically anti-entropy a random peer so healed
// partitions catch up. Embed in a Node and route matching messages/timers.
class GossipComponent {
 public:
  GossipComponent(NodeId self, std::vector<NodeId> peers, uint32_t fanout,
                  uint64_t anti_entropy_period, Rng rng);

  void start(Sim& sim);
  void publish(Sim& sim, Bytes id, Bytes payload);
  bool handle_message(Sim& sim, const Message& msg);  // true when consumed
  bool handle_timer(Sim& sim, const std::string& name);

  bool has(const Bytes& id) const { return items_.count(id) > 0; }
  const Bytes* payload_of(const Bytes& id) const;
  uint32_t hops_of(const Bytes& id) const;
  size_t item_count() const { return items_.size(); }
  uint32_t max_hops() const { return max_hops_; }

  // Called once per item on first receipt (not for local publishes).
  std::function<void(Sim&, const Bytes& id, const Bytes& payload)> on_item;

  static constexpr const char* kPushKind = "gossip-push";
  static constexpr const char* kDigestKind = "gossip-digest";
  static constexpr const char* kTimerName = "gossip-ae";
  static constexpr const char* kRoundTimerName = "gossip-round";
  static constexpr uint32_t kPushRounds = 3;  // re-push rounds per item

 private:
  void push_to_peers(Sim& sim, const Bytes& id, uint32_t hops);
  void arm_round_timer(Sim& sim);

  NodeId self_;
  std::vector<NodeId> peers_;
  uint32_t fanout_;
  uint64_t anti_entropy_period_;
  Rng rng_;
  std::map<Bytes, Bytes> items_;
  std::map<Bytes, uint32_t> hops_;
  std::map<Bytes, uint32_t> repush_left_;
  bool round_timer_armed_ = false;
  uint32_t max_hops_ = 0;
};

struct GossipPush {
  Bytes id;
  Bytes payload;
  uint32_t hops = 0;
};

struct GossipDigest {
  std::vector<Bytes> ids;
};

}  // namespace ledgersim
