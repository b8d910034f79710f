#include "ledgersim/netsim.hpp"

#include <algorithm>
#include <stdexcept>

#include "ledgersim/crypto.hpp"

namespace ledgersim {

Sim::Sim(uint64_t seed, LinkModel link, uint64_t per_tick_msg_cap)
    : link_(link), per_tick_msg_cap_(per_tick_msg_cap), rng_(seed) {}

void Sim::add_node(Node* node) {
  if (!nodes_.emplace(node->id(), node).second) {
    throw std::invalid_argument("duplicate node id: " + node->id());
  }
}

void Sim::schedule_fault(const FaultSpec& fault) {
  size_t index = faults_.size();
  faults_.push_back(fault);
  Event inject;
  inject.at = fault.from;
  inject.type = Event::Type::FaultInject;
  inject.fault_index = index;
  push(std::move(inject));
  if (fault.until > fault.from) {
    Event heal;
    heal.at = fault.until;
    heal.type = Event::Type::FaultHeal;
    heal.fault_index = index;
    push(std::move(heal));
  }
}

void Sim::push(Event e) {
  e.seq = next_seq_++;
  queue_.push(std::move(e));
}

Tick Sim::departure_tick(const NodeId& from) {
  if (per_tick_msg_cap_ == 0) return now_;
  auto& [tick, count] = send_load_[from];
  if (tick < now_) {
    tick = now_;
    count = 0;
  }
  // Per-node outbound budget per tick; the excess queues into later ticks.
  Tick depart = tick + count / per_tick_msg_cap_;
  ++count;
  return depart;
}

void Sim::send(const NodeId& from, const NodeId& to, std::string kind, std::any body) {
  Event e;
  Tick depart = departure_tick(from);
  e.at = depart + link_.base_latency +
         (link_.jitter > 0 ? rng_.below(link_.jitter + 1) : 0);
  if (e.at <= now_) e.at = now_ + 1;
  e.type = Event::Type::Deliver;
  e.msg = Message{from, to, std::move(kind), std::move(body)};
  push(std::move(e));
}

void Sim::set_timer(const NodeId& node, std::string name, Tick at, uint64_t tag) {
  Event e;
  e.at = at < now_ ? now_ : at;
  e.type = Event::Type::Timer;
  e.timer_node = node;
  e.timer_name = std::move(name);
  e.timer_tag = tag;
  push(std::move(e));
}

void Sim::start() {
  if (started_) return;
  started_ = true;
  for (auto& [id, node] : nodes_) node->on_start(*this);
}

bool Sim::partitioned(const NodeId& a, const NodeId& b) const {
  for (size_t index : active_faults_) {
    const FaultSpec& f = faults_[index];
    if (f.kind != FaultSpec::Kind::Partition) continue;
    auto in = [](const std::vector<NodeId>& group, const NodeId& n) {
      return std::find(group.begin(), group.end(), n) != group.end();
    };
    if ((in(f.group_a, a) && in(f.group_b, b)) ||
        (in(f.group_a, b) && in(f.group_b, a))) {
      return true;
    }
  }
  return false;
}

const FaultSpec* Sim::active_fault(const NodeId& target, FaultSpec::Kind kind) const {
  for (size_t index : active_faults_) {
    const FaultSpec& f = faults_[index];
    if (f.kind == kind && f.target == target) return &f;
  }
  return nullptr;
}

void Sim::apply_fault(size_t index, bool inject) {
  const FaultSpec& f = faults_[index];
  if (inject) {
    active_faults_.insert(index);
    if (f.kind == FaultSpec::Kind::Crash) crashed_.insert(f.target);
    trace_note(f.target.empty() ? "net" : f.target, "fault-inject",
               std::to_string(static_cast<int>(f.kind)));
  } else {
    active_faults_.erase(index);
    if (f.kind == FaultSpec::Kind::Crash) {
      crashed_.erase(f.target);
      auto it = nodes_.find(f.target);
      if (it != nodes_.end()) it->second->on_recover(*this);
    }
    trace_note(f.target.empty() ? "net" : f.target, "fault-heal",
               std::to_string(static_cast<int>(f.kind)));
  }
}

bool Sim::step() {
  if (!started_) start();
  if (queue_.empty()) return false;
  Event e = queue_.top();
  queue_.pop();
  now_ = e.at;
  switch (e.type) {
    case Event::Type::FaultInject:
      apply_fault(e.fault_index, true);
      break;
    case Event::Type::FaultHeal:
      apply_fault(e.fault_index, false);
      break;
    case Event::Type::Timer: {
      if (crashed_.count(e.timer_node)) {
        ++dropped_count_;
        break;
      }
      auto it = nodes_.find(e.timer_node);
      if (it != nodes_.end()) {
        trace_note(e.timer_node, "timer", e.timer_name);
        it->second->on_timer(*this, e.timer_name, e.timer_tag);
      }
      break;
    }
    case Event::Type::Deliver: {
      // Messages already in flight survive a sender crash; a crashed node
      // cannot emit new ones because its handlers never run.
      if (crashed_.count(e.msg.to) || partitioned(e.msg.from, e.msg.to)) {
        ++dropped_count_;
        trace_note(e.msg.to, "drop", e.msg.kind + " from " + e.msg.from);
        break;
      }
      auto it = nodes_.find(e.msg.to);
      if (it == nodes_.end()) {
        ++dropped_count_;
        break;
      }
      ++delivered_count_;
      trace_note(e.msg.to, "recv", e.msg.kind + " from " + e.msg.from);
      it->second->on_message(*this, e.msg);
      break;
    }
  }
  return true;
}

void Sim::run_until(Tick t) {
  if (!started_) start();
  while (!queue_.empty() && queue_.top().at <= t) step();
  if (now_ < t) now_ = t;
}

void Sim::run_all() {
  while (step()) {
  }
}

void Sim::trace_note(const NodeId& node, const std::string& kind,
                     const std::string& detail) {
  if (!tracing_) return;
  trace_.push_back(std::to_string(now_) + "," + node + "," + kind + "," + detail);
}

Bytes Sim::trace_digest() const {
  std::string joined;
  for (const auto& line : trace_) {
    joined += line;
    joined += '\n';
  }
  return sha256(joined);
}

GossipComponent::GossipComponent(NodeId self, std::vector<NodeId> peers,
                                 uint32_t fanout, uint64_t anti_entropy_period,
                                 Rng rng)
    : self_(std::move(self)),
      peers_(std::move(peers)),
      fanout_(fanout),
      anti_entropy_period_(anti_entropy_period),
      rng_(rng) {
  peers_.erase(std::remove(peers_.begin(), peers_.end(), self_), peers_.end());
}

void GossipComponent::start(Sim& sim) {
  if (anti_entropy_period_ > 0) {
    sim.set_timer(self_, kTimerName, sim.now() + anti_entropy_period_);
  }
}

const Bytes* GossipComponent::payload_of(const Bytes& id) const {
  auto it = items_.find(id);
  return it == items_.end() ? nullptr : &it->second;
}

uint32_t GossipComponent::hops_of(const Bytes& id) const {
  auto it = hops_.find(id);
  return it == hops_.end() ? 0 : it->second;
}

void GossipComponent::push_to_peers(Sim& sim, const Bytes& id, uint32_t hops) {
  if (peers_.empty()) return;
  std::vector<NodeId> targets = peers_;
  // Fisher-Yates prefix shuffle for `fanout` distinct random targets.
  uint32_t take = std::min<uint32_t>(fanout_, static_cast<uint32_t>(targets.size()));
  for (uint32_t i = 0; i < take; ++i) {
    size_t j = i + rng_.below(targets.size() - i);
    std::swap(targets[i], targets[j]);
    sim.send(self_, targets[i], kPushKind, GossipPush{id, items_[id], hops});
  }
}

void GossipComponent::arm_round_timer(Sim& sim) {
  if (round_timer_armed_ || repush_left_.empty()) return;
  round_timer_armed_ = true;
  sim.set_timer(self_, kRoundTimerName, sim.now() + 1);
}

void GossipComponent::publish(Sim& sim, Bytes id, Bytes payload) {
  if (items_.count(id)) return;
  items_[id] = std::move(payload);
  hops_[id] = 0;
  push_to_peers(sim, id, 1);
  if (kPushRounds > 1) repush_left_[id] = kPushRounds - 1;
  arm_round_timer(sim);
}

bool GossipComponent::handle_message(Sim& sim, const Message& msg) {
  if (msg.kind == kPushKind) {
    const auto& push = std::any_cast<const GossipPush&>(msg.body);
    if (!items_.count(push.id)) {
      items_[push.id] = push.payload;
      hops_[push.id] = push.hops;
      max_hops_ = std::max(max_hops_, push.hops);
      push_to_peers(sim, push.id, push.hops + 1);
      if (kPushRounds > 1) repush_left_[push.id] = kPushRounds - 1;
      arm_round_timer(sim);
      if (on_item) on_item(sim, push.id, push.payload);
    }
    return true;
  }
  if (msg.kind == kDigestKind) {
    const auto& digest = std::any_cast<const GossipDigest&>(msg.body);
    // Push back whatever the sender is missing.
    for (const auto& [id, payload] : items_) {
      if (std::find(digest.ids.begin(), digest.ids.end(), id) == digest.ids.end()) {
        sim.send(self_, msg.from, kPushKind, GossipPush{id, payload, hops_[id] + 1});
      }
    }
    return true;
  }
  return false;
}

bool GossipComponent::handle_timer(Sim& sim, const std::string& name) {
  if (name == kRoundTimerName) {
    round_timer_armed_ = false;
    for (auto it = repush_left_.begin(); it != repush_left_.end();) {
      push_to_peers(sim, it->first, hops_[it->first] + 1);
      if (--it->second == 0) {
        it = repush_left_.erase(it);
      } else {
        ++it;
      }
    }
    arm_round_timer(sim);
    return true;
  }
  if (name != kTimerName) return false;
  if (!peers_.empty()) {
    GossipDigest digest;
    for (const auto& [id, payload] : items_) digest.ids.push_back(id);
    sim.send(self_, peers_[rng_.below(peers_.size())], kDigestKind, std::move(digest));
  }
  sim.set_timer(self_, kTimerName, sim.now() + anti_entropy_period_);
  return true;
}

}  // namespace ledgersim
