#include "ledgersim/scenario.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "ledgersim/crypto.hpp"

namespace ledgersim {

namespace {

using nlohmann::json;

class FieldErrors {
 public:
  void add(const std::string& path, const std::string& message) {
    errors_.push_back(path.empty() ? message : path + ": " + message);
  }
  bool empty() const { return errors_.empty(); }
  std::vector<std::string> take() { return std::move(errors_); }

 private:
  std::vector<std::string> errors_;
};

uint64_t get_u64(const json& j, const char* key, uint64_t fallback, FieldErrors& errs,
                 const std::string& path) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_unsigned() && !j[key].is_number_integer()) {
    errs.add(path + "." + key, "expected a non-negative integer");
    return fallback;
  }
  if (j[key].is_number_integer() && j[key].get<int64_t>() < 0) {
    errs.add(path + "." + key, "expected a non-negative integer");
    return fallback;
  }
  return j[key].get<uint64_t>();
}

std::string get_str(const json& j, const char* key, const std::string& fallback,
                    FieldErrors& errs, const std::string& path) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) {
    errs.add(path + "." + key, "expected a string");
    return fallback;
  }
  return j[key].get<std::string>();
}

FaultSpec parse_fault(const json& j, const std::string& path, FieldErrors& errs) {
  FaultSpec f;
  std::string kind = get_str(j, "kind", "", errs, path);
  if (kind == "crash") {
    f.kind = FaultSpec::Kind::Crash;
  } else if (kind == "partition") {
    f.kind = FaultSpec::Kind::Partition;
  } else if (kind == "byzantine-endorser") {
    f.kind = FaultSpec::Kind::ByzantineEndorser;
  } else if (kind == "dos-client") {
    f.kind = FaultSpec::Kind::DosClient;
  } else {
    errs.add(path + ".kind", "unknown fault kind '" + kind + "'");
  }
  f.target = get_str(j, "target", "", errs, path);
  f.strategy = get_str(j, "strategy", "forge-writeset", errs, path);
  f.rate = get_u64(j, "rate", 1, errs, path);
  f.from = get_u64(j, "from", 0, errs, path);
  f.until = get_u64(j, "until", 0, errs, path);
  if (j.contains("group_a")) {
    for (const auto& n : j["group_a"]) f.group_a.push_back(n.get<std::string>());
  }
  if (j.contains("group_b")) {
    for (const auto& n : j["group_b"]) f.group_b.push_back(n.get<std::string>());
  }
  if (f.kind == FaultSpec::Kind::Partition && (f.group_a.empty() || f.group_b.empty())) {
    errs.add(path, "partition needs group_a and group_b");
  }
  if (f.until != 0 && f.until <= f.from) {
    errs.add(path, "until must exceed from");
  }
  return f;
}

}  // namespace

void derive_identities(ScenarioConfig& config) {
  std::set<std::string> present;
  for (const auto& identity : config.channel.identities) present.insert(identity.id);
  for (const NodeId& orderer : config.channel.orderer_addresses) {
    if (!present.count(orderer)) {
      config.channel.identities.push_back(Identity{orderer, "orderer-org", {}});
      present.insert(orderer);
    }
  }
  for (auto& identity : config.channel.identities) {
    if (identity.public_key.empty()) {
      identity.public_key = sim_keygen(config.channel.channel_id + ":" + identity.id);
    }
  }
}

std::vector<std::string> validate_scenario(const ScenarioConfig& config) {
  std::vector<std::string> problems;
  if (config.mode != "permissioned" && config.mode != "lottery") {
    problems.push_back("mode: unknown '" + config.mode + "'");
  }
  if (config.pipeline != "execute-order-validate" && config.pipeline != "order-execute") {
    problems.push_back("pipeline: unknown '" + config.pipeline + "'");
  }

  if (config.mode == "lottery") {
    const auto& lot = config.lottery;
    if (lot.protocol != "pow" && lot.protocol != "pos" && lot.protocol != "dpos" &&
        lot.protocol != "poi") {
      problems.push_back("lottery.protocol: unknown '" + lot.protocol + "'");
    }
    if (lot.producers.empty()) problems.push_back("lottery.producers: empty");
    return problems;
  }

  for (const std::string& err : validate_config(config.channel)) {
    problems.push_back("channel." + err);
  }
  std::set<std::string> identity_ids;
  for (const auto& identity : config.channel.identities) identity_ids.insert(identity.id);
  for (const auto& peer : config.peers) {
    if (!identity_ids.count(peer.id)) {
      problems.push_back("peers." + peer.id + ": not in channel identities");
    }
  }
  for (const auto& client : config.clients) {
    if (!identity_ids.count(client.id)) {
      problems.push_back("clients." + client.id + ": not in channel identities");
    }
  }
  if (config.peers.empty()) problems.push_back("peers: empty");

  std::set<std::string> chaincode_ids;
  for (const auto& cc : config.chaincodes) chaincode_ids.insert(cc.id);
  for (const auto& cc : config.chaincodes) {
    if (!config.channel.endorsement_policies.count(cc.id)) {
      problems.push_back("channel.endorsement_policies: missing entry for chaincode '" +
                         cc.id + "'");
    }
  }
  for (const auto& init : config.init_txs) {
    if (!chaincode_ids.count(init.chaincode_id)) {
      problems.push_back("init: unregistered chaincode '" + init.chaincode_id + "'");
    }
    if (!identity_ids.count(init.client)) {
      problems.push_back("init: unknown client '" + init.client + "'");
    }
  }
  if (config.workload.kind != "none" && !chaincode_ids.count(config.workload.chaincode)) {
    problems.push_back("workload.chaincode: unregistered chaincode '" +
                       config.workload.chaincode + "'");
  }
  if (config.workload.kind == "double-spend" && config.workload.spenders.size() < 2) {
    problems.push_back("workload.spenders: double-spend needs two clients");
  }
  if (config.workload.kind == "loop-dos" &&
      !chaincode_ids.count(config.workload.loop_chaincode)) {
    problems.push_back("workload.loop_chaincode: unregistered chaincode");
  }
  return problems;
}

std::variant<ScenarioConfig, std::vector<std::string>> parse_scenario(
    const std::string& json_text) {
  FieldErrors errs;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    return std::vector<std::string>{std::string("json: ") + e.what()};
  }

  ScenarioConfig config;
  config.name = get_str(j, "name", "scenario", errs, "");
  if (!j.contains("seed")) {
    errs.add("seed", "mandatory field missing");
  }
  config.seed = get_u64(j, "seed", 1, errs, "");
  config.duration = get_u64(j, "duration", 500, errs, "");
  config.mode = get_str(j, "mode", "permissioned", errs, "");
  config.pipeline = get_str(j, "pipeline", "execute-order-validate", errs, "");

  if (j.contains("channel")) {
    const json& ch = j["channel"];
    config.channel.channel_id = get_str(ch, "id", "", errs, "channel");
    if (ch.contains("identities")) {
      for (size_t i = 0; i < ch["identities"].size(); ++i) {
        const json& ident = ch["identities"][i];
        std::string path = "channel.identities[" + std::to_string(i) + "]";
        Identity identity;
        identity.id = get_str(ident, "id", "", errs, path);
        identity.org = get_str(ident, "org", "", errs, path);
        config.channel.identities.push_back(std::move(identity));
      }
    }
    if (ch.contains("orderers")) {
      for (const auto& o : ch["orderers"]) {
        config.channel.orderer_addresses.push_back(o.get<std::string>());
      }
    }
    if (ch.contains("ordering")) {
      const json& ord = ch["ordering"];
      config.channel.ordering.backend = get_str(ord, "backend", "solo", errs, "channel.ordering");
      config.channel.ordering.batch_max_txs =
          static_cast<uint32_t>(get_u64(ord, "batch_max_txs", 10, errs, "channel.ordering"));
      config.channel.ordering.batch_timeout =
          get_u64(ord, "batch_timeout", 20, errs, "channel.ordering");
      config.channel.ordering.f_tolerated =
          static_cast<uint32_t>(get_u64(ord, "f_tolerated", 0, errs, "channel.ordering"));
    }
    config.channel.broadcast_policy = get_str(ch, "broadcast_policy", "", errs, "channel");
    config.channel.deliver_policy = get_str(ch, "deliver_policy", "", errs, "channel");
    config.channel.modification_policy =
        get_str(ch, "modification_policy", "", errs, "channel");
    if (ch.contains("endorsement_policies")) {
      for (const auto& [ccid, policy] : ch["endorsement_policies"].items()) {
        config.channel.endorsement_policies[ccid] = policy.get<std::string>();
      }
    }
    if (ch.contains("chaincode_authorizations")) {
      for (const auto& [caller, callees] : ch["chaincode_authorizations"].items()) {
        for (const auto& callee : callees) {
          config.channel.chaincode_authorizations[caller].push_back(
              callee.get<std::string>());
        }
      }
    }
  } else if (config.mode == "permissioned") {
    errs.add("channel", "mandatory section missing");
  }

  if (j.contains("peers")) {
    for (size_t i = 0; i < j["peers"].size(); ++i) {
      const json& p = j["peers"][i];
      std::string path = "peers[" + std::to_string(i) + "]";
      PeerSpec peer;
      peer.id = get_str(p, "id", "", errs, path);
      peer.org = get_str(p, "org", "", errs, path);
      peer.endorser = !p.contains("endorser") || p["endorser"].get<bool>();
      config.peers.push_back(std::move(peer));
    }
  }
  if (j.contains("clients")) {
    for (size_t i = 0; i < j["clients"].size(); ++i) {
      const json& c = j["clients"][i];
      std::string path = "clients[" + std::to_string(i) + "]";
      ClientSpec client;
      client.id = get_str(c, "id", "", errs, path);
      client.org = get_str(c, "org", "", errs, path);
      config.clients.push_back(std::move(client));
    }
  }
  if (j.contains("chaincodes")) {
    for (size_t i = 0; i < j["chaincodes"].size(); ++i) {
      const json& cc = j["chaincodes"][i];
      std::string path = "chaincodes[" + std::to_string(i) + "]";
      ChaincodeSpec spec;
      spec.id = get_str(cc, "id", "", errs, path);
      spec.kind = get_str(cc, "kind", "", errs, path);
      if (cc.contains("options")) {
        for (const auto& [k, v] : cc["options"].items()) {
          spec.options[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
      }
      config.chaincodes.push_back(std::move(spec));
    }
  }
  if (j.contains("init")) {
    for (size_t i = 0; i < j["init"].size(); ++i) {
      const json& t = j["init"][i];
      std::string path = "init[" + std::to_string(i) + "]";
      InitTx init;
      init.client = get_str(t, "client", "", errs, path);
      init.chaincode_id = get_str(t, "chaincode", "", errs, path);
      init.operation = get_str(t, "operation", "", errs, path);
      if (t.contains("args")) {
        for (const auto& a : t["args"]) {
          init.args.push_back(a.is_string() ? a.get<std::string>() : a.dump());
        }
      }
      config.init_txs.push_back(std::move(init));
    }
  }
  if (j.contains("workload")) {
    const json& w = j["workload"];
    config.workload.kind = get_str(w, "kind", "none", errs, "workload");
    config.workload.start = get_u64(w, "start", 10, errs, "workload");
    config.workload.rate = get_u64(w, "rate", 10, errs, "workload");
    config.workload.count = get_u64(w, "count", 10, errs, "workload");
    config.workload.chaincode = get_str(w, "chaincode", "token", errs, "workload");
    config.workload.amount = get_u64(w, "amount", 1, errs, "workload");
    if (w.contains("accounts")) {
      for (const auto& a : w["accounts"]) {
        config.workload.accounts.push_back(a.get<std::string>());
      }
    }
    config.workload.shared_account =
        get_str(w, "shared_account", "", errs, "workload");
    if (w.contains("spenders")) {
      for (const auto& s : w["spenders"]) {
        config.workload.spenders.push_back(s.get<std::string>());
      }
    }
    config.workload.loop_at = get_u64(w, "loop_at", 100, errs, "workload");
    config.workload.loop_chaincode =
        get_str(w, "loop_chaincode", "looper", errs, "workload");
  }
  if (j.contains("faults")) {
    for (size_t i = 0; i < j["faults"].size(); ++i) {
      config.faults.push_back(
          parse_fault(j["faults"][i], "faults[" + std::to_string(i) + "]", errs));
    }
  }
  if (j.contains("net")) {
    const json& n = j["net"];
    config.link.base_latency = get_u64(n, "base_latency", 1, errs, "net");
    config.link.jitter = get_u64(n, "jitter", 2, errs, "net");
    config.per_tick_msg_cap = get_u64(n, "per_tick_msg_cap", 0, errs, "net");
  }
  if (j.contains("gossip")) {
    const json& g = j["gossip"];
    config.gossip_fanout =
        static_cast<uint32_t>(get_u64(g, "fanout", 3, errs, "gossip"));
    config.anti_entropy_period = get_u64(g, "anti_entropy", 25, errs, "gossip");
  }
  config.step_budget = get_u64(j, "step_budget", 100000, errs, "");
  config.collect_timeout = get_u64(j, "collect_timeout", 30, errs, "");
  config.client_retry = get_u64(j, "client_retry", 60, errs, "");
  config.blacklist_threshold =
      static_cast<uint32_t>(get_u64(j, "blacklist_threshold", 10, errs, ""));
  config.metrics_window = get_u64(j, "metrics_window", 50, errs, "");

  if (j.contains("lottery")) {
    const json& l = j["lottery"];
    config.lottery.protocol = get_str(l, "protocol", "pow", errs, "lottery");
    if (l.contains("producers")) {
      for (const auto& p : l["producers"]) {
        config.lottery.producers.push_back(p.get<std::string>());
      }
    }
    if (l.contains("pow")) {
      const json& p = l["pow"];
      config.lottery.pow.difficulty =
          static_cast<uint32_t>(get_u64(p, "difficulty", 8, errs, "lottery.pow"));
      config.lottery.pow.target_interval =
          get_u64(p, "target_interval", 10, errs, "lottery.pow");
      config.lottery.pow.retarget_window =
          static_cast<uint32_t>(get_u64(p, "retarget_window", 20, errs, "lottery.pow"));
      if (p.contains("clamp")) config.lottery.pow.clamp = p["clamp"].get<double>();
    }
    config.lottery.attempts_per_tick =
        get_u64(l, "attempts_per_tick", 100, errs, "lottery");
    std::string mode = get_str(l, "pos_mode", "relative-value", errs, "lottery");
    config.lottery.pos_mode = mode == "coin-age" ? PosWeightMode::CoinAge
                                                 : PosWeightMode::RelativeValue;
    if (l.contains("stakes")) {
      for (const auto& [validator, coins] : l["stakes"].items()) {
        config.lottery.stakes[validator] = coins.get<uint64_t>();
      }
    }
    config.lottery.ticks_per_day = get_u64(l, "ticks_per_day", 1, errs, "lottery");
    config.lottery.witness_count =
        static_cast<uint32_t>(get_u64(l, "witness_count", 3, errs, "lottery"));
    config.lottery.block_reward = get_u64(l, "block_reward", 10, errs, "lottery");
  }

  derive_identities(config);
  for (const std::string& problem : validate_scenario(config)) {
    errs.add("", problem);
  }
  if (!errs.empty()) return errs.take();
  return config;
}

ScenarioConfig load_scenario_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open scenario file " + file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  auto parsed = parse_scenario(buffer.str());
  if (std::holds_alternative<std::vector<std::string>>(parsed)) {
    std::string message = "scenario validation failed:";
    for (const auto& e : std::get<std::vector<std::string>>(parsed)) {
      message += "\n  " + e;
    }
    throw std::runtime_error(message);
  }
  return std::get<ScenarioConfig>(std::move(parsed));
}

}  // namespace ledgersim
