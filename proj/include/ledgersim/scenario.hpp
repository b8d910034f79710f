#pragma once

#include <filesystem>
#include <variant>

#include "ledgersim/ledger.hpp"
#include "ledgersim/lottery.hpp"
#include "ledgersim/netsim.hpp"

namespace ledgersim {

struct ChaincodeSpec {
  std::string id;
  std::string kind;  // token-erc20 | token-erc223 | token-erc777 | registry |
                     // rental | kv | looper | depth
  std::map<std::string, std::string> options;
};

struct PeerSpec {
  NodeId id;
  std::string org;
  bool endorser = true;
};

struct ClientSpec {
  NodeId id;
  std::string org;
};

struct InitTx {
  std::string client;
  std::string chaincode_id;
  std::string operation;
  std::vector<std::string> args;
};

struct WorkloadSpec {
  std::string kind = "none";  // none | token-transfers | double-spend |
                              // kv-random | loop-dos
  uint64_t start = 10;
  uint64_t rate = 10;   // ticks between transactions per client
  uint64_t count = 10;  // transactions per client
  std::string chaincode = "token";
  uint64_t amount = 1;
  std::vector<std::string> accounts;  // transfer recipients
  std::string shared_account;         // double-spend source
  std::vector<std::string> spenders;  // double-spend clients
  uint64_t loop_at = 100;             // loop-dos injection tick
  std::string loop_chaincode = "looper";
};

struct LotterySpec {
  std::string protocol = "pow";  // pow | pos | dpos | poi
  std::vector<NodeId> producers;
  PowParams pow;
  uint64_t attempts_per_tick = 100;
  PosWeightMode pos_mode = PosWeightMode::RelativeValue;
  std::map<std::string, uint64_t> stakes;  // producer -> coins
  uint64_t ticks_per_day = 1;
  uint32_t witness_count = 3;
  ImportanceParams poi;
  uint64_t block_reward = 10;
};

struct ScenarioConfig {
  std::string name = "scenario";
  uint64_t seed = 1;
  uint64_t duration = 500;
  std::string mode = "permissioned";             // permissioned | lottery
  std::string pipeline = "execute-order-validate";  // or order-execute
  ChannelConfig channel;
  std::vector<PeerSpec> peers;
  std::vector<ClientSpec> clients;
  std::vector<ChaincodeSpec> chaincodes;
  std::vector<InitTx> init_txs;
  WorkloadSpec workload;
  std::vector<FaultSpec> faults;
  uint32_t gossip_fanout = 3;
  uint64_t anti_entropy_period = 25;
  LinkModel link;
  uint64_t per_tick_msg_cap = 0;
  uint64_t step_budget = 100000;  // 0 disables the budget
  uint64_t collect_timeout = 30;
  uint64_t client_retry = 60;
  uint32_t blacklist_threshold = 10;
  uint64_t metrics_window = 50;
  LotterySpec lottery;
};

// Parses + validates a scenario JSON document. Errors carry field paths.
std::variant<ScenarioConfig, std::vector<std::string>> parse_scenario(
    const std::string& json_text);

ScenarioConfig load_scenario_file(const std::filesystem::path& file);  // throws

// Cross-field validation used by both the parser and programmatic configs.
std::vector<std::string> validate_scenario(const ScenarioConfig& config);

// Fills identity keys (sim_keygen over channel||id) for every roster member
// that lacks one, and registers orderer identities.
void derive_identities(ScenarioConfig& config);

}  // namespace ledgersim
