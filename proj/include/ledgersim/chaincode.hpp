#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ledgersim/ledger.hpp"
#include "ledgersim/state.hpp"

namespace ledgersim {

struct Proposal {
  std::string client;
  std::string chaincode_id;
  std::string operation;
  std::vector<Bytes> args;
  uint64_t nonce = 0;
  uint64_t timestamp = 0;  // client-chosen tick; keeps endorsers in agreement
  Bytes tx_id;
};

Proposal make_proposal(const std::string& client, const std::string& chaincode_id,
                       const std::string& operation, std::vector<Bytes> args,
                       uint64_t nonce, uint64_t timestamp);

// Gas analogue: one step per state-API call plus whatever the chaincode
// charges for its own compute.
struct StepBudget {
  uint64_t max_steps = 100000;
};

class ChaincodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StepsExhausted : public ChaincodeError {
 public:
  StepsExhausted() : ChaincodeError("step-budget-exhausted") {}
};

class ChaincodeContext;

class Chaincode {
 public:
  virtual ~Chaincode() = default;
  virtual Bytes invoke(ChaincodeContext& ctx, const std::string& operation,
                       const std::vector<Bytes>& args) = 0;
};

class ChaincodeRegistry {
 public:
  void install(const std::string& chaincode_id, std::shared_ptr<Chaincode> handler);
  Chaincode* find(const std::string& chaincode_id) const;
  bool contains(const std::string& chaincode_id) const;
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, std::shared_ptr<Chaincode>> handlers_;
};

struct SimulationResult {
  ReadSet read_set;
  WriteSet write_set;
  Bytes response;
  uint64_t steps_used = 0;
};

struct SimulationFailure {
  std::string reason;
  uint64_t steps_used = 0;
};

using SimulationOutcome = std::variant<SimulationResult, SimulationFailure>;

inline bool sim_ok(const SimulationOutcome& o) {
  return std::holds_alternative<SimulationResult>(o);
}

// Keys live under `chaincode-id || 0x00 || user-key`; a chaincode can only
// touch foreign namespaces through invoke_chaincode.
Bytes namespaced_key(const std::string& chaincode_id, ByteSpan user_key);

inline constexpr int kMaxInvokeDepth = 8;

// State API handed to a running chaincode. Reads see committed state only
// (never the simulation's own pending writes), so a read set is exactly the
// committed (key, version) pairs the validation phase will re-check.
class ChaincodeContext {
 public:
  std::optional<Bytes> get(ByteSpan key);
  std::optional<Bytes> get(std::string_view key);
  void put(ByteSpan key, ByteSpan value);
  void put(std::string_view key, std::string_view value);
  void del(ByteSpan key);
  void del(std::string_view key);
  std::vector<HistoryEntry> history(ByteSpan key);
  std::vector<HistoryEntry> history(std::string_view key);

  // Runs the callee inside this simulation; requires channel authorization.
  Bytes invoke_chaincode(const std::string& callee, const std::string& operation,
                         const std::vector<Bytes>& args);

  void charge(uint64_t steps = 1);

  const std::string& self() const { return active_chaincode_; }
  // Immediate caller: the client for a top-level call, the invoking
  // chaincode's id for a nested one.
  const std::string& caller() const { return caller_; }
  const std::string& client() const { return proposal_->client; }
  uint64_t timestamp() const { return proposal_->timestamp; }
  uint64_t steps_used() const { return steps_used_; }
  bool nested() const { return depth_ > 0; }

 private:
  friend SimulationOutcome simulate_proposal(const StateStore&,
                                             const ChaincodeRegistry&,
                                             const ChannelConfig&,
                                             const Proposal&, StepBudget);
  ChaincodeContext(const StateStore& committed, const ChaincodeRegistry& registry,
                   const ChannelConfig& config, const Proposal& proposal,
                   StepBudget budget);

  Bytes check_key(ByteSpan user_key) const;
  void record_read(const Bytes& ns_key);
  void record_write(const Bytes& ns_key, bool is_delete, Bytes value);

  const StateStore& committed_;
  const ChaincodeRegistry& registry_;
  const ChannelConfig& config_;
  const Proposal* proposal_;
  StepBudget budget_;
  uint64_t steps_used_ = 0;
  int depth_ = 0;
  std::string active_chaincode_;
  std::string caller_;
  std::vector<std::pair<Bytes, std::optional<Version>>> reads_;  // first-read order
  std::map<Bytes, size_t> read_index_;
  std::vector<WriteEntry> writes_;  // first-write order, value of last write
  std::map<Bytes, size_t> write_index_;
};

// Deterministic simulation of a proposal against committed state. The
// committed state is never modified; all effects are returned in the
// SimulationResult for the endorsement/ordering/validation pipeline.
SimulationOutcome simulate_proposal(const StateStore& committed,
                                    const ChaincodeRegistry& registry,
                                    const ChannelConfig& config,
                                    const Proposal& proposal, StepBudget budget);

}  // namespace ledgersim
