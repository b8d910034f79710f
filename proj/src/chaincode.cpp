#include "ledgersim/chaincode.hpp"

#include <algorithm>

namespace ledgersim {

Proposal make_proposal(const std::string& client, const std::string& chaincode_id,
                       const std::string& operation, std::vector<Bytes> args,
                       uint64_t nonce, uint64_t timestamp) {
  Proposal p;
  p.client = client;
  p.chaincode_id = chaincode_id;
  p.operation = operation;
  p.args = std::move(args);
  p.nonce = nonce;
  p.timestamp = timestamp;
  p.tx_id = derive_tx_id(client, nonce);
  return p;
}

void ChaincodeRegistry::install(const std::string& chaincode_id,
                                std::shared_ptr<Chaincode> handler) {
  handlers_[chaincode_id] = std::move(handler);
}

Chaincode* ChaincodeRegistry::find(const std::string& chaincode_id) const {
  auto it = handlers_.find(chaincode_id);
  return it == handlers_.end() ? nullptr : it->second.get();
}

bool ChaincodeRegistry::contains(const std::string& chaincode_id) const {
  return handlers_.count(chaincode_id) > 0;
}

std::vector<std::string> ChaincodeRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, handler] : handlers_) out.push_back(id);
  return out;
}

Bytes namespaced_key(const std::string& chaincode_id, ByteSpan user_key) {
  Bytes out;
  out.reserve(chaincode_id.size() + 1 + user_key.size());
  out.insert(out.end(), chaincode_id.begin(), chaincode_id.end());
  out.push_back(0);
  out.insert(out.end(), user_key.begin(), user_key.end());
  return out;
}

ChaincodeContext::ChaincodeContext(const StateStore& committed,
                                   const ChaincodeRegistry& registry,
                                   const ChannelConfig& config,
                                   const Proposal& proposal, StepBudget budget)
    : committed_(committed),
      registry_(registry),
      config_(config),
      proposal_(&proposal),
      budget_(budget),
      active_chaincode_(proposal.chaincode_id),
      caller_(proposal.client) {}

void ChaincodeContext::charge(uint64_t steps) {
  steps_used_ += steps;
  if (steps_used_ > budget_.max_steps) {
    steps_used_ = budget_.max_steps;
    throw StepsExhausted();
  }
}

Bytes ChaincodeContext::check_key(ByteSpan user_key) const {
  // The 0x00 separator is reserved; a key containing it could address another
  // chaincode's namespace.
  if (std::find(user_key.begin(), user_key.end(), uint8_t{0}) != user_key.end()) {
    throw ChaincodeError("namespace violation: key contains reserved separator");
  }
  return namespaced_key(active_chaincode_, user_key);
}

void ChaincodeContext::record_read(const Bytes& ns_key) {
  if (read_index_.count(ns_key)) return;  // keys unique within a read set
  read_index_[ns_key] = reads_.size();
  reads_.emplace_back(ns_key, committed_.committed_version(ns_key));
}

void ChaincodeContext::record_write(const Bytes& ns_key, bool is_delete, Bytes value) {
  auto it = write_index_.find(ns_key);
  if (it != write_index_.end()) {
    // Repeated writes collapse to the last one; position of first write kept.
    writes_[it->second].is_delete = is_delete;
    writes_[it->second].value = std::move(value);
    return;
  }
  write_index_[ns_key] = writes_.size();
  writes_.push_back(WriteEntry{ns_key, is_delete, std::move(value)});
}

std::optional<Bytes> ChaincodeContext::get(ByteSpan key) {
  charge();
  Bytes ns_key = check_key(key);
  record_read(ns_key);
  auto vv = committed_.get_committed(ns_key);
  if (!vv) return std::nullopt;
  return vv->value;
}

std::optional<Bytes> ChaincodeContext::get(std::string_view key) {
  return get(ByteSpan(reinterpret_cast<const uint8_t*>(key.data()), key.size()));
}

void ChaincodeContext::put(ByteSpan key, ByteSpan value) {
  charge();
  record_write(check_key(key), false, Bytes(value.begin(), value.end()));
}

void ChaincodeContext::put(std::string_view key, std::string_view value) {
  put(ByteSpan(reinterpret_cast<const uint8_t*>(key.data()), key.size()),
      ByteSpan(reinterpret_cast<const uint8_t*>(value.data()), value.size()));
}

void ChaincodeContext::del(ByteSpan key) {
  charge();
  record_write(check_key(key), true, {});
}

void ChaincodeContext::del(std::string_view key) {
  del(ByteSpan(reinterpret_cast<const uint8_t*>(key.data()), key.size()));
}

std::vector<HistoryEntry> ChaincodeContext::history(ByteSpan key) {
  charge();
  return committed_.get_history_for_key(check_key(key));
}

std::vector<HistoryEntry> ChaincodeContext::history(std::string_view key) {
  return history(ByteSpan(reinterpret_cast<const uint8_t*>(key.data()), key.size()));
}

Bytes ChaincodeContext::invoke_chaincode(const std::string& callee,
                                         const std::string& operation,
                                         const std::vector<Bytes>& args) {
  charge();
  if (depth_ + 1 > kMaxInvokeDepth) {
    throw ChaincodeError("invoke depth limit exceeded");
  }
  Chaincode* handler = registry_.find(callee);
  if (handler == nullptr) {
    throw ChaincodeError("invoke: unknown chaincode " + callee);
  }
  auto auth = config_.chaincode_authorizations.find(active_chaincode_);
  bool authorized =
      auth != config_.chaincode_authorizations.end() &&
      std::find(auth->second.begin(), auth->second.end(), callee) != auth->second.end();
  if (!authorized) {
    throw ChaincodeError("invoke: " + active_chaincode_ +
                         " not authorized to call " + callee);
  }

  std::string saved_active = active_chaincode_;
  std::string saved_caller = caller_;
  active_chaincode_ = callee;
  caller_ = saved_active;  // callee sees the calling chaincode as its caller
  ++depth_;
  Bytes response;
  try {
    response = handler->invoke(*this, operation, args);
  } catch (...) {
    --depth_;
    active_chaincode_ = std::move(saved_active);
    caller_ = std::move(saved_caller);
    throw;
  }
  --depth_;
  active_chaincode_ = std::move(saved_active);
  caller_ = std::move(saved_caller);
  return response;
}

SimulationOutcome simulate_proposal(const StateStore& committed,
                                    const ChaincodeRegistry& registry,
                                    const ChannelConfig& config,
                                    const Proposal& proposal, StepBudget budget) {
  if (budget.max_steps == 0) {
    return SimulationFailure{"budget must be positive", 0};
  }
  if (proposal.tx_id != derive_tx_id(proposal.client, proposal.nonce)) {
    return SimulationFailure{"tx-id does not match derivation rule", 0};
  }
  Chaincode* handler = registry.find(proposal.chaincode_id);
  if (handler == nullptr) {
    return SimulationFailure{"unknown chaincode " + proposal.chaincode_id, 0};
  }

  ChaincodeContext ctx(committed, registry, config, proposal, budget);
  try {
    Bytes response = handler->invoke(ctx, proposal.operation, proposal.args);
    SimulationResult result;
    result.read_set.entries = std::move(ctx.reads_);
    result.write_set.entries = std::move(ctx.writes_);
    result.response = std::move(response);
    result.steps_used = ctx.steps_used_;
    return result;
  } catch (const ChaincodeError& e) {
    return SimulationFailure{e.what(), ctx.steps_used_};
  }
}

}  // namespace ledgersim
