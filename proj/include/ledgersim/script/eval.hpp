#pragma once

#include <functional>
#include <stdexcept>

#include "ledgersim/script/ast.hpp"

namespace ledgersim::script {

// Runtime value. Hash-wrapped values live as their digest bytes.
struct ScriptValue {
  Type type;
  Bytes bytes;          // Bytes / PublicKey / Signature / hash digests
  int64_t number = 0;   // Number
  bool boolean = false; // Boolean
  uint64_t amount = 0;  // Value
  bool time_is_height = true;
  uint64_t time_value = 0;  // Time
  bool duration_is_blocks = true;
  uint64_t duration_value = 0;  // Duration (seconds stored as seconds)
};

ScriptValue make_bytes(Bytes b);
ScriptValue make_public_key(Bytes b);
ScriptValue make_signature(Bytes b);
ScriptValue make_number(int64_t n);
ScriptValue make_boolean(bool b);
ScriptValue make_value(uint64_t amount);
// Numeric times below 500,000,000 are block heights, otherwise timestamps.
ScriptValue make_time(uint64_t t);
ScriptValue make_duration_blocks(uint64_t blocks);
ScriptValue make_duration_seconds(uint64_t seconds);

// Encoding shared by the VM stack, witness arguments and equality checks.
// Injective per type: equal encodings of equal types mean equal values.
Bytes encode_script_value(const ScriptValue& v);

// Everything a spending condition may inspect. The two age fields are the
// nLockTime / sequence-number stand-ins.
struct SpendingContext {
  uint64_t current_height = 0;
  uint64_t current_time = 0;
  uint64_t utxo_age_blocks = 0;
  uint64_t utxo_age_seconds = 0;
  Bytes tx_digest;
  std::function<bool(const Bytes& key, const Bytes& sig, const Bytes& digest)>
      verify_signature;

  // Verifier matching the simulation MAC scheme.
  static SpendingContext with_sim_verifier();
};

class ScriptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalResult {
  bool unlocked = false;
  std::string reason;  // set when locked
};

// Direct AST interpretation of one clause. Arity or type mismatches between
// declared parameters and supplied values throw ScriptError; a condition
// evaluating false returns locked.
EvalResult eval_clause(const ScriptContract& contract,
                       const std::vector<ScriptValue>& contract_args,
                       const std::string& clause_name,
                       const std::vector<ScriptValue>& clause_args,
                       const SpendingContext& ctx);

// The builtin function set, exposed for unit tests.
ScriptValue eval_builtin(const std::string& name,
                         const std::vector<ScriptValue>& args,
                         const SpendingContext& ctx);

// Lists for checkMultiSig travel through eval_builtin as consecutive values:
// use this helper instead when calling it directly.
ScriptValue eval_check_multisig(const std::vector<ScriptValue>& keys,
                                const std::vector<ScriptValue>& sigs,
                                const SpendingContext& ctx);

}  // namespace ledgersim::script
