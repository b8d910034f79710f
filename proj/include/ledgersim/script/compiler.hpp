#pragma once

#include "ledgersim/script/eval.hpp"

namespace ledgersim::script {

enum class Op : uint8_t {
  PushConst = 0x01,  // a = constant table index
  PushArg = 0x02,    // a = witness index (0 is the clause selector)
  Dup = 0x03,
  Drop = 0x04,
  Not = 0x05,
  Equal = 0x06,
  Size = 0x07,
  Sha256 = 0x08,
  Sha1 = 0x09,
  Ripemd160 = 0x0a,
  CheckSig = 0x0b,
  CheckMultiSig = 0x0c,  // a = key count, b = sig count
  CheckLockTime = 0x0d,
  CheckSequence = 0x0e,
  Verify = 0x0f,
  True = 0x10,
};

struct Instr {
  Op op = Op::True;
  uint16_t a = 0;
  uint16_t b = 0;
};

// Straight-line code per clause, selected by the leading witness index.
// Contract parameters are baked in as constants; clause arguments come from
// the witness. Execution cost is bounded by code length: there are no jumps.
struct Program {
  struct ClauseCode {
    std::string name;
    uint32_t arg_count = 0;
    std::vector<Instr> code;
  };
  std::vector<Bytes> consts;
  std::vector<ClauseCode> clauses;
};

// Requires a typechecked contract and one value per contract parameter.
Program compile(const ScriptContract& contract,
                const std::vector<ScriptValue>& contract_args);

Bytes serialize_program(const Program& program);
Program deserialize_program(ByteSpan data);  // throws CodecError
std::string disassemble(const Program& program);

// Witness construction: [clause index][encoded clause args...].
std::vector<Bytes> make_witness(const Program& program,
                                const std::string& clause_name,
                                const std::vector<ScriptValue>& clause_args);

}  // namespace ledgersim::script
