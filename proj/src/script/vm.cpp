#include "ledgersim/script/vm.hpp"

#include <optional>

#include "ledgersim/codec.hpp"
#include "ledgersim/crypto.hpp"

namespace ledgersim::script {

namespace {

const Bytes kTrue = {0x01};

bool is_true(const Bytes& b) { return b == kTrue; }

bool multisig_matches_bytes(const std::vector<Bytes>& keys,
                            const std::vector<Bytes>& sigs,
                            const SpendingContext& ctx) {
  size_t key_index = 0;
  for (const Bytes& sig : sigs) {
    bool matched = false;
    while (key_index < keys.size()) {
      if (ctx.verify_signature(keys[key_index], sig, ctx.tx_digest)) {
        matched = true;
        ++key_index;
        break;
      }
      ++key_index;
    }
    if (!matched) return false;
  }
  return true;
}

struct TimeOperand {
  bool tagged_first;  // height / blocks
  uint64_t value;
};

std::optional<TimeOperand> decode_tagged_u64(const Bytes& b) {
  if (b.size() != 9) return std::nullopt;
  Reader r(b);
  TimeOperand out{r.u8() != 0, r.u64()};
  return out;
}

}  // namespace

VmResult run_program(const Program& program, const std::vector<Bytes>& witness,
                     const SpendingContext& ctx) {
  VmResult result;
  auto locked = [&result](std::string reason) {
    result.unlocked = false;
    result.reason = std::move(reason);
    return result;
  };

  if (witness.empty()) return locked("malformed: missing clause selector");
  if (witness[0].size() != 8) return locked("malformed: bad clause selector");
  Reader selector(witness[0]);
  uint64_t clause_index = selector.u64();
  if (clause_index >= program.clauses.size()) {
    return locked("malformed: clause index out of range");
  }
  const Program::ClauseCode& clause = program.clauses[clause_index];
  if (witness.size() != clause.arg_count + 1) {
    return locked("malformed: wrong witness arity");
  }

  std::vector<Bytes> stack;
  auto pop = [&stack]() -> Bytes {
    Bytes top = std::move(stack.back());
    stack.pop_back();
    return top;
  };

  for (const Instr& instr : clause.code) {
    ++result.steps;
    switch (instr.op) {
      case Op::PushConst:
        if (instr.a >= program.consts.size()) return locked("malformed: bad constant");
        stack.push_back(program.consts[instr.a]);
        break;
      case Op::PushArg:
        if (instr.a >= witness.size()) return locked("malformed: bad witness slot");
        stack.push_back(witness[instr.a]);
        break;
      case Op::Dup:
        if (stack.empty()) return locked("malformed: stack underflow");
        stack.push_back(stack.back());
        break;
      case Op::Drop:
        if (stack.empty()) return locked("malformed: stack underflow");
        stack.pop_back();
        break;
      case Op::Not: {
        if (stack.empty()) return locked("malformed: stack underflow");
        Bytes v = pop();
        if (v.size() != 1 || v[0] > 1) return locked("malformed: not on non-boolean");
        stack.push_back(Bytes{static_cast<uint8_t>(v[0] ? 0 : 1)});
        break;
      }
      case Op::Equal: {
        if (stack.size() < 2) return locked("malformed: stack underflow");
        Bytes b = pop();
        Bytes a = pop();
        stack.push_back(Bytes{static_cast<uint8_t>(a == b ? 1 : 0)});
        break;
      }
      case Op::Size: {
        if (stack.empty()) return locked("malformed: stack underflow");
        Bytes v = pop();
        Writer w;
        w.i64(static_cast<int64_t>(v.size()));
        stack.push_back(w.take());
        break;
      }
      case Op::Sha256:
      case Op::Sha1:
      case Op::Ripemd160: {
        if (stack.empty()) return locked("malformed: stack underflow");
        Bytes v = pop();
        stack.push_back(instr.op == Op::Sha256  ? sha256(v)
                        : instr.op == Op::Sha1 ? sha1(v)
                                               : ripemd160(v));
        break;
      }
      case Op::CheckSig: {
        if (stack.size() < 2) return locked("malformed: stack underflow");
        Bytes sig = pop();
        Bytes key = pop();
        stack.push_back(Bytes{static_cast<uint8_t>(
            ctx.verify_signature(key, sig, ctx.tx_digest) ? 1 : 0)});
        break;
      }
      case Op::CheckMultiSig: {
        size_t nkeys = instr.a, nsigs = instr.b;
        if (stack.size() < nkeys + nsigs) return locked("malformed: stack underflow");
        std::vector<Bytes> sigs(nsigs), keys(nkeys);
        for (size_t i = nsigs; i > 0; --i) sigs[i - 1] = pop();
        for (size_t i = nkeys; i > 0; --i) keys[i - 1] = pop();
        stack.push_back(Bytes{static_cast<uint8_t>(
            multisig_matches_bytes(keys, sigs, ctx) ? 1 : 0)});
        break;
      }
      case Op::CheckLockTime: {
        if (stack.empty()) return locked("malformed: stack underflow");
        auto operand = decode_tagged_u64(pop());
        if (!operand) return locked("malformed: bad time operand");
        bool ok = operand->tagged_first ? ctx.current_height > operand->value
                                        : ctx.current_time > operand->value;
        stack.push_back(Bytes{static_cast<uint8_t>(ok ? 1 : 0)});
        break;
      }
      case Op::CheckSequence: {
        if (stack.empty()) return locked("malformed: stack underflow");
        auto operand = decode_tagged_u64(pop());
        if (!operand) return locked("malformed: bad duration operand");
        bool ok = operand->tagged_first
                      ? ctx.utxo_age_blocks >= operand->value
                      : ctx.utxo_age_seconds >= operand->value;
        stack.push_back(Bytes{static_cast<uint8_t>(ok ? 1 : 0)});
        break;
      }
      case Op::Verify: {
        if (stack.empty()) return locked("malformed: stack underflow");
        Bytes v = pop();
        if (!is_true(v)) return locked("verify failed");
        break;
      }
      case Op::True:
        stack.push_back(kTrue);
        break;
    }
    if (stack.size() > kVmMaxStack) return locked("malformed: stack overflow");
  }

  if (stack.size() == 1 && is_true(stack[0])) {
    result.unlocked = true;
    return result;
  }
  return locked("malformed: unbalanced stack at end");
}

}  // namespace ledgersim::script
