#include "ledgersim/script/compiler.hpp"

#include <map>

#include "ledgersim/codec.hpp"

namespace ledgersim::script {

namespace {

struct ClauseCompiler {
  Program& program;
  std::map<std::string, uint16_t> const_slots;   // contract param -> const idx
  std::map<std::string, uint16_t> arg_slots;     // clause param -> witness idx
  std::vector<Instr> code;

  uint16_t intern(const Bytes& value) {
    for (size_t i = 0; i < program.consts.size(); ++i) {
      if (program.consts[i] == value) return static_cast<uint16_t>(i);
    }
    program.consts.push_back(value);
    return static_cast<uint16_t>(program.consts.size() - 1);
  }

  void emit(Op op, uint16_t a = 0, uint16_t b = 0) { code.push_back(Instr{op, a, b}); }

  void push_literal(const Expr& e) {
    ScriptValue v;
    switch (e.kind) {
      case Expr::Kind::NumberLit:
        if (e.type.kind == TypeKind::Time) {
          v = make_time(static_cast<uint64_t>(e.number));
        } else if (e.type.kind == TypeKind::Duration) {
          v = make_duration_blocks(static_cast<uint64_t>(e.number));
        } else {
          v = make_number(e.number);
        }
        break;
      case Expr::Kind::SecondsLit:
        v = make_duration_seconds(static_cast<uint64_t>(e.number));
        break;
      case Expr::Kind::BytesLit:
        v.type = e.type;
        v.bytes = e.bytes;
        break;
      case Expr::Kind::BoolLit:
        v = make_boolean(e.boolean);
        break;
      default:
        throw ScriptError("not a literal");
    }
    emit(Op::PushConst, intern(encode_script_value(v)));
  }

  void compile_expr(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Ident: {
        auto arg = arg_slots.find(e.name);
        if (arg != arg_slots.end()) {
          emit(Op::PushArg, arg->second);
          return;
        }
        auto c = const_slots.find(e.name);
        if (c != const_slots.end()) {
          emit(Op::PushConst, c->second);
          return;
        }
        throw ScriptError("compile: unbound identifier " + e.name);
      }
      case Expr::Kind::NumberLit:
      case Expr::Kind::SecondsLit:
      case Expr::Kind::BytesLit:
      case Expr::Kind::BoolLit:
        push_literal(e);
        return;
      case Expr::Kind::ListLit:
        throw ScriptError("compile: stray list literal");
      case Expr::Kind::Equal:
        compile_expr(e.args[0]);
        compile_expr(e.args[1]);
        emit(Op::Equal);
        return;
      case Expr::Kind::NotEqual:
        compile_expr(e.args[0]);
        compile_expr(e.args[1]);
        emit(Op::Equal);
        emit(Op::Not);
        return;
      case Expr::Kind::Call:
        compile_call(e);
        return;
    }
  }

  void compile_call(const Expr& e) {
    const std::string& fn = e.name;
    if (fn == "checkSig") {
      compile_expr(e.args[0]);
      compile_expr(e.args[1]);
      emit(Op::CheckSig);
      return;
    }
    if (fn == "checkMultiSig") {
      const auto& keys = e.args[0].args;
      const auto& sigs = e.args[1].args;
      for (const Expr& k : keys) compile_expr(k);
      for (const Expr& s : sigs) compile_expr(s);
      emit(Op::CheckMultiSig, static_cast<uint16_t>(keys.size()),
           static_cast<uint16_t>(sigs.size()));
      return;
    }
    if (fn == "after") {
      compile_expr(e.args[0]);
      emit(Op::CheckLockTime);
      return;
    }
    if (fn == "older") {
      compile_expr(e.args[0]);
      emit(Op::CheckSequence);
      return;
    }
    if (fn == "sha256" || fn == "sha1" || fn == "ripemd160") {
      compile_expr(e.args[0]);
      emit(fn == "sha256" ? Op::Sha256 : fn == "sha1" ? Op::Sha1 : Op::Ripemd160);
      return;
    }
    if (fn == "bytes") {
      compile_expr(e.args[0]);  // no effect on compiled output
      return;
    }
    if (fn == "size") {
      compile_expr(e.args[0]);
      emit(Op::Size);
      return;
    }
    throw ScriptError("compile: unknown builtin " + fn);
  }
};

}  // namespace

Program compile(const ScriptContract& contract,
                const std::vector<ScriptValue>& contract_args) {
  if (contract_args.size() != contract.params.size()) {
    throw ScriptError("compile: contract argument arity mismatch");
  }
  Program program;
  std::map<std::string, uint16_t> const_slots;
  for (size_t i = 0; i < contract.params.size(); ++i) {
    if (contract_args[i].type != contract.params[i].type) {
      throw ScriptError("compile: contract argument type mismatch at " +
                        contract.params[i].name);
    }
    ClauseCompiler interner{program, {}, {}, {}};
    Bytes encoded = encode_script_value(contract_args[i]);
    const_slots[contract.params[i].name] = interner.intern(encoded);
  }

  for (const Clause& clause : contract.clauses) {
    ClauseCompiler cc{program, const_slots, {}, {}};
    for (size_t i = 0; i < clause.params.size(); ++i) {
      // Witness slot 0 carries the clause selector.
      cc.arg_slots[clause.params[i].name] = static_cast<uint16_t>(i + 1);
    }
    for (const Statement& stmt : clause.body) {
      if (stmt.kind == Statement::Kind::Unlock) {
        cc.emit(Op::True);
        break;
      }
      cc.compile_expr(stmt.expr);
      cc.emit(Op::Verify);
    }
    Program::ClauseCode out;
    out.name = clause.name;
    out.arg_count = static_cast<uint32_t>(clause.params.size());
    out.code = std::move(cc.code);
    program.clauses.push_back(std::move(out));
  }
  return program;
}

Bytes serialize_program(const Program& program) {
  Writer w;
  w.u32(static_cast<uint32_t>(program.consts.size()));
  for (const Bytes& c : program.consts) w.blob(c);
  w.u32(static_cast<uint32_t>(program.clauses.size()));
  for (const auto& clause : program.clauses) {
    w.str(clause.name);
    w.u32(clause.arg_count);
    w.u32(static_cast<uint32_t>(clause.code.size()));
    for (const Instr& instr : clause.code) {
      w.u8(static_cast<uint8_t>(instr.op));
      w.u16(instr.a);
      w.u16(instr.b);
    }
  }
  return w.take();
}

Program deserialize_program(ByteSpan data) {
  Reader r(data);
  Program program;
  uint32_t n = r.u32();
  for (uint32_t i = 0; i < n; ++i) program.consts.push_back(r.blob());
  n = r.u32();
  for (uint32_t i = 0; i < n; ++i) {
    Program::ClauseCode clause;
    clause.name = r.str();
    clause.arg_count = r.u32();
    uint32_t m = r.u32();
    for (uint32_t j = 0; j < m; ++j) {
      Instr instr;
      instr.op = static_cast<Op>(r.u8());
      instr.a = r.u16();
      instr.b = r.u16();
      clause.code.push_back(instr);
    }
    program.clauses.push_back(std::move(clause));
  }
  if (!r.done()) throw CodecError("program: trailing bytes");
  return program;
}

std::string disassemble(const Program& program) {
  auto op_name = [](Op op) -> const char* {
    switch (op) {
      case Op::PushConst: return "push-const";
      case Op::PushArg: return "push-arg";
      case Op::Dup: return "dup";
      case Op::Drop: return "drop";
      case Op::Not: return "not";
      case Op::Equal: return "equal";
      case Op::Size: return "size";
      case Op::Sha256: return "sha256";
      case Op::Sha1: return "sha1";
      case Op::Ripemd160: return "ripemd160";
      case Op::CheckSig: return "checksig";
      case Op::CheckMultiSig: return "checkmultisig";
      case Op::CheckLockTime: return "checklocktime";
      case Op::CheckSequence: return "checksequence";
      case Op::Verify: return "verify";
      case Op::True: return "true";
    }
    return "?";
  };
  std::string out;
  for (size_t i = 0; i < program.consts.size(); ++i) {
    out += "const " + std::to_string(i) + ": 0x" + to_hex(program.consts[i]) + "\n";
  }
  for (const auto& clause : program.clauses) {
    out += "clause " + clause.name + " (args " + std::to_string(clause.arg_count) + "):\n";
    for (const Instr& instr : clause.code) {
      out += "  ";
      out += op_name(instr.op);
      if (instr.op == Op::PushConst || instr.op == Op::PushArg) {
        out += " " + std::to_string(instr.a);
      } else if (instr.op == Op::CheckMultiSig) {
        out += " keys=" + std::to_string(instr.a) + " sigs=" + std::to_string(instr.b);
      }
      out += "\n";
    }
  }
  return out;
}

std::vector<Bytes> make_witness(const Program& program,
                                const std::string& clause_name,
                                const std::vector<ScriptValue>& clause_args) {
  for (size_t i = 0; i < program.clauses.size(); ++i) {
    if (program.clauses[i].name != clause_name) continue;
    std::vector<Bytes> witness;
    Writer w;
    w.u64(i);
    witness.push_back(w.take());
    for (const ScriptValue& arg : clause_args) {
      witness.push_back(encode_script_value(arg));
    }
    return witness;
  }
  throw ScriptError("make_witness: unknown clause " + clause_name);
}

}  // namespace ledgersim::script
