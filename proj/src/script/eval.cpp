#include "ledgersim/script/eval.hpp"

#include <map>

#include "ledgersim/codec.hpp"
#include "ledgersim/crypto.hpp"

namespace ledgersim::script {

ScriptValue make_bytes(Bytes b) {
  ScriptValue v;
  v.type = simple_type(TypeKind::Bytes);
  v.bytes = std::move(b);
  return v;
}

ScriptValue make_public_key(Bytes b) {
  ScriptValue v;
  v.type = simple_type(TypeKind::PublicKey);
  v.bytes = std::move(b);
  return v;
}

ScriptValue make_signature(Bytes b) {
  ScriptValue v;
  v.type = simple_type(TypeKind::Signature);
  v.bytes = std::move(b);
  return v;
}

ScriptValue make_number(int64_t n) {
  ScriptValue v;
  v.type = simple_type(TypeKind::Number);
  v.number = n;
  return v;
}

ScriptValue make_boolean(bool b) {
  ScriptValue v;
  v.type = simple_type(TypeKind::Boolean);
  v.boolean = b;
  return v;
}

ScriptValue make_value(uint64_t amount) {
  ScriptValue v;
  v.type = simple_type(TypeKind::Value);
  v.amount = amount;
  return v;
}

ScriptValue make_time(uint64_t t) {
  ScriptValue v;
  v.type = simple_type(TypeKind::Time);
  v.time_is_height = t < kHeightThreshold;
  v.time_value = t;
  return v;
}

ScriptValue make_duration_blocks(uint64_t blocks) {
  ScriptValue v;
  v.type = simple_type(TypeKind::Duration);
  v.duration_is_blocks = true;
  v.duration_value = blocks;
  return v;
}

ScriptValue make_duration_seconds(uint64_t seconds) {
  ScriptValue v;
  v.type = simple_type(TypeKind::Duration);
  v.duration_is_blocks = false;
  v.duration_value = seconds;
  return v;
}

Bytes encode_script_value(const ScriptValue& v) {
  Writer w;
  switch (v.type.kind) {
    case TypeKind::Bytes:
    case TypeKind::PublicKey:
    case TypeKind::Signature:
    case TypeKind::Sha256:
    case TypeKind::Sha1:
    case TypeKind::Ripemd160:
      return v.bytes;
    case TypeKind::Number:
      w.i64(v.number);
      return w.take();
    case TypeKind::Boolean:
      w.u8(v.boolean ? 1 : 0);
      return w.take();
    case TypeKind::Value:
      w.u64(v.amount);
      return w.take();
    case TypeKind::Time:
      w.u8(v.time_is_height ? 1 : 0);
      w.u64(v.time_value);
      return w.take();
    case TypeKind::Duration:
      w.u8(v.duration_is_blocks ? 1 : 0);
      w.u64(v.duration_value);
      return w.take();
  }
  return {};
}

SpendingContext SpendingContext::with_sim_verifier() {
  SpendingContext ctx;
  ctx.verify_signature = [](const Bytes& key, const Bytes& sig, const Bytes& digest) {
    return sim_verify(key, digest, sig);
  };
  return ctx;
}

namespace {

bool multisig_matches(const std::vector<Bytes>& keys, const std::vector<Bytes>& sigs,
                      const SpendingContext& ctx) {
  // Greedy in-order matching: signatures must appear in the same order as
  // their keys, and every provided signature must match some key.
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

struct Evaluator {
  const SpendingContext& ctx;
  std::map<std::string, ScriptValue> env;

  ScriptValue eval(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Ident: {
        auto it = env.find(e.name);
        if (it == env.end()) throw ScriptError("unbound identifier " + e.name);
        return it->second;
      }
      case Expr::Kind::NumberLit:
        if (e.type.kind == TypeKind::Time) {
          return make_time(static_cast<uint64_t>(e.number));
        }
        if (e.type.kind == TypeKind::Duration) {
          return make_duration_blocks(static_cast<uint64_t>(e.number));
        }
        return make_number(e.number);
      case Expr::Kind::SecondsLit:
        return make_duration_seconds(static_cast<uint64_t>(e.number));
      case Expr::Kind::BytesLit: {
        ScriptValue v;
        v.type = e.type;
        v.bytes = e.bytes;
        return v;
      }
      case Expr::Kind::BoolLit:
        return make_boolean(e.boolean);
      case Expr::Kind::ListLit:
        throw ScriptError("list literal outside checkMultiSig");
      case Expr::Kind::Equal:
      case Expr::Kind::NotEqual: {
        ScriptValue lhs = eval(e.args[0]);
        ScriptValue rhs = eval(e.args[1]);
        bool equal = encode_script_value(lhs) == encode_script_value(rhs);
        return make_boolean(e.kind == Expr::Kind::Equal ? equal : !equal);
      }
      case Expr::Kind::Call: {
        if (e.name == "checkMultiSig") {
          std::vector<ScriptValue> keys, sigs;
          for (const Expr& k : e.args[0].args) keys.push_back(eval(k));
          for (const Expr& s : e.args[1].args) sigs.push_back(eval(s));
          return eval_check_multisig(keys, sigs, ctx);
        }
        std::vector<ScriptValue> args;
        args.reserve(e.args.size());
        for (const Expr& a : e.args) args.push_back(eval(a));
        return eval_builtin(e.name, args, ctx);
      }
    }
    throw ScriptError("unreachable expression kind");
  }
};

}  // namespace

ScriptValue eval_check_multisig(const std::vector<ScriptValue>& keys,
                                const std::vector<ScriptValue>& sigs,
                                const SpendingContext& ctx) {
  std::vector<Bytes> key_bytes, sig_bytes;
  for (const auto& k : keys) key_bytes.push_back(k.bytes);
  for (const auto& s : sigs) sig_bytes.push_back(s.bytes);
  return make_boolean(multisig_matches(key_bytes, sig_bytes, ctx));
}

ScriptValue eval_builtin(const std::string& name,
                         const std::vector<ScriptValue>& args,
                         const SpendingContext& ctx) {
  auto arity = [&](size_t n) {
    if (args.size() != n) throw ScriptError(name + ": bad arity");
  };
  if (name == "checkSig") {
    arity(2);
    return make_boolean(
        ctx.verify_signature(args[0].bytes, args[1].bytes, ctx.tx_digest));
  }
  if (name == "after") {
    arity(1);
    const ScriptValue& t = args[0];
    // Strictly after: the boundary tick itself is still locked.
    bool ok = t.time_is_height ? ctx.current_height > t.time_value
                               : ctx.current_time > t.time_value;
    return make_boolean(ok);
  }
  if (name == "older") {
    arity(1);
    const ScriptValue& d = args[0];
    bool ok = d.duration_is_blocks ? ctx.utxo_age_blocks >= d.duration_value
                                   : ctx.utxo_age_seconds >= d.duration_value;
    return make_boolean(ok);
  }
  if (name == "sha256" || name == "sha1" || name == "ripemd160") {
    arity(1);
    Bytes digest = name == "sha256"  ? sha256(args[0].bytes)
                   : name == "sha1" ? sha1(args[0].bytes)
                                    : ripemd160(args[0].bytes);
    ScriptValue v;
    TypeKind kind = name == "sha256"  ? TypeKind::Sha256
                    : name == "sha1" ? TypeKind::Sha1
                                     : TypeKind::Ripemd160;
    v.type = hash_type(kind, args[0].type);
    v.bytes = std::move(digest);
    return v;
  }
  if (name == "bytes") {
    arity(1);
    // Pure type coercion; the payload is untouched.
    return make_bytes(args[0].bytes);
  }
  if (name == "size") {
    arity(1);
    return make_number(static_cast<int64_t>(args[0].bytes.size()));
  }
  if (name == "==") {
    arity(2);
    return make_boolean(encode_script_value(args[0]) == encode_script_value(args[1]));
  }
  if (name == "!=") {
    arity(2);
    return make_boolean(encode_script_value(args[0]) != encode_script_value(args[1]));
  }
  throw ScriptError("unknown builtin " + name);
}

EvalResult eval_clause(const ScriptContract& contract,
                       const std::vector<ScriptValue>& contract_args,
                       const std::string& clause_name,
                       const std::vector<ScriptValue>& clause_args,
                       const SpendingContext& ctx) {
  const Clause* clause = contract.find_clause(clause_name);
  if (clause == nullptr) throw ScriptError("unknown clause " + clause_name);
  if (contract_args.size() != contract.params.size()) {
    throw ScriptError("contract argument arity mismatch");
  }
  if (clause_args.size() != clause->params.size()) {
    throw ScriptError("clause argument arity mismatch");
  }

  Evaluator ev{ctx, {}};
  for (size_t i = 0; i < contract.params.size(); ++i) {
    if (contract_args[i].type != contract.params[i].type) {
      throw ScriptError("contract argument type mismatch at " +
                        contract.params[i].name);
    }
    ev.env[contract.params[i].name] = contract_args[i];
  }
  for (size_t i = 0; i < clause->params.size(); ++i) {
    if (clause_args[i].type != clause->params[i].type) {
      throw ScriptError("clause argument type mismatch at " + clause->params[i].name);
    }
    ev.env[clause->params[i].name] = clause_args[i];
  }

  for (const Statement& stmt : clause->body) {
    if (stmt.kind == Statement::Kind::Unlock) {
      return EvalResult{true, ""};
    }
    ScriptValue condition = ev.eval(stmt.expr);
    if (condition.type.kind != TypeKind::Boolean) {
      throw ScriptError("verify condition did not evaluate to Boolean");
    }
    if (!condition.boolean) {
      return EvalResult{false, "condition at line " + std::to_string(stmt.pos.line) +
                                   " is false"};
    }
  }
  return EvalResult{false, "clause has no unlock"};
}

}  // namespace ledgersim::script
