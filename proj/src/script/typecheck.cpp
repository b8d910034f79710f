#include <map>

#include "ledgersim/script/parser.hpp"

namespace ledgersim::script {

namespace {

struct TypeError {
  Pos pos;
  std::string message;
};

using Env = std::map<std::string, Type>;

[[noreturn]] void err(Pos pos, const std::string& message) {
  throw TypeError{pos, message};
}

Type check_expr(Expr& e, const Env& env, const Type* expected);

Type require(Expr& e, const Env& env, const Type& want, const char* what) {
  Type got = check_expr(e, env, &want);
  if (got != want) {
    err(e.pos, std::string(what) + ": expected " + type_to_string(want) +
                   ", got " + type_to_string(got));
  }
  return got;
}

Type check_call(Expr& e, const Env& env) {
  const std::string& fn = e.name;
  auto arity = [&](size_t n) {
    if (e.args.size() != n) {
      err(e.pos, fn + ": expected " + std::to_string(n) + " argument(s), got " +
                     std::to_string(e.args.size()));
    }
  };
  if (fn == "checkSig") {
    arity(2);
    require(e.args[0], env, simple_type(TypeKind::PublicKey), "checkSig key");
    require(e.args[1], env, simple_type(TypeKind::Signature), "checkSig sig");
    return simple_type(TypeKind::Boolean);
  }
  if (fn == "checkMultiSig") {
    arity(2);
    if (e.args[0].kind != Expr::Kind::ListLit || e.args[1].kind != Expr::Kind::ListLit) {
      err(e.pos, "checkMultiSig: arguments must be list literals");
    }
    for (Expr& k : e.args[0].args) {
      require(k, env, simple_type(TypeKind::PublicKey), "checkMultiSig key");
    }
    for (Expr& s : e.args[1].args) {
      require(s, env, simple_type(TypeKind::Signature), "checkMultiSig sig");
    }
    if (e.args[0].args.empty()) err(e.pos, "checkMultiSig: empty key list");
    e.args[0].type = simple_type(TypeKind::PublicKey);
    e.args[1].type = simple_type(TypeKind::Signature);
    return simple_type(TypeKind::Boolean);
  }
  if (fn == "after") {
    arity(1);
    require(e.args[0], env, simple_type(TypeKind::Time), "after");
    return simple_type(TypeKind::Boolean);
  }
  if (fn == "older") {
    arity(1);
    require(e.args[0], env, simple_type(TypeKind::Duration), "older");
    return simple_type(TypeKind::Boolean);
  }
  if (fn == "sha256" || fn == "sha1" || fn == "ripemd160") {
    arity(1);
    Type arg = check_expr(e.args[0], env, nullptr);
    if (!is_hashable(arg)) {
      err(e.pos, fn + ": argument is not hashable (" + type_to_string(arg) + ")");
    }
    TypeKind kind = fn == "sha256"  ? TypeKind::Sha256
                    : fn == "sha1" ? TypeKind::Sha1
                                   : TypeKind::Ripemd160;
    Type result = hash_type(kind, arg);
    if (hash_depth(result) > 2) {
      err(e.pos, fn + ": hash nesting deeper than one level of hash-of-hash");
    }
    return result;
  }
  if (fn == "bytes") {
    arity(1);
    Type arg = check_expr(e.args[0], env, nullptr);
    if (arg.kind == TypeKind::Value || arg.kind == TypeKind::Boolean) {
      err(e.pos, "bytes: cannot be called on " + type_to_string(arg));
    }
    return simple_type(TypeKind::Bytes);
  }
  if (fn == "size") {
    arity(1);
    require(e.args[0], env, simple_type(TypeKind::Bytes), "size");
    return simple_type(TypeKind::Number);
  }
  err(e.pos, "unknown function '" + fn + "'");
}

Type check_expr(Expr& e, const Env& env, const Type* expected) {
  Type result;
  switch (e.kind) {
    case Expr::Kind::Ident: {
      auto it = env.find(e.name);
      if (it == env.end()) err(e.pos, "unknown identifier '" + e.name + "'");
      result = it->second;
      break;
    }
    case Expr::Kind::NumberLit: {
      if (expected && expected->kind == TypeKind::Time) {
        if (e.number < 0) err(e.pos, "time literal must be non-negative");
        result = simple_type(TypeKind::Time);
      } else if (expected && expected->kind == TypeKind::Duration) {
        if (e.number < 0) err(e.pos, "duration literal must be non-negative");
        result = simple_type(TypeKind::Duration);
      } else {
        if (e.number < kNumberMin || e.number > kNumberMax) {
          err(e.pos, "number literal out of range [-2147483647, 2147483647]");
        }
        result = simple_type(TypeKind::Number);
      }
      break;
    }
    case Expr::Kind::SecondsLit: {
      if (e.number < 0 || e.number % static_cast<int64_t>(kSecondsGranule) != 0) {
        err(e.pos, "seconds duration must be a non-negative multiple of 512");
      }
      result = simple_type(TypeKind::Duration);
      break;
    }
    case Expr::Kind::BytesLit: {
      if (expected && is_bytes_like(*expected)) {
        result = *expected;
      } else {
        result = simple_type(TypeKind::Bytes);
      }
      break;
    }
    case Expr::Kind::BoolLit:
      result = simple_type(TypeKind::Boolean);
      break;
    case Expr::Kind::ListLit:
      err(e.pos, "list literal only allowed as a checkMultiSig argument");
    case Expr::Kind::Call:
      result = check_call(e, env);
      break;
    case Expr::Kind::Equal:
    case Expr::Kind::NotEqual: {
      Type lhs = check_expr(e.args[0], env, nullptr);
      Type rhs = check_expr(e.args[1], env, &lhs);
      if (lhs != rhs) {
        err(e.pos, "equality operands differ: " + type_to_string(lhs) + " vs " +
                       type_to_string(rhs));
      }
      if (lhs.kind == TypeKind::Boolean) {
        err(e.pos, "equality cannot be applied to Booleans");
      }
      result = simple_type(TypeKind::Boolean);
      break;
    }
  }
  e.type = result;
  return result;
}

}  // namespace

std::vector<Diagnostic> typecheck(ScriptContract& contract) {
  std::vector<Diagnostic> problems;
  auto note = [&problems](Pos pos, std::string message) {
    problems.push_back(Diagnostic{pos, std::move(message)});
  };

  Env contract_env;
  std::string value_param;
  for (const Param& p : contract.params) {
    if (contract_env.count(p.name)) {
      note(p.pos, "duplicate parameter '" + p.name + "'");
      continue;
    }
    contract_env[p.name] = p.type;
    if (p.type.kind == TypeKind::Value) {
      if (!value_param.empty()) {
        note(p.pos, "contract takes more than one Value parameter");
      }
      value_param = p.name;
    }
  }
  if (value_param.empty()) {
    note(Pos{1, 1}, "contract must take exactly one Value parameter");
  }
  if (contract.clauses.empty()) {
    note(Pos{1, 1}, "contract must have at least one clause");
  }

  std::map<std::string, bool> clause_names;
  for (Clause& clause : contract.clauses) {
    if (clause_names[clause.name]) {
      note(clause.pos, "duplicate clause '" + clause.name + "'");
    }
    clause_names[clause.name] = true;

    Env env = contract_env;
    for (const Param& p : clause.params) {
      if (p.type.kind == TypeKind::Value) {
        note(p.pos, "clause arguments cannot be of type Value");
      }
      if (env.count(p.name)) {
        note(p.pos, "clause parameter '" + p.name + "' shadows another name");
        continue;
      }
      env[p.name] = p.type;
    }

    if (clause.body.empty()) {
      note(clause.pos, "clause body is empty; it must end with an unlock");
      continue;
    }
    for (size_t i = 0; i < clause.body.size(); ++i) {
      Statement& stmt = clause.body[i];
      bool last = i + 1 == clause.body.size();
      if (stmt.kind == Statement::Kind::Unlock) {
        if (!last) note(stmt.pos, "unlock must be the final statement");
        if (stmt.unlock_name != value_param) {
          note(stmt.pos, "unlock must name the contract's Value parameter");
        }
        continue;
      }
      if (last) {
        note(stmt.pos, "clause must end with an unlock statement");
      }
      try {
        Type t = check_expr(stmt.expr, env, nullptr);
        if (t.kind != TypeKind::Boolean) {
          note(stmt.pos, "verify condition must be Boolean, got " + type_to_string(t));
        }
      } catch (const TypeError& e) {
        note(e.pos, e.message);
      }
    }
  }
  return problems;
}

}  // namespace ledgersim::script
