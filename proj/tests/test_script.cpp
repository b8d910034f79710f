#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ledgersim/codec.hpp"
#include "ledgersim/crypto.hpp"
#include "ledgersim/rng.hpp"
#include "ledgersim/script/parser.hpp"
#include "ledgersim/script/vm.hpp"

using namespace ledgersim;
using namespace ledgersim::script;

namespace {

ScriptContract must_parse(const std::string& source) {
  auto parsed = parse_and_typecheck(source);
  if (auto* diags = std::get_if<std::vector<Diagnostic>>(&parsed)) {
    std::string all;
    for (const auto& d : *diags) {
      all += std::to_string(d.pos.line) + ":" + std::to_string(d.pos.col) + " " +
             d.message + "; ";
    }
    FAIL("unexpected diagnostics: ", all);
  }
  return std::get<ScriptContract>(std::move(parsed));
}

std::vector<Diagnostic> must_fail(const std::string& source) {
  auto parsed = parse_and_typecheck(source);
  REQUIRE(std::holds_alternative<std::vector<Diagnostic>>(parsed));
  return std::get<std::vector<Diagnostic>>(parsed);
}

bool mentions(const std::vector<Diagnostic>& diags, const std::string& needle) {
  for (const auto& d : diags) {
    if (d.message.find(needle) != std::string::npos) return true;
  }
  return false;
}

const char* kPayToKey = R"(
contract LockWithKey(owner: PublicKey, funds: Value) {
  clause spend(sig: Signature) {
    verify checkSig(owner, sig)
    unlock funds
  }
}
)";

const char* kMultiTimelock = R"(
contract VaultWithEscape(k1: PublicKey, k2: PublicKey, k3: PublicKey,
                         recovery: PublicKey, funds: Value) {
  clause spend(sig1: Signature, sig2: Signature) {
    verify checkMultiSig([k1, k2, k3], [sig1, sig2])
    unlock funds
  }
  clause recover(sig: Signature) {
    verify after(100)
    verify checkSig(recovery, sig)
    unlock funds
  }
}
)";

const char* kHashLock = R"(
contract HashLock(digest: Sha256(Bytes), funds: Value) {
  clause reveal(preimage: Bytes) {
    verify sha256(preimage) == digest
    unlock funds
  }
}
)";

Bytes keypair(const std::string& label) { return sim_keygen(label); }

SpendingContext ctx_with(uint64_t height, uint64_t time = 0,
                         uint64_t age_blocks = 0, uint64_t age_seconds = 0) {
  SpendingContext ctx = SpendingContext::with_sim_verifier();
  ctx.current_height = height;
  ctx.current_time = time;
  ctx.utxo_age_blocks = age_blocks;
  ctx.utxo_age_seconds = age_seconds;
  ctx.tx_digest = sha256("the spending transaction");
  return ctx;
}

ScriptValue good_sig(const Bytes& key, const SpendingContext& ctx) {
  return make_signature(sim_sign(key, ctx.tx_digest));
}

}  // namespace

TEST_CASE("single-clause pay-to-key contract parses and typechecks") {
  ScriptContract contract = must_parse(kPayToKey);
  CHECK(contract.name == "LockWithKey");
  REQUIRE(contract.params.size() == 2);
  CHECK(contract.params[1].type.kind == TypeKind::Value);
  REQUIRE(contract.clauses.size() == 1);
  CHECK(contract.clauses[0].name == "spend");
}

TEST_CASE("number literal beyond the script bound is a type error") {
  auto diags = must_fail(R"(
contract C(funds: Value) {
  clause go(n: Number) {
    verify n == 2147483648
    unlock funds
  }
}
)");
  CHECK(mentions(diags, "out of range"));
  // the exact bound is representable
  must_parse(R"(
contract C(funds: Value) {
  clause go(n: Number) {
    verify n == 2147483647
    unlock funds
  }
}
)");
}

TEST_CASE("bytes() cannot coerce Value or Boolean") {
  auto diags = must_fail(R"(
contract C(funds: Value) {
  clause go(x: Bytes) {
    verify bytes(funds) == x
    unlock funds
  }
}
)");
  CHECK(mentions(diags, "bytes: cannot be called on Value"));
}

TEST_CASE("equality on Booleans is rejected") {
  auto diags = must_fail(R"(
contract C(funds: Value) {
  clause go(a: Boolean, b: Boolean) {
    verify a == b
    unlock funds
  }
}
)");
  CHECK(mentions(diags, "Boolean"));
}

TEST_CASE("a contract must carry exactly one Value parameter") {
  CHECK(mentions(must_fail("contract C(k: PublicKey) { clause c() { unlock k } }"),
                 "exactly one Value"));
  CHECK(mentions(must_fail(
                     "contract C(a: Value, b: Value) { clause c() { unlock a } }"),
                 "more than one Value"));
}

TEST_CASE("every clause must end with an unlock of the Value parameter") {
  auto diags = must_fail(R"(
contract C(k: PublicKey, funds: Value) {
  clause go(sig: Signature) {
    verify checkSig(k, sig)
  }
}
)");
  CHECK(mentions(diags, "unlock"));

  auto wrong_target = must_fail(R"(
contract C(k: PublicKey, funds: Value) {
  clause go() {
    unlock k
  }
}
)");
  CHECK(mentions(wrong_target, "Value parameter"));
}

TEST_CASE("diagnostics carry line and column positions") {
  auto parsed = parse_and_typecheck("contract C(funds: Value) {\n  clause go() {\n    verify nonsense\n    unlock funds\n  }\n}");
  auto diags = std::get<std::vector<Diagnostic>>(parsed);
  REQUIRE_FALSE(diags.empty());
  CHECK(diags[0].pos.line == 3);
  CHECK(diags[0].pos.col > 1);
}

TEST_CASE("seconds durations must be multiples of 512") {
  CHECK(mentions(must_fail(R"(
contract C(funds: Value) {
  clause go() {
    verify older(500s)
    unlock funds
  }
}
)"),
                 "512"));
  must_parse(R"(
contract C(funds: Value) {
  clause go() {
    verify older(1024s)
    unlock funds
  }
}
)");
}

TEST_CASE("hash nesting beyond one level of hash-of-hash is rejected") {
  must_parse(R"(
contract C(h: Sha256(Sha1(Bytes)), funds: Value) {
  clause go(x: Sha1(Bytes)) {
    verify sha256(x) == h
    unlock funds
  }
}
)");
  auto diags = must_fail(R"(
contract C(funds: Value) {
  clause go(x: Sha256(Sha1(Bytes))) {
    verify sha256(x) == sha256(x)
    unlock funds
  }
}
)");
  CHECK(mentions(diags, "nesting"));
}

TEST_CASE("checkSig unlocks with a verifier-approved signature") {
  ScriptContract contract = must_parse(kPayToKey);
  Bytes key = keypair("owner");
  SpendingContext ctx = ctx_with(10);
  std::vector<ScriptValue> cargs = {make_public_key(key), make_value(50)};

  EvalResult good = eval_clause(contract, cargs, "spend", {good_sig(key, ctx)}, ctx);
  CHECK(good.unlocked);

  EvalResult bad = eval_clause(
      contract, cargs, "spend",
      {make_signature(sim_sign(keypair("intruder"), ctx.tx_digest))}, ctx);
  CHECK_FALSE(bad.unlocked);
}

TEST_CASE("after(): strictly later heights unlock, the boundary stays locked") {
  ScriptContract contract = must_parse(kMultiTimelock);
  Bytes recovery = keypair("recovery");
  std::vector<ScriptValue> cargs = {
      make_public_key(keypair("k1")), make_public_key(keypair("k2")),
      make_public_key(keypair("k3")), make_public_key(recovery), make_value(1)};

  for (uint64_t height : {99ull, 100ull}) {
    SpendingContext ctx = ctx_with(height);
    EvalResult r = eval_clause(contract, cargs, "recover",
                               {good_sig(recovery, ctx)}, ctx);
    CHECK_FALSE(r.unlocked);
  }
  SpendingContext ctx = ctx_with(101);
  CHECK(eval_clause(contract, cargs, "recover", {good_sig(recovery, ctx)}, ctx)
            .unlocked);
}

TEST_CASE("older(): at least the duration must have passed") {
  ScriptContract contract = must_parse(R"(
contract Maturity(funds: Value) {
  clause ripen() {
    verify older(16)
    unlock funds
  }
}
)");
  std::vector<ScriptValue> cargs = {make_value(1)};
  CHECK_FALSE(eval_clause(contract, cargs, "ripen", {}, ctx_with(0, 0, 15)).unlocked);
  CHECK(eval_clause(contract, cargs, "ripen", {}, ctx_with(0, 0, 16)).unlocked);
  CHECK(eval_clause(contract, cargs, "ripen", {}, ctx_with(0, 0, 17)).unlocked);
}

TEST_CASE("checkMultiSig demands signatures in key order") {
  SpendingContext ctx = ctx_with(5);
  Bytes k1 = keypair("m1"), k2 = keypair("m2"), k3 = keypair("m3");
  std::vector<ScriptValue> keys = {make_public_key(k1), make_public_key(k2),
                                   make_public_key(k3)};
  ScriptValue s1 = good_sig(k1, ctx), s3 = good_sig(k3, ctx);

  CHECK(eval_check_multisig(keys, {s1, s3}, ctx).boolean);       // in order
  CHECK_FALSE(eval_check_multisig(keys, {s3, s1}, ctx).boolean); // order violated
  CHECK_FALSE(eval_check_multisig(
                  keys, {make_signature(sim_sign(keypair("zz"), ctx.tx_digest))},
                  ctx)
                  .boolean);
}

TEST_CASE("size() returns the byte length") {
  SpendingContext ctx = ctx_with(0);
  ScriptValue v = eval_builtin("size", {make_bytes(from_hex("deadbeef"))}, ctx);
  CHECK(v.number == 4);
  CHECK(eval_builtin("size", {make_bytes({})}, ctx).number == 0);
}

TEST_CASE("hash builtins produce the expected digests and types") {
  SpendingContext ctx = ctx_with(0);
  ScriptValue input = make_bytes(to_bytes("abc"));
  CHECK(to_hex(eval_builtin("sha256", {input}, ctx).bytes) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(to_hex(eval_builtin("sha1", {input}, ctx).bytes) ==
        "a9993e364706816aba3e25717850c26c9cd0d89d");
  CHECK(to_hex(eval_builtin("ripemd160", {input}, ctx).bytes) ==
        "8eb208f7e05d987a9b044a8e98c6b087f15a0bfc");
  CHECK(eval_builtin("sha256", {input}, ctx).type.kind == TypeKind::Sha256);
}

TEST_CASE("bytes() is a pure type coercion") {
  SpendingContext ctx = ctx_with(0);
  Bytes payload = from_hex("cafe");
  ScriptValue coerced = eval_builtin("bytes", {make_public_key(payload)}, ctx);
  CHECK(coerced.type.kind == TypeKind::Bytes);
  CHECK(coerced.bytes == payload);
}

TEST_CASE("hash-lock contract: the vm and the interpreter agree") {
  ScriptContract contract = must_parse(kHashLock);
  Bytes preimage = to_bytes("open sesame");
  ScriptValue digest;
  digest.type = hash_type(TypeKind::Sha256, simple_type(TypeKind::Bytes));
  digest.bytes = sha256(preimage);
  std::vector<ScriptValue> cargs = {digest, make_value(5)};
  SpendingContext ctx = ctx_with(0);
  Program program = compile(contract, cargs);

  for (const Bytes& attempt : {preimage, to_bytes("wrong"), Bytes{}}) {
    std::vector<ScriptValue> kargs = {make_bytes(attempt)};
    EvalResult direct = eval_clause(contract, cargs, "reveal", kargs, ctx);
    VmResult vm = run_program(program, make_witness(program, "reveal", kargs), ctx);
    CHECK(direct.unlocked == vm.unlocked);
    CHECK(direct.unlocked == (attempt == preimage));
  }
}

TEST_CASE("compiled pay-to-key unlocks through the vm") {
  ScriptContract contract = must_parse(kPayToKey);
  Bytes key = keypair("vm-owner");
  SpendingContext ctx = ctx_with(3);
  std::vector<ScriptValue> cargs = {make_public_key(key), make_value(1)};
  Program program = compile(contract, cargs);
  REQUIRE(program.clauses.size() == 1);

  VmResult good = run_program(
      program, make_witness(program, "spend", {good_sig(key, ctx)}), ctx);
  CHECK(good.unlocked);
  CHECK(good.steps <= program.clauses[0].code.size());

  VmResult bad = run_program(
      program,
      make_witness(program, "spend",
                   {make_signature(sim_sign(keypair("x"), ctx.tx_digest))}),
      ctx);
  CHECK_FALSE(bad.unlocked);
}

TEST_CASE("vm rejects malformed programs instead of misbehaving") {
  SpendingContext ctx = ctx_with(0);
  Program unbalanced;
  unbalanced.consts.push_back(Bytes{1});
  Program::ClauseCode clause;
  clause.name = "broken";
  clause.arg_count = 0;
  clause.code = {Instr{Op::PushConst, 0, 0}, Instr{Op::True, 0, 0}};  // 2 left
  unbalanced.clauses.push_back(clause);
  VmResult r = run_program(unbalanced, make_witness(unbalanced, "broken", {}), ctx);
  CHECK_FALSE(r.unlocked);
  CHECK(r.reason.find("unbalanced") != std::string::npos);

  Program underflow;
  Program::ClauseCode pop_empty;
  pop_empty.name = "broken";
  pop_empty.code = {Instr{Op::Drop, 0, 0}};
  underflow.clauses.push_back(pop_empty);
  VmResult r2 = run_program(underflow, make_witness(underflow, "broken", {}), ctx);
  CHECK_FALSE(r2.unlocked);
  CHECK(r2.reason.find("underflow") != std::string::npos);

  // wrong witness arity and bad clause index are malformed, not crashes
  ScriptContract contract = must_parse(kPayToKey);
  Program program = compile(contract, {make_public_key(keypair("k")), make_value(1)});
  CHECK_FALSE(run_program(program, {}, ctx).unlocked);
  Writer w;
  w.u64(99);
  CHECK_FALSE(run_program(program, {w.bytes()}, ctx).unlocked);
}

TEST_CASE("program serialization roundtrips") {
  ScriptContract contract = must_parse(kMultiTimelock);
  std::vector<ScriptValue> cargs = {
      make_public_key(keypair("a")), make_public_key(keypair("b")),
      make_public_key(keypair("c")), make_public_key(keypair("d")), make_value(9)};
  Program program = compile(contract, cargs);
  Program back = deserialize_program(serialize_program(program));
  CHECK(serialize_program(back) == serialize_program(program));
  CHECK(disassemble(back) == disassemble(program));
}

TEST_CASE("differential: multisig vault with timelock over random witnesses") {
  ScriptContract contract = must_parse(kMultiTimelock);
  Rng rng(4242);
  Bytes k1 = keypair("d1"), k2 = keypair("d2"), k3 = keypair("d3"),
        recovery = keypair("dr");
  std::vector<ScriptValue> cargs = {make_public_key(k1), make_public_key(k2),
                                    make_public_key(k3), make_public_key(recovery),
                                    make_value(7)};
  Program program = compile(contract, cargs);

  int unlocked_count = 0;
  for (int round = 0; round < 200; ++round) {
    SpendingContext ctx = ctx_with(95 + rng.below(12));
    ctx.tx_digest = sha256("tx" + std::to_string(rng.below(4)));
    auto random_sig = [&](const char* label_pool[4]) {
      const char* label = label_pool[rng.below(4)];
      Bytes key = keypair(label);
      if (rng.chance(0.3)) {
        Bytes junk = sim_sign(key, ctx.tx_digest);
        junk[0] ^= 0xff;
        return make_signature(junk);
      }
      return make_signature(sim_sign(key, ctx.tx_digest));
    };
    static const char* kPool[4] = {"d1", "d2", "d3", "dr"};

    std::string clause = rng.chance(0.5) ? "spend" : "recover";
    std::vector<ScriptValue> kargs;
    if (clause == "spend") {
      kargs = {random_sig(kPool), random_sig(kPool)};
    } else {
      kargs = {random_sig(kPool)};
    }
    EvalResult direct = eval_clause(contract, cargs, clause, kargs, ctx);
    VmResult vm = run_program(program, make_witness(program, clause, kargs), ctx);
    CHECK(direct.unlocked == vm.unlocked);
    if (direct.unlocked) ++unlocked_count;
  }
  CHECK(unlocked_count > 0);  // the corpus exercises both outcomes
}
