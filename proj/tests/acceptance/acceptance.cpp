// Acceptance suite: one check per criterion, each printing a PASS/FAIL line.
// Run with no arguments for all criteria or with a number for one of them.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "ledgersim/chaincode.hpp"
#include "ledgersim/contracts.hpp"
#include "ledgersim/crypto.hpp"
#include "ledgersim/experiments.hpp"
#include "ledgersim/metrics.hpp"
#include "ledgersim/script/parser.hpp"
#include "ledgersim/script/vm.hpp"
#include "ledgersim/validation.hpp"

using namespace ledgersim;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string slurp(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return "<missing " + file.string() + ">";
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ledgersim-acc-" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

// --- 1: ordering safety over >= 1000 seeded faulty runs --------------------

Outcome criterion_ordering_safety() {
  const uint64_t runs = 1000;
  std::vector<std::string> failures;
  std::mutex mu;
  std::atomic<uint64_t> next{1};
  unsigned workers = std::max(2u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        uint64_t seed = next.fetch_add(1);
        if (seed > runs) return;
        SafetyRunReport report = ordering_safety_run(seed);
        if (!report.violations.empty()) {
          std::lock_guard<std::mutex> lock(mu);
          failures.push_back("seed " + std::to_string(seed) + ": " +
                             report.violations.front());
        }
      }
    });
  }
  for (auto& t : pool) t.join();

  if (!failures.empty()) {
    return {false, std::to_string(failures.size()) + " violating runs; first: " +
                       failures.front()};
  }
  return {true, std::to_string(runs) +
                    " faulty runs, zero violations of agreement / hash chain / "
                    "no-skipping / no-creation / validity"};
}

// --- 2: double-spend yields exactly one valid + one conflict, 100 seeds ----

Outcome criterion_double_spend() {
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    RunOptions options;
    options.write_artifacts = false;
    options.tracing = false;
    RunResult run = run_scenario(double_spend_scenario(seed), {}, options);
    if (!run.ok()) {
      return {false, "seed " + std::to_string(seed) + ": " + run.violations.front()};
    }
    uint64_t conflicts = 0;
    auto it = run.metrics.committed_invalid.find("mvcc-conflict");
    if (it != run.metrics.committed_invalid.end()) conflicts = it->second;
    uint64_t other_invalid = run.metrics.committed_invalid_total() - conflicts;
    // 3 init txs + exactly one of the two racing spends
    if (conflicts != 1 || run.metrics.committed_valid != 4 || other_invalid != 0) {
      return {false, "seed " + std::to_string(seed) + ": valid=" +
                         std::to_string(run.metrics.committed_valid) +
                         " mvcc-conflicts=" + std::to_string(conflicts)};
    }
  }
  return {true, "100/100 seeds: one valid spend, one mvcc-conflict, both in the ledger"};
}

// --- 3: serializability against an independent serial oracle ---------------

Outcome criterion_serializability() {
  Rng rng(0xce7a11);
  ChannelConfig config;
  config.channel_id = "acc-serial";
  config.identities = {{"alice", "org0", sim_keygen("as:alice")},
                       {"p1", "org1", sim_keygen("as:p1")}};
  config.orderer_addresses = {"o1"};
  config.modification_policy = "id:alice";
  config.endorsement_policies["cc"] = "OR(org1)";
  IdentityRegistry registry(config.identities);

  auto make_tx = [&](uint64_t nonce, const ReadSet& rs, const WriteSet& ws) {
    TransactionEnvelope tx;
    tx.client = "alice";
    tx.nonce = nonce;
    tx.tx_id = derive_tx_id("alice", nonce);
    tx.chaincode_id = "cc";
    tx.operation = "op";
    Endorsement e;
    e.endorser = "p1";
    e.read_set = rs;
    e.write_set = ws;
    e.response = to_bytes("r");
    e.chaincode_id = "cc";
    e.tx_id = tx.tx_id;
    e.signature = registry.sign("p1", endorsement_signing_digest(e));
    tx.endorsements.push_back(std::move(e));
    tx.client_sig = registry.sign("alice", tx.tx_id);
    return tx;
  };

  struct OracleEntry {
    bool live = false;
    Bytes value;
    Version version;
  };

  for (int round = 0; round < 500; ++round) {
    StateStore state;
    std::map<Bytes, OracleEntry> oracle;  // independent model
    size_t key_space = 4 + rng.below(8);
    for (size_t k = 0; k < key_space; ++k) {
      Bytes key = to_bytes("k" + std::to_string(k));
      Bytes value = to_bytes("seed" + std::to_string(rng.below(100)));
      Version at{1, k};
      WriteSet ws;
      ws.entries.push_back(WriteEntry{key, false, value});
      state.apply_writeset(ws, at, to_bytes("seed"));
      oracle[key] = {true, value, at};
    }

    size_t tx_count = 1 + rng.below(20);
    std::vector<TransactionEnvelope> txs;
    for (size_t i = 0; i < tx_count; ++i) {
      ReadSet rs;
      WriteSet ws;
      std::set<Bytes> used;
      size_t touched = 1 + rng.below(4);
      for (size_t t = 0; t < touched; ++t) {
        Bytes key = to_bytes("k" + std::to_string(rng.below(key_space)));
        if (!used.insert(key).second) continue;
        if (rng.chance(0.85)) {
          std::optional<Version> observed;
          if (oracle.count(key)) observed = oracle.at(key).version;
          if (rng.chance(0.25)) observed = Version{0, rng.below(3)};  // stale
          rs.entries.emplace_back(key, observed);
        }
        bool is_delete = rng.chance(0.1);
        ws.entries.push_back(WriteEntry{
            key, is_delete,
            is_delete ? Bytes{} : to_bytes("w" + std::to_string(i) + "-" +
                                           std::to_string(round))});
      }
      txs.push_back(make_tx(i + 1, rs, ws));
    }

    Block block;
    block.seq = 2;
    block.prev_hash = sha256("parent");
    block.txs = txs;
    seal_block(block);

    // independent serial re-execution
    for (size_t i = 0; i < txs.size(); ++i) {
      bool ok = true;
      for (const auto& [key, observed] : txs[i].endorsements[0].read_set.entries) {
        std::optional<Version> current;
        if (oracle.count(key)) current = oracle.at(key).version;
        if (current != observed) ok = false;
      }
      if (!ok) continue;
      for (const auto& e : txs[i].endorsements[0].write_set.entries) {
        oracle[e.key] = {!e.is_delete, e.is_delete ? Bytes{} : e.value,
                         Version{2, i}};
      }
    }

    auto verdicts = validate_block(block, config, state);
    for (size_t i = 0; i < txs.size(); ++i) {
      if (!verdicts[i].valid) continue;
      state.apply_writeset(txs[i].endorsements[0].write_set, Version{2, i},
                           txs[i].tx_id);
    }

    // byte-exact comparison via an independently assembled dump
    std::string expected;
    for (const auto& [key, entry] : oracle) {
      if (!entry.live) continue;
      expected += escape_bytes(key) + "\t" + to_hex(entry.value) + "\t" +
                  std::to_string(entry.version.block_seq) + "." +
                  std::to_string(entry.version.tx_seq) + "\n";
    }
    if (state.dump_string() != expected) {
      return {false, "round " + std::to_string(round) + ": state differs from the serial oracle"};
    }
  }
  return {true, "500 random blocks: commit == serial re-execution, byte-exact"};
}

// --- 4: order-execute freeze vs budgeted progress ---------------------------

Outcome criterion_dos_contrast() {
  RunOptions options;
  options.write_artifacts = false;
  options.tracing = false;

  RunResult frozen =
      run_scenario(loop_dos_scenario(17, "order-execute", 0), {}, options);
  RunResult budgeted =
      run_scenario(loop_dos_scenario(17, "order-execute", 100000), {}, options);
  RunResult eov = run_scenario(
      loop_dos_scenario(17, "execute-order-validate", 100000), {}, options);

  if (frozen.final_height >= budgeted.final_height) {
    return {false, "unbudgeted order-execute did not freeze (height " +
                       std::to_string(frozen.final_height) + " vs " +
                       std::to_string(budgeted.final_height) + ")"};
  }
  if (budgeted.metrics.committed_invalid["execution-failed"] != 1) {
    return {false, "budgeted order-execute did not flag the loop tx"};
  }
  if (eov.final_height <= frozen.final_height) {
    return {false, "execute-order-validate did not keep progressing"};
  }
  if (eov.metrics.endorsement_failures != 1) {
    return {false, "endorsers did not contain the loop tx"};
  }
  return {true, "height froze at " + std::to_string(frozen.final_height) +
                    " without a budget; budgeted order-execute reached " +
                    std::to_string(budgeted.final_height) +
                    " and execute-order-validate " +
                    std::to_string(eov.final_height)};
}

// --- 5: pow difficulty convergence ------------------------------------------

Outcome criterion_pow_convergence() {
  PowParams params{6, 10, 20, 4.0};
  auto report = pow_convergence_run(1009, params, 100, 10);
  double mean = report.mean_interval_after_warmup;
  if (mean < 8.0 || mean > 12.0) {
    return {false, "mean interval " + std::to_string(mean) + " outside [8, 12]"};
  }
  if (report.final_difficulty > 16) {
    return {false, "difficulty escaped the desk-scale bound"};
  }
  char buffer[128];
  std::snprintf(buffer, sizeof(buffer),
                "mean interval %.2f ticks after 3 retarget windows (difficulty %u)",
                mean, report.final_difficulty);
  return {true, buffer};
}

// --- 6: pos lottery fidelity + nothing-at-stake ------------------------------

Outcome criterion_pos_lottery() {
  StakeLedger stake;
  stake.set("A", ValidatorStake{75, 0, 10, false});
  stake.set("B", ValidatorStake{25, 0, 10, false});
  Rng rng(31337);
  int a = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    if (*stake.select_validator(PosWeightMode::RelativeValue, 1, 1, rng) == "A") {
      ++a;
    }
  }
  double freq = static_cast<double>(a) / draws;
  if (std::abs(freq - 0.75) > 0.02) {
    return {false, "selection frequency " + std::to_string(freq) +
                       " deviates more than 2% from 0.75"};
  }

  StakeLedger age;
  age.set("v", ValidatorStake{100, 0, 10, false});
  if (age.weight_of("v", PosWeightMode::CoinAge, 30, 1) != 3000) {
    return {false, "coin-age weight 100 x 30 != 3000"};
  }

  double mean_on = 0, mean_off = 0;
  for (uint64_t seed = 1; seed <= 50; ++seed) {
    mean_on += static_cast<double>(nothing_at_stake_run(seed, true));
    mean_off += static_cast<double>(nothing_at_stake_run(seed, false));
  }
  mean_on /= 50;
  mean_off /= 50;
  if (!(mean_off > mean_on)) {
    return {false, "fork persistence with slashing off (" + std::to_string(mean_off) +
                       ") not greater than with slashing on (" +
                       std::to_string(mean_on) + ")"};
  }
  char buffer[160];
  std::snprintf(buffer, sizeof(buffer),
                "frequency %.4f (target 0.75 +/- 0.02); coin-age 3000 exact; "
                "persistence %.1f (slashing off) > %.1f (on) over 50 paired seeds",
                freq, mean_off, mean_on);
  return {true, buffer};
}

// --- 7: poi scoring exactness -------------------------------------------------

Outcome criterion_poi_scoring() {
  ImportanceParams params;
  params.min_vested_coins = 100;
  params.min_vest_days = 10;
  params.min_tx_size = 10;
  params.window_days = 30;

  // wash-trade pair contributes zero to the partner factor
  PoiAccount washer{"a", {{500, 0}}};
  std::vector<PoiTransfer> wash = {{"a", "b", 50, 12}, {"b", "a", 50, 13}};
  auto washed = importance_score(washer, params, wash, 20);
  if (washed.net_positive_partners != 0) {
    return {false, "wash trading contributed to the partner factor"};
  }

  // sub-minimum vested accounts are ineligible with score exactly zero
  PoiAccount poor{"p", {{99, 0}}};
  auto poor_score = importance_score(poor, params, {}, 20);
  if (poor_score.eligible || poor_score.score != 0.0) {
    return {false, "sub-minimum-vested account was not excluded"};
  }
  // coins must also have been held for the vesting period
  PoiAccount fresh{"f", {{1000, 15}}};
  if (importance_score(fresh, params, {}, 20).eligible) {
    return {false, "unvested coins counted toward eligibility"};
  }

  // sub-minimum-size transactions are excluded exactly
  PoiAccount active{"a", {{500, 0}}};
  std::vector<PoiTransfer> sized = {
      {"a", "b", 9, 12}, {"a", "c", 10, 13}, {"a", "d", 15, 14}};
  auto sized_score = importance_score(active, params, sized, 20);
  if (sized_score.qualifying_tx_count != 2 || sized_score.qualifying_volume != 25) {
    return {false, "minimum-size filter wrong: counted " +
                       std::to_string(sized_score.qualifying_tx_count) + " txs"};
  }
  // the size minimum gates the volume factor only; all three counterparties
  // still have positive net outflow and count as partners
  if (sized_score.net_positive_partners != 3) {
    return {false, "partner factor wrong under the size filter"};
  }
  double expected = 0.5 * (500 - 100) + 0.25 * 3 + 0.25 * 25;
  if (sized_score.score != expected) {
    return {false, "score formula mismatch"};
  }
  return {true, "wash trades net to zero, vesting and size minima enforced exactly"};
}

// --- 8: script vm differential fuzz + golden cases ---------------------------

Outcome criterion_script_vm() {
  using namespace script;
  auto parse = [](const char* source) {
    auto parsed = parse_and_typecheck(source);
    return std::get<ScriptContract>(std::move(parsed));
  };

  // golden: number bound
  auto bound = parse_and_typecheck(
      "contract C(funds: Value) { clause go(n: Number) { verify n == 2147483648 "
      "unlock funds } }");
  if (!std::holds_alternative<std::vector<Diagnostic>>(bound)) {
    return {false, "number literal 2147483648 was not rejected"};
  }

  SpendingContext base = SpendingContext::with_sim_verifier();
  base.tx_digest = sha256("acceptance-tx");
  auto sig_of = [&](const std::string& label, const SpendingContext& ctx) {
    return make_signature(sim_sign(sim_keygen(label), ctx.tx_digest));
  };

  // golden: order-sensitive multisig
  std::vector<ScriptValue> keys = {make_public_key(sim_keygen("k1")),
                                   make_public_key(sim_keygen("k2")),
                                   make_public_key(sim_keygen("k3"))};
  ScriptValue s1 = sig_of("k1", base), s3 = sig_of("k3", base);
  if (!eval_check_multisig(keys, {s1, s3}, base).boolean) {
    return {false, "in-order multisig rejected"};
  }
  if (eval_check_multisig(keys, {s3, s1}, base).boolean) {
    return {false, "out-of-order multisig accepted"};
  }

  // golden: timelock boundary flips exactly at the boundary, height and time
  ScriptContract lock = parse(
      "contract L(funds: Value) { clause h() { verify after(100) unlock funds } "
      "clause t() { verify after(600000000) unlock funds } "
      "clause o() { verify older(24) unlock funds } }");
  std::vector<ScriptValue> lock_args = {make_value(1)};
  Program lock_program = compile(lock, lock_args);
  auto outcome_at = [&](const char* clause, uint64_t height, uint64_t time,
                        uint64_t age) {
    SpendingContext ctx = base;
    ctx.current_height = height;
    ctx.current_time = time;
    ctx.utxo_age_blocks = age;
    EvalResult direct = eval_clause(lock, lock_args, clause, {}, ctx);
    VmResult vm = run_program(lock_program, make_witness(lock_program, clause, {}),
                              ctx);
    if (direct.unlocked != vm.unlocked) return -1;  // divergence
    return direct.unlocked ? 1 : 0;
  };
  if (outcome_at("h", 100, 0, 0) != 0) return {false, "after(100) open at height 100"};
  if (outcome_at("h", 101, 0, 0) != 1) return {false, "after(100) shut at height 101"};
  if (outcome_at("t", 0, 600000000, 0) != 0) return {false, "after(t) open at the boundary time"};
  if (outcome_at("t", 0, 600000001, 0) != 1) return {false, "after(t) shut past the boundary"};
  if (outcome_at("o", 0, 0, 23) != 0) return {false, "older(24) open at age 23"};
  if (outcome_at("o", 0, 0, 24) != 1) return {false, "older(24) shut at age 24"};

  // differential fuzz across the builtin corpus
  ScriptContract vault = parse(
      "contract Vault(k1: PublicKey, k2: PublicKey, k3: PublicKey, "
      "escape: PublicKey, h: Sha256(Bytes), funds: Value) {"
      "  clause spend(s1: Signature, s2: Signature) {"
      "    verify checkMultiSig([k1, k2, k3], [s1, s2])"
      "    unlock funds }"
      "  clause recover(s: Signature, preimage: Bytes) {"
      "    verify after(1000)"
      "    verify checkSig(escape, s)"
      "    verify sha256(preimage) == h"
      "    unlock funds }"
      "  clause timeout(s: Signature) {"
      "    verify older(144)"
      "    verify checkSig(k1, s)"
      "    unlock funds }"
      "  clause measure(b: Bytes) {"
      "    verify size(b) == 4"
      "    verify b != 0xffffffff"
      "    unlock funds } }");

  Bytes preimage = to_bytes("the preimage");
  ScriptValue digest;
  digest.type = hash_type(TypeKind::Sha256, simple_type(TypeKind::Bytes));
  digest.bytes = sha256(preimage);
  std::vector<ScriptValue> vault_args = {
      make_public_key(sim_keygen("k1")), make_public_key(sim_keygen("k2")),
      make_public_key(sim_keygen("k3")), make_public_key(sim_keygen("escape")),
      digest, make_value(21)};
  Program vault_program = compile(vault, vault_args);

  Rng rng(0xfa57);
  static const char* kSigners[5] = {"k1", "k2", "k3", "escape", "nobody"};
  uint64_t cases = 0, unlocked = 0;
  for (int round = 0; round < 10000; ++round) {
    SpendingContext ctx = base;
    ctx.current_height = 995 + rng.below(12);
    ctx.current_time = 0;
    ctx.utxo_age_blocks = 140 + rng.below(10);
    ctx.tx_digest = sha256("fuzz-tx-" + std::to_string(rng.below(3)));

    auto fuzz_sig = [&]() {
      Bytes key = sim_keygen(kSigners[rng.below(5)]);
      Bytes sig = sim_sign(key, ctx.tx_digest);
      if (rng.chance(0.25)) sig[rng.below(sig.size())] ^= 0xff;
      return make_signature(sig);
    };

    std::string clause;
    std::vector<ScriptValue> kargs;
    switch (rng.below(4)) {
      case 0:
        clause = "spend";
        kargs = {fuzz_sig(), fuzz_sig()};
        break;
      case 1: {
        clause = "recover";
        Bytes attempt = rng.chance(0.5) ? preimage : to_bytes("nope");
        kargs = {fuzz_sig(), make_bytes(attempt)};
        break;
      }
      case 2:
        clause = "timeout";
        kargs = {fuzz_sig()};
        break;
      default: {
        clause = "measure";
        Bytes b(rng.below(7), 0);
        for (auto& c : b) c = static_cast<uint8_t>(rng.below(256));
        kargs = {make_bytes(b)};
        break;
      }
    }
    EvalResult direct = eval_clause(vault, vault_args, clause, kargs, ctx);
    VmResult vm = run_program(vault_program,
                              make_witness(vault_program, clause, kargs), ctx);
    if (direct.unlocked != vm.unlocked) {
      return {false, "divergence at fuzz case " + std::to_string(round) +
                         " clause " + clause};
    }
    ++cases;
    if (direct.unlocked) ++unlocked;
  }
  if (unlocked == 0 || unlocked == cases) {
    return {false, "fuzz corpus degenerate (unlocked " + std::to_string(unlocked) +
                       "/" + std::to_string(cases) + ")"};
  }
  return {true, std::to_string(cases) + " differential cases with zero divergence (" +
                    std::to_string(unlocked) + " unlocked); golden and boundary "
                    "checks hold"};
}

// --- 9: token standard differential ------------------------------------------

Outcome criterion_token_differential() {
  ChannelConfig config;
  config.channel_id = "acc-token";
  config.identities = {{"alice", "org1", sim_keygen("at:alice")},
                       {"bob", "org1", sim_keygen("at:bob")}};
  config.orderer_addresses = {"o1"};
  config.modification_policy = "id:alice";
  config.endorsement_policies = {{"t20", "OR(org1)"}, {"t223", "OR(org1)"}};
  ChaincodeRegistry registry;
  registry.install("t20", make_chaincode("token-erc20", {}));
  registry.install("t223", make_chaincode("token-erc223", {}));
  StateStore state;
  uint64_t height = 0;
  std::map<std::string, uint64_t> nonces;

  auto call = [&](const std::string& caller, const std::string& cc,
                  const std::string& op, std::vector<std::string> args) {
    std::vector<Bytes> raw;
    for (const auto& a : args) raw.push_back(to_bytes(a));
    Proposal p = make_proposal(caller, cc, op, raw, ++nonces[caller], height);
    auto outcome = simulate_proposal(state, registry, config, p, StepBudget{100000});
    if (sim_ok(outcome)) {
      state.apply_writeset(std::get<SimulationResult>(outcome).write_set,
                           Version{++height, 0}, p.tx_id);
    }
    return outcome;
  };
  auto value_of = [&](const std::string& cc, const std::string& op,
                      std::vector<std::string> args) {
    auto outcome = call("alice", cc, op, std::move(args));
    return std::stoull(
        to_string(ByteSpan(std::get<SimulationResult>(outcome).response)));
  };

  for (const char* cc : {"t20", "t223"}) {
    call("alice", cc, "init", {"alice", "100"});
    call("alice", cc, "register_account", {"vault", "contract", "none"});
  }

  // identical sequence: erc20 strands the tokens, erc223 rejects
  auto r20 = call("alice", "t20", "transfer", {"vault", "30"});
  auto r223 = call("alice", "t223", "transfer", {"vault", "30"});
  if (!sim_ok(r20) || sim_ok(r223)) {
    return {false, "hazard divergence not reproduced"};
  }
  if (value_of("t20", "balanceOf", {"alice"}) != 70 ||
      value_of("t20", "balanceOf", {"vault"}) != 30 ||
      value_of("t20", "totalSupply", {}) != 100 ||
      value_of("t20", "lostLedger", {}) == 0) {
    return {false, "erc20 lost-token accounting wrong"};
  }
  if (value_of("t223", "balanceOf", {"alice"}) != 100 ||
      value_of("t223", "lostLedger", {}) != 0) {
    return {false, "erc223 did not revert the transfer"};
  }

  // allowance ceiling exact
  call("alice", "t20", "approve", {"bob", "50"});
  auto over = call("bob", "t20", "transferFrom", {"alice", "bob", "51"});
  auto exact = call("bob", "t20", "transferFrom", {"alice", "bob", "50"});
  auto after_limit = call("bob", "t20", "transferFrom", {"alice", "bob", "1"});
  if (sim_ok(over) || !sim_ok(exact) || sim_ok(after_limit)) {
    return {false, "allowance ceiling not enforced exactly"};
  }
  return {true, "erc20 strands 30 lost tokens with supply conserved; erc223 "
                "rejects the identical call; allowance ceiling exact"};
}

// --- 10: rental lifecycle vs the hand-executed oracle -------------------------

Outcome criterion_rental_lifecycle() {
  ChannelConfig config;
  config.channel_id = "acc-rental";
  config.identities = {{"landlord", "org1", sim_keygen("ar:landlord")},
                       {"tenant", "org1", sim_keygen("ar:tenant")},
                       {"oracle9", "org1", sim_keygen("ar:oracle9")},
                       {"mallet", "org1", sim_keygen("ar:mallet")}};
  config.orderer_addresses = {"o1"};
  config.modification_policy = "id:landlord";
  config.endorsement_policies = {{"token", "OR(org1)"}, {"rental", "OR(org1)"}};
  config.chaincode_authorizations["rental"] = {"token"};

  auto fresh_world = [&]() {
    struct W {
      ChaincodeRegistry registry;
      StateStore state;
      uint64_t height = 0;
      std::map<std::string, uint64_t> nonces;
    };
    W w;
    w.registry.install("token", make_chaincode("token-erc20", {}));
    w.registry.install("rental", make_chaincode("rental", {{"token", "token"}}));
    return w;
  };

  auto run_trace = [&](auto& w, const std::vector<std::vector<std::string>>& script) {
    // trace rows: "caller op -> ok:response" or "caller op -> err:reason"
    std::vector<std::string> trace;
    for (const auto& step : script) {
      std::vector<Bytes> args;
      for (size_t i = 2; i < step.size(); ++i) args.push_back(to_bytes(step[i]));
      Proposal p = make_proposal(step[0], "rental", step[1], args,
                                 ++w.nonces[step[0]], w.height);
      if (step[1] == "fund") {  // direct token transfer helper
        p = make_proposal(step[0], "token", "transfer", args,
                          w.nonces[step[0]], w.height);
      }
      if (step[1] == "init-token") {
        p = make_proposal(step[0], "token", "init", args, w.nonces[step[0]],
                          w.height);
      }
      auto outcome = simulate_proposal(w.state, w.registry, config, p,
                                       StepBudget{100000});
      if (sim_ok(outcome)) {
        const auto& result = std::get<SimulationResult>(outcome);
        w.state.apply_writeset(result.write_set, Version{++w.height, 0}, p.tx_id);
        trace.push_back(step[0] + " " + step[1] + " -> ok:" +
                        to_string(ByteSpan(result.response)));
      } else {
        trace.push_back(step[0] + " " + step[1] + " -> err:" +
                        std::get<SimulationFailure>(outcome).reason);
      }
    }
    return trace;
  };

  auto balance = [&](auto& w, const std::string& who) {
    Proposal p = make_proposal("landlord", "token", "balanceOf",
                               {to_bytes(who)}, ++w.nonces["landlord"], w.height);
    auto outcome = simulate_proposal(w.state, w.registry, config, p,
                                     StepBudget{100000});
    return std::stoull(
        to_string(ByteSpan(std::get<SimulationResult>(outcome).response)));
  };

  // ---- happy path: lease, 12 rents, clean termination -----------------------
  auto w = fresh_world();
  std::vector<std::vector<std::string>> script = {
      {"landlord", "init-token", "landlord", "100", "tenant", "100"},
      {"landlord", "init", "landlord", "12 Main St", "2", "12", "1", "oracle9", "1"},
      {"tenant", "payRent", "2"},        // guard: not active yet
      {"landlord", "beginLease", "1"},   // guard: landlord can't be the tenant
      {"tenant", "beginLease", "2"},     // guard: wrong deposit
      {"tenant", "beginLease", "1"},
      {"mallet", "payRent", "2"},        // guard: only the tenant
  };
  for (int month = 1; month <= 12; ++month) script.push_back({"tenant", "payRent", "2"});
  script.push_back({"tenant", "terminateContract", "1"});  // guard: only landlord
  script.push_back({"landlord", "terminateContract", "1"});
  script.push_back({"landlord", "getRentsPaid"});
  script.push_back({"tenant", "payRent", "2"});  // guard: frozen after termination

  std::vector<std::string> trace = run_trace(w, script);

  // hand-executed oracle of the same sequence
  std::vector<std::string> expected = {
      "landlord init-token -> ok:ok",
      "landlord init -> ok:ok",
      // the tenant slot is still unset, so the only-tenant guard fires first,
      // exactly like the modifier ordering in the contract
      "tenant payRent -> err:guard: only tenant",
      "landlord beginLease -> err:guard: landlord cannot lease own house",
      "tenant beginLease -> err:guard: value must equal securityDeposit",
      "tenant beginLease -> ok:contractActive",
      "mallet payRent -> err:guard: only tenant",
  };
  for (int month = 1; month <= 12; ++month) {
    expected.push_back("tenant payRent -> ok:rentPaid:" + std::to_string(month));
  }
  expected.push_back("tenant terminateContract -> err:guard: only landlord");
  expected.push_back("landlord terminateContract -> ok:contractTerminated+depositRefunded");
  expected.push_back(
      "landlord getRentsPaid -> ok:1:2;2:2;3:2;4:2;5:2;6:2;7:2;8:2;9:2;10:2;11:2;12:2");
  expected.push_back("tenant payRent -> err:guard: status is not Active");

  if (trace != expected) {
    std::string diff;
    for (size_t i = 0; i < std::max(trace.size(), expected.size()); ++i) {
      std::string got = i < trace.size() ? trace[i] : "<none>";
      std::string want = i < expected.size() ? expected[i] : "<none>";
      if (got != want) {
        diff = "step " + std::to_string(i) + ": got '" + got + "' want '" + want + "'";
        break;
      }
    }
    return {false, "happy-path trace mismatch: " + diff};
  }
  // money: tenant paid 1 deposit (refunded) + 24 rent; landlord collected 24
  if (balance(w, "tenant") != 76 || balance(w, "landlord") != 124) {
    return {false, "happy-path balances wrong: tenant " +
                       std::to_string(balance(w, "tenant")) + ", landlord " +
                       std::to_string(balance(w, "landlord"))};
  }

  // ---- breach path: deposit withheld ----------------------------------------
  auto w2 = fresh_world();
  std::vector<std::vector<std::string>> breach_script = {
      {"landlord", "init-token", "landlord", "100", "tenant", "100"},
      {"landlord", "init", "landlord", "12 Main St", "2", "12", "1", "oracle9", "1"},
      {"tenant", "beginLease", "1"},
      {"landlord", "fund", "rental", "3"},   // cover the oracle query fee
      {"tenant", "checkTerms"},
      {"mallet", "oracleCallback", "true"},  // guard: only the oracle
      {"oracle9", "oracleCallback", "true"},
      {"landlord", "terminateContract", "1"},  // guard: no refund after breach
      {"landlord", "terminateContract"},
  };
  std::vector<std::string> breach_trace = run_trace(w2, breach_script);
  std::vector<std::string> breach_expected = {
      "landlord init-token -> ok:ok",
      "landlord init -> ok:ok",
      "tenant beginLease -> ok:contractActive",
      "landlord fund -> ok:ok",
      "tenant checkTerms -> ok:query-sent:1",
      "mallet oracleCallback -> err:guard: only oracle",
      "oracle9 oracleCallback -> ok:termBreached",
      "landlord terminateContract -> err:guard: no refund after breach",
      "landlord terminateContract -> ok:contractTerminated",
  };
  if (breach_trace != breach_expected) {
    for (size_t i = 0; i < breach_trace.size(); ++i) {
      if (i >= breach_expected.size() || breach_trace[i] != breach_expected[i]) {
        return {false, "breach trace step " + std::to_string(i) + ": got '" +
                           breach_trace[i] + "'"};
      }
    }
    return {false, "breach trace length mismatch"};
  }
  // deposit withheld: tenant paid deposit 1, got nothing back
  if (balance(w2, "tenant") != 99) {
    return {false, "breach path refunded the deposit"};
  }
  return {true, "12-month happy path refunds the deposit once; breach path "
                "withholds it; every guard violation rejected"};
}

// --- 11: end-to-end determinism ------------------------------------------------

Outcome criterion_determinism() {
  // permissioned pipeline
  auto dir_a = scratch_dir("det-a");
  auto dir_b = scratch_dir("det-b");
  RunResult a = run_scenario(double_spend_scenario(99), dir_a);
  RunResult b = run_scenario(double_spend_scenario(99), dir_b);
  if (a.ledger_hash != b.ledger_hash || a.state_hash != b.state_hash ||
      a.trace_hash != b.trace_hash) {
    return {false, "permissioned run hashes differ between identical runs"};
  }
  for (const char* file : {"blocks.dat", "index.dat", "state.dump", "verdicts.csv",
                           "metrics.csv", "trace.log"}) {
    if (slurp(dir_a / file) != slurp(dir_b / file)) {
      return {false, std::string("artifact differs: ") + file};
    }
  }

  // lottery pipeline
  ScenarioConfig pow;
  pow.name = "det-pow";
  pow.seed = 4242;
  pow.mode = "lottery";
  pow.duration = 240;
  pow.lottery.protocol = "pow";
  pow.lottery.producers = {"m1", "m2"};
  pow.lottery.pow = PowParams{9, 10, 40, 4.0};
  pow.lottery.attempts_per_tick = 50;
  RunOptions options;
  options.write_artifacts = false;
  RunResult la = run_scenario(pow, {}, options);
  RunResult lb = run_scenario(pow, {}, options);
  if (la.ledger_hash != lb.ledger_hash || la.trace_hash != lb.trace_hash) {
    return {false, "lottery run hashes differ between identical runs"};
  }
  return {true, "identical seeds give identical ledgers, states, traces and "
                "metric files in both modes"};
}

struct Criterion {
  int number;
  const char* name;
  std::function<Outcome()> run;
};

const Criterion kCriteria[] = {
    {1, "ordering safety suite", criterion_ordering_safety},
    {2, "mvcc double-spend", criterion_double_spend},
    {3, "serializability oracle", criterion_serializability},
    {4, "order-execute dos contrast", criterion_dos_contrast},
    {5, "pow convergence", criterion_pow_convergence},
    {6, "pos lottery fidelity", criterion_pos_lottery},
    {7, "poi scoring", criterion_poi_scoring},
    {8, "script vm", criterion_script_vm},
    {9, "token differential", criterion_token_differential},
    {10, "rental lifecycle", criterion_rental_lifecycle},
    {11, "end-to-end determinism", criterion_determinism},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);

  int failures = 0;
  for (const Criterion& criterion : kCriteria) {
    if (only != 0 && criterion.number != only) continue;
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion-%d (%s): %s\n", outcome.pass ? "PASS" : "FAIL",
                criterion.number, criterion.name, outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
