#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ledgersim/chaincode.hpp"
#include "ledgersim/contracts.hpp"
#include "ledgersim/crypto.hpp"
#include "ledgersim/rng.hpp"

using namespace ledgersim;

namespace {

// Single-peer harness: simulate against committed state, commit on success.
struct World {
  ChannelConfig config;
  ChaincodeRegistry registry;
  StateStore state;
  uint64_t height = 0;
  std::map<std::string, uint64_t> nonces;

  World() {
    config.channel_id = "ch";
    for (const char* who : {"alice", "bob", "carol", "landlord", "tenant",
                            "oracle9", "mallet", "vault", "widget"}) {
      config.identities.push_back({who, "org1", sim_keygen(who)});
    }
    config.orderer_addresses = {"o1"};
    config.modification_policy = "id:alice";
    for (const char* cc : {"t20", "t223", "t777", "registry", "rental"}) {
      config.endorsement_policies[cc] = "OR(org1)";
    }
    config.chaincode_authorizations["rental"] = {"t20"};
    config.chaincode_authorizations["t777"] = {"registry"};
    registry.install("t20", make_chaincode("token-erc20", {}));
    registry.install("t223", make_chaincode("token-erc223", {}));
    registry.install("t777",
                     make_chaincode("token-erc777", {{"registry", "registry"}}));
    registry.install("registry", make_chaincode("registry", {}));
    registry.install("rental", make_chaincode("rental", {{"token", "t20"}}));
  }

  SimulationOutcome call(const std::string& caller, const std::string& ccid,
                         const std::string& op, std::vector<std::string> args) {
    std::vector<Bytes> raw;
    for (const auto& a : args) raw.push_back(to_bytes(a));
    Proposal p = make_proposal(caller, ccid, op, raw, ++nonces[caller], height);
    auto outcome = simulate_proposal(state, registry, config, p, StepBudget{100000});
    if (sim_ok(outcome)) {
      state.apply_writeset(std::get<SimulationResult>(outcome).write_set,
                           Version{++height, 0}, p.tx_id);
    }
    return outcome;
  }

  std::string must(const std::string& caller, const std::string& ccid,
                   const std::string& op, std::vector<std::string> args) {
    auto outcome = call(caller, ccid, op, std::move(args));
    if (!sim_ok(outcome)) {
      FAIL(op, " failed: ", std::get<SimulationFailure>(outcome).reason);
    }
    const auto& r = std::get<SimulationResult>(outcome);
    return to_string(ByteSpan(r.response));
  }

  std::string fails(const std::string& caller, const std::string& ccid,
                    const std::string& op, std::vector<std::string> args) {
    auto outcome = call(caller, ccid, op, std::move(args));
    REQUIRE_FALSE(sim_ok(outcome));
    return std::get<SimulationFailure>(outcome).reason;
  }

  uint64_t balance(const std::string& ccid, const std::string& who) {
    return std::stoull(must("alice", ccid, "balanceOf", {who}));
  }
  uint64_t lost(const std::string& ccid) {
    return std::stoull(must("alice", ccid, "lostLedger", {}));
  }
  uint64_t supply(const std::string& ccid) {
    return std::stoull(must("alice", ccid, "totalSupply", {}));
  }
};

}  // namespace

TEST_CASE("erc20 transfer to a fallback-less contract strands the tokens") {
  World w;
  w.must("alice", "t20", "init", {"alice", "100"});
  w.must("alice", "t20", "register_account", {"vault", "contract", "none"});

  CHECK(w.must("alice", "t20", "transfer", {"vault", "30"}) == "ok-lost");
  CHECK(w.balance("t20", "alice") == 70);
  CHECK(w.balance("t20", "vault") == 30);
  CHECK(w.lost("t20") == 30);
  CHECK(w.supply("t20") == 100);  // conserved, just unreachable
}

TEST_CASE("erc223 rejects the identical transfer and reverts") {
  World w;
  w.must("alice", "t223", "init", {"alice", "100"});
  w.must("alice", "t223", "register_account", {"vault", "contract", "none"});

  std::string reason = w.fails("alice", "t223", "transfer", {"vault", "30"});
  CHECK(reason.find("fallback") != std::string::npos);
  CHECK(w.balance("t223", "alice") == 100);
  CHECK(w.balance("t223", "vault") == 0);
  CHECK(w.lost("t223") == 0);
}

TEST_CASE("erc223 transfer to a contract with a fallback succeeds") {
  World w;
  w.must("alice", "t223", "init", {"alice", "100"});
  w.must("alice", "t223", "register_account", {"widget", "contract", "fallback"});
  CHECK(w.must("alice", "t223", "transfer", {"widget", "25"}) == "ok");
  CHECK(w.balance("t223", "widget") == 25);
}

TEST_CASE("allowance ceiling is enforced exactly") {
  World w;
  w.must("alice", "t20", "init", {"alice", "100"});
  w.must("alice", "t20", "approve", {"bob", "50"});
  CHECK(w.must("alice", "t20", "allowance", {"alice", "bob"}) == "50");

  CHECK(w.fails("bob", "t20", "transferFrom", {"alice", "carol", "60"}) ==
        "allowance exceeded");
  w.must("bob", "t20", "transferFrom", {"alice", "carol", "50"});
  CHECK(w.balance("t20", "carol") == 50);
  CHECK(w.must("alice", "t20", "allowance", {"alice", "bob"}) == "0");
  CHECK(w.fails("bob", "t20", "transferFrom", {"alice", "carol", "1"}) ==
        "allowance exceeded");
}

TEST_CASE("insufficient balance rejects the transfer") {
  World w;
  w.must("alice", "t20", "init", {"alice", "10"});
  CHECK(w.fails("alice", "t20", "transfer", {"bob", "11"}) == "insufficient balance");
}

TEST_CASE("registry stores one implementer per (address, interface)") {
  World w;
  CHECK(w.must("alice", "registry", "lookup", {"carol", "tokensReceived"}) == "");
  w.must("carol", "registry", "register", {"carol", "tokensReceived", "carol"});
  CHECK(w.must("alice", "registry", "lookup", {"carol", "tokensReceived"}) == "carol");

  // upsert by the owner
  w.must("carol", "registry", "register", {"carol", "tokensReceived", "widget"});
  CHECK(w.must("alice", "registry", "lookup", {"carol", "tokensReceived"}) == "widget");

  // only the owner or its manager may register
  CHECK(w.fails("mallet", "registry", "register",
                {"carol", "tokensReceived", "mallet"})
            .find("owner") != std::string::npos);
  w.must("carol", "registry", "set_manager", {"carol", "bob"});
  w.must("bob", "registry", "register", {"carol", "tokensReceived", "carol"});
}

TEST_CASE("erc777 send consults the registry; strict mode rejects bare receivers") {
  World w;
  w.must("alice", "t777", "init", {"alice", "100"});

  // strict mode on (default): no tokensReceived implementer -> reject
  CHECK(w.fails("alice", "t777", "send", {"bob", "10"})
            .find("tokensReceived") != std::string::npos);
  CHECK(w.balance("t777", "alice") == 100);

  w.must("bob", "registry", "register", {"bob", "tokensReceived", "bob"});
  std::string response = w.must("alice", "t777", "send", {"bob", "10"});
  CHECK(response == "ok-hook:bob");
  CHECK(w.balance("t777", "bob") == 10);

  // operator path
  w.must("alice", "t777", "authorizeOperator", {"carol"});
  w.must("carol", "registry", "register", {"carol", "tokensReceived", "carol"});
  w.must("carol", "t777", "send", {"alice", "carol", "5"});
  CHECK(w.balance("t777", "carol") == 5);
  CHECK(w.fails("mallet", "t777", "send", {"alice", "carol", "5"})
            .find("operator") != std::string::npos);
}

TEST_CASE("erc777 with strict mode off allows hook-less receivers") {
  World w;
  w.registry.install("lax", make_chaincode("token-erc777",
                                           {{"registry", "registry"},
                                            {"strict_receive", "false"}}));
  w.config.endorsement_policies["lax"] = "OR(org1)";
  w.config.chaincode_authorizations["lax"] = {"registry"};
  w.must("alice", "lax", "init", {"alice", "100"});
  w.must("alice", "lax", "send", {"bob", "10"});
  CHECK(w.balance("lax", "bob") == 10);
}

TEST_CASE("supply is conserved across random method interleavings") {
  World w;
  w.must("alice", "t20", "init", {"alice", "400", "bob", "300", "carol", "300"});
  w.must("alice", "t20", "register_account", {"vault", "contract", "none"});
  w.must("alice", "t20", "register_account", {"widget", "contract", "fallback"});

  Rng rng(2024);
  std::vector<std::string> holders = {"alice", "bob", "carol", "vault", "widget"};
  for (int step = 0; step < 400; ++step) {
    std::string from = holders[rng.below(3)];  // EOAs initiate
    std::string to = holders[rng.below(holders.size())];
    std::string amount = std::to_string(rng.below(40));
    switch (rng.below(3)) {
      case 0:
        w.call(from, "t20", "transfer", {to, amount});
        break;
      case 1:
        w.call(from, "t20", "approve", {to, amount});
        break;
      default: {
        std::string owner = holders[rng.below(3)];
        w.call(from, "t20", "transferFrom", {owner, to, amount});
        break;
      }
    }
    if (step % 50 == 0) {
      uint64_t total = 0;
      for (const auto& h : holders) total += w.balance("t20", h);
      CHECK(total == 1000);
      CHECK(w.supply("t20") == 1000);
    }
  }
  uint64_t total = 0;
  for (const auto& h : holders) total += w.balance("t20", h);
  CHECK(total == 1000);
  // whatever reached the fallback-less contract is exactly the lost ledger
  CHECK(w.lost("t20") >= w.balance("t20", "vault"));
}

TEST_CASE("erc20 vs erc223 differ only on transfers to fallback-less contracts") {
  World w;
  // balances large enough that the hazard-path drift never causes an
  // unrelated insufficient-balance divergence
  w.must("alice", "t20", "init", {"alice", "100000", "bob", "100000"});
  w.must("alice", "t223", "init", {"alice", "100000", "bob", "100000"});
  for (const char* cc : {"t20", "t223"}) {
    w.must("alice", cc, "register_account", {"vault", "contract", "none"});
    w.must("alice", cc, "register_account", {"widget", "contract", "fallback"});
  }

  Rng rng(77);
  std::vector<std::string> receivers = {"carol", "vault", "widget"};
  int divergences = 0, hazard_calls = 0;
  for (int step = 0; step < 300; ++step) {
    std::string from = rng.chance(0.5) ? "alice" : "bob";
    std::string to = receivers[rng.below(receivers.size())];
    std::string amount = std::to_string(rng.below(10));

    auto r20 = w.call(from, "t20", "transfer", {to, amount});
    auto r223 = w.call(from, "t223", "transfer", {to, amount});
    bool hazard = to == "vault";
    if (hazard) ++hazard_calls;
    if (sim_ok(r20) != sim_ok(r223)) {
      ++divergences;
      CHECK(hazard);  // divergence only on the hazard case
      CHECK(sim_ok(r20));
      CHECK_FALSE(sim_ok(r223));
    }
  }
  CHECK(divergences == hazard_calls);  // every hazard call, nothing else
  CHECK(hazard_calls > 0);
  // pure receivers saw identical credits on both standards
  CHECK(w.balance("t20", "carol") == w.balance("t223", "carol"));
  CHECK(w.balance("t20", "widget") == w.balance("t223", "widget"));
}

namespace {

World rental_world() {
  World w;
  w.must("landlord", "t20", "init",
         {"landlord", "100", "tenant", "100", "mallet", "50"});
  // init(landlord, house, rent, termLength, securityDeposit, oracle, oracleFee)
  w.must("landlord", "rental", "init",
         {"landlord", "12 Main St", "2", "12", "1", "oracle9", "1"});
  return w;
}

}  // namespace

TEST_CASE("rental: beginLease guards mirror the contract's require clauses") {
  World w = rental_world();
  CHECK(w.must("alice", "rental", "getStatus", {}) == "Created");

  // landlord cannot lease the house to itself
  CHECK(w.fails("landlord", "rental", "beginLease", {"1"}).find("landlord") !=
        std::string::npos);
  // wrong deposit
  CHECK(w.fails("tenant", "rental", "beginLease", {"2"}).find("securityDeposit") !=
        std::string::npos);

  CHECK(w.must("tenant", "rental", "beginLease", {"1"}) == "contractActive");
  CHECK(w.must("alice", "rental", "getStatus", {}) == "Active");
  CHECK(w.must("alice", "rental", "getTenant", {}) == "tenant");
  CHECK(w.balance("t20", "landlord") == 101);  // deposit forwarded
  CHECK(w.balance("t20", "tenant") == 99);

  // second lease attempt: status is no longer Created
  CHECK(w.fails("mallet", "rental", "beginLease", {"1"}).find("Created") !=
        std::string::npos);
}

TEST_CASE("rental: payRent only by the tenant with the exact value") {
  World w = rental_world();
  w.must("tenant", "rental", "beginLease", {"1"});

  CHECK(w.fails("landlord", "rental", "payRent", {"2"}).find("only tenant") !=
        std::string::npos);
  CHECK(w.fails("tenant", "rental", "payRent", {"1"}).find("rent") !=
        std::string::npos);
  CHECK(w.must("tenant", "rental", "payRent", {"2"}) == "rentPaid:1");
  CHECK(w.must("tenant", "rental", "payRent", {"2"}) == "rentPaid:2");
  CHECK(w.must("alice", "rental", "getRentsPaid", {}) == "1:2;2:2");
}

TEST_CASE("rental: late fee applies and is landlord-set before activation only") {
  World w = rental_world();
  CHECK(w.fails("tenant", "rental", "setLateFee", {"1"}).find("only landlord") !=
        std::string::npos);
  w.must("landlord", "rental", "setLateFee", {"1"});
  w.must("tenant", "rental", "beginLease", {"1"});
  CHECK(w.fails("landlord", "rental", "setLateFee", {"0"}).find("active") !=
        std::string::npos);
  CHECK(w.fails("tenant", "rental", "payRent", {"2"}).find("rent") !=
        std::string::npos);
  CHECK(w.must("tenant", "rental", "payRent", {"3"}) == "rentPaid:1");
}

TEST_CASE("rental: oracle callback is oracle-only and drives the breach flag") {
  World w = rental_world();
  w.must("tenant", "rental", "beginLease", {"1"});

  CHECK(w.fails("mallet", "rental", "oracleCallback", {"true"}).find("only oracle") !=
        std::string::npos);

  // checkTerms needs the contract funded for the query fee
  CHECK(w.must("alice", "rental", "checkTerms", {}).find("query-not-sent") == 0);
  w.must("landlord", "t20", "transfer", {"rental", "5"});
  CHECK(w.must("alice", "rental", "checkTerms", {}) == "query-sent:1");
  CHECK(w.balance("t20", "oracle9") == 1);

  CHECK(w.must("oracle9", "rental", "oracleCallback", {"true"}) == "termBreached");
  // breached tenants cannot start a new lease and get no refund
  CHECK(w.fails("landlord", "rental", "terminateContract", {"1"})
            .find("no refund") != std::string::npos);
  CHECK(w.must("landlord", "rental", "terminateContract", {}) ==
        "contractTerminated");
  CHECK(w.must("alice", "rental", "getStatus", {}) == "Terminated");
}

TEST_CASE("rental: clean termination refunds the deposit exactly once") {
  World w = rental_world();
  w.must("tenant", "rental", "beginLease", {"1"});
  CHECK(w.fails("tenant", "rental", "terminateContract", {"1"})
            .find("only landlord") != std::string::npos);

  uint64_t tenant_before = w.balance("t20", "tenant");
  CHECK(w.must("landlord", "rental", "terminateContract", {"1"}) ==
        "contractTerminated+depositRefunded");
  CHECK(w.balance("t20", "tenant") == tenant_before + 1);

  // frozen after termination: every mutator is rejected
  CHECK(w.fails("tenant", "rental", "payRent", {"2"}).find("Active") !=
        std::string::npos);
  CHECK(w.fails("landlord", "rental", "terminateContract", {"1"}).find("Active") !=
        std::string::npos);
  CHECK(w.must("alice", "rental", "getStatus", {}) == "Terminated");
}

TEST_CASE("rental status machine never skips or revisits states") {
  // Created -> (terminate is rejected) -> Active -> Terminated -> frozen
  World w = rental_world();
  CHECK(w.fails("landlord", "rental", "terminateContract", {"1"}).find("Active") !=
        std::string::npos);
  w.must("tenant", "rental", "beginLease", {"1"});
  w.must("landlord", "rental", "terminateContract", {"1"});
  CHECK(w.fails("tenant", "rental", "beginLease", {"1"}).find("Created") !=
        std::string::npos);
}
