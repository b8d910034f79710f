#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ledgersim/crypto.hpp"
#include "ledgersim/experiments.hpp"
#include "ledgersim/lottery.hpp"

using namespace ledgersim;

namespace {

ForkBlock header_at(uint64_t height, const std::string& producer,
                    const Bytes& parent, uint64_t tick = 0) {
  ForkBlock h;
  h.parent = parent;
  h.height = height;
  h.producer = producer;
  h.tick = tick;
  return h;
}

}  // namespace

TEST_CASE("pow: solved attempts re-verify; solutions respect the difficulty") {
  Rng rng(7);
  ForkBlock header = header_at(1, "miner", sha256("parent"));
  uint32_t difficulty = 6;
  uint64_t nonce = 0;
  bool found = false;
  for (uint64_t i = 0; i < 100000 && !found; ++i) {
    nonce = rng.next();
    found = pow_attempt(header, nonce, difficulty);
  }
  REQUIRE(found);
  header.nonce = nonce;
  CHECK(pow_verify(header, difficulty));
  // the digest really has the leading zeros
  Writer w;
  w.raw(pow_header_bytes(header));
  w.u64(nonce);
  CHECK(leading_zero_bits(sha256(w.bytes())) >= 6);
}

TEST_CASE("pow: difficulty 1 needs about two attempts on average") {
  Rng rng(123);
  uint64_t total_attempts = 0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    ForkBlock header = header_at(1, "m" + std::to_string(trial), sha256("p"));
    uint64_t attempts = 0;
    for (;;) {
      ++attempts;
      if (pow_attempt(header, rng.next(), 1)) break;
    }
    total_attempts += attempts;
  }
  double mean = static_cast<double>(total_attempts) / trials;
  CHECK(mean >= 1.8);
  CHECK(mean <= 2.2);  // geometric with p = 1/2
}

TEST_CASE("pow: difficulty 8 succeeds with probability about 2^-8") {
  Rng rng(321);
  ForkBlock header = header_at(2, "m", sha256("p"));
  uint64_t successes = 0;
  const uint64_t attempts = 100000;
  for (uint64_t i = 0; i < attempts; ++i) {
    if (pow_attempt(header, rng.next(), 8)) ++successes;
  }
  double rate = static_cast<double>(successes) / attempts;
  double expected = 1.0 / 256.0;
  CHECK(rate > expected * 0.7);
  CHECK(rate < expected * 1.3);
}

TEST_CASE("retarget: on-target elapsed leaves difficulty unchanged") {
  PowParams params{10, 10, 20, 4.0};
  CHECK(retarget_difficulty(params, 200) == 10);
}

TEST_CASE("retarget: four-times-fast adds two bits") {
  PowParams params{10, 10, 20, 4.0};
  CHECK(retarget_difficulty(params, 50) == 12);
}

TEST_CASE("retarget: eight-times-slow is clamped to minus two bits") {
  PowParams params{10, 10, 20, 4.0};
  CHECK(retarget_difficulty(params, 1600) == 8);
}

TEST_CASE("retarget never goes below one bit") {
  PowParams params{1, 10, 20, 4.0};
  CHECK(retarget_difficulty(params, 20000) == 1);
}

TEST_CASE("pos: coin-age weight is coins times held days") {
  StakeLedger stake;
  stake.set("v", ValidatorStake{100, 0, 10, false});
  CHECK(stake.weight_of("v", PosWeightMode::CoinAge, 30, 1) == 3000);
  // 60 ticks at 2 ticks per day is still 30 days
  CHECK(stake.weight_of("v", PosWeightMode::CoinAge, 60, 2) == 3000);
}

TEST_CASE("pos: single eligible validator is always selected") {
  StakeLedger stake;
  stake.set("only", ValidatorStake{10, 0, 5, false});
  stake.set("slashed", ValidatorStake{1000, 0, 5, true});
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    CHECK(stake.select_validator(PosWeightMode::RelativeValue, 1, 1, rng) ==
          "only");
  }
}

TEST_CASE("pos: empty eligible set yields no selection") {
  StakeLedger stake;
  stake.set("broke", ValidatorStake{0, 0, 0, false});
  Rng rng(1);
  CHECK_FALSE(stake.select_validator(PosWeightMode::RelativeValue, 1, 1, rng)
                  .has_value());
}

TEST_CASE("pos: selection frequencies track the 75/25 weights") {
  StakeLedger stake;
  stake.set("A", ValidatorStake{75, 0, 10, false});
  stake.set("B", ValidatorStake{25, 0, 10, false});
  Rng rng(909);
  int a = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    if (*stake.select_validator(PosWeightMode::RelativeValue, 1, 1, rng) == "A") ++a;
  }
  double frequency = static_cast<double>(a) / draws;
  CHECK(frequency > 0.73);
  CHECK(frequency < 0.77);
}

TEST_CASE("slash: valid double-sign evidence forfeits the deposit") {
  IdentityRegistry registry({{"v1", "stake", sim_keygen("v1")}});
  StakeLedger stake;
  stake.set("v1", ValidatorStake{100, 0, 40, false});

  ForkBlock a = header_at(7, "v1", sha256("parent-a"));
  ForkBlock b = header_at(7, "v1", sha256("parent-b"));
  SlashEvidence evidence{a, b, registry.sign("v1", fork_header_signing_digest(a)),
                         registry.sign("v1", fork_header_signing_digest(b))};
  CHECK(stake.slash("v1", evidence, registry));
  CHECK(stake.find("v1")->deposit == 0);
  CHECK(stake.find("v1")->slashed);

  Rng rng(3);
  CHECK_FALSE(stake.select_validator(PosWeightMode::RelativeValue, 1, 1, rng)
                  .has_value());
}

TEST_CASE("slash: blocks at different heights are rejected evidence") {
  IdentityRegistry registry({{"v1", "stake", sim_keygen("v1")}});
  StakeLedger stake;
  stake.set("v1", ValidatorStake{100, 0, 40, false});

  ForkBlock a = header_at(7, "v1", sha256("pa"));
  ForkBlock b = header_at(8, "v1", sha256("pb"));
  SlashEvidence evidence{a, b, registry.sign("v1", fork_header_signing_digest(a)),
                         registry.sign("v1", fork_header_signing_digest(b))};
  CHECK_FALSE(stake.slash("v1", evidence, registry));
  CHECK_FALSE(stake.find("v1")->slashed);
  CHECK(stake.audit_log().size() == 1);  // rejected evidence is recorded

  // bad signature is also rejected
  SlashEvidence forged = evidence;
  forged.block_b.height = 7;
  forged.sig_b.bytes[0] ^= 1;
  CHECK_FALSE(stake.slash("v1", forged, registry));
}

TEST_CASE("nothing at stake: forks persist longer without slashing") {
  double mean_on = 0, mean_off = 0;
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    mean_on += static_cast<double>(nothing_at_stake_run(seed, true));
    mean_off += static_cast<double>(nothing_at_stake_run(seed, false));
  }
  CHECK(mean_off / 20 > mean_on / 20);
}

TEST_CASE("dpos: top-N by approval stake with one vote per pair") {
  WitnessRoster roster;
  roster.witness_count = 3;
  for (const char* id : {"w1", "w2", "w3", "w4", "w5"}) {
    roster.candidates.push_back(WitnessCandidate{id, 0, 0});
  }
  std::vector<WitnessVote> votes = {
      {"s1", "w1", 50}, {"s1", "w2", 50}, {"s2", "w2", 30}, {"s2", "w3", 30},
      {"s3", "w4", 10}, {"s1", "w1", 99},  // duplicate (s1, w1): rejected
  };
  ElectionResult result = elect_witnesses(roster, votes);
  REQUIRE(result.rejected_votes.size() == 1);
  CHECK(result.rejected_votes[0] == "s1->w1");
  REQUIRE(result.active.size() == 3);
  CHECK(result.active[0] == "w2");  // 80
  CHECK(result.active[1] == "w1");  // 50
  CHECK(result.active[2] == "w3");  // 30
  CHECK_FALSE(result.underfull);

  WitnessRoster small;
  small.witness_count = 3;
  small.candidates.push_back(WitnessCandidate{"only", 0, 0});
  ElectionResult underfull = elect_witnesses(small, {{"s", "only", 5}});
  CHECK(underfull.underfull);
  CHECK(underfull.active.size() == 1);
}

TEST_CASE("dpos: witnesses below the reputation floor are dropped at the epoch") {
  WitnessRoster roster;
  roster.witness_count = 2;
  roster.reputation_floor = -2;
  roster.candidates = {{"good", 0, 0}, {"flaky", 0, 0}, {"spare", 0, 0}};
  std::vector<WitnessVote> votes = {
      {"s1", "good", 100}, {"s1", "flaky", 90}, {"s1", "spare", 10}};
  elect_witnesses(roster, votes);
  CHECK(roster.active == std::vector<std::string>{"good", "flaky"});

  // three consecutive missed slots: reputation -3 < floor -2
  record_missed_slot(roster, "flaky");
  record_missed_slot(roster, "flaky");
  record_missed_slot(roster, "flaky");
  ElectionResult next_epoch = elect_witnesses(roster, votes);
  CHECK(next_epoch.active == std::vector<std::string>{"good", "spare"});
}

TEST_CASE("dpos: changing the witness count needs a stake majority") {
  WitnessRoster roster;
  roster.witness_count = 3;
  CHECK_FALSE(vote_witness_count(roster, 5, 50, 100));  // exactly half: no
  CHECK(roster.witness_count == 3);
  CHECK(vote_witness_count(roster, 5, 51, 100));
  CHECK(roster.witness_count == 5);
}

TEST_CASE("poi: below the vesting minimum means ineligible with score zero") {
  ImportanceParams params;
  params.min_vested_coins = 100;
  params.min_vest_days = 10;
  PoiAccount account{"a", {{99, 0}}};
  auto breakdown = importance_score(account, params, {}, 30);
  CHECK_FALSE(breakdown.eligible);
  CHECK(breakdown.score == 0.0);

  // recently acquired coins do not vest
  PoiAccount fresh{"a", {{1000, 25}}};
  CHECK_FALSE(importance_score(fresh, params, {}, 30).eligible);
  // the same coins, held long enough, do
  PoiAccount seasoned{"a", {{1000, 5}}};
  CHECK(importance_score(seasoned, params, {}, 30).eligible);
}

TEST_CASE("poi: wash trading contributes nothing to the partner factor") {
  ImportanceParams params;
  params.min_vested_coins = 100;
  params.min_vest_days = 1;
  params.min_tx_size = 10;
  params.window_days = 30;
  PoiAccount account{"a", {{500, 0}}};
  std::vector<PoiTransfer> transfers = {
      {"a", "b", 50, 10}, {"b", "a", 50, 11},  // wash pair nets to zero
      {"a", "c", 40, 12},                      // real partner
  };
  auto breakdown = importance_score(account, params, transfers, 20);
  CHECK(breakdown.net_positive_partners == 1);  // only c
}

TEST_CASE("poi: transactions below the minimum size are excluded") {
  ImportanceParams params;
  params.min_vested_coins = 10;
  params.min_vest_days = 1;
  params.min_tx_size = 10;
  PoiAccount account{"a", {{100, 0}}};
  std::vector<PoiTransfer> transfers = {
      {"a", "b", 9, 5},   // min-1: excluded
      {"a", "c", 10, 6},  // exactly min: counted
      {"a", "d", 15, 7},  // min+5: counted
  };
  auto breakdown = importance_score(account, params, transfers, 10);
  CHECK(breakdown.qualifying_tx_count == 2);
  CHECK(breakdown.qualifying_volume == 25);
}

TEST_CASE("poi: the score formula combines the three weighted factors") {
  ImportanceParams params;
  params.min_vested_coins = 100;
  params.min_vest_days = 1;
  params.min_tx_size = 10;
  params.w_vested = 0.5;
  params.w_partners = 0.25;
  params.w_volume = 0.25;
  PoiAccount account{"a", {{300, 0}}};
  std::vector<PoiTransfer> transfers = {{"a", "b", 20, 5}, {"a", "c", 30, 6}};
  auto breakdown = importance_score(account, params, transfers, 10);
  CHECK(breakdown.vested == 300);
  CHECK(breakdown.net_positive_partners == 2);
  CHECK(breakdown.qualifying_volume == 50);
  CHECK(breakdown.score == doctest::Approx(0.5 * 200 + 0.25 * 2 + 0.25 * 50));
}

TEST_CASE("fork choice: weightiest tip wins, ties break to the lowest hash") {
  ForkBlock genesis;
  genesis.hash = sha256("g");
  genesis.weight = 1;
  ForkTree tree(genesis);
  CHECK(tree.main_tip() == genesis.hash);

  // two branches: 5 blocks vs 3
  Bytes parent = genesis.hash;
  for (int i = 0; i < 5; ++i) {
    ForkBlock b = header_at(i + 1, "a", parent);
    b.hash = sha256("a" + std::to_string(i));
    b.weight = 1;
    tree.add_block(b);
    parent = b.hash;
  }
  Bytes heavy_tip = parent;
  parent = genesis.hash;
  for (int i = 0; i < 3; ++i) {
    ForkBlock b = header_at(i + 1, "b", parent);
    b.hash = sha256("b" + std::to_string(i));
    b.weight = 1;
    tree.add_block(b);
    parent = b.hash;
  }
  CHECK(tree.main_tip() == heavy_tip);
  CHECK(tree.discarded_tips().size() == 1);  // losing branch retained
  CHECK(tree.fork_choice() == tree.fork_choice());  // idempotent

  // equal-weight tie: lowest hash wins
  ForkTree tie(genesis);
  ForkBlock x = header_at(1, "x", genesis.hash);
  x.hash = sha256("x");
  ForkBlock y = header_at(1, "y", genesis.hash);
  y.hash = sha256("y");
  tie.add_block(x);
  tie.add_block(y);
  CHECK(tie.main_tip() == std::min(x.hash, y.hash));
}

TEST_CASE("fork choice is a pure function of the tree") {
  ForkBlock genesis;
  genesis.hash = sha256("g2");
  ForkTree one(genesis), two(genesis);
  for (int i = 0; i < 4; ++i) {
    ForkBlock b = header_at(1 + i / 2, "p", genesis.hash);
    b.hash = sha256("blk" + std::to_string(i));
    b.weight = 2 + static_cast<uint64_t>(i);
    one.add_block(b);
    two.add_block(b);
  }
  CHECK(one.fork_choice() == two.fork_choice());
  CHECK(one.main_tip() == two.main_tip());
}

TEST_CASE("pow convergence: the mean interval settles near the target") {
  PowParams params{6, 10, 20, 4.0};  // deliberately easy starting difficulty
  auto report = pow_convergence_run(77, params, 100, 10);
  CHECK(report.mean_interval_after_warmup > 8.0);
  CHECK(report.mean_interval_after_warmup < 12.0);
}
