// Command-line front end: scenario runner, ledger verification/replay,
// spending-condition script tools and run reports.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "ledgersim/crypto.hpp"
#include "ledgersim/experiments.hpp"
#include "ledgersim/metrics.hpp"
#include "ledgersim/runner.hpp"
#include "ledgersim/scenario.hpp"
#include "ledgersim/script/parser.hpp"
#include "ledgersim/script/vm.hpp"

namespace {

using namespace ledgersim;

std::filesystem::path default_out_dir(const std::string& name) {
  const char* env = std::getenv("LEDGERSIM_ARTIFACTS");
  std::filesystem::path base = env != nullptr ? env : "runs";
  return base / name;
}

int cmd_run(const std::vector<std::string>& files, std::string out,
            int64_t seed_override, unsigned jobs) {
  struct Job {
    ScenarioConfig config;
    std::filesystem::path dir;
    RunResult result;
    std::string error;
  };
  std::vector<Job> job_list;
  for (const std::string& file : files) {
    Job job;
    job.config = load_scenario_file(file);
    if (seed_override >= 0) job.config.seed = static_cast<uint64_t>(seed_override);
    job.dir = out.empty() ? default_out_dir(job.config.name)
                          : std::filesystem::path(out) /
                                (files.size() > 1 ? job.config.name : "");
    if (files.size() == 1 && !out.empty()) job.dir = out;
    job_list.push_back(std::move(job));
  }

  auto run_one = [](Job& job) {
    try {
      job.result = run_scenario(job.config, job.dir);
    } catch (const std::exception& e) {
      job.error = e.what();
    }
  };
  if (jobs <= 1 || job_list.size() <= 1) {
    for (Job& job : job_list) run_one(job);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (unsigned t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          size_t i = next.fetch_add(1);
          if (i >= job_list.size()) return;
          run_one(job_list[i]);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  bool all_ok = true;
  for (const Job& job : job_list) {
    if (!job.error.empty()) {
      std::cout << job.config.name << ": ERROR " << job.error << "\n";
      all_ok = false;
      continue;
    }
    const RunResult& r = job.result;
    std::cout << job.config.name << ": height " << r.final_height << ", valid "
              << r.metrics.committed_valid << ", invalid "
              << r.metrics.committed_invalid_total() << ", artifacts "
              << job.dir.string() << "\n";
    std::cout << "  ledger " << to_hex(r.ledger_hash).substr(0, 16) << "  state "
              << to_hex(r.state_hash).substr(0, 16) << "\n";
    for (const std::string& v : r.violations) {
      std::cout << "  VIOLATION: " << v << "\n";
      all_ok = false;
    }
  }
  return all_ok ? 0 : 1;
}

int cmd_verify_chain(const std::string& dir) {
  if (auto fault = BlockStore::verify_chain_files(dir)) {
    std::cout << "FAIL: block " << fault->seq << ": " << fault->what << "\n";
    return 1;
  }
  BlockStore store = BlockStore::load(dir);
  std::cout << "OK: " << store.size() << " blocks, height "
            << store.height().value_or(0) << ", chain hash "
            << to_hex(store.chain_hash()).substr(0, 16) << "\n";
  return 0;
}

int cmd_replay(const std::string& dir) {
  ReplayReport report = replay_run_dir(dir);
  std::cout << "chain: " << (report.chain_ok ? "OK" : "FAIL") << "\n";
  std::cout << "state: " << (report.state_ok ? "OK" : "FAIL") << "\n";
  if (!report.detail.empty()) std::cout << report.detail << "\n";
  return report.chain_ok && report.state_ok ? 0 : 1;
}

int cmd_report(const std::string& dir, uint64_t window) {
  Metrics recomputed = recompute_metrics(dir, window);
  std::cout << "blocks:  " << recomputed.blocks_committed << "\n";
  std::cout << "valid:   " << recomputed.committed_valid << "\n";
  std::cout << "invalid: " << recomputed.committed_invalid_total() << "\n";
  for (const auto& [reason, count] : recomputed.committed_invalid) {
    std::cout << "  " << reason << ": " << count << "\n";
  }
  std::cout << "per-client invalid:\n";
  for (const auto& [client, count] : recomputed.invalid_by_client) {
    std::cout << "  " << client << ": " << count << "\n";
  }
  return 0;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

script::ScriptValue parse_typed_arg(const script::Type& type, const std::string& text) {
  using namespace script;
  switch (type.kind) {
    case TypeKind::Bytes:
      return make_bytes(from_hex(text));
    case TypeKind::PublicKey:
      return make_public_key(from_hex(text));
    case TypeKind::Signature:
      return make_signature(from_hex(text));
    case TypeKind::Sha256:
    case TypeKind::Sha1:
    case TypeKind::Ripemd160: {
      ScriptValue v;
      v.type = type;
      v.bytes = from_hex(text);
      return v;
    }
    case TypeKind::Number:
      return make_number(std::stoll(text));
    case TypeKind::Boolean:
      return make_boolean(text == "true");
    case TypeKind::Value:
      return make_value(std::stoull(text));
    case TypeKind::Time:
      return make_time(std::stoull(text));
    case TypeKind::Duration:
      if (!text.empty() && text.back() == 's') {
        return make_duration_seconds(std::stoull(text.substr(0, text.size() - 1)));
      }
      return make_duration_blocks(std::stoull(text));
  }
  throw std::runtime_error("unsupported argument type");
}

script::ScriptContract parse_or_die(const std::string& source) {
  auto parsed = script::parse_and_typecheck(source);
  if (auto* diags = std::get_if<std::vector<script::Diagnostic>>(&parsed)) {
    for (const auto& d : *diags) {
      std::cerr << "line " << d.pos.line << ":" << d.pos.col << ": " << d.message
                << "\n";
    }
    throw std::runtime_error("script rejected");
  }
  return std::get<script::ScriptContract>(std::move(parsed));
}

std::vector<script::ScriptValue> bind_args(const std::vector<script::Param>& params,
                                           const std::vector<std::string>& raw,
                                           const char* what) {
  if (raw.size() != params.size()) {
    throw std::runtime_error(std::string(what) + ": expected " +
                             std::to_string(params.size()) + " argument(s), got " +
                             std::to_string(raw.size()));
  }
  std::vector<script::ScriptValue> out;
  for (size_t i = 0; i < raw.size(); ++i) {
    out.push_back(parse_typed_arg(params[i].type, raw[i]));
  }
  return out;
}

int cmd_script_compile(const std::string& file,
                       const std::vector<std::string>& contract_args) {
  script::ScriptContract contract = parse_or_die(read_file(file));
  auto args = bind_args(contract.params, contract_args, "contract args");
  script::Program program = script::compile(contract, args);
  std::cout << script::disassemble(program);
  std::cout << "hex: " << to_hex(script::serialize_program(program)) << "\n";
  return 0;
}

int cmd_script_eval(const std::string& file, const std::string& clause,
                    const std::vector<std::string>& contract_args,
                    const std::vector<std::string>& clause_args, uint64_t height,
                    uint64_t time, uint64_t age_blocks, uint64_t age_seconds,
                    const std::string& tx_digest_hex) {
  script::ScriptContract contract = parse_or_die(read_file(file));
  const script::Clause* cl = contract.find_clause(clause);
  if (cl == nullptr) throw std::runtime_error("unknown clause " + clause);

  auto cargs = bind_args(contract.params, contract_args, "contract args");
  auto kargs = bind_args(cl->params, clause_args, "clause args");

  script::SpendingContext ctx = script::SpendingContext::with_sim_verifier();
  ctx.current_height = height;
  ctx.current_time = time;
  ctx.utxo_age_blocks = age_blocks;
  ctx.utxo_age_seconds = age_seconds;
  ctx.tx_digest = tx_digest_hex.empty() ? sha256("spending-tx")
                                        : from_hex(tx_digest_hex);

  script::EvalResult direct = script::eval_clause(contract, cargs, clause, kargs, ctx);
  script::Program program = script::compile(contract, cargs);
  script::VmResult vm = script::run_program(
      program, script::make_witness(program, clause, kargs), ctx);

  std::cout << "interpreter: " << (direct.unlocked ? "unlocked" : "locked")
            << (direct.reason.empty() ? "" : " (" + direct.reason + ")") << "\n";
  std::cout << "vm:          " << (vm.unlocked ? "unlocked" : "locked")
            << (vm.reason.empty() ? "" : " (" + vm.reason + ")") << "\n";
  if (direct.unlocked != vm.unlocked) {
    std::cout << "DIVERGENCE between interpreter and VM\n";
    return 2;
  }
  return direct.unlocked ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic permissioned/permissionless ledger simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run one or more scenario files");
  std::vector<std::string> scenario_files;
  std::string out_dir;
  int64_t seed_override = -1;
  unsigned jobs = 1;
  run->add_option("scenarios", scenario_files, "scenario JSON file(s)")->required();
  run->add_option("--out", out_dir, "artifact directory");
  run->add_option("--seed", seed_override, "override the scenario seed");
  run->add_option("--jobs", jobs, "parallel scenario runs");

  // verify-chain
  auto* verify = app.add_subcommand("verify-chain", "check a saved ledger");
  std::string verify_dir;
  verify->add_option("dir", verify_dir, "ledger directory")->required();

  // replay
  auto* replay = app.add_subcommand("replay", "rebuild state from a ledger");
  std::string replay_dir;
  replay->add_option("dir", replay_dir, "run directory")->required();

  // report
  auto* report = app.add_subcommand("report", "recompute metrics from artifacts");
  std::string report_dir;
  uint64_t report_window = 50;
  report->add_option("dir", report_dir, "run directory")->required();
  report->add_option("--window", report_window, "metrics window in ticks");

  // script
  auto* script_cmd = app.add_subcommand("script", "spending-condition tools");
  script_cmd->require_subcommand(1);
  auto* compile_cmd = script_cmd->add_subcommand("compile", "compile a contract");
  std::string script_file;
  std::vector<std::string> contract_args;
  compile_cmd->add_option("file", script_file, "contract source")->required();
  compile_cmd->add_option("--contract-arg", contract_args,
                          "contract argument (typed literal, repeatable)");
  auto* eval_cmd = script_cmd->add_subcommand("eval", "evaluate a clause");
  std::string eval_file, eval_clause_name, tx_digest_hex;
  std::vector<std::string> eval_contract_args, eval_clause_args;
  uint64_t height = 0, time_arg = 0, age_blocks = 0, age_seconds = 0;
  eval_cmd->add_option("file", eval_file, "contract source")->required();
  eval_cmd->add_option("--clause", eval_clause_name, "clause name")->required();
  eval_cmd->add_option("--contract-arg", eval_contract_args,
                       "contract argument (repeatable)");
  eval_cmd->add_option("--arg", eval_clause_args, "clause argument (repeatable)");
  eval_cmd->add_option("--height", height, "current block height");
  eval_cmd->add_option("--time", time_arg, "current timestamp");
  eval_cmd->add_option("--age-blocks", age_blocks, "utxo age in blocks");
  eval_cmd->add_option("--age-seconds", age_seconds, "utxo age in seconds");
  eval_cmd->add_option("--tx-digest", tx_digest_hex, "spending tx digest (hex)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(scenario_files, out_dir, seed_override, jobs);
    if (verify->parsed()) return cmd_verify_chain(verify_dir);
    if (replay->parsed()) return cmd_replay(replay_dir);
    if (report->parsed()) return cmd_report(report_dir, report_window);
    if (script_cmd->parsed()) {
      if (compile_cmd->parsed()) return cmd_script_compile(script_file, contract_args);
      if (eval_cmd->parsed()) {
        return cmd_script_eval(eval_file, eval_clause_name, eval_contract_args,
                               eval_clause_args, height, time_arg, age_blocks,
                               age_seconds, tx_digest_hex);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
