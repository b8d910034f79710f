#include "ledgersim/contracts.hpp"

namespace ledgersim {

uint64_t parse_amount(const Bytes& raw) {
  if (raw.empty() || raw.size() > 20) throw ChaincodeError("bad amount");
  uint64_t value = 0;
  for (uint8_t c : raw) {
    if (c < '0' || c > '9') throw ChaincodeError("bad amount");
    uint64_t digit = c - '0';
    if (value > (UINT64_MAX - digit) / 10) throw ChaincodeError("amount overflow");
    value = value * 10 + digit;
  }
  return value;
}

Bytes format_amount(uint64_t value) {
  std::string s = std::to_string(value);
  return Bytes(s.begin(), s.end());
}

std::string arg_string(const std::vector<Bytes>& args, size_t index,
                       const char* what) {
  if (index >= args.size()) {
    throw ChaincodeError(std::string("missing argument: ") + what);
  }
  return std::string(args[index].begin(), args[index].end());
}

namespace {

uint64_t arg_amount(const std::vector<Bytes>& args, size_t index, const char* what) {
  if (index >= args.size()) {
    throw ChaincodeError(std::string("missing argument: ") + what);
  }
  return parse_amount(args[index]);
}

uint64_t read_amount(ChaincodeContext& ctx, const std::string& key) {
  auto v = ctx.get(key);
  if (!v) return 0;
  return parse_amount(*v);
}

void write_amount(ChaincodeContext& ctx, const std::string& key, uint64_t value) {
  std::string s = std::to_string(value);
  ctx.put(key, s);
}

std::string read_string(ChaincodeContext& ctx, const std::string& key) {
  auto v = ctx.get(key);
  if (!v) return {};
  return std::string(v->begin(), v->end());
}

Bytes response(const std::string& s) { return Bytes(s.begin(), s.end()); }

}  // namespace

// ----------------------------------------------------------------- token

TokenChaincode::TokenChaincode(TokenStandard standard, bool strict_receive,
                               std::string registry_chaincode)
    : standard_(standard),
      strict_receive_(strict_receive),
      registry_chaincode_(std::move(registry_chaincode)) {}

Bytes TokenChaincode::do_transfer(ChaincodeContext& ctx, const std::string& from,
                                  const std::string& to, uint64_t amount) {
  if (to.empty()) throw ChaincodeError("transfer: empty recipient");
  uint64_t from_balance = read_amount(ctx, "bal:" + from);
  if (from_balance < amount) throw ChaincodeError("insufficient balance");
  if (from == to) return response("ok");  // self-transfer is a funded no-op
  std::string account = read_string(ctx, "acct:" + to);
  bool is_contract = account.size() >= 1 && account[0] == 'C';
  bool has_fallback = account.size() >= 2 && account[1] == 'F';

  if (is_contract && !has_fallback) {
    if (standard_ == TokenStandard::Erc223) {
      // The whole point of erc223: invalid transfers throw instead of
      // silently stranding tokens.
      throw ChaincodeError("recipient contract has no token fallback");
    }
    write_amount(ctx, "bal:" + from, from_balance - amount);
    write_amount(ctx, "bal:" + to, read_amount(ctx, "bal:" + to) + amount);
    // erc20 hazard: the transfer succeeds but nothing will ever spend it.
    write_amount(ctx, "lost:" + to, read_amount(ctx, "lost:" + to) + amount);
    write_amount(ctx, "lost", read_amount(ctx, "lost") + amount);
    return response("ok-lost");
  }

  write_amount(ctx, "bal:" + from, from_balance - amount);
  write_amount(ctx, "bal:" + to, read_amount(ctx, "bal:" + to) + amount);
  if (is_contract && has_fallback) {
    write_amount(ctx, "fblog:" + to, read_amount(ctx, "fblog:" + to) + 1);
  }
  return response("ok");
}

Bytes TokenChaincode::invoke(ChaincodeContext& ctx, const std::string& operation,
                             const std::vector<Bytes>& args) {
  bool erc777 = standard_ == TokenStandard::Erc777;

  if (operation == "init") {
    // init(holder1, amount1, holder2, amount2, ...); supply is the sum.
    if (ctx.get("sup")) throw ChaincodeError("already initialized");
    if (args.empty() || args.size() % 2 != 0) {
      throw ChaincodeError("init: expected holder/amount pairs");
    }
    std::map<std::string, uint64_t> grants;
    uint64_t supply = 0;
    for (size_t i = 0; i < args.size(); i += 2) {
      uint64_t amount = parse_amount(args[i + 1]);
      grants[arg_string(args, i, "holder")] += amount;
      supply += amount;
    }
    write_amount(ctx, "sup", supply);
    for (const auto& [holder, amount] : grants) {
      write_amount(ctx, "bal:" + holder, amount);
    }
    return response("ok");
  }
  if (operation == "register_account") {
    std::string addr = arg_string(args, 0, "address");
    std::string kind = arg_string(args, 1, "kind");  // "contract" | "eoa"
    std::string fb = args.size() > 2 ? arg_string(args, 2, "fallback") : "none";
    std::string flags;
    flags += kind == "contract" ? 'C' : '-';
    flags += fb == "fallback" ? 'F' : '-';
    ctx.put("acct:" + addr, flags);
    return response("ok");
  }
  if (operation == "totalSupply") {
    return format_amount(read_amount(ctx, "sup"));
  }
  if (operation == "balanceOf") {
    return format_amount(read_amount(ctx, "bal:" + arg_string(args, 0, "owner")));
  }
  if (operation == "lostLedger") {
    return format_amount(read_amount(ctx, "lost"));
  }

  if (!erc777 && operation == "transfer") {
    std::string to = arg_string(args, 0, "to");
    uint64_t amount = arg_amount(args, 1, "value");
    return do_transfer(ctx, ctx.caller(), to, amount);
  }
  if (!erc777 && operation == "transferFrom") {
    std::string from = arg_string(args, 0, "from");
    std::string to = arg_string(args, 1, "to");
    uint64_t amount = arg_amount(args, 2, "value");
    std::string allowance_key = "alw:" + from + ":" + ctx.caller();
    uint64_t allowance = read_amount(ctx, allowance_key);
    if (allowance < amount) throw ChaincodeError("allowance exceeded");
    Bytes out = do_transfer(ctx, from, to, amount);
    write_amount(ctx, allowance_key, allowance - amount);
    return out;
  }
  if (!erc777 && operation == "approve") {
    std::string spender = arg_string(args, 0, "spender");
    uint64_t amount = arg_amount(args, 1, "value");
    write_amount(ctx, "alw:" + ctx.caller() + ":" + spender, amount);
    return response("ok");
  }
  if (!erc777 && operation == "allowance") {
    std::string owner = arg_string(args, 0, "owner");
    std::string spender = arg_string(args, 1, "spender");
    return format_amount(read_amount(ctx, "alw:" + owner + ":" + spender));
  }

  if (erc777 && operation == "send") {
    // send(to, value) from the caller, or send(from, to, value) by an
    // authorized operator of `from`.
    std::string from, to;
    uint64_t amount;
    if (args.size() == 2) {
      from = ctx.caller();
      to = arg_string(args, 0, "to");
      amount = arg_amount(args, 1, "value");
    } else {
      from = arg_string(args, 0, "from");
      to = arg_string(args, 1, "to");
      amount = arg_amount(args, 2, "value");
      if (from != ctx.caller() &&
          read_string(ctx, "op:" + from + ":" + ctx.caller()) != "1") {
        throw ChaincodeError("caller is not an operator of " + from);
      }
    }
    Bytes implementer = ctx.invoke_chaincode(
        registry_chaincode_, "lookup",
        {Bytes(to.begin(), to.end()), response("tokensReceived")});
    if (implementer.empty() && strict_receive_) {
      throw ChaincodeError("recipient has no tokensReceived implementer");
    }
    Bytes out = do_transfer(ctx, from, to, amount);
    if (!implementer.empty()) {
      write_amount(ctx, "hooklog:" + to, read_amount(ctx, "hooklog:" + to) + 1);
      return response("ok-hook:" + std::string(implementer.begin(), implementer.end()));
    }
    return out;
  }
  if (erc777 && operation == "authorizeOperator") {
    std::string op = arg_string(args, 0, "operator");
    ctx.put("op:" + ctx.caller() + ":" + op, "1");
    return response("ok");
  }

  if (operation == "collect_payment") {
    // msg.value analogue: a chaincode the client invoked collects the
    // declared payment from the client who signed the proposal. Reads see
    // committed state only, so escrow-then-forward inside one transaction is
    // collapsed to its net movement: the payment goes straight to the final
    // recipient the contract names.
    if (!ctx.nested()) throw ChaincodeError("collect_payment: chaincode only");
    std::string recipient = arg_string(args, 0, "recipient");
    uint64_t amount = arg_amount(args, 1, "value");
    return do_transfer(ctx, ctx.client(), recipient, amount);
  }

  throw ChaincodeError("token: unknown operation " + operation);
}

// --------------------------------------------------------------- registry

Bytes RegistryChaincode::invoke(ChaincodeContext& ctx, const std::string& operation,
                                const std::vector<Bytes>& args) {
  if (operation == "register") {
    std::string addr = arg_string(args, 0, "address");
    std::string interface = arg_string(args, 1, "interface");
    std::string implementer = arg_string(args, 2, "implementer");
    std::string manager = read_string(ctx, "mgr:" + addr);
    if (ctx.caller() != addr && ctx.caller() != manager) {
      throw ChaincodeError("register: caller is not owner or manager of " + addr);
    }
    ctx.put("reg:" + addr + ":" + interface, implementer);
    return response("ok");
  }
  if (operation == "set_manager") {
    std::string addr = arg_string(args, 0, "address");
    std::string manager = arg_string(args, 1, "manager");
    if (ctx.caller() != addr) {
      throw ChaincodeError("set_manager: caller is not owner of " + addr);
    }
    ctx.put("mgr:" + addr, manager);
    return response("ok");
  }
  if (operation == "lookup") {
    std::string addr = arg_string(args, 0, "address");
    std::string interface = arg_string(args, 1, "interface");
    auto v = ctx.get("reg:" + addr + ":" + interface);
    return v.value_or(Bytes{});
  }
  throw ChaincodeError("registry: unknown operation " + operation);
}

// ----------------------------------------------------------------- rental

RentalChaincode::RentalChaincode(std::string token_chaincode)
    : token_chaincode_(std::move(token_chaincode)) {}

Bytes RentalChaincode::invoke(ChaincodeContext& ctx, const std::string& operation,
                              const std::vector<Bytes>& args) {
  auto status = [&] { return read_string(ctx, "status"); };
  auto only = [&](const std::string& key, const char* who) {
    if (ctx.caller() != read_string(ctx, key)) {
      throw ChaincodeError(std::string("guard: only ") + who);
    }
  };
  auto collect_to = [&](const std::string& recipient, uint64_t amount) {
    if (amount == 0) return;
    ctx.invoke_chaincode(token_chaincode_, "collect_payment",
                         {Bytes(recipient.begin(), recipient.end()),
                          format_amount(amount)});
  };
  auto pay_out = [&](const std::string& to, uint64_t amount) {
    if (amount == 0) return;
    ctx.invoke_chaincode(token_chaincode_, "transfer",
                         {Bytes(to.begin(), to.end()), format_amount(amount)});
  };

  if (operation == "init") {
    if (!status().empty()) throw ChaincodeError("already initialized");
    std::string landlord = arg_string(args, 0, "landlord");
    if (ctx.caller() != landlord) {
      throw ChaincodeError("init: deployer must be the landlord");
    }
    ctx.put("landlord", landlord);
    ctx.put("house", arg_string(args, 1, "house"));
    write_amount(ctx, "rent", arg_amount(args, 2, "rent"));
    write_amount(ctx, "term", arg_amount(args, 3, "termLength"));
    write_amount(ctx, "deposit", arg_amount(args, 4, "securityDeposit"));
    ctx.put("oracle", arg_string(args, 5, "oracle"));
    write_amount(ctx, "oraclefee", args.size() > 6 ? arg_amount(args, 6, "oracleFee") : 1);
    write_amount(ctx, "latefee", 0);
    write_amount(ctx, "created", ctx.timestamp());
    write_amount(ctx, "rentslen", 0);
    ctx.put("breached", "0");
    ctx.put("status", "Created");
    return response("ok");
  }

  if (status().empty()) throw ChaincodeError("not initialized");

  if (operation == "beginLease") {
    if (read_string(ctx, "breached") != "0") throw ChaincodeError("guard: terms breached");
    if (ctx.caller() == read_string(ctx, "landlord")) {
      throw ChaincodeError("guard: landlord cannot lease own house");
    }
    if (status() != "Created") throw ChaincodeError("guard: status is not Created");
    uint64_t paid = arg_amount(args, 0, "value");
    if (paid != read_amount(ctx, "deposit")) {
      throw ChaincodeError("guard: value must equal securityDeposit");
    }
    collect_to(read_string(ctx, "landlord"), paid);  // deposit forwarded
    ctx.put("tenant", ctx.caller());
    ctx.put("status", "Active");
    return response("contractActive");
  }
  if (operation == "setLateFee") {
    only("landlord", "landlord");
    if (status() != "Created") throw ChaincodeError("guard: lease already active");
    write_amount(ctx, "latefee", arg_amount(args, 0, "lateFee"));
    return response("ok");
  }
  if (operation == "payRent") {
    only("tenant", "tenant");
    if (status() != "Active") throw ChaincodeError("guard: status is not Active");
    uint64_t paid = arg_amount(args, 0, "value");
    if (paid != read_amount(ctx, "rent") + read_amount(ctx, "latefee")) {
      throw ChaincodeError("guard: value must equal rent + lateFee");
    }
    collect_to(read_string(ctx, "landlord"), paid);
    uint64_t month = read_amount(ctx, "rentslen") + 1;
    write_amount(ctx, "rentslen", month);
    char key[32];
    std::snprintf(key, sizeof(key), "rents:%06llu", static_cast<unsigned long long>(month));
    write_amount(ctx, key, paid);
    return response("rentPaid:" + std::to_string(month));
  }
  if (operation == "checkTerms") {
    if (status() == "Terminated") throw ChaincodeError("guard: contract terminated");
    uint64_t fee = read_amount(ctx, "oraclefee");
    uint64_t balance = parse_amount(ctx.invoke_chaincode(
        token_chaincode_, "balanceOf",
        {Bytes(ctx.self().begin(), ctx.self().end())}));
    if (balance < fee) {
      return response("query-not-sent:add tokens to cover the query fee");
    }
    pay_out(read_string(ctx, "oracle"), fee);
    uint64_t n = read_amount(ctx, "queries") + 1;
    write_amount(ctx, "queries", n);
    return response("query-sent:" + std::to_string(n));
  }
  if (operation == "oracleCallback") {
    only("oracle", "oracle");
    if (status() == "Terminated") throw ChaincodeError("guard: contract terminated");
    std::string verdict = arg_string(args, 0, "verdict");
    ctx.put("breached", verdict == "true" ? "1" : "0");
    return response(verdict == "true" ? "termBreached" : "termsOk");
  }
  if (operation == "terminateContract") {
    only("landlord", "landlord");
    if (status() != "Active") throw ChaincodeError("guard: status is not Active");
    bool breached = read_string(ctx, "breached") == "1";
    uint64_t paid = args.empty() ? 0 : arg_amount(args, 0, "value");
    uint64_t deposit = read_amount(ctx, "deposit");
    // Deposit went to the landlord at beginLease, so a clean termination is
    // landlord-funded: the call must carry the deposit back to the tenant.
    if (!breached) {
      if (paid != deposit) {
        throw ChaincodeError("guard: refund value must equal securityDeposit");
      }
      collect_to(read_string(ctx, "tenant"), paid);
    } else if (paid != 0) {
      throw ChaincodeError("guard: no refund after breach");
    }
    ctx.put("status", "Terminated");
    return response(breached ? "contractTerminated" : "contractTerminated+depositRefunded");
  }

  if (operation == "getStatus") return response(status());
  if (operation == "getLandlord") return response(read_string(ctx, "landlord"));
  if (operation == "getTenant") return response(read_string(ctx, "tenant"));
  if (operation == "getHouse") return response(read_string(ctx, "house"));
  if (operation == "getTimeCreated") return format_amount(read_amount(ctx, "created"));
  if (operation == "getTermLength") return format_amount(read_amount(ctx, "term"));
  if (operation == "getRent") return format_amount(read_amount(ctx, "rent"));
  if (operation == "getSecurityDeposit") return format_amount(read_amount(ctx, "deposit"));
  if (operation == "getLateFee") return format_amount(read_amount(ctx, "latefee"));
  if (operation == "getRentsPaid") {
    uint64_t n = read_amount(ctx, "rentslen");
    std::string out;
    for (uint64_t month = 1; month <= n; ++month) {
      char key[32];
      std::snprintf(key, sizeof(key), "rents:%06llu", static_cast<unsigned long long>(month));
      if (month > 1) out += ';';
      out += std::to_string(month) + ":" + std::to_string(read_amount(ctx, key));
    }
    return response(out);
  }

  throw ChaincodeError("rental: unknown operation " + operation);
}

// ------------------------------------------------------------ test helpers

Bytes KvChaincode::invoke(ChaincodeContext& ctx, const std::string& operation,
                          const std::vector<Bytes>& args) {
  if (operation == "get") {
    if (args.empty()) throw ChaincodeError("get: missing key");
    auto v = ctx.get(ByteSpan(args[0]));
    return v.value_or(Bytes{});
  }
  if (operation == "put") {
    if (args.size() < 2) throw ChaincodeError("put: missing key/value");
    ctx.put(ByteSpan(args[0]), ByteSpan(args[1]));
    return response("ok");
  }
  if (operation == "del") {
    if (args.empty()) throw ChaincodeError("del: missing key");
    ctx.del(ByteSpan(args[0]));
    return response("ok");
  }
  if (operation == "history") {
    if (args.empty()) throw ChaincodeError("history: missing key");
    return format_amount(ctx.history(ByteSpan(args[0])).size());
  }
  if (operation == "touch") {
    // read-modify-write of a counter; handy for conflict workloads
    if (args.empty()) throw ChaincodeError("touch: missing key");
    auto v = ctx.get(ByteSpan(args[0]));
    uint64_t n = v ? parse_amount(*v) : 0;
    std::string s = std::to_string(n + 1);
    ctx.put(ByteSpan(args[0]), ByteSpan(reinterpret_cast<const uint8_t*>(s.data()), s.size()));
    return format_amount(n + 1);
  }
  throw ChaincodeError("kv: unknown operation " + operation);
}

Bytes LooperChaincode::invoke(ChaincodeContext& ctx, const std::string& operation,
                              const std::vector<Bytes>& args) {
  if (operation == "loop") {
    for (;;) ctx.charge();
  }
  if (operation == "spin") {
    uint64_t n = args.empty() ? 1 : parse_amount(args[0]);
    for (uint64_t i = 0; i < n; ++i) ctx.charge();
    return response("done");
  }
  throw ChaincodeError("looper: unknown operation " + operation);
}

Bytes DepthChaincode::invoke(ChaincodeContext& ctx, const std::string& operation,
                             const std::vector<Bytes>& args) {
  if (operation == "recurse") {
    uint64_t n = args.empty() ? 0 : parse_amount(args[0]);
    if (n == 0) return response("bottom");
    return ctx.invoke_chaincode(ctx.self(), "recurse", {format_amount(n - 1)});
  }
  throw ChaincodeError("depth: unknown operation " + operation);
}

std::shared_ptr<Chaincode> make_chaincode(
    const std::string& kind, const std::map<std::string, std::string>& options) {
  auto opt = [&options](const std::string& key, const std::string& fallback) {
    auto it = options.find(key);
    return it == options.end() ? fallback : it->second;
  };
  bool strict = opt("strict_receive", "true") != "false";
  if (kind == "token-erc20") {
    return std::make_shared<TokenChaincode>(TokenStandard::Erc20);
  }
  if (kind == "token-erc223") {
    return std::make_shared<TokenChaincode>(TokenStandard::Erc223);
  }
  if (kind == "token-erc777") {
    return std::make_shared<TokenChaincode>(TokenStandard::Erc777, strict,
                                            opt("registry", "registry"));
  }
  if (kind == "registry") return std::make_shared<RegistryChaincode>();
  if (kind == "rental") {
    return std::make_shared<RentalChaincode>(opt("token", "token"));
  }
  if (kind == "kv") return std::make_shared<KvChaincode>();
  if (kind == "looper") return std::make_shared<LooperChaincode>();
  if (kind == "depth") return std::make_shared<DepthChaincode>();
  throw std::invalid_argument("unknown chaincode kind: " + kind);
}

}  // namespace ledgersim
