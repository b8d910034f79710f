#pragma once

#include <map>
#include <memory>
#include <string>

#include "ledgersim/chaincode.hpp"

namespace ledgersim {

enum class TokenStandard { Erc20, Erc223, Erc777 };

// Fungible token chaincode. Balances are keyed by free-form address labels;
// amounts travel as ASCII decimals so state dumps stay readable.
//
// The three standards differ only in transfer-to-contract behavior:
//   erc20  - credits the recipient even without a fallback handler; the
//            amount is additionally tracked in the lost ledger.
//   erc223 - rejects the transfer when the recipient contract lacks a
//            fallback handler.
//   erc777 - `send` looks up a tokensReceived implementer in the registry
//            chaincode; in strict mode a receiver without one is rejected.
class TokenChaincode : public Chaincode {
 public:
  explicit TokenChaincode(TokenStandard standard, bool strict_receive = true,
                          std::string registry_chaincode = "registry");
  Bytes invoke(ChaincodeContext& ctx, const std::string& operation,
               const std::vector<Bytes>& args) override;

 private:
  Bytes do_transfer(ChaincodeContext& ctx, const std::string& from,
                    const std::string& to, uint64_t amount);
  TokenStandard standard_;
  bool strict_receive_;
  std::string registry_chaincode_;
};

// Interface registry: (address, interface) -> implementer, writable by the
// address owner or its delegated manager.
class RegistryChaincode : public Chaincode {
 public:
  Bytes invoke(ChaincodeContext& ctx, const std::string& operation,
               const std::vector<Bytes>& args) override;
};

// House rental agreement: Created -> Active -> Terminated, rent and deposit
// paid in token units through the token chaincode, breach verdicts delivered
// by a designated oracle identity.
class RentalChaincode : public Chaincode {
 public:
  explicit RentalChaincode(std::string token_chaincode = "token");
  Bytes invoke(ChaincodeContext& ctx, const std::string& operation,
               const std::vector<Bytes>& args) override;

 private:
  std::string token_chaincode_;
};

// Plain key-value chaincode for generic workloads.
class KvChaincode : public Chaincode {
 public:
  Bytes invoke(ChaincodeContext& ctx, const std::string& operation,
               const std::vector<Bytes>& args) override;
};

// Chaincode whose `loop` operation never returns; the step budget is the only
// thing that stops it.
class LooperChaincode : public Chaincode {
 public:
  Bytes invoke(ChaincodeContext& ctx, const std::string& operation,
               const std::vector<Bytes>& args) override;
};

// Self-invoking chaincode for exercising the invoke depth limit.
class DepthChaincode : public Chaincode {
 public:
  Bytes invoke(ChaincodeContext& ctx, const std::string& operation,
               const std::vector<Bytes>& args) override;
};

// Factory keyed by the scenario file's chaincode kinds.
std::shared_ptr<Chaincode> make_chaincode(
    const std::string& kind, const std::map<std::string, std::string>& options);

// Helpers shared by the builtin contracts.
uint64_t parse_amount(const Bytes& raw);          // strict ASCII decimal
Bytes format_amount(uint64_t value);
std::string arg_string(const std::vector<Bytes>& args, size_t index,
                       const char* what);

}  // namespace ledgersim
