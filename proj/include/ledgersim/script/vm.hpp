#pragma once

#include "ledgersim/script/compiler.hpp"

namespace ledgersim::script {

struct VmResult {
  bool unlocked = false;
  std::string reason;
  uint64_t steps = 0;
};

// Executes the clause selected by witness[0]. Success requires a clean run
// ending with exactly one true on the stack. Steps are bounded by the clause
// code length: straight-line code, no loops, ever.
VmResult run_program(const Program& program, const std::vector<Bytes>& witness,
                     const SpendingContext& ctx);

inline constexpr size_t kVmMaxStack = 1000;

}  // namespace ledgersim::script
