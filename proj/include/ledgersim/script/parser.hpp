#pragma once

#include <variant>

#include "ledgersim/script/ast.hpp"

namespace ledgersim::script {

// Parse + typecheck. Diagnostics carry line/column; an empty diagnostic list
// never accompanies a returned contract.
std::variant<ScriptContract, std::vector<Diagnostic>> parse_and_typecheck(
    const std::string& source);

// Parse only (diagnostics on syntax errors).
std::variant<ScriptContract, std::vector<Diagnostic>> parse_contract(
    const std::string& source);

// Type checking pass; annotates expression types in place.
std::vector<Diagnostic> typecheck(ScriptContract& contract);

}  // namespace ledgersim::script
