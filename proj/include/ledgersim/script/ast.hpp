#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ledgersim/bytes.hpp"

namespace ledgersim::script {

inline constexpr int64_t kNumberMin = -2147483647;
inline constexpr int64_t kNumberMax = 2147483647;

// Time literals below this are block heights, at or above it timestamps.
inline constexpr uint64_t kHeightThreshold = 500000000;

inline constexpr uint64_t kSecondsGranule = 512;

enum class TypeKind {
  Bytes,
  PublicKey,
  Signature,
  Time,
  Duration,
  Boolean,
  Number,
  Value,
  Sha256,
  Sha1,
  Ripemd160,
};

// Hash wrappers carry their preimage type; nesting is limited to one level
// of hash-of-hash.
struct Type {
  TypeKind kind = TypeKind::Bytes;
  std::shared_ptr<Type> inner;  // set for Sha256/Sha1/Ripemd160

  bool operator==(const Type& other) const {
    if (kind != other.kind) return false;
    if (!inner && !other.inner) return true;
    if (!inner || !other.inner) return false;
    return *inner == *other.inner;
  }
  bool operator!=(const Type& other) const { return !(*this == other); }
};

inline Type simple_type(TypeKind kind) { return Type{kind, nullptr}; }
inline Type hash_type(TypeKind kind, Type inner) {
  return Type{kind, std::make_shared<Type>(std::move(inner))};
}

std::string type_to_string(const Type& type);
bool is_hash_kind(TypeKind kind);
int hash_depth(const Type& type);
bool is_hashable(const Type& type);
bool is_bytes_like(const Type& type);  // raw byte payload at runtime

struct Pos {
  int line = 1;
  int col = 1;
};

struct Diagnostic {
  Pos pos;
  std::string message;
};

struct Expr {
  enum class Kind {
    Ident,
    NumberLit,
    BytesLit,
    BoolLit,
    SecondsLit,  // Ns duration literal
    Call,
    ListLit,
    Equal,
    NotEqual,
  };
  Kind kind = Kind::Ident;
  Pos pos;
  std::string name;  // Ident / Call target
  int64_t number = 0;
  Bytes bytes;
  bool boolean = false;
  std::vector<Expr> args;  // Call args, ListLit elements, Equal operands

  // filled by the type checker
  Type type;
};

struct Param {
  std::string name;
  Type type;
  Pos pos;
};

struct Statement {
  enum class Kind { Verify, Unlock };
  Kind kind = Kind::Verify;
  Expr expr;                // Verify condition
  std::string unlock_name;  // Unlock target
  Pos pos;
};

struct Clause {
  std::string name;
  std::vector<Param> params;
  std::vector<Statement> body;
  Pos pos;
};

struct ScriptContract {
  std::string name;
  std::vector<Param> params;
  std::vector<Clause> clauses;

  const Clause* find_clause(const std::string& name) const {
    for (const auto& clause : clauses) {
      if (clause.name == name) return &clause;
    }
    return nullptr;
  }
};

}  // namespace ledgersim::script
