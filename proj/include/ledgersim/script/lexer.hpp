#pragma once

#include <string>
#include <vector>

#include "ledgersim/script/ast.hpp"

namespace ledgersim::script {

struct Token {
  enum class Kind {
    Ident,
    Number,
    SecondsNumber,  // 512s
    HexBytes,       // 0x...
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Colon,
    EqEq,
    BangEq,
    KwContract,
    KwClause,
    KwVerify,
    KwUnlock,
    KwTrue,
    KwFalse,
    End,
  };
  Kind kind = Kind::End;
  std::string text;
  int64_t number = 0;
  Bytes bytes;
  Pos pos;
};

class LexError : public std::runtime_error {
 public:
  LexError(Pos pos, const std::string& message)
      : std::runtime_error(message), pos(pos) {}
  Pos pos;
};

std::vector<Token> lex(const std::string& source);  // throws LexError

}  // namespace ledgersim::script
