#include "ledgersim/script/lexer.hpp"

#include <cctype>
#include <map>

namespace ledgersim::script {

std::string type_to_string(const Type& type) {
  switch (type.kind) {
    case TypeKind::Bytes: return "Bytes";
    case TypeKind::PublicKey: return "PublicKey";
    case TypeKind::Signature: return "Signature";
    case TypeKind::Time: return "Time";
    case TypeKind::Duration: return "Duration";
    case TypeKind::Boolean: return "Boolean";
    case TypeKind::Number: return "Number";
    case TypeKind::Value: return "Value";
    case TypeKind::Sha256:
      return "Sha256(" + (type.inner ? type_to_string(*type.inner) : "?") + ")";
    case TypeKind::Sha1:
      return "Sha1(" + (type.inner ? type_to_string(*type.inner) : "?") + ")";
    case TypeKind::Ripemd160:
      return "Ripemd160(" + (type.inner ? type_to_string(*type.inner) : "?") + ")";
  }
  return "?";
}

bool is_hash_kind(TypeKind kind) {
  return kind == TypeKind::Sha256 || kind == TypeKind::Sha1 ||
         kind == TypeKind::Ripemd160;
}

int hash_depth(const Type& type) {
  if (!is_hash_kind(type.kind)) return 0;
  return 1 + (type.inner ? hash_depth(*type.inner) : 0);
}

bool is_hashable(const Type& type) {
  if (type.kind == TypeKind::Bytes || type.kind == TypeKind::PublicKey) return true;
  return is_hash_kind(type.kind);
}

bool is_bytes_like(const Type& type) {
  return type.kind == TypeKind::Bytes || type.kind == TypeKind::PublicKey ||
         type.kind == TypeKind::Signature || is_hash_kind(type.kind);
}

namespace {

const std::map<std::string, Token::Kind> kKeywords = {
    {"contract", Token::Kind::KwContract}, {"clause", Token::Kind::KwClause},
    {"verify", Token::Kind::KwVerify},     {"unlock", Token::Kind::KwUnlock},
    {"true", Token::Kind::KwTrue},         {"false", Token::Kind::KwFalse},
};

}  // namespace

std::vector<Token> lex(const std::string& source) {
  std::vector<Token> tokens;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (source[i + k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    i += n;
  };

  while (i < source.size()) {
    char c = source[i];
    Pos pos{line, col};
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < source.size() && source[i + 1] == '/') {
      while (i < source.size() && source[i] != '\n') advance(1);
      continue;
    }
    auto single = [&](Token::Kind kind) {
      tokens.push_back(Token{kind, std::string(1, c), 0, {}, pos});
      advance(1);
    };
    switch (c) {
      case '(': single(Token::Kind::LParen); continue;
      case ')': single(Token::Kind::RParen); continue;
      case '{': single(Token::Kind::LBrace); continue;
      case '}': single(Token::Kind::RBrace); continue;
      case '[': single(Token::Kind::LBracket); continue;
      case ']': single(Token::Kind::RBracket); continue;
      case ',': single(Token::Kind::Comma); continue;
      case ':': single(Token::Kind::Colon); continue;
      default: break;
    }
    if (c == '=' || c == '!') {
      if (i + 1 < source.size() && source[i + 1] == '=') {
        tokens.push_back(Token{c == '=' ? Token::Kind::EqEq : Token::Kind::BangEq,
                               std::string(1, c) + "=", 0, {}, pos});
        advance(2);
        continue;
      }
      throw LexError(pos, std::string("unexpected '") + c + "'");
    }
    if (c == '0' && i + 1 < source.size() &&
        (source[i + 1] == 'x' || source[i + 1] == 'X')) {
      size_t j = i + 2;
      while (j < source.size() &&
             std::isxdigit(static_cast<unsigned char>(source[j]))) {
        ++j;
      }
      std::string hex = source.substr(i + 2, j - i - 2);
      if (hex.empty() || hex.size() % 2 != 0) {
        throw LexError(pos, "bad hex literal");
      }
      Token t;
      t.kind = Token::Kind::HexBytes;
      t.text = source.substr(i, j - i);
      t.bytes = from_hex(hex);
      t.pos = pos;
      tokens.push_back(std::move(t));
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && i + 1 < source.size() &&
         std::isdigit(static_cast<unsigned char>(source[i + 1])))) {
      size_t j = i + (c == '-' ? 1 : 0);
      while (j < source.size() && std::isdigit(static_cast<unsigned char>(source[j]))) {
        ++j;
      }
      std::string digits = source.substr(i, j - i);
      Token t;
      t.pos = pos;
      errno = 0;
      try {
        t.number = std::stoll(digits);
      } catch (const std::exception&) {
        throw LexError(pos, "number literal out of range");
      }
      if (j < source.size() && source[j] == 's') {
        t.kind = Token::Kind::SecondsNumber;
        ++j;
      } else {
        t.kind = Token::Kind::Number;
      }
      t.text = source.substr(i, j - i);
      tokens.push_back(std::move(t));
      advance(j - i);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < source.size() &&
             (std::isalnum(static_cast<unsigned char>(source[j])) || source[j] == '_')) {
        ++j;
      }
      std::string word = source.substr(i, j - i);
      Token t;
      t.pos = pos;
      auto kw = kKeywords.find(word);
      t.kind = kw == kKeywords.end() ? Token::Kind::Ident : kw->second;
      t.text = word;
      tokens.push_back(std::move(t));
      advance(j - i);
      continue;
    }
    throw LexError(pos, std::string("unexpected character '") + c + "'");
  }
  tokens.push_back(Token{Token::Kind::End, "", 0, {}, Pos{line, col}});
  return tokens;
}

}  // namespace ledgersim::script
