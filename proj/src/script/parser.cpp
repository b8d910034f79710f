#include "ledgersim/script/parser.hpp"

#include <map>

#include "ledgersim/script/lexer.hpp"

namespace ledgersim::script {

namespace {

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  ScriptContract contract() {
    ScriptContract c;
    expect(Token::Kind::KwContract, "expected 'contract'");
    c.name = expect(Token::Kind::Ident, "expected contract name").text;
    c.params = param_list();
    expect(Token::Kind::LBrace, "expected '{'");
    while (!at(Token::Kind::RBrace)) {
      c.clauses.push_back(clause());
    }
    expect(Token::Kind::RBrace, "expected '}'");
    expect(Token::Kind::End, "trailing input after contract");
    return c;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  bool at(Token::Kind kind) const { return peek().kind == kind; }
  Token next() { return tokens_[pos_++]; }

  Token expect(Token::Kind kind, const std::string& message) {
    if (!at(kind))

      throw LexError(peek().pos, message + " (got '" + peek().text + "')");
    return next();
  }

  std::vector<Param> param_list() {
    expect(Token::Kind::LParen, "expected '('");
    std::vector<Param> params;
    if (!at(Token::Kind::RParen)) {
      for (;;) {
        Param p;
        Token name = expect(Token::Kind::Ident, "expected parameter name");
        p.name = name.text;
        p.pos = name.pos;
        expect(Token::Kind::Colon, "expected ':'");
        p.type = type();
        params.push_back(std::move(p));
        if (at(Token::Kind::Comma)) {
          next();
          continue;
        }
        break;
      }
    }
    expect(Token::Kind::RParen, "expected ')'");
    return params;
  }

  Type type() {
    Token t = expect(Token::Kind::Ident, "expected type name");
    static const std::map<std::string, TypeKind> kSimple = {
        {"Bytes", TypeKind::Bytes},       {"PublicKey", TypeKind::PublicKey},
        {"Signature", TypeKind::Signature}, {"Time", TypeKind::Time},
        {"Duration", TypeKind::Duration}, {"Boolean", TypeKind::Boolean},
        {"Number", TypeKind::Number},     {"Value", TypeKind::Value},
    };
    auto simple = kSimple.find(t.text);
    if (simple != kSimple.end()) return simple_type(simple->second);
    TypeKind hash_kind;
    if (t.text == "Sha256") {
      hash_kind = TypeKind::Sha256;
    } else if (t.text == "Sha1") {
      hash_kind = TypeKind::Sha1;
    } else if (t.text == "Ripemd160") {
      hash_kind = TypeKind::Ripemd160;
    } else {
      throw LexError(t.pos, "unknown type '" + t.text + "'");
    }
    expect(Token::Kind::LParen, "expected '(' after hash type");
    Type inner = type();
    expect(Token::Kind::RParen, "expected ')'");
    return hash_type(hash_kind, std::move(inner));
  }

  Clause clause() {
    Clause cl;
    Token kw = expect(Token::Kind::KwClause, "expected 'clause'");
    cl.pos = kw.pos;
    cl.name = expect(Token::Kind::Ident, "expected clause name").text;
    cl.params = param_list();
    expect(Token::Kind::LBrace, "expected '{'");
    while (!at(Token::Kind::RBrace)) {
      cl.body.push_back(statement());
    }
    expect(Token::Kind::RBrace, "expected '}'");
    return cl;
  }

  Statement statement() {
    Statement s;
    if (at(Token::Kind::KwVerify)) {
      Token kw = next();
      s.kind = Statement::Kind::Verify;
      s.pos = kw.pos;
      s.expr = expression();
      return s;
    }
    if (at(Token::Kind::KwUnlock)) {
      Token kw = next();
      s.kind = Statement::Kind::Unlock;
      s.pos = kw.pos;
      s.unlock_name = expect(Token::Kind::Ident, "expected value name after 'unlock'").text;
      return s;
    }
    throw LexError(peek().pos, "expected 'verify' or 'unlock'");
  }

  Expr expression() {
    Expr lhs = primary();
    if (at(Token::Kind::EqEq) || at(Token::Kind::BangEq)) {
      Token op = next();
      Expr rhs = primary();
      Expr cmp;
      cmp.kind = op.kind == Token::Kind::EqEq ? Expr::Kind::Equal : Expr::Kind::NotEqual;
      cmp.pos = op.pos;
      cmp.args.push_back(std::move(lhs));
      cmp.args.push_back(std::move(rhs));
      return cmp;
    }
    return lhs;
  }

  Expr primary() {
    Token t = peek();
    switch (t.kind) {
      case Token::Kind::Number: {
        next();
        Expr e;
        e.kind = Expr::Kind::NumberLit;
        e.pos = t.pos;
        e.number = t.number;
        return e;
      }
      case Token::Kind::SecondsNumber: {
        next();
        Expr e;
        e.kind = Expr::Kind::SecondsLit;
        e.pos = t.pos;
        e.number = t.number;
        return e;
      }
      case Token::Kind::HexBytes: {
        next();
        Expr e;
        e.kind = Expr::Kind::BytesLit;
        e.pos = t.pos;
        e.bytes = t.bytes;
        return e;
      }
      case Token::Kind::KwTrue:
      case Token::Kind::KwFalse: {
        next();
        Expr e;
        e.kind = Expr::Kind::BoolLit;
        e.pos = t.pos;
        e.boolean = t.kind == Token::Kind::KwTrue;
        return e;
      }
      case Token::Kind::LBracket: {
        next();
        Expr e;
        e.kind = Expr::Kind::ListLit;
        e.pos = t.pos;
        if (!at(Token::Kind::RBracket)) {
          for (;;) {
            e.args.push_back(expression());
            if (at(Token::Kind::Comma)) {
              next();
              continue;
            }
            break;
          }
        }
        expect(Token::Kind::RBracket, "expected ']'");
        return e;
      }
      case Token::Kind::Ident: {
        next();
        if (at(Token::Kind::LParen)) {
          next();
          Expr e;
          e.kind = Expr::Kind::Call;
          e.pos = t.pos;
          e.name = t.text;
          if (!at(Token::Kind::RParen)) {
            for (;;) {
              e.args.push_back(expression());
              if (at(Token::Kind::Comma)) {
                next();
                continue;
              }
              break;
            }
          }
          expect(Token::Kind::RParen, "expected ')'");
          return e;
        }
        Expr e;
        e.kind = Expr::Kind::Ident;
        e.pos = t.pos;
        e.name = t.text;
        return e;
      }
      default:
        throw LexError(t.pos, "expected expression (got '" + t.text + "')");
    }
  }

  std::vector<Token> tokens_;
  size_t pos_ = 0;
};

}  // namespace

std::variant<ScriptContract, std::vector<Diagnostic>> parse_contract(
    const std::string& source) {
  try {
    Parser parser(lex(source));
    return parser.contract();
  } catch (const LexError& e) {
    return std::vector<Diagnostic>{Diagnostic{e.pos, e.what()}};
  }
}

std::variant<ScriptContract, std::vector<Diagnostic>> parse_and_typecheck(
    const std::string& source) {
  auto parsed = parse_contract(source);
  if (std::holds_alternative<std::vector<Diagnostic>>(parsed)) return parsed;
  ScriptContract contract = std::get<ScriptContract>(std::move(parsed));
  std::vector<Diagnostic> problems = typecheck(contract);
  if (!problems.empty()) return problems;
  return contract;
}

}  // namespace ledgersim::script
