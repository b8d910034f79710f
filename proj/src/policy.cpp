#include "ledgersim/policy.hpp"

#include <cctype>

namespace ledgersim {

namespace {

struct PolicyParser {
  const std::string& text;
  size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!eat(c)) {
      throw PolicyError("policy: expected '" + std::string(1, c) + "' at offset " +
                        std::to_string(pos));
    }
  }

  std::string token() {
    skip_ws();
    size_t start = pos;
    while (pos < text.size()) {
      char c = text[pos];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
          c == '.' || c == ':') {
        ++pos;
      } else {
        break;
      }
    }
    if (start == pos) {
      throw PolicyError("policy: expected token at offset " + std::to_string(pos));
    }
    return text.substr(start, pos - start);
  }

  PolicyNode node() {
    std::string tok = token();
    if (tok == "AND" || tok == "OR" || tok == "KOF") {
      PolicyNode n;
      expect('(');
      if (tok == "KOF") {
        n.kind = PolicyNode::Kind::Kof;
        std::string k = token();
        try {
          n.k = static_cast<uint32_t>(std::stoul(k));
        } catch (const std::exception&) {
          throw PolicyError("policy: bad KOF threshold '" + k + "'");
        }
        expect(',');
      } else {
        n.kind = tok == "AND" ? PolicyNode::Kind::And : PolicyNode::Kind::Or;
      }
      n.children.push_back(node());
      while (eat(',')) n.children.push_back(node());
      expect(')');
      return n;
    }
    PolicyNode n;
    if (tok.rfind("id:", 0) == 0) {
      n.kind = PolicyNode::Kind::Id;
      n.name = tok.substr(3);
      if (n.name.empty()) throw PolicyError("policy: empty id principal");
    } else {
      n.kind = PolicyNode::Kind::Org;
      n.name = tok;
    }
    return n;
  }
};

}  // namespace

PolicyNode parse_policy(const std::string& text) {
  PolicyParser p{text};
  PolicyNode n = p.node();
  p.skip_ws();
  if (p.pos != text.size()) {
    throw PolicyError("policy: trailing input at offset " + std::to_string(p.pos));
  }
  std::string err = check_policy(n);
  if (!err.empty()) throw PolicyError(err);
  return n;
}

std::string policy_to_string(const PolicyNode& node) {
  switch (node.kind) {
    case PolicyNode::Kind::Org:
      return node.name;
    case PolicyNode::Kind::Id:
      return "id:" + node.name;
    case PolicyNode::Kind::And:
    case PolicyNode::Kind::Or:
    case PolicyNode::Kind::Kof: {
      std::string out = node.kind == PolicyNode::Kind::And  ? "AND("
                        : node.kind == PolicyNode::Kind::Or ? "OR("
                                                            : "KOF(";
      if (node.kind == PolicyNode::Kind::Kof) {
        out += std::to_string(node.k);
        out += ',';
      }
      for (size_t i = 0; i < node.children.size(); ++i) {
        if (i) out += ',';
        out += policy_to_string(node.children[i]);
      }
      out += ')';
      return out;
    }
  }
  return {};
}

bool evaluate_policy(const PolicyNode& policy, const std::vector<Signer>& signers) {
  switch (policy.kind) {
    case PolicyNode::Kind::Org:
      for (const auto& s : signers) {
        if (s.org == policy.name) return true;
      }
      return false;
    case PolicyNode::Kind::Id:
      for (const auto& s : signers) {
        if (s.id == policy.name) return true;
      }
      return false;
    case PolicyNode::Kind::And:
      for (const auto& c : policy.children) {
        if (!evaluate_policy(c, signers)) return false;
      }
      return true;
    case PolicyNode::Kind::Or:
      for (const auto& c : policy.children) {
        if (evaluate_policy(c, signers)) return true;
      }
      return false;
    case PolicyNode::Kind::Kof: {
      uint32_t hits = 0;
      for (const auto& c : policy.children) {
        if (evaluate_policy(c, signers)) ++hits;
      }
      return hits >= policy.k;
    }
  }
  return false;
}

std::string check_policy(const PolicyNode& policy) {
  switch (policy.kind) {
    case PolicyNode::Kind::Org:
    case PolicyNode::Kind::Id:
      return policy.name.empty() ? "policy: empty principal name" : "";
    case PolicyNode::Kind::And:
    case PolicyNode::Kind::Or:
    case PolicyNode::Kind::Kof: {
      if (policy.children.empty()) return "policy: combinator with no children";
      if (policy.kind == PolicyNode::Kind::Kof &&
          (policy.k == 0 || policy.k > policy.children.size())) {
        return "policy: KOF threshold out of range";
      }
      for (const auto& c : policy.children) {
        std::string err = check_policy(c);
        if (!err.empty()) return err;
      }
      return "";
    }
  }
  return "";
}

}  // namespace ledgersim
