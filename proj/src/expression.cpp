#include "prgm/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>

#include "prgm/errors.hpp"

namespace prgm {

namespace {

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  enum class Op { constant, variable, add, sub, mul, div, pow, neg, exp, log } op;
  double value = 0.0;
  NodePtr a;
  NodePtr b;

  double eval(double v) const {
    switch (op) {
      case Op::constant:
        return value;
      case Op::variable:
        return v;
      case Op::add:
        return a->eval(v) + b->eval(v);
      case Op::sub:
        return a->eval(v) - b->eval(v);
      case Op::mul:
        return a->eval(v) * b->eval(v);
      case Op::div:
        return a->eval(v) / b->eval(v);
      case Op::pow:
        return std::pow(a->eval(v), b->eval(v));
      case Op::neg:
        return -a->eval(v);
      case Op::exp:
        return std::exp(a->eval(v));
      case Op::log:
        return std::log(a->eval(v));
    }
    return NAN;
  }
};

NodePtr make(Node::Op op, NodePtr a = nullptr, NodePtr b = nullptr, double value = 0.0) {
  return std::make_shared<const Node>(Node{op, value, std::move(a), std::move(b)});
}

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& variables) : text_(text), variables_(variables) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr n = term();
    for (;;) {
      if (accept('+')) {
        n = make(Node::Op::add, n, term());
      } else if (accept('-')) {
        n = make(Node::Op::sub, n, term());
      } else {
        return n;
      }
    }
  }

  NodePtr term() {
    NodePtr n = unary();
    for (;;) {
      if (accept('*')) {
        n = make(Node::Op::mul, n, unary());
      } else if (accept('/')) {
        n = make(Node::Op::div, n, unary());
      } else {
        return n;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Node::Op::neg, unary());
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Node::Op::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (accept('(')) {
      NodePtr n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    return name();
  }

  NodePtr number() {
    double v = 0.0;
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr == first) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return make(Node::Op::constant, nullptr, nullptr, v);
  }

  NodePtr name() {
    const std::size_t start = pos_;
    while (pos_ < text_.size()) {
      const auto ch = static_cast<unsigned char>(text_[pos_]);
      if (std::isalnum(ch) || ch == '_' || ch >= 0x80) {
        ++pos_;
      } else {
        break;
      }
    }
    if (pos_ == start) fail("expected a number, variable, function or '('");
    const std::string id(text_.substr(start, pos_ - start));
    for (const auto& v : variables_) {
      if (id == v) return make(Node::Op::variable);
    }
    if (id == "exp" || id == "log") {
      if (!accept('(')) fail("expected '(' after " + id);
      NodePtr arg = expr();
      if (!accept(')')) fail("expected ')'");
      return make(id == "exp" ? Node::Op::exp : Node::Op::log, arg);
    }
    pos_ = start;
    fail("unknown name '" + id + "'");
  }

  std::string_view text_;
  const std::vector<std::string>& variables_;
  std::size_t pos_ = 0;
};

}  // namespace

ScalarMap parse_expression(std::string_view text, const std::vector<std::string>& variables) {
  NodePtr root = Parser(text, variables).parse();
  return [root](double v) { return root->eval(v); };
}

const std::vector<std::string>& theta_variables() {
  static const std::vector<std::string> names{"theta", "θ", "t"};
  return names;
}

}  // namespace prgm
