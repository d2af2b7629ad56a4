#pragma once

// Scalar expressions in the variables x, y, z: parsing, printing, evaluation.
//
// Grammar (EBNF):
//   expr   := term (("+"|"-") term)*
//   term   := factor (("*"|"/") factor)*
//   factor := ("-")* power
//   power  := atom ("^" factor)?
//   atom   := number | ident | ident "(" expr ")" | "(" expr ")"
//
// "^" is right-associative and binds tighter than unary minus, so "-x^2"
// parses as -(x^2).  The identifier set is closed: variables x, y, z and
// the functions exp, log, abs, sqrt, sin, cos.

#include <array>
#include <cassert>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hhbox {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double operator[](int axis) const {
    assert(axis >= 0 && axis < 3);
    return axis == 0 ? x : (axis == 1 ? y : z);
  }
  void set(int axis, double v) {
    assert(axis >= 0 && axis < 3);
    (axis == 0 ? x : (axis == 1 ? y : z)) = v;
  }
  bool operator==(const Point3&) const = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, std::string message,
             std::vector<std::string> expected = {},
             std::string identifier = {})
      : std::runtime_error("parse error at offset " + std::to_string(offset) +
                           ": " + message),
        offset(offset),
        expected(std::move(expected)),
        identifier(std::move(identifier)) {}

  std::size_t offset;
  std::vector<std::string> expected;  // token spellings admissible here
  std::string identifier;            // set for unknown-identifier errors
};

class EvalDomainError : public std::runtime_error {
 public:
  EvalDomainError(std::string node, Point3 at, std::string reason)
      : std::runtime_error("domain error in '" + node + "' at (" +
                           std::to_string(at.x) + ", " + std::to_string(at.y) +
                           ", " + std::to_string(at.z) + "): " + reason),
        node(std::move(node)),
        at(at),
        reason(std::move(reason)) {}

  std::string node;  // rendered offending subexpression
  Point3 at;
  std::string reason;
};

enum class UnaryOp : std::uint8_t { neg, exp, log, abs, sqrt, sin, cos };
enum class BinaryOp : std::uint8_t { add, sub, mul, div, pow };

namespace detail {

enum class NodeKind : std::uint8_t { constant, variable, unary, binary };

struct ExprNode {
  NodeKind kind;
  double value = 0.0;   // constant
  int var = 0;          // variable axis: 0=x, 1=y, 2=z
  UnaryOp uop = UnaryOp::neg;
  BinaryOp bop = BinaryOp::add;
  int lhs = -1;         // child indices (unary uses lhs only)
  int rhs = -1;

  bool operator==(const ExprNode&) const = default;
};

inline std::string format_double(double v) {
  std::array<char, 32> buf;
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace detail

// Immutable expression tree.  Nodes are stored in evaluation (postfix)
// order with the root last, so structural equality is plain vector
// equality and evaluation runs as a stack machine without recursion.
class Expr {
 public:
  Expr() = default;

  static Expr constant(double v) {
    Expr e;
    e.push({detail::NodeKind::constant, v});
    return e;
  }
  static Expr variable(int axis) {
    if (axis < 0 || axis > 2) throw std::invalid_argument("variable axis");
    Expr e;
    detail::ExprNode n{detail::NodeKind::variable};
    n.var = axis;
    e.push(n);
    return e;
  }
  static Expr unary(UnaryOp op, Expr operand) {
    detail::ExprNode n{detail::NodeKind::unary};
    n.uop = op;
    n.lhs = static_cast<int>(operand.nodes_.size()) - 1;
    operand.push(n);
    return operand;
  }
  static Expr binary(BinaryOp op, Expr lhs, const Expr& rhs) {
    const int shift = static_cast<int>(lhs.nodes_.size());
    for (const auto& n : rhs.nodes_) {
      detail::ExprNode m = n;
      if (m.lhs >= 0) m.lhs += shift;
      if (m.rhs >= 0) m.rhs += shift;
      lhs.push(m);
    }
    detail::ExprNode n{detail::NodeKind::binary};
    n.bop = op;
    n.lhs = shift - 1;
    n.rhs = static_cast<int>(lhs.nodes_.size()) - 1;
    lhs.push(n);
    return lhs;
  }

  bool empty() const { return nodes_.empty(); }
  std::size_t node_count() const { return nodes_.size(); }

  // 1 if only x occurs (or no variable at all), 2 if y is the highest
  // variable, 3 if z occurs.
  int arity() const {
    int highest = 0;
    for (const auto& n : nodes_)
      if (n.kind == detail::NodeKind::variable && n.var > highest)
        highest = n.var;
    return highest + 1;
  }

  double eval(const Point3& p) const;

  std::string str() const { return nodes_.empty() ? "" : print(root()); }

  bool operator==(const Expr& other) const { return nodes_ == other.nodes_; }

 private:
  friend class Parser;

  std::vector<detail::ExprNode> nodes_;
  int max_stack_ = 0;

  int root() const { return static_cast<int>(nodes_.size()) - 1; }

  void push(const detail::ExprNode& n) {
    nodes_.push_back(n);
    // Track the value-stack high-water mark of the postfix program.
    int depth = 0, peak = 0;
    for (const auto& m : nodes_) {
      switch (m.kind) {
        case detail::NodeKind::constant:
        case detail::NodeKind::variable: ++depth; break;
        case detail::NodeKind::unary: break;
        case detail::NodeKind::binary: --depth; break;
      }
      if (depth > peak) peak = depth;
    }
    max_stack_ = peak;
  }

  // Precedence levels: add/sub 1, mul/div 2, unary minus 3, pow 4, atom 5.
  static int precedence_of(const detail::ExprNode& n) {
    switch (n.kind) {
      case detail::NodeKind::constant:
      case detail::NodeKind::variable: return 5;
      case detail::NodeKind::unary: return n.uop == UnaryOp::neg ? 3 : 5;
      case detail::NodeKind::binary:
        switch (n.bop) {
          case BinaryOp::add:
          case BinaryOp::sub: return 1;
          case BinaryOp::mul:
          case BinaryOp::div: return 2;
          case BinaryOp::pow: return 4;
        }
    }
    return 5;
  }

  std::string print(int idx) const {
    const detail::ExprNode& n = nodes_[idx];
    switch (n.kind) {
      case detail::NodeKind::constant: return detail::format_double(n.value);
      case detail::NodeKind::variable: return std::string(1, "xyz"[n.var]);
      case detail::NodeKind::unary: {
        if (n.uop == UnaryOp::neg) {
          // Operand keeps its spot after '-' only at power level or above.
          std::string inner = print(n.lhs);
          if (precedence_of(nodes_[n.lhs]) <= 2) inner = "(" + inner + ")";
          return "-" + inner;
        }
        static const char* names[] = {"-", "exp", "log", "abs",
                                      "sqrt", "sin", "cos"};
        return std::string(names[static_cast<int>(n.uop)]) + "(" +
               print(n.lhs) + ")";
      }
      case detail::NodeKind::binary: {
        static const char* ops[] = {"+", "-", "*", "/", "^"};
        const int p = precedence_of(n);
        std::string l = print(n.lhs), r = print(n.rhs);
        if (n.bop == BinaryOp::pow) {
          // Right-associative: parenthesize a lower- or equal-level lhs;
          // rhs is a factor, so neg and pow survive bare.
          if (precedence_of(nodes_[n.lhs]) <= p) l = "(" + l + ")";
          if (precedence_of(nodes_[n.rhs]) <= 2) r = "(" + r + ")";
        } else {
          if (precedence_of(nodes_[n.lhs]) < p) l = "(" + l + ")";
          if (precedence_of(nodes_[n.rhs]) <= p) r = "(" + r + ")";
        }
        return l + ops[static_cast<int>(n.bop)] + r;
      }
    }
    return "";
  }

  [[noreturn]] void domain_fail(int idx, const Point3& p,
                                const std::string& reason) const {
    throw EvalDomainError(print(idx), p, reason);
  }
};

namespace detail {

// Integral exponents evaluate by repeated multiplication; this keeps
// pow(-base, 2) exact and is faster than libm pow for the common cases.
inline double pow_int(double base, long long e) {
  bool inv = e < 0;
  unsigned long long k = inv ? static_cast<unsigned long long>(-e)
                             : static_cast<unsigned long long>(e);
  double acc = 1.0, b = base;
  while (k != 0) {
    if (k & 1ull) acc *= b;
    b *= b;
    k >>= 1;
  }
  return inv ? 1.0 / acc : acc;
}

}  // namespace detail

inline double Expr::eval(const Point3& p) const {
  if (nodes_.empty()) throw std::logic_error("eval of empty expression");
  constexpr int kInlineStack = 64;
  double inline_buf[kInlineStack];
  std::vector<double> heap_buf;
  double* stack = inline_buf;
  if (max_stack_ > kInlineStack) {
    heap_buf.resize(static_cast<std::size_t>(max_stack_));
    stack = heap_buf.data();
  }
  int top = 0;
  const int count = static_cast<int>(nodes_.size());
  for (int i = 0; i < count; ++i) {
    const detail::ExprNode& n = nodes_[i];
    switch (n.kind) {
      case detail::NodeKind::constant:
        stack[top++] = n.value;
        break;
      case detail::NodeKind::variable:
        stack[top++] = p[n.var];
        break;
      case detail::NodeKind::unary: {
        double& a = stack[top - 1];
        switch (n.uop) {
          case UnaryOp::neg: a = -a; break;
          case UnaryOp::exp: a = std::exp(a); break;
          case UnaryOp::log:
            if (!(a > 0.0)) domain_fail(i, p, "log of non-positive argument");
            a = std::log(a);
            break;
          case UnaryOp::abs: a = std::fabs(a); break;
          case UnaryOp::sqrt:
            if (a < 0.0) domain_fail(i, p, "sqrt of negative argument");
            a = std::sqrt(a);
            break;
          case UnaryOp::sin: a = std::sin(a); break;
          case UnaryOp::cos: a = std::cos(a); break;
        }
        break;
      }
      case detail::NodeKind::binary: {
        const double b = stack[--top];
        double& a = stack[top - 1];
        switch (n.bop) {
          case BinaryOp::add: a += b; break;
          case BinaryOp::sub: a -= b; break;
          case BinaryOp::mul: a *= b; break;
          case BinaryOp::div:
            if (b == 0.0) domain_fail(i, p, "division by zero");
            a /= b;
            break;
          case BinaryOp::pow: {
            const double r = std::floor(b);
            if (r == b && std::fabs(b) <= 512.0) {
              a = detail::pow_int(a, static_cast<long long>(r));
            } else if (a < 0.0) {
              domain_fail(i, p, "non-integer power of negative base");
            } else if (a == 0.0 && b < 0.0) {
              domain_fail(i, p, "negative power of zero");
            } else {
              a = std::pow(a, b);
            }
            break;
          }
        }
        break;
      }
    }
    if (!std::isfinite(stack[top - 1]))
      domain_fail(i, p, "non-finite result");
  }
  assert(top == 1);
  return stack[0];
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr run() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size())
      fail("unexpected trailing input",
           {"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"});
    if (e.empty()) fail("empty expression", atom_first_set());
    return e;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;

  static std::vector<std::string> atom_first_set() {
    return {"number", "identifier", "'('", "'-'"};
  }

  [[noreturn]] void fail(const std::string& msg,
                         std::vector<std::string> expected,
                         std::string ident = {}) {
    throw ParseError(pos_, msg, std::move(expected), std::move(ident));
  }

  void skip_ws() {
    while (pos_ < src_.size() &&
           (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
            src_[pos_] == '\r'))
      ++pos_;
  }

  bool peek_is(char c) {
    skip_ws();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  bool consume(char c) {
    if (peek_is(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (consume('+'))
        lhs = Expr::binary(BinaryOp::add, std::move(lhs), parse_term());
      else if (consume('-'))
        lhs = Expr::binary(BinaryOp::sub, std::move(lhs), parse_term());
      else
        return lhs;
    }
  }

  Expr parse_term() {
    Expr lhs = parse_factor();
    for (;;) {
      if (consume('*'))
        lhs = Expr::binary(BinaryOp::mul, std::move(lhs), parse_factor());
      else if (consume('/'))
        lhs = Expr::binary(BinaryOp::div, std::move(lhs), parse_factor());
      else
        return lhs;
    }
  }

  Expr parse_factor() {
    int negations = 0;
    while (consume('-')) ++negations;
    Expr e = parse_power();
    for (int i = 0; i < negations; ++i)
      e = Expr::unary(UnaryOp::neg, std::move(e));
    return e;
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (consume('^'))
      return Expr::binary(BinaryOp::pow, std::move(base), parse_factor());
    return base;
  }

  Expr parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input", atom_first_set());
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = parse_expr();
      if (!consume(')')) fail("missing ')'", {"')'"});
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) return parse_ident();
    fail("expected an operand", atom_first_set());
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9')
        ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-'))
        ++pos_;
      if (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') {
        while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9')
          ++pos_;
      } else {
        pos_ = mark;  // "2e" is the number 2 followed by an identifier
      }
    }
    double value = 0.0;
    auto res = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_) {
      pos_ = start;
      fail("malformed number literal", {"number"});
    }
    return Expr::constant(value);
  }

  Expr parse_ident() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           ((src_[pos_] >= 'a' && src_[pos_] <= 'z') ||
            (src_[pos_] >= 'A' && src_[pos_] <= 'Z') ||
            (src_[pos_] >= '0' && src_[pos_] <= '9') || src_[pos_] == '_'))
      ++pos_;
    const std::string name(src_.substr(start, pos_ - start));

    static const std::pair<const char*, UnaryOp> functions[] = {
        {"exp", UnaryOp::exp}, {"log", UnaryOp::log},  {"abs", UnaryOp::abs},
        {"sqrt", UnaryOp::sqrt}, {"sin", UnaryOp::sin}, {"cos", UnaryOp::cos}};
    for (const auto& [fname, op] : functions) {
      if (name == fname) {
        if (!consume('(')) fail("expected '(' after function name", {"'('"});
        Expr argument = parse_expr();
        if (!consume(')')) fail("missing ')'", {"')'"});
        return Expr::unary(op, std::move(argument));
      }
    }
    if (name == "x") return Expr::variable(0);
    if (name == "y") return Expr::variable(1);
    if (name == "z") return Expr::variable(2);
    pos_ = start;
    fail("unknown identifier '" + name + "'",
         {"'x'", "'y'", "'z'", "function name"}, name);
  }
};

inline Expr parse(std::string_view source) { return Parser(source).run(); }
inline double eval(const Expr& e, const Point3& p) { return e.eval(p); }
inline int arity(const Expr& e) { return e.arity(); }
inline std::string to_string(const Expr& e) { return e.str(); }

}  // namespace hhbox
