#include "graphflow/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <utility>

#include "graphflow/error.hpp"

namespace graphflow {

namespace {

enum class Op { num, var, neg, add, sub, mul, div, pow, lt, le, gt, ge, eq, ne, call };
enum class Fn { exp, log, sin, cos, abs, sign, sqrt, min, max, indicator };

struct FnInfo {
  const char* name;
  Fn fn;
  int arity;
};

constexpr FnInfo kFunctions[] = {
    {"exp", Fn::exp, 1},   {"log", Fn::log, 1},   {"sin", Fn::sin, 1},   {"cos", Fn::cos, 1},
    {"abs", Fn::abs, 1},   {"sign", Fn::sign, 1}, {"sqrt", Fn::sqrt, 1}, {"min", Fn::min, 2},
    {"max", Fn::max, 2},   {"indicator", Fn::indicator, 1},
};

const char* fn_name(Fn f) {
  for (const auto& info : kFunctions)
    if (info.fn == f) return info.name;
  return "?";
}

const char* const kVarNames[] = {"x1", "x2", "y1", "y2", "z1", "z2", "w1", "w2"};

}  // namespace

struct Expression::Node {
  Op op = Op::num;
  double value = 0.0;
  Var var = Var::x1;
  Fn fn = Fn::exp;
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make_num(double v) {
  auto n = std::make_shared<Expression::Node>();
  n->op = Op::num;
  n->value = v;
  return n;
}

NodePtr make_var(Var v) {
  auto n = std::make_shared<Expression::Node>();
  n->op = Op::var;
  n->var = v;
  return n;
}

NodePtr make_op(Op op, std::vector<NodePtr> args) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->args = std::move(args);
  return n;
}

NodePtr make_call(Fn fn, std::vector<NodePtr> args) {
  auto n = std::make_shared<Expression::Node>();
  n->op = Op::call;
  n->fn = fn;
  n->args = std::move(args);
  return n;
}

bool is_num(const NodePtr& n, double v) { return n->op == Op::num && n->value == v; }

// Constructors with constant folding of the trivial cases.
NodePtr add(NodePtr a, NodePtr b) {
  if (is_num(a, 0.0)) return b;
  if (is_num(b, 0.0)) return a;
  if (a->op == Op::num && b->op == Op::num) return make_num(a->value + b->value);
  return make_op(Op::add, {std::move(a), std::move(b)});
}

NodePtr neg(NodePtr a) {
  if (a->op == Op::num) return make_num(-a->value);
  if (a->op == Op::neg) return a->args[0];
  return make_op(Op::neg, {std::move(a)});
}

NodePtr sub(NodePtr a, NodePtr b) {
  if (is_num(b, 0.0)) return a;
  if (is_num(a, 0.0)) return neg(std::move(b));
  if (a->op == Op::num && b->op == Op::num) return make_num(a->value - b->value);
  return make_op(Op::sub, {std::move(a), std::move(b)});
}

NodePtr mul(NodePtr a, NodePtr b) {
  if (is_num(a, 0.0) || is_num(b, 0.0)) return make_num(0.0);
  if (is_num(a, 1.0)) return b;
  if (is_num(b, 1.0)) return a;
  if (a->op == Op::num && b->op == Op::num) return make_num(a->value * b->value);
  return make_op(Op::mul, {std::move(a), std::move(b)});
}

NodePtr divide(NodePtr a, NodePtr b) {
  if (is_num(a, 0.0)) return make_num(0.0);
  if (is_num(b, 1.0)) return a;
  return make_op(Op::div, {std::move(a), std::move(b)});
}

NodePtr power(NodePtr a, NodePtr b) {
  if (is_num(b, 1.0)) return a;
  if (is_num(b, 0.0)) return make_num(1.0);
  return make_op(Op::pow, {std::move(a), std::move(b)});
}

double eval_node(const Expression::Node& n, const VarValues& v) {
  switch (n.op) {
    case Op::num:
      return n.value;
    case Op::var:
      return v[static_cast<std::size_t>(n.var)];
    case Op::neg:
      return -eval_node(*n.args[0], v);
    default:
      break;
  }
  if (n.op == Op::call) {
    const double a = eval_node(*n.args[0], v);
    switch (n.fn) {
      case Fn::exp:
        return std::exp(a);
      case Fn::log:
        if (!(a > 0.0)) throw DomainError("log of a nonpositive value");
        return std::log(a);
      case Fn::sin:
        return std::sin(a);
      case Fn::cos:
        return std::cos(a);
      case Fn::abs:
        return std::abs(a);
      case Fn::sign:
        return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
      case Fn::sqrt:
        if (a < 0.0) throw DomainError("sqrt of a negative value");
        return std::sqrt(a);
      case Fn::min:
        return std::min(a, eval_node(*n.args[1], v));
      case Fn::max:
        return std::max(a, eval_node(*n.args[1], v));
      case Fn::indicator:
        return a != 0.0 ? 1.0 : 0.0;
    }
  }
  const double a = eval_node(*n.args[0], v);
  const double b = eval_node(*n.args[1], v);
  switch (n.op) {
    case Op::add:
      return a + b;
    case Op::sub:
      return a - b;
    case Op::mul:
      return a * b;
    case Op::div:
      if (b == 0.0) throw DomainError("division by zero");
      return a / b;
    case Op::pow:
      if (a < 0.0 && b != std::floor(b)) throw DomainError("negative base with a non-integer exponent");
      if (a == 0.0 && b < 0.0) throw DomainError("zero raised to a negative power");
      return std::pow(a, b);
    case Op::lt:
      return a < b ? 1.0 : 0.0;
    case Op::le:
      return a <= b ? 1.0 : 0.0;
    case Op::gt:
      return a > b ? 1.0 : 0.0;
    case Op::ge:
      return a >= b ? 1.0 : 0.0;
    case Op::eq:
      return a == b ? 1.0 : 0.0;
    case Op::ne:
      return a != b ? 1.0 : 0.0;
    default:
      return 0.0;
  }
}

NodePtr derive(const NodePtr& n, Var x) {
  switch (n->op) {
    case Op::num:
      return make_num(0.0);
    case Op::var:
      return make_num(n->var == x ? 1.0 : 0.0);
    case Op::neg:
      return neg(derive(n->args[0], x));
    case Op::add:
      return add(derive(n->args[0], x), derive(n->args[1], x));
    case Op::sub:
      return sub(derive(n->args[0], x), derive(n->args[1], x));
    case Op::mul: {
      const NodePtr& a = n->args[0];
      const NodePtr& b = n->args[1];
      return add(mul(derive(a, x), b), mul(a, derive(b, x)));
    }
    case Op::div: {
      const NodePtr& a = n->args[0];
      const NodePtr& b = n->args[1];
      return divide(sub(mul(derive(a, x), b), mul(a, derive(b, x))), power(b, make_num(2.0)));
    }
    case Op::pow: {
      const NodePtr& a = n->args[0];
      const NodePtr& b = n->args[1];
      const NodePtr da = derive(a, x);
      const NodePtr db = derive(b, x);
      if (b->op == Op::num) return mul(mul(b, power(a, make_num(b->value - 1.0))), da);
      // d(a^b) = a^b (b' log a + b a' / a)
      return mul(n, add(mul(db, make_call(Fn::log, {a})), divide(mul(b, da), a)));
    }
    case Op::lt:
    case Op::le:
    case Op::gt:
    case Op::ge:
    case Op::eq:
    case Op::ne:
      return make_num(0.0);
    case Op::call:
      break;
  }
  const NodePtr& a = n->args[0];
  const NodePtr da = derive(a, x);
  switch (n->fn) {
    case Fn::exp:
      return mul(n, da);
    case Fn::log:
      return divide(da, a);
    case Fn::sin:
      return mul(make_call(Fn::cos, {a}), da);
    case Fn::cos:
      return neg(mul(make_call(Fn::sin, {a}), da));
    case Fn::abs:
      return mul(make_call(Fn::sign, {a}), da);
    case Fn::sign:
    case Fn::indicator:
      return make_num(0.0);
    case Fn::sqrt:
      return divide(da, mul(make_num(2.0), n));
    case Fn::min:
    case Fn::max: {
      const NodePtr& b = n->args[1];
      const NodePtr pick_a = make_op(n->fn == Fn::min ? Op::le : Op::ge, {a, b});
      return add(mul(pick_a, da), mul(sub(make_num(1.0), pick_a), derive(b, x)));
    }
  }
  return make_num(0.0);
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (v < 0.0) s = "(" + s + ")";
  return s;
}

const char* op_symbol(Op op) {
  switch (op) {
    case Op::add:
      return "+";
    case Op::sub:
      return "-";
    case Op::mul:
      return "*";
    case Op::div:
      return "/";
    case Op::pow:
      return "^";
    case Op::lt:
      return "<";
    case Op::le:
      return "<=";
    case Op::gt:
      return ">";
    case Op::ge:
      return ">=";
    case Op::eq:
      return "==";
    case Op::ne:
      return "!=";
    default:
      return "?";
  }
}

std::string format_node(const Expression::Node& n) {
  switch (n.op) {
    case Op::num:
      return format_number(n.value);
    case Op::var:
      return kVarNames[static_cast<std::size_t>(n.var)];
    case Op::neg:
      return "(-" + format_node(*n.args[0]) + ")";
    case Op::call: {
      std::string s = std::string(fn_name(n.fn)) + "(";
      for (std::size_t i = 0; i < n.args.size(); ++i) s += (i ? ", " : "") + format_node(*n.args[i]);
      return s + ")";
    }
    default:
      return "(" + format_node(*n.args[0]) + " " + op_symbol(n.op) + " " + format_node(*n.args[1]) + ")";
  }
}

bool node_uses(const Expression::Node& n, Var v) {
  if (n.op == Op::var) return n.var == v;
  for (const auto& a : n.args)
    if (node_uses(*a, v)) return true;
  return false;
}

bool node_constant(const Expression::Node& n) {
  if (n.op == Op::var) return false;
  for (const auto& a : n.args)
    if (!node_constant(*a)) return false;
  return true;
}

class Parser {
 public:
  Parser(const std::string& src, VarMask allowed) : src_(src), allowed_(allowed) {}

  NodePtr parse() {
    skip_space();
    if (pos_ >= src_.size()) fail("empty expression", pos_);
    NodePtr n = comparison();
    skip_space();
    if (pos_ < src_.size()) fail(std::string("unexpected '") + src_[pos_] + "'", pos_);
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what, std::size_t at) const {
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i < at && i < src_.size(); ++i) {
      if (src_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(what, line, col);
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(const char* tok) {
    skip_space();
    const std::size_t len = std::char_traits<char>::length(tok);
    if (src_.compare(pos_, len, tok) == 0) {
      pos_ += len;
      return true;
    }
    return false;
  }

  void expect(char c) {
    skip_space();
    if (pos_ >= src_.size()) fail(std::string("expected '") + c + "' before end of input", pos_);
    if (src_[pos_] != c) fail(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  NodePtr comparison() {
    NodePtr lhs = additive();
    skip_space();
    Op op;
    if (accept("<=")) {
      op = Op::le;
    } else if (accept(">=")) {
      op = Op::ge;
    } else if (accept("==")) {
      op = Op::eq;
    } else if (accept("!=")) {
      op = Op::ne;
    } else if (accept("<")) {
      op = Op::lt;
    } else if (accept(">")) {
      op = Op::gt;
    } else {
      return lhs;
    }
    NodePtr rhs = additive();
    return make_op(op, {std::move(lhs), std::move(rhs)});
  }

  NodePtr additive() {
    NodePtr lhs = term();
    for (;;) {
      if (accept("+")) {
        lhs = make_op(Op::add, {lhs, term()});
      } else if (accept("-")) {
        lhs = make_op(Op::sub, {lhs, term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept("*")) {
        lhs = make_op(Op::mul, {lhs, unary()});
      } else if (accept("/")) {
        lhs = make_op(Op::div, {lhs, unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept("-")) return make_op(Op::neg, {unary()});
    if (accept("+")) return unary();
    return pow_expr();
  }

  NodePtr pow_expr() {
    NodePtr base = primary();
    if (accept("^")) return make_op(Op::pow, {base, unary()});
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= src_.size()) fail("unexpected end of input", pos_);
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = comparison();
      expect(')');
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = src_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number", pos_);
      pos_ += static_cast<std::size_t>(end - begin);
      return make_num(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
      const std::string name = src_.substr(start, pos_ - start);
      skip_space();
      if (pos_ < src_.size() && src_[pos_] == '(') {
        ++pos_;
        for (const auto& info : kFunctions) {
          if (name != info.name) continue;
          std::vector<NodePtr> args;
          args.push_back(comparison());
          while (accept(",")) args.push_back(comparison());
          expect(')');
          if (static_cast<int>(args.size()) != info.arity) {
            fail(name + " takes " + std::to_string(info.arity) + " argument(s), got " + std::to_string(args.size()),
                 start);
          }
          return make_call(info.fn, std::move(args));
        }
        fail("unknown function '" + name + "'", start);
      }
      if (name == "pi") return make_num(std::numbers::pi);
      std::string canonical = name;
      if (name == "x" || name == "y" || name == "z" || name == "w") canonical = name + "1";
      for (std::size_t i = 0; i < 8; ++i) {
        if (canonical != kVarNames[i]) continue;
        const Var v = static_cast<Var>(i);
        if (!(allowed_ & var_bit(v))) fail("variable '" + name + "' is not available here", start);
        return make_var(v);
      }
      fail("unknown identifier '" + name + "'", start);
    }
    fail(std::string("unexpected '") + c + "'", pos_);
  }

  const std::string& src_;
  VarMask allowed_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(std::shared_ptr<const Node> root, std::string source)
    : root_(std::move(root)), source_(std::move(source)) {}

Expression Expression::parse(const std::string& src, VarMask allowed) {
  Parser p(src, allowed);
  return Expression(p.parse(), src);
}

Expression Expression::constant(double c) {
  return Expression(make_num(c), format_number(c));
}

double Expression::evaluate(const VarValues& vars) const {
  if (!root_) throw DomainError("empty expression");
  const double v = eval_node(*root_, vars);
  if (!std::isfinite(v)) throw DomainError("non-finite value of '" + source_ + "'");
  return v;
}

double Expression::operator()(double x1, double x2, double y1, double y2) const {
  return evaluate(VarValues{x1, x2, y1, y2, 0.0, 0.0, 0.0, 0.0});
}

Expression Expression::derivative(Var v) const {
  NodePtr d = derive(root_, v);
  std::string src = format_node(*d);
  return Expression(std::move(d), std::move(src));
}

bool Expression::is_constant() const { return !root_ || node_constant(*root_); }

bool Expression::uses(Var v) const { return root_ && node_uses(*root_, v); }

std::string Expression::format() const { return root_ ? format_node(*root_) : std::string(); }

}  // namespace graphflow
