#include "flowtrace/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace flowtrace {

namespace {
enum class Kind : unsigned char { Const, Var, Add, Sub, Mul, Neg, Pow, Exp, Sin, Cos };
}

struct Expression::Node {
  Kind kind;
  double value = 0;  // Const
  int index = 0;     // Var index, or Pow exponent
  NodePtr a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make(Kind k, double value, int index, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = k;
  n->value = value;
  n->index = index;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

bool is_const(const NodePtr& n, double v) { return n->kind == Kind::Const && n->value == v; }

bool node_equal(const NodePtr& x, const NodePtr& y) {
  if (x == y) return true;
  if (x->kind != y->kind) return false;
  switch (x->kind) {
    case Kind::Const:
      return x->value == y->value;
    case Kind::Var:
      return x->index == y->index;
    case Kind::Pow:
      return x->index == y->index && node_equal(x->a, y->a);
    case Kind::Neg:
    case Kind::Exp:
    case Kind::Sin:
    case Kind::Cos:
      return node_equal(x->a, y->a);
    case Kind::Add:
    case Kind::Sub:
    case Kind::Mul:
      return node_equal(x->a, y->a) && node_equal(x->b, y->b);
  }
  return false;
}

// Smart constructors fold constants and strip identities so brackets and
// derivatives stay small.
NodePtr n_const(double v) { return make(Kind::Const, v, 0); }

NodePtr n_add(NodePtr a, NodePtr b) {
  if (a->kind == Kind::Const && b->kind == Kind::Const) return n_const(a->value + b->value);
  if (is_const(a, 0)) return b;
  if (is_const(b, 0)) return a;
  return make(Kind::Add, 0, 0, std::move(a), std::move(b));
}

NodePtr n_neg(NodePtr a) {
  if (a->kind == Kind::Const) return n_const(-a->value);
  if (a->kind == Kind::Neg) return a->a;
  return make(Kind::Neg, 0, 0, std::move(a));
}

NodePtr n_sub(NodePtr a, NodePtr b) {
  if (a->kind == Kind::Const && b->kind == Kind::Const) return n_const(a->value - b->value);
  if (is_const(b, 0)) return a;
  if (is_const(a, 0)) return n_neg(std::move(b));
  if (node_equal(a, b)) return n_const(0);
  return make(Kind::Sub, 0, 0, std::move(a), std::move(b));
}

NodePtr n_mul(NodePtr a, NodePtr b) {
  if (a->kind == Kind::Const && b->kind == Kind::Const) return n_const(a->value * b->value);
  if (is_const(a, 0) || is_const(b, 0)) return n_const(0);
  if (is_const(a, 1)) return b;
  if (is_const(b, 1)) return a;
  return make(Kind::Mul, 0, 0, std::move(a), std::move(b));
}

NodePtr n_pow(NodePtr a, int k) {
  if (k == 0) return n_const(1);
  if (k == 1) return a;
  if (a->kind == Kind::Const) return n_const(std::pow(a->value, k));
  return make(Kind::Pow, 0, k, std::move(a));
}

NodePtr n_func(Kind k, NodePtr a) {
  if (a->kind == Kind::Const) {
    double v = a->value;
    switch (k) {
      case Kind::Exp: return n_const(std::exp(v));
      case Kind::Sin: return n_const(std::sin(v));
      case Kind::Cos: return n_const(std::cos(v));
      default: break;
    }
  }
  return make(k, 0, 0, std::move(a));
}

NodePtr n_diff(const NodePtr& n, int var) {
  switch (n->kind) {
    case Kind::Const:
      return n_const(0);
    case Kind::Var:
      return n_const(n->index == var ? 1 : 0);
    case Kind::Add:
      return n_add(n_diff(n->a, var), n_diff(n->b, var));
    case Kind::Sub:
      return n_sub(n_diff(n->a, var), n_diff(n->b, var));
    case Kind::Mul:
      return n_add(n_mul(n_diff(n->a, var), n->b), n_mul(n->a, n_diff(n->b, var)));
    case Kind::Neg:
      return n_neg(n_diff(n->a, var));
    case Kind::Pow:
      return n_mul(n_mul(n_const(n->index), n_pow(n->a, n->index - 1)), n_diff(n->a, var));
    case Kind::Exp:
      return n_mul(n_func(Kind::Exp, n->a), n_diff(n->a, var));
    case Kind::Sin:
      return n_mul(n_func(Kind::Cos, n->a), n_diff(n->a, var));
    case Kind::Cos:
      return n_neg(n_mul(n_func(Kind::Sin, n->a), n_diff(n->a, var)));
  }
  return n_const(0);
}

NodePtr n_subst(const NodePtr& n, int var, double value) {
  switch (n->kind) {
    case Kind::Const:
      return n;
    case Kind::Var:
      return n->index == var ? n_const(value) : n;
    case Kind::Add:
      return n_add(n_subst(n->a, var, value), n_subst(n->b, var, value));
    case Kind::Sub:
      return n_sub(n_subst(n->a, var, value), n_subst(n->b, var, value));
    case Kind::Mul:
      return n_mul(n_subst(n->a, var, value), n_subst(n->b, var, value));
    case Kind::Neg:
      return n_neg(n_subst(n->a, var, value));
    case Kind::Pow:
      return n_pow(n_subst(n->a, var, value), n->index);
    case Kind::Exp:
    case Kind::Sin:
    case Kind::Cos:
      return n_func(n->kind, n_subst(n->a, var, value));
  }
  return n;
}

int n_max_var(const NodePtr& n) {
  switch (n->kind) {
    case Kind::Const:
      return -1;
    case Kind::Var:
      return n->index;
    case Kind::Add:
    case Kind::Sub:
    case Kind::Mul:
      return std::max(n_max_var(n->a), n_max_var(n->b));
    default:
      return n_max_var(n->a);
  }
}

// Printing with minimal parentheses. Node precedence: add/sub 0, mul and
// unary minus 1, pow 2, atoms 3; a node is parenthesized when its precedence
// falls below what the context requires.
int n_prec(const NodePtr& n) {
  switch (n->kind) {
    case Kind::Add:
    case Kind::Sub:
      return 0;
    case Kind::Mul:
    case Kind::Neg:
      return 1;
    case Kind::Pow:
      return 2;
    case Kind::Const:
      return n->value < 0 ? 1 : 3;
    default:
      return 3;
  }
}

void n_print(const NodePtr& n, std::ostringstream& out, int ctx) {
  bool need = n_prec(n) < ctx;
  if (need) out << '(';
  switch (n->kind) {
    case Kind::Const:
      out << n->value;
      break;
    case Kind::Var:
      out << 'x' << (n->index + 1);
      break;
    case Kind::Add:
      n_print(n->a, out, 0);
      out << " + ";
      n_print(n->b, out, 0);
      break;
    case Kind::Sub:
      n_print(n->a, out, 0);
      out << " - ";
      n_print(n->b, out, 1);
      break;
    case Kind::Mul:
      n_print(n->a, out, 1);
      out << "*";
      n_print(n->b, out, 2);
      break;
    case Kind::Neg:
      out << '-';
      n_print(n->a, out, 2);
      break;
    case Kind::Pow:
      n_print(n->a, out, 3);
      out << '^' << n->index;
      break;
    case Kind::Exp:
      out << "exp(";
      n_print(n->a, out, 0);
      out << ')';
      break;
    case Kind::Sin:
      out << "sin(";
      n_print(n->a, out, 0);
      out << ')';
      break;
    case Kind::Cos:
      out << "cos(";
      n_print(n->a, out, 0);
      out << ')';
      break;
  }
  if (need) out << ')';
}

}  // namespace

// ---------------------------------------------------------------------------
// Tape compilation and evaluation

struct Expression::Instr {
  Kind op;
  int index;     // Var index or Pow exponent
  double value;  // Const payload
};

namespace {

constexpr int kMaxStack = 64;

int compile_node(const NodePtr& n, std::vector<Expression::Instr>& out, int depth) {
  if (depth > kMaxStack) throw std::runtime_error("expression too deep to evaluate");
  int used = depth;
  switch (n->kind) {
    case Kind::Const:
      out.push_back({Kind::Const, 0, n->value});
      return depth + 1;
    case Kind::Var:
      out.push_back({Kind::Var, n->index, 0});
      return depth + 1;
    case Kind::Add:
    case Kind::Sub:
    case Kind::Mul:
      used = compile_node(n->a, out, depth);
      used = std::max(used, compile_node(n->b, out, depth + 1));
      out.push_back({n->kind, 0, 0});
      return used;
    default:  // unary
      used = compile_node(n->a, out, depth);
      out.push_back({n->kind, n->index, 0});
      return used;
  }
}

}  // namespace

void Expression::compile() {
  auto tape = std::make_shared<std::vector<Instr>>();
  compile_node(root_, *tape, 0);
  tape_ = std::move(tape);
}

double Expression::operator()(std::span<const double> point) const {
  std::array<double, kMaxStack> stack;
  int sp = 0;
  for (const Instr& ins : *tape_) {
    switch (ins.op) {
      case Kind::Const:
        stack[static_cast<size_t>(sp++)] = ins.value;
        break;
      case Kind::Var:
        stack[static_cast<size_t>(sp++)] = point[static_cast<size_t>(ins.index)];
        break;
      case Kind::Add:
        --sp;
        stack[static_cast<size_t>(sp - 1)] += stack[static_cast<size_t>(sp)];
        break;
      case Kind::Sub:
        --sp;
        stack[static_cast<size_t>(sp - 1)] -= stack[static_cast<size_t>(sp)];
        break;
      case Kind::Mul:
        --sp;
        stack[static_cast<size_t>(sp - 1)] *= stack[static_cast<size_t>(sp)];
        break;
      case Kind::Neg:
        stack[static_cast<size_t>(sp - 1)] = -stack[static_cast<size_t>(sp - 1)];
        break;
      case Kind::Pow: {
        double base = stack[static_cast<size_t>(sp - 1)];
        int k = ins.index;
        double r = 1;
        while (k > 0) {
          if (k & 1) r *= base;
          base *= base;
          k >>= 1;
        }
        stack[static_cast<size_t>(sp - 1)] = r;
        break;
      }
      case Kind::Exp:
        stack[static_cast<size_t>(sp - 1)] = std::exp(stack[static_cast<size_t>(sp - 1)]);
        break;
      case Kind::Sin:
        stack[static_cast<size_t>(sp - 1)] = std::sin(stack[static_cast<size_t>(sp - 1)]);
        break;
      case Kind::Cos:
        stack[static_cast<size_t>(sp - 1)] = std::cos(stack[static_cast<size_t>(sp - 1)]);
        break;
    }
  }
  return stack[0];
}

// ---------------------------------------------------------------------------
// Parser: expr := term (('+'|'-') term)*; term := factor ('*' factor)*;
// factor := '-' factor | atom ('^' uint)?; atom := number | ident | '(' expr ')'.
// No division: coefficients must stay smooth on the whole working box.

namespace {

class Parser {
 public:
  Parser(std::string_view text, int dim) : text_(text), dim_(dim) {}

  NodePtr run() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("syntax error", pos_);
    return e;
  }

 private:
  std::string_view text_;
  int dim_;
  size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  NodePtr expr() {
    NodePtr e = term();
    for (;;) {
      if (eat('+')) {
        e = n_add(e, term());
      } else if (eat('-')) {
        e = n_sub(e, term());
      } else {
        return e;
      }
    }
  }

  NodePtr term() {
    NodePtr e = factor();
    while (eat('*')) e = n_mul(e, factor());
    return e;
  }

  NodePtr factor() {
    if (eat('-')) return n_neg(factor());
    NodePtr e = atom();
    if (eat('^')) {
      skip_ws();
      size_t at = pos_;
      int k = 0;
      bool any = false;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        k = k * 10 + (text_[pos_] - '0');
        ++pos_;
        any = true;
        if (k > 64) throw ParseError("exponent too large", at);
      }
      if (!any) throw ParseError("expected integer exponent", at);
      e = n_pow(e, k);
    }
    return e;
  }

  NodePtr atom() {
    skip_ws();
    size_t at = pos_;
    if (pos_ >= text_.size()) throw ParseError("syntax error", at);
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return ident();
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    throw ParseError("syntax error", at);
  }

  NodePtr number() {
    size_t at = pos_;
    double v = 0;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc()) throw ParseError("bad number", at);
    pos_ += static_cast<size_t>(ptr - begin);
    return n_const(v);
  }

  NodePtr ident() {
    size_t at = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string_view name = text_.substr(at, pos_ - at);

    if (name == "t") {
      return make(Kind::Var, 0, dim_ - 1);
    }
    if (name.size() >= 2 && name[0] == 'x') {
      int idx = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (ec == std::errc() && ptr == name.data() + name.size()) {
        if (idx < 1 || idx > dim_)
          throw ParseError("variable " + std::string(name) + " out of range for dimension " +
                               std::to_string(dim_),
                           at);
        return make(Kind::Var, 0, idx - 1);
      }
    }
    Kind fk;
    if (name == "exp") {
      fk = Kind::Exp;
    } else if (name == "sin") {
      fk = Kind::Sin;
    } else if (name == "cos") {
      fk = Kind::Cos;
    } else {
      throw ParseError("unknown identifier '" + std::string(name) + "'", at);
    }
    if (!eat('(')) throw ParseError("expected '(' after function name", pos_);
    NodePtr arg = expr();
    if (!eat(')')) throw ParseError("expected ')'", pos_);
    return n_func(fk, arg);
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// Expression public surface

Expression::Expression() : root_(n_const(0)) { compile(); }
Expression::Expression(NodePtr root) : root_(std::move(root)) { compile(); }

Expression Expression::constant(double v) { return Expression(n_const(v)); }

Expression Expression::variable(int index) {
  if (index < 0) throw std::invalid_argument("negative variable index");
  return Expression(make(Kind::Var, 0, index));
}

Expression Expression::parse(std::string_view text, int dim) {
  if (dim < 1) throw std::invalid_argument("parse: dimension must be positive");
  return Expression(Parser(text, dim).run());
}

Expression Expression::derivative(int var) const { return Expression(n_diff(root_, var)); }

Expression Expression::substitute(int var, double value) const {
  return Expression(n_subst(root_, var, value));
}

bool Expression::is_zero() const { return is_const(root_, 0); }
bool Expression::is_constant() const { return root_->kind == Kind::Const; }
double Expression::constant_value() const { return root_->value; }
int Expression::max_variable() const { return n_max_var(root_); }

std::string Expression::str() const {
  std::ostringstream out;
  n_print(root_, out, 0);
  return out.str();
}

Expression operator+(const Expression& a, const Expression& b) {
  return Expression(n_add(a.root_, b.root_));
}
Expression operator-(const Expression& a, const Expression& b) {
  return Expression(n_sub(a.root_, b.root_));
}
Expression operator*(const Expression& a, const Expression& b) {
  return Expression(n_mul(a.root_, b.root_));
}
Expression operator-(const Expression& a) { return Expression(n_neg(a.root_)); }

Expression Expression::pow(int exponent) const {
  if (exponent < 0) throw std::invalid_argument("pow: negative exponent");
  return Expression(n_pow(root_, exponent));
}

Expression Expression::exp_of(const Expression& a) { return Expression(n_func(Kind::Exp, a.root_)); }
Expression Expression::sin_of(const Expression& a) { return Expression(n_func(Kind::Sin, a.root_)); }
Expression Expression::cos_of(const Expression& a) { return Expression(n_func(Kind::Cos, a.root_)); }

bool structurally_equal(const Expression& a, const Expression& b) {
  return node_equal(a.root_, b.root_);
}

}  // namespace flowtrace
