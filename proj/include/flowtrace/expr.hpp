#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flowtrace {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, size_t offset)
      : std::runtime_error(msg + " at offset " + std::to_string(offset)), offset_(offset) {}
  size_t offset() const { return offset_; }

 private:
  size_t offset_;
};

/// Immutable symbolic expression over x1..xd (and t as an alias for the last
/// coordinate), closed under +, -, *, integer powers and exp/sin/cos.
/// Supports exact partial differentiation; evaluation runs on a compiled
/// postfix tape so flows can call it millions of times.
class Expression {
 public:
  Expression();  // the zero expression

  static Expression constant(double v);
  static Expression variable(int index);

  /// Parses over variables x1..x<dim>; `t` names the last axis (index dim-1),
  /// matching the convention that fields on R^{n+1} keep t in the last slot.
  /// Throws ParseError with a 0-based character offset on malformed input.
  static Expression parse(std::string_view text, int dim);

  double operator()(std::span<const double> point) const;

  Expression derivative(int var) const;
  Expression substitute(int var, double value) const;

  bool is_zero() const;
  bool is_constant() const;
  double constant_value() const;  // valid only when is_constant()
  int max_variable() const;       // largest variable index used, -1 if none

  std::string str() const;

  friend Expression operator+(const Expression&, const Expression&);
  friend Expression operator-(const Expression&, const Expression&);
  friend Expression operator*(const Expression&, const Expression&);
  friend Expression operator-(const Expression&);
  Expression pow(int exponent) const;

  static Expression exp_of(const Expression&);
  static Expression sin_of(const Expression&);
  static Expression cos_of(const Expression&);

  friend bool structurally_equal(const Expression&, const Expression&);

  struct Node;   // AST node, implementation detail
  struct Instr;  // tape instruction, implementation detail
  using NodePtr = std::shared_ptr<const Node>;

 private:
  explicit Expression(NodePtr root);
  void compile();

  NodePtr root_;
  std::shared_ptr<const std::vector<Instr>> tape_;
};

bool structurally_equal(const Expression& a, const Expression& b);

}  // namespace flowtrace
