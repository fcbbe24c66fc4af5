#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace graphflow {

// Variables an expression may refer to. `x` is accepted for x1, and likewise
// for y, z, w.
enum class Var : std::uint8_t { x1, x2, y1, y2, z1, z2, w1, w2 };
using VarValues = std::array<double, 8>;
using VarMask = std::uint8_t;

constexpr VarMask var_bit(Var v) { return static_cast<VarMask>(1u << static_cast<unsigned>(v)); }
constexpr VarMask kVarsX = var_bit(Var::x1) | var_bit(Var::x2);
constexpr VarMask kVarsXY = kVarsX | var_bit(Var::y1) | var_bit(Var::y2);
constexpr VarMask kVarsZW = var_bit(Var::z1) | var_bit(Var::z2) | var_bit(Var::w1) | var_bit(Var::w2);
constexpr VarMask kVarsAll = 0xff;

// Arithmetic expression over the variables above: numbers, pi, + - * / ^,
// comparisons (< <= > >= == !=, valued 0 or 1) and the functions exp, log,
// sin, cos, abs, sign, sqrt, min, max, indicator. ^ binds tighter than unary
// minus, which binds tighter than * and /.
class Expression {
 public:
  struct Node;

  Expression() = default;
  static Expression parse(const std::string& src, VarMask allowed = kVarsAll);
  static Expression constant(double c);

  // Throws DomainError outside the domain of a function or on a non-finite result.
  double evaluate(const VarValues& vars) const;
  // Evaluation with x1, x2 and y1, y2 (the rest zero).
  double operator()(double x1, double x2 = 0.0, double y1 = 0.0, double y2 = 0.0) const;

  Expression derivative(Var v) const;
  bool is_constant() const;
  bool uses(Var v) const;
  // Fully parenthesized source that parses back to an equivalent tree.
  std::string format() const;
  const std::string& source() const { return source_; }

 private:
  explicit Expression(std::shared_ptr<const Node> root, std::string source);

  std::shared_ptr<const Node> root_;
  std::string source_;
};

}  // namespace graphflow
