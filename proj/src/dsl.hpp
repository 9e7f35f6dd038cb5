#pragma once

// Scalar expression language for coefficient fields.
//
//   expr  := term (("+" | "-") term)*
//   term  := unary (("*" | "/") unary)*
//   unary := "-" unary | power
//   power := atom ("^" unary)?          right-associative, binds tighter than "-"
//   atom  := number | ident | ident "(" expr ("," expr)* ")" | "(" expr ")"
//
// Identifiers: variables x, y, z; constants pi, e; functions sin cos tan exp
// log sqrt abs tanh (1 arg), min max pow (2 args).

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace velmat::dsl {

/// Syntax, unknown identifier or arity error. offset is the 1-based byte
/// offset of the offending token in the source text.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& message);
  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

/// Raised during evaluation; carries the point and the failing sub-expression.
class EvalError : public DomainError {
 public:
  EvalError(const std::string& subexpr, std::vector<double> point, const std::string& reason);
  const std::string& subexpression() const noexcept { return subexpr_; }
  const std::vector<double>& point() const noexcept { return point_; }

 private:
  std::string subexpr_;
  std::vector<double> point_;
};

enum class NodeKind { number, variable, constant, negate, add, sub, mul, div, pow, call };

enum class Function { sin, cos, tan, exp, log, sqrt, abs, tanh, min, max, pow };

struct Node {
  NodeKind kind = NodeKind::number;
  double value = 0.0;     // number literal, or constant value
  int index = 0;          // variable index (x=0, y=1, z=2)
  Function function = Function::sin;
  std::string name;       // constant or variable name
  std::vector<std::shared_ptr<const Node>> children;
};

using NodePtr = std::shared_ptr<const Node>;

/// Immutable parsed expression; cheap to copy.
class Expr {
 public:
  Expr() = default;
  explicit Expr(NodePtr root, std::string source = {}) : root_(std::move(root)), source_(std::move(source)) {}

  const NodePtr& root() const noexcept { return root_; }
  const std::string& source() const noexcept { return source_; }
  /// Highest variable index referenced plus one (0 for constant expressions).
  int arity() const;

 private:
  NodePtr root_;
  std::string source_;
};

Expr parse(std::string_view src);
double eval(const Expr& e, std::span<const double> point);
/// Fully parenthesised canonical text; parse(print(e)) reproduces e's tree.
std::string print(const Expr& e);
bool same_tree(const Node& a, const Node& b);
std::string_view function_name(Function f);

}  // namespace velmat::dsl
