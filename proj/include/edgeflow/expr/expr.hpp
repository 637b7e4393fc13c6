#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "edgeflow/core/errors.hpp"

namespace edgeflow::expr {

enum class BinaryOp : std::uint8_t { add, sub, mul, div, lt, le, gt, ge, eq, ne };
enum class Function : std::uint8_t { min, max, abs, clamp, if_ };

// Expression tree. A tagged node rather than a variant keeps structural
// equality a one-liner and makes tree generators in tests trivial.
struct Expr {
  enum class Kind : std::uint8_t { number, variable, negate, binary, call };

  Kind kind = Kind::number;
  double number = 0.0;
  std::string name;  // full dotted variable name
  BinaryOp op = BinaryOp::add;
  Function function = Function::min;
  std::vector<Expr> args;

  static Expr num(double v);
  static Expr var(std::string dotted);
  static Expr neg(Expr operand);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
  static Expr call(Function f, std::vector<Expr> args);

  bool operator==(const Expr&) const = default;
};

using Bindings = std::map<std::string, double, std::less<>>;

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, const std::string& message)
      : Error("SyntaxError", "offset " + std::to_string(offset) + ": " + message), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class EvalError : public Error {
 public:
  using Error::Error;
};

class UnboundVariable : public EvalError {
 public:
  explicit UnboundVariable(const std::string& name)
      : EvalError("UnboundVariable", "unbound variable '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class DivisionByZero : public EvalError {
 public:
  DivisionByZero() : EvalError("DivisionByZero", "division by zero") {}
};

class NonFiniteResult : public EvalError {
 public:
  NonFiniteResult() : EvalError("NonFiniteResult", "expression produced a non-finite value") {}
};

// Grammar (docs/expression-grammar.md):
//   expr    := sum (cmp sum)*
//   sum     := product (('+'|'-') product)*
//   product := unary (('*'|'/') unary)*
//   unary   := '-' unary | primary
//   primary := number | variable | call | '(' expr ')'
Expr parse(std::string_view text);

// Fully parenthesized form; parse(print(e)) == e for every parsed e.
std::string print(const Expr& e);

std::set<std::string> free_vars(const Expr& e);

// Flattened stack program. Variables are resolved to slots once, so repeated
// evaluation (one per transition) does no string work beyond slot binding.
class Program {
 public:
  explicit Program(const Expr& e);

  const std::vector<std::string>& slots() const { return slots_; }

  double eval(const Bindings& env) const;
  // `values[i]` binds `slots()[i]`.
  double eval_slots(const std::vector<double>& values) const;

 private:
  enum class Code : std::uint8_t {
    push_const,
    push_slot,
    negate,
    add,
    sub,
    mul,
    div,
    lt,
    le,
    gt,
    ge,
    eq,
    ne,
    min,
    max,
    abs,
    clamp,
    jump_if_zero,  // pops condition
    jump,
  };
  struct Instr {
    Code code;
    double constant = 0.0;
    std::size_t operand = 0;  // slot index or jump target
  };

  void emit(const Expr& e);
  std::size_t slot_for(const std::string& name);

  std::vector<Instr> code_;
  std::vector<std::string> slots_;
  std::size_t max_depth_ = 0;
};

// Parse-free convenience: evaluate a tree once.
double eval(const Expr& e, const Bindings& env);

}  // namespace edgeflow::expr
