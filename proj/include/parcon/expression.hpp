#pragma once

#include <string>
#include <vector>

#include "parcon/errors.hpp"

namespace parcon {

/// Arithmetic expression in the variables x, y, t, compiled to a postfix
/// program. Operators + - * / ^ (right-associative power), unary minus,
/// functions sin, cos, exp, abs (one argument) and min, max (two arguments).
/// Parse errors throw ConfigError with a column anchor. Evaluation is pure,
/// so compiled expressions can be shared across threads.
class Expression {
public:
  static Expression parse(const std::string& text);

  double operator()(double x, double y, double t) const;

  const std::string& text() const { return text_; }

private:
  enum class Op : unsigned char {
    PushConst, PushX, PushY, PushT,
    Neg, Add, Sub, Mul, Div, Pow,
    Sin, Cos, Exp, Abs, Min, Max,
  };
  struct Instr {
    Op op;
    double value = 0.0;
  };

  std::vector<Instr> program_;
  std::string text_;

  friend class ExpressionParser;
};

}  // namespace parcon
