#include "parcon/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string>

namespace parcon {

namespace {

std::string column_message(const std::string& text, std::size_t pos,
                           const std::string& what) {
  return "expression error at column " + std::to_string(pos + 1) + ": " + what +
         " in \"" + text + "\"";
}

}  // namespace

/// Recursive descent over the grammar
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := ('-'|'+')* base            // -2^2 is -(2^2), as in mathematics
///   base   := primary ('^' factor)?      // power binds tightest, right-assoc
///   primary:= number | 'x'|'y'|'t' | name '(' expr (',' expr)? ')' | '(' expr ')'
/// emitting postfix instructions as it goes.
class ExpressionParser {
public:
  explicit ExpressionParser(const std::string& text) : text_(text) {}

  std::vector<Expression::Instr> run() {
    program_.clear();
    pos_ = 0;
    parse_expr();
    skip_space();
    if (pos_ != text_.size()) {
      fail("unexpected trailing input");
    }
    if (program_.empty()) {
      fail("empty expression");
    }
    return std::move(program_);
  }

private:
  using Op = Expression::Op;

  const std::string& text_;
  std::size_t pos_ = 0;
  std::vector<Expression::Instr> program_;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(column_message(text_, pos_, what));
  }

  void skip_space() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool consume(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c, const char* context) {
    if (!consume(c)) {
      fail(std::string("expected '") + c + "' " + context);
    }
  }

  void emit(Op op, double value = 0.0) { program_.push_back({op, value}); }

  void parse_expr() {
    parse_term();
    for (;;) {
      if (consume('+')) {
        parse_term();
        emit(Op::Add);
      } else if (consume('-')) {
        parse_term();
        emit(Op::Sub);
      } else {
        return;
      }
    }
  }

  void parse_term() {
    parse_factor();
    for (;;) {
      if (consume('*')) {
        parse_factor();
        emit(Op::Mul);
      } else if (consume('/')) {
        parse_factor();
        emit(Op::Div);
      } else {
        return;
      }
    }
  }

  void parse_factor() {
    bool negate = false;
    for (;;) {
      if (consume('-')) {
        negate = !negate;
      } else if (consume('+')) {
        // no-op
      } else {
        break;
      }
    }
    parse_base();
    if (negate) {
      emit(Op::Neg);
    }
  }

  void parse_base() {
    parse_primary();
    if (consume('^')) {
      parse_factor();
      emit(Op::Pow);
    }
  }

  void parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) {
      fail("unexpected end of expression");
    }
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      parse_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      parse_name();
      return;
    }
    if (c == '(') {
      ++pos_;
      parse_expr();
      expect(')', "to close parenthesis");
      return;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  void parse_number() {
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    double value = std::strtod(begin, &end);
    if (end == begin) {
      fail("malformed number");
    }
    pos_ += static_cast<std::size_t>(end - begin);
    emit(Op::PushConst, value);
  }

  void parse_name() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    std::string name = text_.substr(start, pos_ - start);
    if (name == "x") {
      emit(Op::PushX);
      return;
    }
    if (name == "y") {
      emit(Op::PushY);
      return;
    }
    if (name == "t") {
      emit(Op::PushT);
      return;
    }

    Op op;
    int arity;
    if (name == "sin") {
      op = Op::Sin;
      arity = 1;
    } else if (name == "cos") {
      op = Op::Cos;
      arity = 1;
    } else if (name == "exp") {
      op = Op::Exp;
      arity = 1;
    } else if (name == "abs") {
      op = Op::Abs;
      arity = 1;
    } else if (name == "min") {
      op = Op::Min;
      arity = 2;
    } else if (name == "max") {
      op = Op::Max;
      arity = 2;
    } else {
      pos_ = start;
      fail("unknown identifier \"" + name + "\"");
    }

    expect('(', "after function name");
    parse_expr();
    if (arity == 2) {
      expect(',', "between function arguments");
      parse_expr();
    }
    expect(')', "to close function call");
    emit(op);
  }
};

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.text_ = text;
  e.program_ = ExpressionParser(text).run();
  return e;
}

double Expression::operator()(double x, double y, double t) const {
  // Stack depth is bounded by program length; 32 covers every expression a
  // config will realistically hold and avoids heap traffic in the hot path.
  double stack[32];
  std::size_t top = 0;
  std::vector<double> big;
  double* sp = stack;
  if (program_.size() > 32) {
    big.resize(program_.size());
    sp = big.data();
  }
  for (const Instr& ins : program_) {
    switch (ins.op) {
      case Op::PushConst: sp[top++] = ins.value; break;
      case Op::PushX: sp[top++] = x; break;
      case Op::PushY: sp[top++] = y; break;
      case Op::PushT: sp[top++] = t; break;
      case Op::Neg: sp[top - 1] = -sp[top - 1]; break;
      case Op::Add: --top; sp[top - 1] += sp[top]; break;
      case Op::Sub: --top; sp[top - 1] -= sp[top]; break;
      case Op::Mul: --top; sp[top - 1] *= sp[top]; break;
      case Op::Div: --top; sp[top - 1] /= sp[top]; break;
      case Op::Pow: --top; sp[top - 1] = std::pow(sp[top - 1], sp[top]); break;
      case Op::Sin: sp[top - 1] = std::sin(sp[top - 1]); break;
      case Op::Cos: sp[top - 1] = std::cos(sp[top - 1]); break;
      case Op::Exp: sp[top - 1] = std::exp(sp[top - 1]); break;
      case Op::Abs: sp[top - 1] = std::fabs(sp[top - 1]); break;
      case Op::Min: --top; sp[top - 1] = std::fmin(sp[top - 1], sp[top]); break;
      case Op::Max: --top; sp[top - 1] = std::fmax(sp[top - 1], sp[top]); break;
    }
  }
  return top > 0 ? sp[top - 1] : 0.0;
}

}  // namespace parcon
