#include "geolab/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstring>
#include <map>

namespace geolab {

enum class Expr::Op : int {
  PushConst,
  PushVar,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Sin,
  Cos,
  Tan,
  Asin,
  Acos,
  Atan,
  Sinh,
  Cosh,
  Tanh,
  Asinh,
  Acosh,
  Atanh,
  Exp,
  Log,
  Sqrt,
  Abs,
  Min,
  Max,
};

namespace {

using Op = Expr::Op;

struct FnEntry {
  Op op;
  int args;
};

const std::map<std::string, FnEntry>& fn_table() {
  static const std::map<std::string, FnEntry> table = {
      {"sin", {Op::Sin, 1}},     {"cos", {Op::Cos, 1}},     {"tan", {Op::Tan, 1}},
      {"asin", {Op::Asin, 1}},   {"acos", {Op::Acos, 1}},   {"atan", {Op::Atan, 1}},
      {"sinh", {Op::Sinh, 1}},   {"cosh", {Op::Cosh, 1}},   {"tanh", {Op::Tanh, 1}},
      {"asinh", {Op::Asinh, 1}}, {"acosh", {Op::Acosh, 1}}, {"atanh", {Op::Atanh, 1}},
      {"exp", {Op::Exp, 1}},     {"log", {Op::Log, 1}},     {"sqrt", {Op::Sqrt, 1}},
      {"abs", {Op::Abs, 1}},     {"pow", {Op::Pow, 2}},     {"min", {Op::Min, 2}},
      {"max", {Op::Max, 2}},
  };
  return table;
}

}  // namespace

class ExprParser {
 public:
  ExprParser(const std::string& text, const std::vector<std::string>& vars)
      : text_(text), vars_(vars) {}

  Expr run() {
    Expr e;
    e.text_ = text_;
    e.arity_ = static_cast<int>(vars_.size());
    pos_ = 0;
    out_ = &e.code_;
    parse_sum();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing input");
    // stack depth audit doubles as a bytecode sanity check
    int depth = 0, peak = 0;
    for (const auto& in : e.code_) {
      switch (in.op) {
        case Op::PushConst:
        case Op::PushVar:
          ++depth;
          break;
        case Op::Neg:
        case Op::Sin:
        case Op::Cos:
        case Op::Tan:
        case Op::Asin:
        case Op::Acos:
        case Op::Atan:
        case Op::Sinh:
        case Op::Cosh:
        case Op::Tanh:
        case Op::Asinh:
        case Op::Acosh:
        case Op::Atanh:
        case Op::Exp:
        case Op::Log:
        case Op::Sqrt:
        case Op::Abs:
          break;  // 1 -> 1
        default:
          --depth;  // 2 -> 1
      }
      if (depth <= 0) fail("internal: bad bytecode");
      peak = std::max(peak, depth);
    }
    if (depth != 1) fail("internal: bad bytecode");
    e.stack_need_ = peak;
    return e;
  }

 private:
  const std::string& text_;
  const std::vector<std::string>& vars_;
  size_t pos_ = 0;
  std::vector<Expr::Instr>* out_ = nullptr;

  [[noreturn]] void fail(const std::string& msg) {
    throw ExprError("expr: " + msg + " at offset " + std::to_string(pos_) + " in \"" + text_ + "\"");
  }

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

  void emit(Op op, double v = 0.0, int slot = 0) { out_->push_back({op, v, slot}); }

  // sum := product (('+'|'-') product)*
  void parse_sum() {
    parse_product();
    for (;;) {
      if (eat('+')) {
        parse_product();
        emit(Op::Add);
      } else if (eat('-')) {
        parse_product();
        emit(Op::Sub);
      } else {
        return;
      }
    }
  }

  // product := unary (('*'|'/') unary)*
  void parse_product() {
    parse_unary();
    for (;;) {
      if (eat('*')) {
        parse_unary();
        emit(Op::Mul);
      } else if (eat('/')) {
        parse_unary();
        emit(Op::Div);
      } else {
        return;
      }
    }
  }

  void parse_unary() {
    if (eat('-')) {
      parse_unary();
      emit(Op::Neg);
    } else if (eat('+')) {
      parse_unary();
    } else {
      parse_power();
    }
  }

  // power := atom ('^' unary)?   (right associative, binds tighter than unary minus)
  void parse_power() {
    parse_atom();
    if (eat('^')) {
      parse_unary();
      emit(Op::Pow);
    }
  }

  void parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(text_.substr(pos_), &used);
      } catch (const std::exception&) {
        fail("bad numeric literal");
      }
      pos_ += used;
      emit(Op::PushConst, v);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      std::string name = text_.substr(start, pos_ - start);
      if (peek() == '(') {
        auto it = fn_table().find(name);
        if (it == fn_table().end()) fail("unknown function '" + name + "'");
        eat('(');
        parse_sum();
        for (int k = 1; k < it->second.args; ++k) {
          if (!eat(',')) fail("'" + name + "' expects " + std::to_string(it->second.args) + " arguments");
          parse_sum();
        }
        if (!eat(')')) fail("missing ')'");
        emit(it->second.op);
        return;
      }
      if (name == "pi") {
        emit(Op::PushConst, M_PI);
        return;
      }
      if (name == "e") {
        emit(Op::PushConst, M_E);
        return;
      }
      for (size_t i = 0; i < vars_.size(); ++i) {
        if (vars_[i] == name) {
          emit(Op::PushVar, 0.0, static_cast<int>(i));
          return;
        }
      }
      fail("unknown variable '" + name + "'");
    }
    if (eat('(')) {
      parse_sum();
      if (!eat(')')) fail("missing ')'");
      return;
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

Expr Expr::parse(const std::string& text, const std::vector<std::string>& vars) {
  return ExprParser(text, vars).run();
}

double Expr::eval(const double* args, int nargs) const {
  if (code_.empty()) throw ExprError("expr: eval of empty expression");
  if (nargs < arity_) throw ExprError("expr: expected " + std::to_string(arity_) + " arguments");
  double stack[64];
  if (stack_need_ > 64) throw ExprError("expr: expression too deep");
  int top = -1;
  for (const auto& in : code_) {
    switch (in.op) {
      case Op::PushConst: stack[++top] = in.value; break;
      case Op::PushVar: stack[++top] = args[in.slot]; break;
      case Op::Neg: stack[top] = -stack[top]; break;
      case Op::Add: --top; stack[top] += stack[top + 1]; break;
      case Op::Sub: --top; stack[top] -= stack[top + 1]; break;
      case Op::Mul: --top; stack[top] *= stack[top + 1]; break;
      case Op::Div: --top; stack[top] /= stack[top + 1]; break;
      case Op::Pow: --top; stack[top] = std::pow(stack[top], stack[top + 1]); break;
      case Op::Sin: stack[top] = std::sin(stack[top]); break;
      case Op::Cos: stack[top] = std::cos(stack[top]); break;
      case Op::Tan: stack[top] = std::tan(stack[top]); break;
      case Op::Asin: stack[top] = std::asin(stack[top]); break;
      case Op::Acos: stack[top] = std::acos(stack[top]); break;
      case Op::Atan: stack[top] = std::atan(stack[top]); break;
      case Op::Sinh: stack[top] = std::sinh(stack[top]); break;
      case Op::Cosh: stack[top] = std::cosh(stack[top]); break;
      case Op::Tanh: stack[top] = std::tanh(stack[top]); break;
      case Op::Asinh: stack[top] = std::asinh(stack[top]); break;
      case Op::Acosh: stack[top] = std::acosh(stack[top]); break;
      case Op::Atanh: stack[top] = std::atanh(stack[top]); break;
      case Op::Exp: stack[top] = std::exp(stack[top]); break;
      case Op::Log: stack[top] = std::log(stack[top]); break;
      case Op::Sqrt: stack[top] = std::sqrt(stack[top]); break;
      case Op::Abs: stack[top] = std::abs(stack[top]); break;
      case Op::Min: --top; stack[top] = std::min(stack[top], stack[top + 1]); break;
      case Op::Max: --top; stack[top] = std::max(stack[top], stack[top + 1]); break;
    }
  }
  return stack[0];
}

}  // namespace geolab
