#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace geolab {

class ExprError : public std::runtime_error {
 public:
  explicit ExprError(const std::string& what) : std::runtime_error(what) {}
};

// Small arithmetic-expression interpreter used for user-supplied scalar
// functions (warping functions, boundary functions, metric coefficients).
//
// Grammar: + - * / ^ (right assoc), unary minus, parentheses, numeric
// literals, named variables, and the calls sin cos tan asin acos atan
// sinh cosh tanh asinh acosh atanh exp log sqrt abs pow(a,b) min(a,b)
// max(a,b). Constants: pi, e.
//
// Variables are bound to argument slots at parse time, so eval() is a flat
// stack-machine run with no lookups.
class Expr {
 public:
  enum class Op : int;

  Expr() = default;

  static Expr parse(const std::string& text, const std::vector<std::string>& vars);

  double eval(const double* args, int nargs) const;
  double eval(const std::vector<double>& args) const { return eval(args.data(), static_cast<int>(args.size())); }
  double operator()(double t) const { return eval(&t, 1); }

  int arity() const { return arity_; }
  const std::string& text() const { return text_; }
  bool valid() const { return !code_.empty(); }

 private:
  struct Instr {
    Op op;
    double value = 0.0;  // literal payload
    int slot = 0;        // variable payload
  };
  std::vector<Instr> code_;
  int arity_ = 0;
  int stack_need_ = 0;
  std::string text_;

  friend class ExprParser;
};

}  // namespace geolab
