#pragma once
// Closed-form expression language for metric components.
//
// Grammar (precedence low to high): + -  |  * /  |  unary -  |  ^ (right
// assoc, binds tighter than unary minus so -x^2 is -(x^2))  |  atoms.
// Functions: exp log sin cos tan sinh cosh tanh sqrt abs.

#include <memory>
#include <string>
#include <vector>

#include "psc/jet.hpp"

namespace psc {

// Parse or evaluation failure. `offset` is a byte offset into the source
// text; evaluation errors carry the offending subexpression instead.
struct ExprError : std::runtime_error {
    size_t offset;
    ExprError(const std::string& msg, size_t off)
        : std::runtime_error(msg), offset(off) {}
};

enum class ExprOp {
    Num, Var,
    Add, Sub, Mul, Div, Pow, Neg,
    Exp, Log, Sin, Cos, Tan, Sinh, Cosh, Tanh, Sqrt, Abs,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    ExprOp op;
    double num = 0.0;   // Num
    int var = -1;       // Var index into the coordinate list
    ExprPtr a, b;
    size_t offset = 0;  // source position, kept for error reporting
};

ExprPtr make_num(double v);
ExprPtr make_var(int index);
ExprPtr make_unary(ExprOp op, ExprPtr a);
ExprPtr make_binary(ExprOp op, ExprPtr a, ExprPtr b);

// Parses `src` against a fixed variable list; every identifier must match
// a variable or a function name.
ExprPtr parse_expr(const std::string& src, const std::vector<std::string>& vars);

// Tokenizes, replaces identifiers found in `params` by numeric literals,
// then parses. Substitution happens at token level, before any parsing.
ExprPtr parse_expr_with_params(const std::string& src,
                               const std::vector<std::string>& vars,
                               const std::vector<std::pair<std::string, double>>& params);

// Prints so that parse(print(e)) reproduces the tree.
std::string print_expr(const ExprPtr& e, const std::vector<std::string>& vars);

// Structural substitution var -> value (used to restrict metrics to slices).
ExprPtr substitute_var(const ExprPtr& e, int var, double value);

// Decrements every variable index above `dropped`, after a coordinate has
// been removed from the list.
ExprPtr shift_vars_above(const ExprPtr& e, int dropped);

// Multiplies by exp(2*phi): conformal rescale at expression level.
ExprPtr conformal_scale(const ExprPtr& e, const ExprPtr& phi);

bool expr_equal(const ExprPtr& x, const ExprPtr& y);
bool is_zero(const ExprPtr& e);

double eval_expr(const ExprPtr& e, const std::vector<double>& x,
                 const std::vector<std::string>& vars);

// Value, gradient and symmetric Hessian in one pass.
Jet2 eval_jet2(const ExprPtr& e, const std::vector<double>& x,
               const std::vector<std::string>& vars);

} // namespace psc
