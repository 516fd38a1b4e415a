#include "psc/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>

namespace psc {

ExprPtr make_num(double v) {
    auto e = std::make_shared<Expr>();
    e->op = ExprOp::Num;
    e->num = v;
    return e;
}

ExprPtr make_var(int index) {
    auto e = std::make_shared<Expr>();
    e->op = ExprOp::Var;
    e->var = index;
    return e;
}

ExprPtr make_unary(ExprOp op, ExprPtr a) {
    // fold literal negation so "(-1)" round-trips as a single number node
    if (op == ExprOp::Neg && a && a->op == ExprOp::Num) {
        auto e = std::make_shared<Expr>();
        e->op = ExprOp::Num;
        e->num = -a->num;
        e->offset = a->offset;
        return e;
    }
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->a = std::move(a);
    if (e->a) e->offset = e->a->offset;
    return e;
}

ExprPtr make_binary(ExprOp op, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->a = std::move(a);
    e->b = std::move(b);
    if (e->a) e->offset = e->a->offset;
    return e;
}

namespace {

enum class Tok { Num, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
    Tok kind;
    double num = 0.0;
    std::string text;
    size_t offset = 0;
};

std::vector<Token> tokenize(const std::string& s) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
        size_t start = i;
        if (std::isdigit(static_cast<unsigned char>(c))) {
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            if (i < s.size() && s[i] == '.') {
                ++i;
                if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i])))
                    throw ExprError("malformed numeric literal", start);
                while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            }
            if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
                size_t j = i + 1;
                if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
                if (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
                    i = j;
                    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
                }
            }
            if (i < s.size() && s[i] == '.')
                throw ExprError("malformed numeric literal", start);
            out.push_back({Tok::Num, std::stod(s.substr(start, i - start)), "", start});
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_'))
                ++i;
            out.push_back({Tok::Ident, 0.0, s.substr(start, i - start), start});
            continue;
        }
        Tok k;
        switch (c) {
            case '+': k = Tok::Plus; break;
            case '-': k = Tok::Minus; break;
            case '*': k = Tok::Star; break;
            case '/': k = Tok::Slash; break;
            case '^': k = Tok::Caret; break;
            case '(': k = Tok::LParen; break;
            case ')': k = Tok::RParen; break;
            default:
                throw ExprError(std::string("unexpected character '") + c + "'", start);
        }
        out.push_back({k, 0.0, "", start});
        ++i;
    }
    out.push_back({Tok::End, 0.0, "", s.size()});
    return out;
}

const std::map<std::string, ExprOp>& function_table() {
    static const std::map<std::string, ExprOp> t = {
        {"exp", ExprOp::Exp},   {"log", ExprOp::Log},  {"sin", ExprOp::Sin},
        {"cos", ExprOp::Cos},   {"tan", ExprOp::Tan},  {"sinh", ExprOp::Sinh},
        {"cosh", ExprOp::Cosh}, {"tanh", ExprOp::Tanh},{"sqrt", ExprOp::Sqrt},
        {"abs", ExprOp::Abs},
    };
    return t;
}

ExprPtr make_num_at(double v, size_t off) {
    auto e = std::make_shared<Expr>();
    e->op = ExprOp::Num;
    e->num = v;
    e->offset = off;
    return e;
}

ExprPtr make_var_at(int index, size_t off) {
    auto e = std::make_shared<Expr>();
    e->op = ExprOp::Var;
    e->var = index;
    e->offset = off;
    return e;
}

struct Parser {
    const std::vector<Token>& toks;
    const std::vector<std::string>& vars;
    size_t pos = 0;

    const Token& peek() const { return toks[pos]; }
    Token next() { return toks[pos++]; }
    void expect(Tok k, const char* what) {
        if (peek().kind != k)
            throw ExprError(std::string("expected ") + what, peek().offset);
        ++pos;
    }

    ExprPtr parse_sum() {
        ExprPtr e = parse_product();
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            Tok k = next().kind;
            ExprPtr rhs = parse_product();
            e = make_binary(k == Tok::Plus ? ExprOp::Add : ExprOp::Sub, e, rhs);
        }
        return e;
    }

    ExprPtr parse_product() {
        ExprPtr e = parse_unary();
        while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
            Tok k = next().kind;
            ExprPtr rhs = parse_unary();
            e = make_binary(k == Tok::Star ? ExprOp::Mul : ExprOp::Div, e, rhs);
        }
        return e;
    }

    ExprPtr parse_unary() {
        if (peek().kind == Tok::Minus) {
            size_t off = next().offset;
            ExprPtr inner = parse_unary();
            // fold literal negation; the tree node starts at the sign
            if (inner->op == ExprOp::Num) return make_num_at(-inner->num, off);
            auto e = std::make_shared<Expr>();
            e->op = ExprOp::Neg;
            e->a = std::move(inner);
            e->offset = off;
            return e;
        }
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_atom();
        if (peek().kind == Tok::Caret) {
            ++pos;
            // right associative; exponent may carry its own unary minus
            ExprPtr expo = peek().kind == Tok::Minus
                               ? [&] { ++pos; return make_unary(ExprOp::Neg, parse_power()); }()
                               : parse_power();
            return make_binary(ExprOp::Pow, base, expo);
        }
        return base;
    }

    ExprPtr parse_atom() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Num:
                return make_num_at(next().num, t.offset);
            case Tok::Ident: {
                Token id = next();
                auto fit = function_table().find(id.text);
                if (fit != function_table().end()) {
                    expect(Tok::LParen, "'(' after function name");
                    ExprPtr arg = parse_sum();
                    expect(Tok::RParen, "')'");
                    auto e = std::make_shared<Expr>();
                    e->op = fit->second;
                    e->a = arg;
                    e->offset = id.offset;
                    return e;
                }
                for (size_t v = 0; v < vars.size(); ++v) {
                    if (vars[v] == id.text)
                        return make_var_at(static_cast<int>(v), id.offset);
                }
                throw ExprError("unknown identifier '" + id.text + "'", id.offset);
            }
            case Tok::LParen: {
                ++pos;
                ExprPtr e = parse_sum();
                expect(Tok::RParen, "')'");
                return e;
            }
            default:
                throw ExprError("expected a value", t.offset);
        }
    }
};

ExprPtr parse_tokens(const std::vector<Token>& toks, const std::vector<std::string>& vars) {
    Parser p{toks, vars};
    ExprPtr e = p.parse_sum();
    if (p.peek().kind != Tok::End)
        throw ExprError("unexpected trailing input", p.peek().offset);
    return e;
}

std::string format_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int precedence(ExprOp op) {
    switch (op) {
        case ExprOp::Add: case ExprOp::Sub: return 1;
        case ExprOp::Mul: case ExprOp::Div: return 2;
        case ExprOp::Neg: return 3;
        case ExprOp::Pow: return 4;
        default: return 5;
    }
}

const char* function_name(ExprOp op) {
    switch (op) {
        case ExprOp::Exp: return "exp";   case ExprOp::Log: return "log";
        case ExprOp::Sin: return "sin";   case ExprOp::Cos: return "cos";
        case ExprOp::Tan: return "tan";   case ExprOp::Sinh: return "sinh";
        case ExprOp::Cosh: return "cosh"; case ExprOp::Tanh: return "tanh";
        case ExprOp::Sqrt: return "sqrt"; case ExprOp::Abs: return "abs";
        default: return nullptr;
    }
}

void print_rec(const ExprPtr& e, const std::vector<std::string>& vars,
               int parent_prec, bool right_side, std::string& out) {
    int prec = precedence(e->op);
    // parenthesize when weaker than context, or equal on the wrong side
    bool parens = prec < parent_prec ||
                  (prec == parent_prec && right_side && prec != 4) ||
                  (prec == parent_prec && !right_side && prec == 4);
    switch (e->op) {
        case ExprOp::Num: {
            if (e->num < 0.0 && parent_prec > 0) {
                out += "(" + format_num(e->num) + ")";
            } else {
                out += format_num(e->num);
            }
            return;
        }
        case ExprOp::Var:
            out += vars[e->var];
            return;
        case ExprOp::Neg:
            if (parens) out += "(";
            out += "-";
            print_rec(e->a, vars, prec, true, out);
            if (parens) out += ")";
            return;
        case ExprOp::Add: case ExprOp::Sub:
        case ExprOp::Mul: case ExprOp::Div: case ExprOp::Pow: {
            if (parens) out += "(";
            const char* sym = e->op == ExprOp::Add ? "+"
                            : e->op == ExprOp::Sub ? "-"
                            : e->op == ExprOp::Mul ? "*"
                            : e->op == ExprOp::Div ? "/" : "^";
            print_rec(e->a, vars, prec, false, out);
            out += sym;
            print_rec(e->b, vars, prec, true, out);
            if (parens) out += ")";
            return;
        }
        default: {
            out += function_name(e->op);
            out += "(";
            print_rec(e->a, vars, 0, false, out);
            out += ")";
            return;
        }
    }
}

[[noreturn]] void domain_error(const char* what, const ExprPtr& e,
                               const std::vector<std::string>& vars) {
    throw ExprError(std::string(what) + " in subexpression '" +
                        print_expr(e, vars) + "'",
                    e->offset);
}

bool constant_integer(const ExprPtr& e, long long& out) {
    if (e->op == ExprOp::Num) {
        double r = std::round(e->num);
        if (std::fabs(e->num - r) < 1e-12 && std::fabs(r) < 64) {
            out = static_cast<long long>(r);
            return true;
        }
    }
    if (e->op == ExprOp::Neg && constant_integer(e->a, out)) {
        out = -out;
        return true;
    }
    return false;
}

} // namespace

ExprPtr parse_expr(const std::string& src, const std::vector<std::string>& vars) {
    return parse_tokens(tokenize(src), vars);
}

ExprPtr parse_expr_with_params(const std::string& src,
                               const std::vector<std::string>& vars,
                               const std::vector<std::pair<std::string, double>>& params) {
    std::vector<Token> toks = tokenize(src);
    for (auto& t : toks) {
        if (t.kind != Tok::Ident) continue;
        for (const auto& [name, value] : params) {
            if (t.text == name) {
                t = {Tok::Num, value, "", t.offset};
                break;
            }
        }
    }
    return parse_tokens(toks, vars);
}

std::string print_expr(const ExprPtr& e, const std::vector<std::string>& vars) {
    std::string out;
    print_rec(e, vars, 0, false, out);
    return out;
}

ExprPtr substitute_var(const ExprPtr& e, int var, double value) {
    switch (e->op) {
        case ExprOp::Num: return e;
        case ExprOp::Var: return e->var == var ? make_num(value) : e;
        default: {
            ExprPtr a = e->a ? substitute_var(e->a, var, value) : nullptr;
            ExprPtr b = e->b ? substitute_var(e->b, var, value) : nullptr;
            if (a == e->a && b == e->b) return e;
            auto r = std::make_shared<Expr>(*e);
            r->a = a;
            r->b = b;
            return r;
        }
    }
}

ExprPtr shift_vars_above(const ExprPtr& e, int dropped) {
    switch (e->op) {
        case ExprOp::Num: return e;
        case ExprOp::Var: {
            if (e->var <= dropped) return e;
            auto r = std::make_shared<Expr>(*e);
            r->var = e->var - 1;
            return r;
        }
        default: {
            ExprPtr a = e->a ? shift_vars_above(e->a, dropped) : nullptr;
            ExprPtr b = e->b ? shift_vars_above(e->b, dropped) : nullptr;
            if (a == e->a && b == e->b) return e;
            auto r = std::make_shared<Expr>(*e);
            r->a = a;
            r->b = b;
            return r;
        }
    }
}

ExprPtr conformal_scale(const ExprPtr& e, const ExprPtr& phi) {
    return make_binary(ExprOp::Mul,
                       make_unary(ExprOp::Exp, make_binary(ExprOp::Mul, make_num(2.0), phi)),
                       e);
}

bool expr_equal(const ExprPtr& x, const ExprPtr& y) {
    if (x == y) return true;
    if (!x || !y || x->op != y->op) return false;
    switch (x->op) {
        case ExprOp::Num: return x->num == y->num;
        case ExprOp::Var: return x->var == y->var;
        default:
            return expr_equal(x->a, y->a) &&
                   (x->b == y->b || expr_equal(x->b, y->b));
    }
}

bool is_zero(const ExprPtr& e) { return e->op == ExprOp::Num && e->num == 0.0; }

double eval_expr(const ExprPtr& e, const std::vector<double>& x,
                 const std::vector<std::string>& vars) {
    switch (e->op) {
        case ExprOp::Num: return e->num;
        case ExprOp::Var: return x[e->var];
        case ExprOp::Add: return eval_expr(e->a, x, vars) + eval_expr(e->b, x, vars);
        case ExprOp::Sub: return eval_expr(e->a, x, vars) - eval_expr(e->b, x, vars);
        case ExprOp::Mul: return eval_expr(e->a, x, vars) * eval_expr(e->b, x, vars);
        case ExprOp::Div: {
            double d = eval_expr(e->b, x, vars);
            if (d == 0.0) domain_error("division by zero", e, vars);
            return eval_expr(e->a, x, vars) / d;
        }
        case ExprOp::Pow: {
            double base = eval_expr(e->a, x, vars);
            long long k;
            if (constant_integer(e->b, k)) {
                if (base == 0.0 && k < 0) domain_error("division by zero", e, vars);
                return std::pow(base, static_cast<double>(k));
            }
            if (base <= 0.0) domain_error("power of non-positive base", e, vars);
            return std::pow(base, eval_expr(e->b, x, vars));
        }
        case ExprOp::Neg: return -eval_expr(e->a, x, vars);
        case ExprOp::Exp: return std::exp(eval_expr(e->a, x, vars));
        case ExprOp::Log: {
            double a = eval_expr(e->a, x, vars);
            if (a <= 0.0) domain_error("log of non-positive value", e, vars);
            return std::log(a);
        }
        case ExprOp::Sin: return std::sin(eval_expr(e->a, x, vars));
        case ExprOp::Cos: return std::cos(eval_expr(e->a, x, vars));
        case ExprOp::Tan: return std::tan(eval_expr(e->a, x, vars));
        case ExprOp::Sinh: return std::sinh(eval_expr(e->a, x, vars));
        case ExprOp::Cosh: return std::cosh(eval_expr(e->a, x, vars));
        case ExprOp::Tanh: return std::tanh(eval_expr(e->a, x, vars));
        case ExprOp::Sqrt: {
            double a = eval_expr(e->a, x, vars);
            if (a < 0.0) domain_error("sqrt of negative value", e, vars);
            return std::sqrt(a);
        }
        case ExprOp::Abs: return std::fabs(eval_expr(e->a, x, vars));
    }
    domain_error("unhandled operator", e, vars);
}

Jet2 eval_jet2(const ExprPtr& e, const std::vector<double>& x,
               const std::vector<std::string>& vars) {
    int n = static_cast<int>(x.size());
    switch (e->op) {
        case ExprOp::Num: return Jet2::constant(n, e->num);
        case ExprOp::Var: return Jet2::variable(n, e->var, x[e->var]);
        case ExprOp::Add: return eval_jet2(e->a, x, vars) + eval_jet2(e->b, x, vars);
        case ExprOp::Sub: return eval_jet2(e->a, x, vars) - eval_jet2(e->b, x, vars);
        case ExprOp::Mul: return eval_jet2(e->a, x, vars) * eval_jet2(e->b, x, vars);
        case ExprOp::Div: {
            Jet2 d = eval_jet2(e->b, x, vars);
            if (d.v == 0.0) domain_error("division by zero", e, vars);
            return eval_jet2(e->a, x, vars) * inverse(d);
        }
        case ExprOp::Pow: {
            Jet2 base = eval_jet2(e->a, x, vars);
            long long k;
            if (constant_integer(e->b, k)) {
                if (base.v == 0.0 && k < 0) domain_error("division by zero", e, vars);
                return powi(base, k);
            }
            if (base.v <= 0.0) domain_error("power of non-positive base", e, vars);
            return pow(base, eval_jet2(e->b, x, vars));
        }
        case ExprOp::Neg: return -eval_jet2(e->a, x, vars);
        case ExprOp::Exp: return exp(eval_jet2(e->a, x, vars));
        case ExprOp::Log: {
            Jet2 a = eval_jet2(e->a, x, vars);
            if (a.v <= 0.0) domain_error("log of non-positive value", e, vars);
            return log(a);
        }
        case ExprOp::Sin: return sin(eval_jet2(e->a, x, vars));
        case ExprOp::Cos: return cos(eval_jet2(e->a, x, vars));
        case ExprOp::Tan: return tan(eval_jet2(e->a, x, vars));
        case ExprOp::Sinh: return sinh(eval_jet2(e->a, x, vars));
        case ExprOp::Cosh: return cosh(eval_jet2(e->a, x, vars));
        case ExprOp::Tanh: return tanh(eval_jet2(e->a, x, vars));
        case ExprOp::Sqrt: {
            Jet2 a = eval_jet2(e->a, x, vars);
            if (a.v < 0.0) domain_error("sqrt of negative value", e, vars);
            if (a.v == 0.0) domain_error("sqrt derivative singular at zero", e, vars);
            return sqrt(a);
        }
        case ExprOp::Abs: {
            Jet2 a = eval_jet2(e->a, x, vars);
            if (a.v == 0.0) domain_error("abs not differentiable at zero", e, vars);
            return abs(a);
        }
    }
    domain_error("unhandled operator", e, vars);
}

} // namespace psc
