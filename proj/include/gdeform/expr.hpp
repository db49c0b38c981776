#pragma once

// A small smooth-expression language. Manifests use it for metric
// components, scalar fields and domain constraints.
//
// Grammar (whitespace insensitive):
//   expr    := term (('+'|'-') term)*
//   term    := factor (('*'|'/') factor)*
//   factor  := '-' factor | power
//   power   := primary ('^' factor)?          -- '^' right-associative,
//                                                unary '-' binds looser
//   primary := number | ident | ident '(' expr ')' | '(' expr ')'
//
// Identifiers are [A-Za-z_][A-Za-z0-9_]*. "pi" and "e" are built-in
// constants; sin, cos, tan, exp, log, sqrt the built-in functions. The
// exponent of '^' must be a constant expression so that smoothness and
// jet composition stay well defined.

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gdeform/errors.hpp"
#include "gdeform/jet.hpp"

namespace gdeform {

enum class FnId { sin, cos, tan, exp, log, sqrt };

inline const char* fn_name(FnId f) {
    switch (f) {
        case FnId::sin: return "sin";
        case FnId::cos: return "cos";
        case FnId::tan: return "tan";
        case FnId::exp: return "exp";
        case FnId::log: return "log";
        default: return "sqrt";
    }
}

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Kind { number, var, constant, neg, add, sub, mul, div, pow, call };

    Kind kind;
    double number = 0.0;      // number
    std::string name;         // var ("x1"), constant ("pi"/"e")
    int var_index = -1;       // var: resolved slot after bind()
    FnId fn = FnId::sin;      // call
    ExprPtr a, b;             // operands
};

inline ExprPtr make_number(double v) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::number;
    e->number = v;
    return e;
}

inline ExprPtr make_var(std::string name) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::var;
    e->name = std::move(name);
    return e;
}

inline ExprPtr make_const(std::string name) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::constant;
    e->name = std::move(name);
    return e;
}

inline ExprPtr make_unary(ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::neg;
    e->a = std::move(a);
    return e;
}

inline ExprPtr make_binary(Expr::Kind k, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
}

inline ExprPtr make_call(FnId fn, ExprPtr arg) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::call;
    e->fn = fn;
    e->a = std::move(arg);
    return e;
}

inline bool structurally_equal(const Expr& x, const Expr& y) {
    if (x.kind != y.kind) return false;
    switch (x.kind) {
        case Expr::Kind::number: return x.number == y.number;
        case Expr::Kind::var: return x.name == y.name;
        case Expr::Kind::constant: return x.name == y.name;
        case Expr::Kind::neg: return structurally_equal(*x.a, *y.a);
        case Expr::Kind::call: return x.fn == y.fn && structurally_equal(*x.a, *y.a);
        default: return structurally_equal(*x.a, *y.a) && structurally_equal(*x.b, *y.b);
    }
}

inline bool contains_variable(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::var: return true;
        case Expr::Kind::number:
        case Expr::Kind::constant: return false;
        case Expr::Kind::neg:
        case Expr::Kind::call: return contains_variable(*e.a);
        default: return contains_variable(*e.a) || contains_variable(*e.b);
    }
}

namespace detail {

class Parser {
  public:
    explicit Parser(std::string_view text) : text_(text) {}

    ExprPtr run() {
        ExprPtr e = expr();
        skip_ws();
        if (pos_ != text_.size())
            throw ParseError("syntax error at offset " + std::to_string(pos_) +
                                 ": unexpected '" + std::string(1, text_[pos_]) + "'",
                             pos_, "operator or end of input");
        return e;
    }

  private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    ExprPtr expr() {
        ExprPtr e = term();
        for (;;) {
            char c = peek();
            if (c != '+' && c != '-') return e;
            ++pos_;
            e = make_binary(c == '+' ? Expr::Kind::add : Expr::Kind::sub, e, term());
        }
    }

    ExprPtr term() {
        ExprPtr e = factor();
        for (;;) {
            char c = peek();
            if (c != '*' && c != '/') return e;
            ++pos_;
            e = make_binary(c == '*' ? Expr::Kind::mul : Expr::Kind::div, e, factor());
        }
    }

    ExprPtr factor() {
        if (peek() == '-') {
            ++pos_;
            return make_unary(factor());
        }
        ExprPtr base = primary();
        if (peek() == '^') {
            std::size_t at = pos_;
            ++pos_;
            ExprPtr exponent = factor();
            if (contains_variable(*exponent))
                throw ParseError("syntax error at offset " + std::to_string(at) +
                                     ": exponent of '^' must be a constant expression",
                                 at, "constant exponent");
            return make_binary(Expr::Kind::pow, base, exponent);
        }
        return base;
    }

    ExprPtr primary() {
        char c = peek();
        std::size_t at = pos_;
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number(at);
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return ident(at);
        if (c == '(') {
            ++pos_;
            ExprPtr e = expr();
            expect(')');
            return e;
        }
        throw ParseError("syntax error at offset " + std::to_string(at) + ": expected a primary",
                         at, "number, identifier, '(' or '-'");
    }

    ExprPtr number(std::size_t at) {
        std::size_t end = pos_;
        bool dot = false;
        while (end < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[end])) || (!dot && text_[end] == '.'))) {
            dot |= text_[end] == '.';
            ++end;
        }
        // Exponent suffix only when followed by a digit (optionally signed),
        // so "2*e" still parses as the constant e.
        if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
            std::size_t p = end + 1;
            if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
            if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
                end = p;
                while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end])))
                    ++end;
            }
        }
        std::string tok(text_.substr(at, end - at));
        char* tail = nullptr;
        double v = std::strtod(tok.c_str(), &tail);
        if (tail == tok.c_str() || *tail != '\0')
            throw ParseError("syntax error at offset " + std::to_string(at) +
                                 ": malformed number '" + tok + "'",
                             at, "number");
        pos_ = end;
        return make_number(v);
    }

    ExprPtr ident(std::size_t at) {
        std::size_t end = pos_;
        while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) ||
                                      text_[end] == '_'))
            ++end;
        std::string name(text_.substr(at, end - at));
        pos_ = end;
        if (peek() == '(') {
            FnId fn;
            if (name == "sin") fn = FnId::sin;
            else if (name == "cos") fn = FnId::cos;
            else if (name == "tan") fn = FnId::tan;
            else if (name == "exp") fn = FnId::exp;
            else if (name == "log") fn = FnId::log;
            else if (name == "sqrt") fn = FnId::sqrt;
            else
                throw ParseError("unknown function '" + name + "' at offset " + std::to_string(at),
                                 at, "sin, cos, tan, exp, log or sqrt");
            ++pos_;
            ExprPtr arg = expr();
            expect(')');
            return make_call(fn, arg);
        }
        if (name == "pi" || name == "e") return make_const(name);
        return make_var(std::move(name));
    }

    void expect(char c) {
        if (peek() != c)
            throw ParseError("syntax error at offset " + std::to_string(pos_) + ": expected '" +
                                 std::string(1, c) + "'",
                             pos_, std::string(1, c));
        ++pos_;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace detail

inline ExprPtr parse(std::string_view text) { return detail::Parser(text).run(); }

/// Fully parenthesized canonical text; parse(format(a)) is structurally
/// equal to a.
inline std::string format(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::number: return detail::format_double(e.number);
        case Expr::Kind::var:
        case Expr::Kind::constant: return e.name;
        case Expr::Kind::neg: return "(-" + format(*e.a) + ")";
        case Expr::Kind::call: return std::string(fn_name(e.fn)) + "(" + format(*e.a) + ")";
        case Expr::Kind::add: return "(" + format(*e.a) + " + " + format(*e.b) + ")";
        case Expr::Kind::sub: return "(" + format(*e.a) + " - " + format(*e.b) + ")";
        case Expr::Kind::mul: return "(" + format(*e.a) + " * " + format(*e.b) + ")";
        case Expr::Kind::div: return "(" + format(*e.a) + " / " + format(*e.b) + ")";
        default: return "(" + format(*e.a) + " ^ " + format(*e.b) + ")";
    }
}

inline std::string format(const ExprPtr& e) { return format(*e); }

/// Resolve every Var against the coordinate list; returns a copy with
/// var_index filled in. Unbound names are an error.
inline ExprPtr bind(const ExprPtr& e, std::span<const std::string> coords) {
    switch (e->kind) {
        case Expr::Kind::number:
        case Expr::Kind::constant: return e;
        case Expr::Kind::var: {
            for (std::size_t i = 0; i < coords.size(); ++i)
                if (coords[i] == e->name) {
                    auto out = std::make_shared<Expr>(*e);
                    out->var_index = static_cast<int>(i);
                    return out;
                }
            throw EvalError("unbound variable '" + e->name + "'");
        }
        case Expr::Kind::neg:
        case Expr::Kind::call: {
            auto out = std::make_shared<Expr>(*e);
            out->a = bind(e->a, coords);
            return out;
        }
        default: {
            auto out = std::make_shared<Expr>(*e);
            out->a = bind(e->a, coords);
            out->b = bind(e->b, coords);
            return out;
        }
    }
}

namespace detail {

// Constant subexpressions (exponents of '^') never contain variables.
inline double eval_constant(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::number: return e.number;
        case Expr::Kind::constant: return e.name == "pi" ? M_PI : M_E;
        case Expr::Kind::neg: return -eval_constant(*e.a);
        case Expr::Kind::add: return eval_constant(*e.a) + eval_constant(*e.b);
        case Expr::Kind::sub: return eval_constant(*e.a) - eval_constant(*e.b);
        case Expr::Kind::mul: return eval_constant(*e.a) * eval_constant(*e.b);
        case Expr::Kind::div: return eval_constant(*e.a) / eval_constant(*e.b);
        case Expr::Kind::pow: return std::pow(eval_constant(*e.a), eval_constant(*e.b));
        case Expr::Kind::call: {
            double v = eval_constant(*e.a);
            switch (e.fn) {
                case FnId::sin: return std::sin(v);
                case FnId::cos: return std::cos(v);
                case FnId::tan: return std::tan(v);
                case FnId::exp: return std::exp(v);
                case FnId::log: return std::log(v);
                default: return std::sqrt(v);
            }
        }
        default: throw EvalError("variable in constant expression");
    }
}

inline bool integral_exponent(double r, int& n) {
    double rn = std::nearbyint(r);
    if (std::abs(r - rn) > 1e-12 || std::abs(rn) > 64) return false;
    n = static_cast<int>(rn);
    return true;
}

}  // namespace detail

/// Evaluate a bound expression over jets seeded at `point`.
inline Jet eval_jet_bound(const Expr& e, std::span<const double> point, int order) {
    int dim = static_cast<int>(point.size());
    switch (e.kind) {
        case Expr::Kind::number: return Jet::constant(e.number, dim, order);
        case Expr::Kind::constant:
            return Jet::constant(e.name == "pi" ? M_PI : M_E, dim, order);
        case Expr::Kind::var:
            if (e.var_index < 0) throw EvalError("unbound variable '" + e.name + "'");
            return Jet::variable(e.var_index, point[e.var_index], dim, order);
        case Expr::Kind::neg: return -eval_jet_bound(*e.a, point, order);
        case Expr::Kind::add:
            return eval_jet_bound(*e.a, point, order) + eval_jet_bound(*e.b, point, order);
        case Expr::Kind::sub:
            return eval_jet_bound(*e.a, point, order) - eval_jet_bound(*e.b, point, order);
        case Expr::Kind::mul:
            return eval_jet_bound(*e.a, point, order) * eval_jet_bound(*e.b, point, order);
        case Expr::Kind::div:
            return eval_jet_bound(*e.a, point, order) / eval_jet_bound(*e.b, point, order);
        case Expr::Kind::pow: {
            Jet base = eval_jet_bound(*e.a, point, order);
            double r = detail::eval_constant(*e.b);
            int n;
            if (detail::integral_exponent(r, n)) return powi(base, n);
            return pow(base, r);
        }
        default: {
            Jet arg = eval_jet_bound(*e.a, point, order);
            switch (e.fn) {
                case FnId::sin: return sin(arg);
                case FnId::cos: return cos(arg);
                case FnId::tan: return tan(arg);
                case FnId::exp: return exp(arg);
                case FnId::log: return log(arg);
                default: return sqrt(arg);
            }
        }
    }
}

/// Plain scalar evaluation (degree 0 only), sharing the domain checks.
/// This is the only evaluation path the finite-difference oracle uses.
inline double eval_scalar_bound(const Expr& e, std::span<const double> point) {
    switch (e.kind) {
        case Expr::Kind::number: return e.number;
        case Expr::Kind::constant: return e.name == "pi" ? M_PI : M_E;
        case Expr::Kind::var:
            if (e.var_index < 0) throw EvalError("unbound variable '" + e.name + "'");
            return point[e.var_index];
        case Expr::Kind::neg: return -eval_scalar_bound(*e.a, point);
        case Expr::Kind::add: return eval_scalar_bound(*e.a, point) + eval_scalar_bound(*e.b, point);
        case Expr::Kind::sub: return eval_scalar_bound(*e.a, point) - eval_scalar_bound(*e.b, point);
        case Expr::Kind::mul: return eval_scalar_bound(*e.a, point) * eval_scalar_bound(*e.b, point);
        case Expr::Kind::div: {
            double num = eval_scalar_bound(*e.a, point);
            double den = eval_scalar_bound(*e.b, point);
            if (std::abs(den) <= 1e-300)
                throw EvalError("division by (near-)zero value " + std::to_string(den));
            return num / den;
        }
        case Expr::Kind::pow: {
            double base = eval_scalar_bound(*e.a, point);
            double r = detail::eval_constant(*e.b);
            int n;
            if (detail::integral_exponent(r, n)) {
                if (n < 0 && std::abs(base) <= 1e-300)
                    throw EvalError("division by (near-)zero value in power");
                return std::pow(base, n);
            }
            if (!(base > 0.0))
                throw EvalError("pow: non-integer exponent requires positive base, got " +
                                std::to_string(base));
            return std::pow(base, r);
        }
        default: {
            double v = eval_scalar_bound(*e.a, point);
            switch (e.fn) {
                case FnId::sin: return std::sin(v);
                case FnId::cos: return std::cos(v);
                case FnId::tan:
                    if (std::abs(std::cos(v)) <= 1e-14)
                        throw EvalError("tan: argument " + std::to_string(v) +
                                        " too close to a pole");
                    return std::tan(v);
                case FnId::exp: return std::exp(v);
                case FnId::log:
                    if (!(v > 0.0))
                        throw EvalError("log: requires positive value, got " + std::to_string(v));
                    return std::log(v);
                default:
                    if (!(v > 0.0))
                        throw EvalError("sqrt: requires positive value, got " + std::to_string(v));
                    return std::sqrt(v);
            }
        }
    }
}

/// Convenience: bind against a coordinate list, then evaluate as a jet.
inline Jet eval_jet(const ExprPtr& ast, std::span<const std::string> coords,
                    std::span<const double> point, int order) {
    if (point.size() != coords.size())
        throw EvalError("point length " + std::to_string(point.size()) +
                        " does not match chart dimension " + std::to_string(coords.size()));
    return eval_jet_bound(*bind(ast, coords), point, order);
}

}  // namespace gdeform
