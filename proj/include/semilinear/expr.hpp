#pragma once

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semilinear/error.hpp"

namespace semilinear {

/// Values for the free variables of an expression. Unset means unbound.
struct Bindings {
    std::optional<double> x;
    std::optional<double> y;
    std::optional<double> t;
};

/// Parsed arithmetic expression over the variables x, y, t.
///
/// Grammar (loosest to tightest):
///   comparison  <  <=  >  >=        (yield 1 or 0)
///   additive    +  -
///   product     *  /
///   unary minus
///   power       ^                   (right associative)
///   primary     number | x | y | t | fn(args) | ( expr )
/// with fn one of exp, log, sqrt, abs (one argument) and min, max, pow (two).
///
/// Expressions are immutable; copies share the tree and evaluation is reentrant.
class Expr {
public:
    enum class Var : int { x = 0, y = 1, t = 2 };

    Expr() = default;

    static Expr parse(std::string_view text);
    static Expr constant(double v);

    /// Evaluate; throws DomainError on unbound variables or when the value
    /// would be NaN/inf or leave the real domain.
    double eval(const Bindings& b) const;
    double eval(double x, double y, double t) const { return eval(Bindings{x, y, t}); }

    /// Fully parenthesized text that parses back to an equivalent tree.
    std::string print() const;

    const std::string& source() const { return source_; }
    bool uses(Var v) const { return used_[static_cast<int>(v)]; }
    bool empty() const { return !nodes_; }

private:
    enum class Kind : unsigned char {
        constant, variable, negate,
        add, sub, mul, div, pow,
        lt, le, gt, ge,
        fn_exp, fn_log, fn_sqrt, fn_abs, fn_min, fn_max, fn_pow,
    };

    struct Node {
        Kind kind;
        double value = 0.0;  // constant
        int var = 0;         // variable
        int lhs = -1;
        int rhs = -1;
    };

    class Parser;

    double eval_node(int id, const std::array<double, 3>& vars, const std::array<bool, 3>& bound) const;
    void print_node(int id, std::string& out) const;

    std::shared_ptr<const std::vector<Node>> nodes_;
    int root_ = -1;
    std::string source_;
    std::array<bool, 3> used_{false, false, false};
};

class Expr::Parser {
public:
    explicit Parser(std::string_view text) : text_(text) { advance(); }

    std::vector<Node> nodes;
    std::array<bool, 3> used{false, false, false};

    int parse_all() {
        const int root = parse_expr(0);
        if (tok_.kind != Tok::end) fail("unexpected '" + std::string(tok_.text) + "'");
        return root;
    }

private:
    enum class Tok { number, ident, op, lparen, rparen, comma, end };

    struct Token {
        Tok kind = Tok::end;
        std::string_view text;
        std::size_t offset = 0;
        double number = 0.0;
    };

    [[noreturn]] void fail(const std::string& what) const { throw ParseError("expr: " + what, tok_.offset); }

    void advance() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        tok_ = Token{};
        tok_.offset = pos_;
        if (pos_ >= text_.size()) {
            tok_.kind = Tok::end;
            tok_.text = "end of input";
            return;
        }
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t end = pos_;
            while (end < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.'))
                ++end;
            if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
                std::size_t e = end + 1;
                if (e < text_.size() && (text_[e] == '+' || text_[e] == '-')) ++e;
                if (e < text_.size() && std::isdigit(static_cast<unsigned char>(text_[e]))) {
                    while (e < text_.size() && std::isdigit(static_cast<unsigned char>(text_[e]))) ++e;
                    end = e;
                }
            }
            tok_.kind = Tok::number;
            tok_.text = text_.substr(pos_, end - pos_);
            const auto res = std::from_chars(tok_.text.data(), tok_.text.data() + tok_.text.size(), tok_.number);
            if (res.ec != std::errc() || res.ptr != tok_.text.data() + tok_.text.size())
                fail("malformed number '" + std::string(tok_.text) + "'");
            pos_ = end;
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos_;
            while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
                ++end;
            tok_.kind = Tok::ident;
            tok_.text = text_.substr(pos_, end - pos_);
            pos_ = end;
            return;
        }
        std::size_t len = 1;
        switch (c) {
        case '(': tok_.kind = Tok::lparen; break;
        case ')': tok_.kind = Tok::rparen; break;
        case ',': tok_.kind = Tok::comma; break;
        case '+': case '-': case '*': case '/': case '^': tok_.kind = Tok::op; break;
        case '<': case '>':
            tok_.kind = Tok::op;
            if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') len = 2;
            break;
        default:
            fail(std::string("unexpected character '") + c + "'");
        }
        tok_.text = text_.substr(pos_, len);
        pos_ += len;
    }

    int add(Node n) {
        nodes.push_back(n);
        return static_cast<int>(nodes.size()) - 1;
    }

    // Left binding power of an infix operator; 0 when tok_ is not infix.
    int infix_power(Kind& kind, bool& right_assoc) const {
        right_assoc = false;
        if (tok_.kind != Tok::op) return 0;
        const std::string_view t = tok_.text;
        if (t == "<") { kind = Kind::lt; return 10; }
        if (t == "<=") { kind = Kind::le; return 10; }
        if (t == ">") { kind = Kind::gt; return 10; }
        if (t == ">=") { kind = Kind::ge; return 10; }
        if (t == "+") { kind = Kind::add; return 20; }
        if (t == "-") { kind = Kind::sub; return 20; }
        if (t == "*") { kind = Kind::mul; return 30; }
        if (t == "/") { kind = Kind::div; return 30; }
        if (t == "^") { kind = Kind::pow; right_assoc = true; return 50; }
        return 0;
    }

    int parse_expr(int min_power) {
        int lhs = parse_prefix();
        for (;;) {
            Kind kind{};
            bool right = false;
            const int power = infix_power(kind, right);
            if (power == 0 || power <= min_power) break;
            advance();
            const int rhs = parse_expr(right ? power - 1 : power);
            lhs = add(Node{kind, 0.0, 0, lhs, rhs});
        }
        return lhs;
    }

    int parse_prefix() {
        const Token t = tok_;
        switch (t.kind) {
        case Tok::number:
            advance();
            return add(Node{Kind::constant, t.number});
        case Tok::lparen: {
            advance();
            const int inner = parse_expr(0);
            expect(Tok::rparen, "')'");
            return inner;
        }
        case Tok::op:
            if (t.text == "-") {
                advance();
                // binds tighter than * but looser than ^, so -a^b == -(a^b)
                const int operand = parse_expr(40);
                return add(Node{Kind::negate, 0.0, 0, operand});
            }
            fail("unexpected '" + std::string(t.text) + "'");
        case Tok::ident:
            return parse_ident();
        default:
            fail("unexpected " + std::string(t.text));
        }
    }

    int parse_ident() {
        const Token t = tok_;
        advance();
        if (t.text == "x" || t.text == "y" || t.text == "t") {
            const int v = t.text == "x" ? 0 : (t.text == "y" ? 1 : 2);
            used[v] = true;
            return add(Node{Kind::variable, 0.0, v});
        }
        struct Fn { std::string_view name; Kind kind; int arity; };
        static constexpr Fn fns[] = {
            {"exp", Kind::fn_exp, 1}, {"log", Kind::fn_log, 1}, {"sqrt", Kind::fn_sqrt, 1},
            {"abs", Kind::fn_abs, 1}, {"min", Kind::fn_min, 2}, {"max", Kind::fn_max, 2},
            {"pow", Kind::fn_pow, 2},
        };
        for (const Fn& f : fns) {
            if (f.name != t.text) continue;
            if (tok_.kind != Tok::lparen) fail("expected '(' after " + std::string(f.name));
            advance();
            Node n{f.kind};
            n.lhs = parse_expr(0);
            if (f.arity == 2) {
                expect(Tok::comma, "','");
                n.rhs = parse_expr(0);
            }
            expect(Tok::rparen, "')'");
            return add(n);
        }
        throw ParseError("expr: unknown identifier '" + std::string(t.text) + "'", t.offset);
    }

    void expect(Tok kind, const char* what) {
        if (tok_.kind != kind) fail(std::string("expected ") + what);
        advance();
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    Token tok_;
};

inline Expr Expr::parse(std::string_view text) {
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos)
        throw ParseError("expr: empty expression", 0);
    Parser p(text);
    Expr e;
    e.root_ = p.parse_all();
    e.used_ = p.used;
    e.nodes_ = std::make_shared<const std::vector<Node>>(std::move(p.nodes));
    e.source_ = std::string(text);
    return e;
}

inline Expr Expr::constant(double v) {
    Expr e;
    e.nodes_ = std::make_shared<const std::vector<Node>>(std::vector<Node>{Node{Kind::constant, v}});
    e.root_ = 0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    e.source_ = buf;
    return e;
}

inline double Expr::eval(const Bindings& b) const {
    if (!nodes_) throw DomainError("expr: evaluating an empty expression");
    const std::array<double, 3> vars{b.x.value_or(0.0), b.y.value_or(0.0), b.t.value_or(0.0)};
    const std::array<bool, 3> bound{b.x.has_value(), b.y.has_value(), b.t.has_value()};
    return eval_node(root_, vars, bound);
}

inline double Expr::eval_node(int id, const std::array<double, 3>& vars, const std::array<bool, 3>& bound) const {
    const Node& n = (*nodes_)[id];
    auto arg = [&](int child) { return eval_node(child, vars, bound); };
    auto finite = [&](double v, const char* op) {
        if (!std::isfinite(v)) throw DomainError(std::string("expr: non-finite result from ") + op + " in '" + source_ + "'");
        return v;
    };
    auto power = [&](double base, double ex) {
        if (base < 0.0 && ex != std::floor(ex))
            throw DomainError("expr: negative base to non-integer power in '" + source_ + "'");
        if (base == 0.0 && ex < 0.0) throw DomainError("expr: zero to negative power in '" + source_ + "'");
        return finite(std::pow(base, ex), "pow");
    };
    switch (n.kind) {
    case Kind::constant: return n.value;
    case Kind::variable:
        if (!bound[n.var]) {
            static constexpr const char* names[] = {"x", "y", "t"};
            throw DomainError(std::string("expr: unbound variable ") + names[n.var] + " in '" + source_ + "'");
        }
        return vars[n.var];
    case Kind::negate: return -arg(n.lhs);
    case Kind::add: return finite(arg(n.lhs) + arg(n.rhs), "+");
    case Kind::sub: return finite(arg(n.lhs) - arg(n.rhs), "-");
    case Kind::mul: return finite(arg(n.lhs) * arg(n.rhs), "*");
    case Kind::div: {
        const double num = arg(n.lhs);
        const double den = arg(n.rhs);
        if (den == 0.0) throw DomainError("expr: division by zero in '" + source_ + "'");
        return finite(num / den, "/");
    }
    case Kind::pow: return power(arg(n.lhs), arg(n.rhs));
    case Kind::fn_pow: return power(arg(n.lhs), arg(n.rhs));
    case Kind::lt: return arg(n.lhs) < arg(n.rhs) ? 1.0 : 0.0;
    case Kind::le: return arg(n.lhs) <= arg(n.rhs) ? 1.0 : 0.0;
    case Kind::gt: return arg(n.lhs) > arg(n.rhs) ? 1.0 : 0.0;
    case Kind::ge: return arg(n.lhs) >= arg(n.rhs) ? 1.0 : 0.0;
    case Kind::fn_exp: return finite(std::exp(arg(n.lhs)), "exp");
    case Kind::fn_log: {
        const double v = arg(n.lhs);
        if (!(v > 0.0)) throw DomainError("expr: log of nonpositive value in '" + source_ + "'");
        return std::log(v);
    }
    case Kind::fn_sqrt: {
        const double v = arg(n.lhs);
        if (v < 0.0) throw DomainError("expr: sqrt of negative value in '" + source_ + "'");
        return std::sqrt(v);
    }
    case Kind::fn_abs: return std::abs(arg(n.lhs));
    case Kind::fn_min: return std::min(arg(n.lhs), arg(n.rhs));
    case Kind::fn_max: return std::max(arg(n.lhs), arg(n.rhs));
    }
    throw DomainError("expr: corrupt expression tree");
}

inline std::string Expr::print() const {
    std::string out;
    if (nodes_) print_node(root_, out);
    return out;
}

inline void Expr::print_node(int id, std::string& out) const {
    const Node& n = (*nodes_)[id];
    auto binary = [&](const char* op) {
        out += '(';
        print_node(n.lhs, out);
        out += op;
        print_node(n.rhs, out);
        out += ')';
    };
    auto call = [&](const char* name) {
        out += name;
        out += '(';
        print_node(n.lhs, out);
        if (n.rhs >= 0) {
            out += ", ";
            print_node(n.rhs, out);
        }
        out += ')';
    };
    switch (n.kind) {
    case Kind::constant: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
        out += buf;
        return;
    }
    case Kind::variable: out += "xyt"[n.var]; return;
    case Kind::negate:
        out += "(-";
        print_node(n.lhs, out);
        out += ')';
        return;
    case Kind::add: binary(" + "); return;
    case Kind::sub: binary(" - "); return;
    case Kind::mul: binary(" * "); return;
    case Kind::div: binary(" / "); return;
    case Kind::pow: binary("^"); return;
    case Kind::lt: binary(" < "); return;
    case Kind::le: binary(" <= "); return;
    case Kind::gt: binary(" > "); return;
    case Kind::ge: binary(" >= "); return;
    case Kind::fn_exp: call("exp"); return;
    case Kind::fn_log: call("log"); return;
    case Kind::fn_sqrt: call("sqrt"); return;
    case Kind::fn_abs: call("abs"); return;
    case Kind::fn_min: call("min"); return;
    case Kind::fn_max: call("max"); return;
    case Kind::fn_pow: call("pow"); return;
    }
}

} // namespace semilinear
