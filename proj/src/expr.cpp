#include "parobs/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace parobs::expr {

enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Max, Exp, Abs };

struct Expression::Node {
    Op op;
    Real value = 0.0;
    int var = 0; // 0: x1, 1: x2, 2: t
    std::unique_ptr<Node> a, b;

    std::unique_ptr<Node> clone() const {
        auto n = std::make_unique<Node>();
        n->op = op;
        n->value = value;
        n->var = var;
        if (a) n->a = a->clone();
        if (b) n->b = b->clone();
        return n;
    }

    Real eval(Real x1, Real x2, Real t) const {
        switch (op) {
            case Op::Const: return value;
            case Op::Var: return var == 0 ? x1 : (var == 1 ? x2 : t);
            case Op::Add: return a->eval(x1, x2, t) + b->eval(x1, x2, t);
            case Op::Sub: return a->eval(x1, x2, t) - b->eval(x1, x2, t);
            case Op::Mul: return a->eval(x1, x2, t) * b->eval(x1, x2, t);
            case Op::Div: return a->eval(x1, x2, t) / b->eval(x1, x2, t);
            case Op::Pow: return std::pow(a->eval(x1, x2, t), b->eval(x1, x2, t));
            case Op::Neg: return -a->eval(x1, x2, t);
            case Op::Max: return std::max(a->eval(x1, x2, t), b->eval(x1, x2, t));
            case Op::Exp: return std::exp(a->eval(x1, x2, t));
            case Op::Abs: return std::abs(a->eval(x1, x2, t));
        }
        return 0.0;
    }
};

namespace {

using Node = Expression::Node;
using NodePtr = std::unique_ptr<Node>;

struct Parser {
    const std::string& s;
    size_t pos = 0;

    explicit Parser(const std::string& text) : s(text) {}

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    bool consume(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) { throw ExprError(msg, pos); }

    NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
        auto n = std::make_unique<Node>();
        n->op = op;
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }

    NodePtr parse_expression() {
        auto lhs = parse_term();
        for (;;) {
            skip_ws();
            if (consume('+'))
                lhs = make(Op::Add, std::move(lhs), parse_term());
            else if (consume('-'))
                lhs = make(Op::Sub, std::move(lhs), parse_term());
            else
                return lhs;
        }
    }

    NodePtr parse_term() {
        auto lhs = parse_unary();
        for (;;) {
            skip_ws();
            if (consume('*'))
                lhs = make(Op::Mul, std::move(lhs), parse_unary());
            else if (consume('/'))
                lhs = make(Op::Div, std::move(lhs), parse_unary());
            else
                return lhs;
        }
    }

    NodePtr parse_unary() {
        skip_ws();
        if (consume('-')) return make(Op::Neg, parse_unary());
        if (consume('+')) return parse_unary();
        return parse_power();
    }

    NodePtr parse_power() {
        auto base = parse_atom();
        skip_ws();
        if (consume('^')) return make(Op::Pow, std::move(base), parse_unary()); // right-assoc
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos >= s.size()) fail("unexpected end of expression");
        const char c = s[pos];
        if (consume('(')) {
            auto inner = parse_expression();
            if (!consume(')')) fail("missing closing parenthesis");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            char* end = nullptr;
            const Real v = std::strtod(s.c_str() + pos, &end);
            if (end == s.c_str() + pos) fail("malformed number");
            pos = size_t(end - s.c_str());
            auto n = make(Op::Const);
            n->value = v;
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            size_t start = pos;
            while (pos < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
                ++pos;
            const std::string name = s.substr(start, pos - start);
            if (name == "x" || name == "x1") return variable(0);
            if (name == "x2") return variable(1);
            if (name == "t") return variable(2);
            if (name == "max") {
                if (!consume('(')) fail("max expects two arguments");
                auto a = parse_expression();
                if (!consume(',')) fail("max expects two arguments");
                auto b = parse_expression();
                if (!consume(')')) fail("missing closing parenthesis");
                return make(Op::Max, std::move(a), std::move(b));
            }
            if (name == "exp" || name == "abs") {
                if (!consume('(')) fail(name + " expects one argument");
                auto a = parse_expression();
                if (!consume(')')) fail("missing closing parenthesis");
                return make(name == "exp" ? Op::Exp : Op::Abs, std::move(a));
            }
            pos = start;
            fail("unknown identifier '" + name + "'");
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr variable(int idx) {
        auto n = make(Op::Var);
        n->var = idx;
        return n;
    }
};

} // namespace

Expression::Expression() = default;
Expression::Expression(Expression&&) noexcept = default;
Expression& Expression::operator=(Expression&&) noexcept = default;
Expression::~Expression() = default;

Expression::Expression(const Expression& other) : text_(other.text_) {
    if (other.root_) root_ = other.root_->clone();
}

Expression& Expression::operator=(const Expression& other) {
    if (this != &other) {
        text_ = other.text_;
        root_ = other.root_ ? other.root_->clone() : nullptr;
    }
    return *this;
}

Expression Expression::parse(const std::string& text) {
    Parser p(text);
    Expression e;
    e.root_ = p.parse_expression();
    p.skip_ws();
    if (p.pos != text.size()) throw ExprError("trailing characters in expression", p.pos);
    e.text_ = text;
    return e;
}

Real Expression::eval(Real x1, Real x2, Real t) const { return root_->eval(x1, x2, t); }

} // namespace parobs::expr
