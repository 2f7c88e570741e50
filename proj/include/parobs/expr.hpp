#pragma once

#include <memory>
#include <string>

#include "parobs/common.hpp"

namespace parobs::expr {

// Tiny arithmetic expressions for config data: variables x (alias x1), x2, t;
// functions max, exp, abs; operators + - * / ^ and unary minus.
class Expression {
public:
    static Expression parse(const std::string& text);

    Real eval(Real x1, Real x2, Real t) const;
    Real eval(const Point& p, Real t) const { return eval(p[0], p[1], t); }
    const std::string& text() const { return text_; }

    Expression(Expression&&) noexcept;
    Expression& operator=(Expression&&) noexcept;
    Expression(const Expression&);
    Expression& operator=(const Expression&);
    ~Expression();

    struct Node;

private:
    Expression();
    std::unique_ptr<Node> root_;
    std::string text_;
};

struct ExprError : Error {
    size_t position;
    ExprError(const std::string& msg, size_t pos) : Error(msg), position(pos) {}
};

} // namespace parobs::expr
