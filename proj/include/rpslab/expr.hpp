#pragma once

#include <memory>
#include <string>

#include "rpslab/common.hpp"

namespace rpslab {

/// Evaluation failure (division by zero, pow domain error). Carries the
/// printed form of the offending subexpression.
class EvalError : public Error {
public:
    EvalError(const std::string& what, const std::string& subexpr)
        : Error(what + " in subexpression " + subexpr), subexpr_(subexpr) {}
    const std::string& subexpr() const { return subexpr_; }

private:
    std::string subexpr_;
};

namespace detail {
struct ExprNode;
}

/// One component of a feedback map, as an expression tree over the time
/// variable `t` and state variables `x1..xd`.
///
/// Grammar (binary + - * / are left associative, ^ is right associative,
/// ^ binds tighter than unary minus):
///
///   expr  := term  { ('+'|'-') term }
///   term  := unary { ('*'|'/') unary }
///   unary := '-' unary | power
///   power := atom [ '^' unary ]
///   atom  := number | 't' | 'x'<index> | fn '(' expr ')' | '(' expr ')'
///   fn    := sin | cos | exp | abs
///
/// State variables evaluate to |x_j|: the tree always realizes the
/// absolute-value extension of the map it denotes, so values at x and
/// at componentwise |x| coincide exactly.
class FeedbackExpr {
public:
    FeedbackExpr() = default;

    /// Throws ParseError (column-accurate) on bad input.
    static FeedbackExpr parse(const std::string& text, int dim);

    double eval(double t, const double* x) const;
    double eval(double t, const std::vector<double>& x) const { return eval(t, x.data()); }

    /// Fully parenthesized canonical form; parse(print()) reproduces the
    /// tree node for node.
    std::string print() const;

    bool structurally_equal(const FeedbackExpr& other) const;

    bool valid() const { return root_ != nullptr; }
    int dim() const { return dim_; }

private:
    std::shared_ptr<const detail::ExprNode> root_;
    int dim_ = 0;
};

}  // namespace rpslab
