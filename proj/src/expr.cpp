#include "rpslab/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace rpslab {
namespace detail {

enum class Op { Const, TimeVar, StateVar, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Abs };

struct ExprNode {
    Op op;
    double value = 0.0;  // Const
    int index = 0;       // StateVar, 0-based
    std::shared_ptr<const ExprNode> lhs, rhs;
};

using NodePtr = std::shared_ptr<const ExprNode>;

namespace {

NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

struct Token {
    enum Kind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End } kind;
    double number = 0.0;
    std::string ident;
    int column = 0;  // 1-based
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : s_(text) { advance(); }

    const Token& peek() const { return cur_; }

    Token take() {
        Token t = cur_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        cur_.column = static_cast<int>(pos_) + 1;
        if (pos_ >= s_.size()) {
            cur_.kind = Token::End;
            return;
        }
        const char c = s_[pos_];
        switch (c) {
            case '+': cur_.kind = Token::Plus; ++pos_; return;
            case '-': cur_.kind = Token::Minus; ++pos_; return;
            case '*': cur_.kind = Token::Star; ++pos_; return;
            case '/': cur_.kind = Token::Slash; ++pos_; return;
            case '^': cur_.kind = Token::Caret; ++pos_; return;
            case '(': cur_.kind = Token::LParen; ++pos_; return;
            case ')': cur_.kind = Token::RParen; ++pos_; return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (end == begin) throw ParseError("bad numeric literal", 0, cur_.column);
            pos_ += static_cast<std::size_t>(end - begin);
            cur_.kind = Token::Number;
            cur_.number = v;
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            cur_.kind = Token::Ident;
            cur_.ident = s_.substr(start, pos_ - start);
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", 0, cur_.column);
    }

    std::string s_;
    std::size_t pos_ = 0;
    Token cur_;
};

class Parser {
public:
    Parser(const std::string& text, int dim) : lex_(text), dim_(dim) {}

    NodePtr run() {
        NodePtr e = expr();
        const Token& t = lex_.peek();
        if (t.kind != Token::End)
            throw ParseError("trailing input after expression", 0, t.column);
        return e;
    }

private:
    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            const Token& t = lex_.peek();
            if (t.kind == Token::Plus || t.kind == Token::Minus) {
                Op op = t.kind == Token::Plus ? Op::Add : Op::Sub;
                lex_.take();
                lhs = make(op, lhs, term());
            } else {
                return lhs;
            }
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            const Token& t = lex_.peek();
            if (t.kind == Token::Star || t.kind == Token::Slash) {
                Op op = t.kind == Token::Star ? Op::Mul : Op::Div;
                lex_.take();
                lhs = make(op, lhs, unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr unary() {
        if (lex_.peek().kind == Token::Minus) {
            lex_.take();
            return make(Op::Neg, unary());
        }
        return power();
    }

    NodePtr power() {
        NodePtr base = atom();
        if (lex_.peek().kind == Token::Caret) {
            lex_.take();
            return make(Op::Pow, base, unary());
        }
        return base;
    }

    NodePtr atom() {
        Token t = lex_.take();
        switch (t.kind) {
            case Token::Number: {
                auto n = std::make_shared<ExprNode>();
                n->op = Op::Const;
                n->value = t.number;
                return n;
            }
            case Token::LParen: {
                NodePtr e = expr();
                expect_rparen();
                return e;
            }
            case Token::Ident:
                return ident_atom(t);
            case Token::End:
                throw ParseError("unexpected end of expression", 0, t.column);
            default:
                throw ParseError("unexpected token", 0, t.column);
        }
    }

    NodePtr ident_atom(const Token& t) {
        const std::string& id = t.ident;
        if (id == "t") {
            return make(Op::TimeVar);
        }
        if (id.size() >= 2 && id[0] == 'x') {
            bool digits = true;
            for (std::size_t i = 1; i < id.size(); ++i)
                if (!std::isdigit(static_cast<unsigned char>(id[i]))) digits = false;
            if (digits) {
                long j = std::strtol(id.c_str() + 1, nullptr, 10);
                if (j < 1 || j > dim_)
                    throw ParseError("variable index out of range: " + id, 0, t.column);
                auto n = std::make_shared<ExprNode>();
                n->op = Op::StateVar;
                n->index = static_cast<int>(j - 1);
                return n;
            }
        }
        Op fn;
        if (id == "sin") fn = Op::Sin;
        else if (id == "cos") fn = Op::Cos;
        else if (id == "exp") fn = Op::Exp;
        else if (id == "abs") fn = Op::Abs;
        else throw ParseError("unknown identifier: " + id, 0, t.column);
        Token open = lex_.take();
        if (open.kind != Token::LParen)
            throw ParseError("expected '(' after " + id, 0, open.column);
        NodePtr arg = expr();
        expect_rparen();
        return make(fn, arg);
    }

    void expect_rparen() {
        Token t = lex_.take();
        if (t.kind != Token::RParen)
            throw ParseError("expected ')'", 0, t.column);
    }

    Lexer lex_;
    int dim_;
};

std::string print_node(const ExprNode& n);

std::string print_binary(const ExprNode& n, const char* op) {
    return "(" + print_node(*n.lhs) + op + print_node(*n.rhs) + ")";
}

std::string print_node(const ExprNode& n) {
    switch (n.op) {
        case Op::Const: return format_double(n.value);
        case Op::TimeVar: return "t";
        case Op::StateVar: return "x" + std::to_string(n.index + 1);
        case Op::Add: return print_binary(n, " + ");
        case Op::Sub: return print_binary(n, " - ");
        case Op::Mul: return print_binary(n, " * ");
        case Op::Div: return print_binary(n, " / ");
        case Op::Pow: return "(" + print_node(*n.lhs) + "^" + print_node(*n.rhs) + ")";
        case Op::Neg: return "(-" + print_node(*n.lhs) + ")";
        case Op::Sin: return "sin(" + print_node(*n.lhs) + ")";
        case Op::Cos: return "cos(" + print_node(*n.lhs) + ")";
        case Op::Exp: return "exp(" + print_node(*n.lhs) + ")";
        case Op::Abs: return "abs(" + print_node(*n.lhs) + ")";
    }
    return "?";
}

double eval_node(const ExprNode& n, double t, const double* x) {
    switch (n.op) {
        case Op::Const: return n.value;
        case Op::TimeVar: return t;
        case Op::StateVar: return std::fabs(x[n.index]);
        case Op::Add: return eval_node(*n.lhs, t, x) + eval_node(*n.rhs, t, x);
        case Op::Sub: return eval_node(*n.lhs, t, x) - eval_node(*n.rhs, t, x);
        case Op::Mul: return eval_node(*n.lhs, t, x) * eval_node(*n.rhs, t, x);
        case Op::Div: {
            double num = eval_node(*n.lhs, t, x);
            double den = eval_node(*n.rhs, t, x);
            if (den == 0.0) throw EvalError("division by zero", print_node(n));
            return num / den;
        }
        case Op::Pow: {
            double base = eval_node(*n.lhs, t, x);
            double e = eval_node(*n.rhs, t, x);
            double v = std::pow(base, e);
            if (std::isnan(v)) throw EvalError("pow domain error", print_node(n));
            return v;
        }
        case Op::Neg: return -eval_node(*n.lhs, t, x);
        case Op::Sin: return std::sin(eval_node(*n.lhs, t, x));
        case Op::Cos: return std::cos(eval_node(*n.lhs, t, x));
        case Op::Exp: return std::exp(eval_node(*n.lhs, t, x));
        case Op::Abs: return std::fabs(eval_node(*n.lhs, t, x));
    }
    return 0.0;
}

bool equal_node(const ExprNode& a, const ExprNode& b) {
    if (a.op != b.op) return false;
    switch (a.op) {
        case Op::Const: return a.value == b.value;
        case Op::TimeVar: return true;
        case Op::StateVar: return a.index == b.index;
        default: break;
    }
    if ((a.lhs == nullptr) != (b.lhs == nullptr)) return false;
    if ((a.rhs == nullptr) != (b.rhs == nullptr)) return false;
    if (a.lhs && !equal_node(*a.lhs, *b.lhs)) return false;
    if (a.rhs && !equal_node(*a.rhs, *b.rhs)) return false;
    return true;
}

}  // namespace
}  // namespace detail

FeedbackExpr FeedbackExpr::parse(const std::string& text, int dim) {
    if (dim < 1) throw Error("expression dimension must be >= 1");
    FeedbackExpr e;
    e.root_ = detail::Parser(text, dim).run();
    e.dim_ = dim;
    return e;
}

double FeedbackExpr::eval(double t, const double* x) const {
    return detail::eval_node(*root_, t, x);
}

std::string FeedbackExpr::print() const { return detail::print_node(*root_); }

bool FeedbackExpr::structurally_equal(const FeedbackExpr& other) const {
    if (!root_ || !other.root_) return root_ == other.root_;
    return detail::equal_node(*root_, *other.root_);
}

}  // namespace rpslab
