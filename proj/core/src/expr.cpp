#include "evoflow/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "evoflow/errors.hpp"

namespace evoflow {

struct Expression::Node {
    enum class Op {
        constant, variable,
        add, sub, mul, div, pow, neg,
        fn_exp, fn_log, fn_abs, fn_sin, fn_cos, fn_sqrt, fn_min, fn_max
    };
    Op op = Op::constant;
    double value = 0.0;  // constant
    int index = 0;       // variable
    std::shared_ptr<const Node> a, b;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_const(double v) {
    auto n = std::make_shared<Node>();
    n->op = Node::Op::constant;
    n->value = v;
    return n;
}

NodePtr make_node(Node::Op op, NodePtr a, NodePtr b = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

class Parser {
public:
    Parser(const std::string& text, int arity) : text_(text), arity_(arity) {}

    NodePtr run() {
        NodePtr e = expression();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw UsageError("expression error at position " + std::to_string(pos_) + ": " + what);
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool consume(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_space();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    NodePtr expression() {
        NodePtr e = term();
        for (;;) {
            if (consume('+'))
                e = make_node(Node::Op::add, e, term());
            else if (consume('-'))
                e = make_node(Node::Op::sub, e, term());
            else
                return e;
        }
    }

    NodePtr term() {
        NodePtr e = factor();
        for (;;) {
            if (consume('*'))
                e = make_node(Node::Op::mul, e, factor());
            else if (consume('/'))
                e = make_node(Node::Op::div, e, factor());
            else
                return e;
        }
    }

    NodePtr factor() {
        if (consume('-')) return make_node(Node::Op::neg, factor());
        if (consume('+')) return factor();
        return power();
    }

    NodePtr power() {
        NodePtr base = atom();
        if (consume('^')) return make_node(Node::Op::pow, base, factor());
        return base;
    }

    NodePtr atom() {
        skip_space();
        if (pos_ >= text_.size()) fail("expected a value");
        const char c = text_[pos_];

        if (c == '(') {
            ++pos_;
            NodePtr e = expression();
            if (!consume(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr number() {
        const char* begin = text_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - begin);
        return make_const(v);
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string name = text_.substr(start, pos_ - start);

        if (name == "pi") return make_const(3.14159265358979323846);
        if (name == "e") return make_const(2.71828182845904523536);

        if (name.size() >= 2 && name[0] == 'x') {
            bool digits = true;
            for (std::size_t i = 1; i < name.size(); ++i)
                digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
            if (digits) {
                const int idx = std::atoi(name.c_str() + 1);
                if (idx >= arity_)
                    fail("variable " + name + " exceeds arity " + std::to_string(arity_));
                auto n = std::make_shared<Node>();
                n->op = Node::Op::variable;
                n->index = idx;
                return n;
            }
        }

        static const std::vector<std::pair<std::string, Node::Op>> unary = {
            {"exp", Node::Op::fn_exp}, {"log", Node::Op::fn_log}, {"abs", Node::Op::fn_abs},
            {"sin", Node::Op::fn_sin}, {"cos", Node::Op::fn_cos}, {"sqrt", Node::Op::fn_sqrt}};
        static const std::vector<std::pair<std::string, Node::Op>> binary = {
            {"min", Node::Op::fn_min}, {"max", Node::Op::fn_max}, {"pow", Node::Op::pow}};

        for (const auto& [fname, op] : unary)
            if (name == fname) {
                if (!consume('(')) fail(fname + " expects '('");
                NodePtr a = expression();
                if (!consume(')')) fail("expected ')'");
                return make_node(op, a);
            }
        for (const auto& [fname, op] : binary)
            if (name == fname) {
                if (!consume('(')) fail(fname + " expects '('");
                NodePtr a = expression();
                if (!consume(',')) fail(fname + " expects two arguments");
                NodePtr b = expression();
                if (!consume(')')) fail("expected ')'");
                return make_node(op, a, b);
            }
        fail("unknown identifier '" + name + "'");
    }

    const std::string& text_;
    int arity_;
    std::size_t pos_ = 0;
};

double eval_node(const Node& n, const Eigen::VectorXd& x) {
    switch (n.op) {
    case Node::Op::constant: return n.value;
    case Node::Op::variable: return x(n.index);
    case Node::Op::add: return eval_node(*n.a, x) + eval_node(*n.b, x);
    case Node::Op::sub: return eval_node(*n.a, x) - eval_node(*n.b, x);
    case Node::Op::mul: return eval_node(*n.a, x) * eval_node(*n.b, x);
    case Node::Op::div: return eval_node(*n.a, x) / eval_node(*n.b, x);
    case Node::Op::pow: return std::pow(eval_node(*n.a, x), eval_node(*n.b, x));
    case Node::Op::neg: return -eval_node(*n.a, x);
    case Node::Op::fn_exp: return std::exp(eval_node(*n.a, x));
    case Node::Op::fn_log: return std::log(eval_node(*n.a, x));
    case Node::Op::fn_abs: return std::abs(eval_node(*n.a, x));
    case Node::Op::fn_sin: return std::sin(eval_node(*n.a, x));
    case Node::Op::fn_cos: return std::cos(eval_node(*n.a, x));
    case Node::Op::fn_sqrt: return std::sqrt(eval_node(*n.a, x));
    case Node::Op::fn_min: return std::min(eval_node(*n.a, x), eval_node(*n.b, x));
    case Node::Op::fn_max: return std::max(eval_node(*n.a, x), eval_node(*n.b, x));
    }
    throw NumericError("corrupt expression node");
}

} // namespace

Expression Expression::parse(const std::string& text, int arity) {
    if (arity < 0) throw UsageError("expression arity must be nonnegative");
    Parser parser(text, arity);
    return Expression(parser.run(), arity, text);
}

double Expression::eval(const Eigen::VectorXd& x) const {
    if (x.size() < arity_)
        throw UsageError("expression expects " + std::to_string(arity_) + " variables, got " +
                         std::to_string(x.size()));
    return eval_node(*root_, x);
}

} // namespace evoflow
