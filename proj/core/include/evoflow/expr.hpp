#pragma once

#include <memory>
#include <string>

#include <Eigen/Core>

namespace evoflow {

/// Arithmetic expression over variables x0..x{arity-1}: numbers, + - * /,
/// unary minus, '^' (right-associative power), parentheses, the constants
/// pi and e, and the functions exp, log, abs, sin, cos, sqrt, pow, min,
/// max. Parse errors throw UsageError naming the offending position.
class Expression {
public:
    static Expression parse(const std::string& text, int arity);

    double eval(const Eigen::VectorXd& x) const;
    int arity() const { return arity_; }
    const std::string& text() const { return text_; }

    struct Node;

private:
    Expression(std::shared_ptr<const Node> root, int arity, std::string text)
        : root_(std::move(root)), arity_(arity), text_(std::move(text)) {}

    std::shared_ptr<const Node> root_;
    int arity_ = 0;
    std::string text_;
};

} // namespace evoflow
