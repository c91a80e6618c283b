#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>

#include "qhm/types.hpp"

namespace qhm {

using ParameterMap = std::map<std::string, double, std::less<>>;

/// Syntax error with a 1-based column into the expression text.
class ParseError : public Error {
public:
    ParseError(std::size_t column, const std::string& message);
    std::size_t column() const noexcept { return column_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::size_t column_;
    std::string message_;
};

enum class Function { Sin, Cos, Tan, Exp, Log, Sqrt, Arccos };

/// Immutable scalar expression over the time variable `t`, named real
/// parameters, the imaginary unit `i` and the constant `pi`.
///
/// Grammar (standard precedence, `^` binds tighter than unary minus and is
/// right-associative):
///
///     expr    := term (('+' | '-') term)*
///     term    := unary (('*' | '/') unary)*
///     unary   := ('-' | '+') unary | power
///     power   := primary ('^' unary)?
///     primary := number | name | name '(' expr ')' | '(' expr ')'
///
/// sin, cos, tan and exp accept complex arguments. sqrt, log and arccos are
/// real functions and raise EvaluationError outside their real domain.
class Expression {
public:
    struct Node;

    Expression();  // the constant 0

    static Expression parse(std::string_view text);
    static Expression constant(Complex value);
    static Expression time();
    static Expression parameter(std::string name);
    static Expression call(Function f, const Expression& arg);

    Complex evaluate(double t, const ParameterMap& params) const;

    /// Exact derivative with respect to t; parameters are time-independent.
    Expression derivative() const;

    bool depends_on_time() const;
    std::set<std::string> parameters() const;
    std::string to_string() const;

    /// True when the expression is the literal constant 0 after folding.
    bool is_zero() const;

    friend Expression operator+(const Expression& a, const Expression& b);
    friend Expression operator-(const Expression& a, const Expression& b);
    friend Expression operator*(const Expression& a, const Expression& b);
    friend Expression operator/(const Expression& a, const Expression& b);
    friend Expression operator-(const Expression& a);
    friend Expression pow(const Expression& base, const Expression& exponent);

    explicit Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
    const Node& node() const { return *root_; }

private:
    std::shared_ptr<const Node> root_;
};

Expression sin(const Expression& e);
Expression cos(const Expression& e);
Expression tan(const Expression& e);
Expression exp(const Expression& e);
Expression log(const Expression& e);
Expression sqrt(const Expression& e);
Expression arccos(const Expression& e);

const char* function_name(Function f) noexcept;

}  // namespace qhm
