#include "qhm/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

namespace qhm {

struct Expression::Node {
    enum class Kind { Number, Time, Param, Neg, Add, Sub, Mul, Div, Pow, Call };

    Kind kind = Kind::Number;
    Complex value{};
    std::string name;
    Function function = Function::Sin;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;
using Kind = Node::Kind;

namespace {

NodePtr make_number(Complex v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Number;
    n->value = v;
    return n;
}

NodePtr make_binary(Kind kind, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

NodePtr make_unary(Kind kind, NodePtr a) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->lhs = std::move(a);
    return n;
}

NodePtr make_call(Function f, NodePtr a) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Call;
    n->function = f;
    n->lhs = std::move(a);
    return n;
}

bool is_number(const NodePtr& n, Complex v) {
    return n->kind == Kind::Number && n->value == v;
}

// Builders with light constant folding so derivative trees stay small.

NodePtr add(NodePtr a, NodePtr b) {
    if (is_number(a, 0.0)) return b;
    if (is_number(b, 0.0)) return a;
    if (a->kind == Kind::Number && b->kind == Kind::Number) return make_number(a->value + b->value);
    return make_binary(Kind::Add, std::move(a), std::move(b));
}

NodePtr neg(NodePtr a) {
    if (a->kind == Kind::Number) return make_number(-a->value);
    if (a->kind == Kind::Neg) return a->lhs;
    return make_unary(Kind::Neg, std::move(a));
}

NodePtr sub(NodePtr a, NodePtr b) {
    if (is_number(b, 0.0)) return a;
    if (is_number(a, 0.0)) return neg(std::move(b));
    if (a->kind == Kind::Number && b->kind == Kind::Number) return make_number(a->value - b->value);
    return make_binary(Kind::Sub, std::move(a), std::move(b));
}

NodePtr mul(NodePtr a, NodePtr b) {
    if (is_number(a, 0.0) || is_number(b, 0.0)) return make_number(0.0);
    if (is_number(a, 1.0)) return b;
    if (is_number(b, 1.0)) return a;
    if (a->kind == Kind::Number && b->kind == Kind::Number) return make_number(a->value * b->value);
    return make_binary(Kind::Mul, std::move(a), std::move(b));
}

NodePtr div(NodePtr a, NodePtr b) {
    if (is_number(a, 0.0) && !is_number(b, 0.0)) return make_number(0.0);
    if (is_number(b, 1.0)) return a;
    return make_binary(Kind::Div, std::move(a), std::move(b));
}

NodePtr power(NodePtr a, NodePtr b) {
    if (is_number(b, 1.0)) return a;
    if (is_number(b, 0.0)) return make_number(1.0);
    return make_binary(Kind::Pow, std::move(a), std::move(b));
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    NodePtr parse() {
        skip_space();
        if (pos_ == text_.size()) fail("empty expression");
        NodePtr e = expr();
        skip_space();
        if (pos_ != text_.size()) fail(std::string("unexpected '") + text_[pos_] + "'");
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(pos_ + 1, msg); }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) {
                lhs = make_binary(Kind::Add, lhs, term());
            } else if (accept('-')) {
                lhs = make_binary(Kind::Sub, lhs, term());
            } else {
                return lhs;
            }
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*')) {
                lhs = make_binary(Kind::Mul, lhs, unary());
            } else if (accept('/')) {
                lhs = make_binary(Kind::Div, lhs, unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr unary() {
        if (accept('-')) return make_unary(Kind::Neg, unary());
        if (accept('+')) return unary();
        return pow_expr();
    }

    NodePtr pow_expr() {
        NodePtr base = primary();
        if (accept('^')) return make_binary(Kind::Pow, base, unary());
        return base;
    }

    NodePtr primary() {
        skip_space();
        if (pos_ == text_.size()) fail("unexpected end of expression");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
        fail(std::string("unexpected '") + c + "'");
    }

    NodePtr number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        }
        if (pos_ - start == 1 && text_[start] == '.') {
            pos_ = start;
            fail("malformed number");
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
            if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
                while (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) ++p;
                pos_ = p;
            } else {
                pos_ = p;
                fail("malformed exponent");
            }
        }
        const std::string literal(text_.substr(start, pos_ - start));
        return make_number(std::strtod(literal.c_str(), nullptr));
    }

    NodePtr name() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        const std::string id(text_.substr(start, pos_ - start));

        static const std::pair<const char*, Function> functions[] = {
            {"sin", Function::Sin},   {"cos", Function::Cos},   {"tan", Function::Tan},
            {"exp", Function::Exp},   {"log", Function::Log},   {"sqrt", Function::Sqrt},
            {"arccos", Function::Arccos},
        };
        for (const auto& [fname, f] : functions) {
            if (id == fname) {
                if (!accept('(')) fail("expected '(' after function '" + id + "'");
                NodePtr arg = expr();
                if (!accept(')')) fail("expected ')'");
                return make_call(f, arg);
            }
        }
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == '(') {
            pos_ = start;
            fail("unknown function '" + id + "'");
        }

        if (id == "t") {
            auto n = std::make_shared<Node>();
            n->kind = Kind::Time;
            return n;
        }
        if (id == "i") return make_number(kI);
        if (id == "pi") return make_number(std::numbers::pi);
        auto n = std::make_shared<Node>();
        n->kind = Kind::Param;
        n->name = id;
        return n;
    }
};

// ---------------------------------------------------------------------------
// Evaluation

[[noreturn]] void eval_fail(const std::string& msg) { throw Error(ErrorCode::EvaluationError, msg); }

constexpr double kRealTol = 1e-12;

double real_argument(Complex z, const char* fname) {
    if (std::abs(z.imag()) > kRealTol * std::max(1.0, std::abs(z.real()))) {
        eval_fail(std::string(fname) + " of a non-real argument");
    }
    return z.real();
}

bool is_integer(double x) { return std::floor(x) == x && std::abs(x) < 1e15; }

Complex eval_pow(Complex base, Complex exponent) {
    const bool base_real = base.imag() == 0.0;
    const bool exp_real = exponent.imag() == 0.0;
    if (base == 0.0) {
        if (exp_real && exponent.real() > 0.0) return 0.0;
        if (exponent == 0.0) return 1.0;
        eval_fail("zero raised to a non-positive power");
    }
    if (base_real && exp_real) {
        if (base.real() < 0.0 && !is_integer(exponent.real())) {
            eval_fail("negative base raised to a non-integer power");
        }
        return std::pow(base.real(), exponent.real());
    }
    if (exp_real && is_integer(exponent.real())) return std::pow(base, static_cast<int>(exponent.real()));
    return std::pow(base, exponent);
}

Complex eval_call(Function f, Complex z) {
    switch (f) {
        case Function::Sin: return std::sin(z);
        case Function::Cos: return std::cos(z);
        case Function::Tan: {
            const Complex c = std::cos(z);
            if (std::abs(c) == 0.0) eval_fail("tan at a pole");
            return std::sin(z) / c;
        }
        case Function::Exp: return std::exp(z);
        case Function::Log: {
            const double x = real_argument(z, "log");
            if (x <= 0.0) eval_fail("log of a non-positive argument");
            return std::log(x);
        }
        case Function::Sqrt: {
            const double x = real_argument(z, "sqrt");
            if (x < 0.0) eval_fail("sqrt of a negative argument");
            return std::sqrt(x);
        }
        case Function::Arccos: {
            const double x = real_argument(z, "arccos");
            if (x < -1.0 || x > 1.0) eval_fail("arccos argument outside [-1, 1]");
            return std::acos(x);
        }
    }
    eval_fail("unknown function");
}

Complex eval(const Node& n, double t, const ParameterMap& params) {
    switch (n.kind) {
        case Kind::Number: return n.value;
        case Kind::Time: return t;
        case Kind::Param: {
            auto it = params.find(n.name);
            if (it == params.end()) throw Error(ErrorCode::UnboundParameter, "unbound parameter '" + n.name + "'");
            return it->second;
        }
        case Kind::Neg: return -eval(*n.lhs, t, params);
        case Kind::Add: return eval(*n.lhs, t, params) + eval(*n.rhs, t, params);
        case Kind::Sub: return eval(*n.lhs, t, params) - eval(*n.rhs, t, params);
        case Kind::Mul: return eval(*n.lhs, t, params) * eval(*n.rhs, t, params);
        case Kind::Div: {
            const Complex num = eval(*n.lhs, t, params);
            const Complex den = eval(*n.rhs, t, params);
            if (den == 0.0) eval_fail("division by zero");
            return num / den;
        }
        case Kind::Pow: return eval_pow(eval(*n.lhs, t, params), eval(*n.rhs, t, params));
        case Kind::Call: return eval_call(n.function, eval(*n.lhs, t, params));
    }
    eval_fail("corrupt expression node");
}

// ---------------------------------------------------------------------------
// Differentiation

bool has_time(const Node& n) {
    switch (n.kind) {
        case Kind::Time: return true;
        case Kind::Number:
        case Kind::Param: return false;
        case Kind::Neg:
        case Kind::Call: return has_time(*n.lhs);
        default: return has_time(*n.lhs) || has_time(*n.rhs);
    }
}

NodePtr diff(const NodePtr& p) {
    const Node& n = *p;
    if (!has_time(n)) return make_number(0.0);
    switch (n.kind) {
        case Kind::Time: return make_number(1.0);
        case Kind::Number:
        case Kind::Param: return make_number(0.0);
        case Kind::Neg: return neg(diff(n.lhs));
        case Kind::Add: return add(diff(n.lhs), diff(n.rhs));
        case Kind::Sub: return sub(diff(n.lhs), diff(n.rhs));
        case Kind::Mul: return add(mul(diff(n.lhs), n.rhs), mul(n.lhs, diff(n.rhs)));
        case Kind::Div:
            // (u/v)' = u'/v - u v' / v^2
            return sub(div(diff(n.lhs), n.rhs),
                       div(mul(n.lhs, diff(n.rhs)), power(n.rhs, make_number(2.0))));
        case Kind::Pow: {
            const NodePtr& u = n.lhs;
            const NodePtr& v = n.rhs;
            if (!has_time(*v)) {
                return mul(mul(v, power(u, sub(v, make_number(1.0)))), diff(u));
            }
            // u^v (v' log u + v u' / u)
            return mul(p, add(mul(diff(v), make_call(Function::Log, u)), div(mul(v, diff(u)), u)));
        }
        case Kind::Call: {
            const NodePtr& u = n.lhs;
            const NodePtr du = diff(u);
            switch (n.function) {
                case Function::Sin: return mul(make_call(Function::Cos, u), du);
                case Function::Cos: return neg(mul(make_call(Function::Sin, u), du));
                case Function::Tan:
                    return div(du, power(make_call(Function::Cos, u), make_number(2.0)));
                case Function::Exp: return mul(p, du);
                case Function::Log: return div(du, u);
                case Function::Sqrt: return div(du, mul(make_number(2.0), p));
                case Function::Arccos:
                    return neg(div(du, make_call(Function::Sqrt,
                                                 sub(make_number(1.0), power(u, make_number(2.0))))));
            }
        }
    }
    return make_number(0.0);
}

void collect_params(const Node& n, std::set<std::string>& out) {
    if (n.kind == Kind::Param) out.insert(n.name);
    if (n.lhs) collect_params(*n.lhs, out);
    if (n.rhs) collect_params(*n.rhs, out);
}

void format_number(std::ostream& os, Complex v) {
    os.precision(17);
    if (v.imag() == 0.0) {
        if (v.real() < 0.0) {
            os << '(' << v.real() << ')';
        } else {
            os << v.real();
        }
    } else if (v.real() == 0.0) {
        os << '(' << v.imag() << "*i)";
    } else {
        os << '(' << v.real() << (v.imag() < 0 ? "-" : "+") << std::abs(v.imag()) << "*i)";
    }
}

// Fully parenthesized rendering; parse(to_string(e)) reproduces e's value.
void format(std::ostream& os, const Node& n) {
    switch (n.kind) {
        case Kind::Number: format_number(os, n.value); return;
        case Kind::Time: os << 't'; return;
        case Kind::Param: os << n.name; return;
        case Kind::Neg: os << "(-"; format(os, *n.lhs); os << ')'; return;
        case Kind::Call:
            os << function_name(n.function) << '(';
            format(os, *n.lhs);
            os << ')';
            return;
        default: break;
    }
    const char op = n.kind == Kind::Add ? '+' : n.kind == Kind::Sub ? '-' : n.kind == Kind::Mul ? '*'
                  : n.kind == Kind::Div ? '/' : '^';
    os << '(';
    format(os, *n.lhs);
    os << ' ' << op << ' ';
    format(os, *n.rhs);
    os << ')';
}

}  // namespace

ParseError::ParseError(std::size_t column, const std::string& message)
    : Error(ErrorCode::SyntaxError, "column " + std::to_string(column) + ": " + message),
      column_(column),
      message_(message) {}

const char* function_name(Function f) noexcept {
    switch (f) {
        case Function::Sin: return "sin";
        case Function::Cos: return "cos";
        case Function::Tan: return "tan";
        case Function::Exp: return "exp";
        case Function::Log: return "log";
        case Function::Sqrt: return "sqrt";
        case Function::Arccos: return "arccos";
    }
    return "?";
}

Expression::Expression() : root_(make_number(0.0)) {}

Expression Expression::parse(std::string_view text) { return Expression(Parser(text).parse()); }

Expression Expression::constant(Complex value) { return Expression(make_number(value)); }

Expression Expression::time() {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Time;
    return Expression(n);
}

Expression Expression::parameter(std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Param;
    n->name = std::move(name);
    return Expression(n);
}

Expression Expression::call(Function f, const Expression& arg) {
    if (arg.root_->kind == Kind::Number) {
        // fold only where evaluation is total
        if (f == Function::Sin || f == Function::Cos || f == Function::Exp) {
            return constant(eval_call(f, arg.root_->value));
        }
    }
    return Expression(make_call(f, arg.root_));
}

Complex Expression::evaluate(double t, const ParameterMap& params) const {
    const Complex v = eval(*root_, t, params);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) eval_fail("non-finite result");
    return v;
}

Expression Expression::derivative() const { return Expression(diff(root_)); }

bool Expression::depends_on_time() const { return has_time(*root_); }

std::set<std::string> Expression::parameters() const {
    std::set<std::string> out;
    collect_params(*root_, out);
    return out;
}

std::string Expression::to_string() const {
    std::ostringstream os;
    format(os, *root_);
    return os.str();
}

bool Expression::is_zero() const { return is_number(root_, 0.0); }

Expression operator+(const Expression& a, const Expression& b) { return Expression(add(a.root_, b.root_)); }
Expression operator-(const Expression& a, const Expression& b) { return Expression(sub(a.root_, b.root_)); }
Expression operator*(const Expression& a, const Expression& b) { return Expression(mul(a.root_, b.root_)); }
Expression operator/(const Expression& a, const Expression& b) { return Expression(div(a.root_, b.root_)); }
Expression operator-(const Expression& a) { return Expression(neg(a.root_)); }
Expression pow(const Expression& base, const Expression& exponent) {
    return Expression(power(base.root_, exponent.root_));
}

Expression sin(const Expression& e) { return Expression::call(Function::Sin, e); }
Expression cos(const Expression& e) { return Expression::call(Function::Cos, e); }
Expression tan(const Expression& e) { return Expression::call(Function::Tan, e); }
Expression exp(const Expression& e) { return Expression::call(Function::Exp, e); }
Expression log(const Expression& e) { return Expression::call(Function::Log, e); }
Expression sqrt(const Expression& e) { return Expression::call(Function::Sqrt, e); }
Expression arccos(const Expression& e) { return Expression::call(Function::Arccos, e); }

}  // namespace qhm
