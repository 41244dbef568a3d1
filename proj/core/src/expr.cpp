#include "pdde/expr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace pdde {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

enum class Op {
    number, var_t, var_x1, var_x2,
    add, sub, mul, div, pow,
    sin, cos, exp, abs, sign, min, max
};

struct CoeffExpr::Node {
    Op op;
    double value = 0.0;
    std::shared_ptr<const Node> lhs, rhs;
};

using NodePtr = std::shared_ptr<const CoeffExpr::Node>;

namespace {

NodePtr make_num(double v) {
    auto n = std::make_shared<CoeffExpr::Node>();
    n->op = Op::number;
    n->value = v;
    return n;
}

NodePtr make_node(Op op, NodePtr lhs, NodePtr rhs = nullptr) {
    auto n = std::make_shared<CoeffExpr::Node>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

double eval_node(const CoeffExpr::Node& n, double t, double x1, double x2) {
    switch (n.op) {
        case Op::number: return n.value;
        case Op::var_t:  return t;
        case Op::var_x1: return x1;
        case Op::var_x2: return x2;
        case Op::add: return eval_node(*n.lhs, t, x1, x2) + eval_node(*n.rhs, t, x1, x2);
        case Op::sub: return eval_node(*n.lhs, t, x1, x2) - eval_node(*n.rhs, t, x1, x2);
        case Op::mul: return eval_node(*n.lhs, t, x1, x2) * eval_node(*n.rhs, t, x1, x2);
        case Op::div: return eval_node(*n.lhs, t, x1, x2) / eval_node(*n.rhs, t, x1, x2);
        case Op::pow: return std::pow(eval_node(*n.lhs, t, x1, x2), eval_node(*n.rhs, t, x1, x2));
        case Op::sin: return std::sin(eval_node(*n.lhs, t, x1, x2));
        case Op::cos: return std::cos(eval_node(*n.lhs, t, x1, x2));
        case Op::exp: return std::exp(eval_node(*n.lhs, t, x1, x2));
        case Op::abs: return std::abs(eval_node(*n.lhs, t, x1, x2));
        case Op::sign: {
            double v = eval_node(*n.lhs, t, x1, x2);
            return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
        }
        case Op::min: return std::min(eval_node(*n.lhs, t, x1, x2), eval_node(*n.rhs, t, x1, x2));
        case Op::max: return std::max(eval_node(*n.lhs, t, x1, x2), eval_node(*n.rhs, t, x1, x2));
    }
    return 0.0;
}

bool depends(const CoeffExpr::Node& n, bool time) {
    switch (n.op) {
        case Op::number: return false;
        case Op::var_t:  return time;
        case Op::var_x1:
        case Op::var_x2: return !time;
        default: break;
    }
    bool d = n.lhs && depends(*n.lhs, time);
    if (!d && n.rhs) d = depends(*n.rhs, time);
    return d;
}

void print_node(const CoeffExpr::Node& n, std::ostream& os) {
    auto binary = [&](const char* sym) {
        os << '(';
        print_node(*n.lhs, os);
        os << sym;
        print_node(*n.rhs, os);
        os << ')';
    };
    auto func = [&](const char* name) {
        os << name << '(';
        print_node(*n.lhs, os);
        if (n.rhs) {
            os << ',';
            print_node(*n.rhs, os);
        }
        os << ')';
    };
    switch (n.op) {
        case Op::number: {
            std::ostringstream tmp;
            tmp.precision(17);
            tmp << n.value;
            std::string s = tmp.str();
            if (!s.empty() && s[0] == '-') os << '(' << s << ')';
            else os << s;
            break;
        }
        case Op::var_t:  os << 't'; break;
        case Op::var_x1: os << "x1"; break;
        case Op::var_x2: os << "x2"; break;
        case Op::add: binary("+"); break;
        case Op::sub: binary("-"); break;
        case Op::mul: binary("*"); break;
        case Op::div: binary("/"); break;
        case Op::pow: binary("^"); break;
        case Op::sin: func("sin"); break;
        case Op::cos: func("cos"); break;
        case Op::exp: func("exp"); break;
        case Op::abs: func("abs"); break;
        case Op::sign: func("sign"); break;
        case Op::min: func("min"); break;
        case Op::max: func("max"); break;
    }
}

class Parser {
public:
    explicit Parser(const std::string& src) : src_(src) {}

    NodePtr parse() {
        NodePtr e = expr();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    const std::string& src_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, pos_); }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool consume(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (consume('+')) lhs = make_node(Op::add, lhs, term());
            else if (consume('-')) lhs = make_node(Op::sub, lhs, term());
            else return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = factor();
        for (;;) {
            if (consume('*')) lhs = make_node(Op::mul, lhs, factor());
            else if (consume('/')) lhs = make_node(Op::div, lhs, factor());
            else return lhs;
        }
    }

    // right-associative power
    NodePtr factor() {
        NodePtr b = base();
        if (consume('^')) return make_node(Op::pow, b, factor());
        return b;
    }

    NodePtr base() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of expression");
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return ident_or_call();
        if (consume('(')) {
            NodePtr e = expr();
            if (!consume(')')) fail("expected ')'");
            return e;
        }
        if (consume('-')) return make_node(Op::sub, make_num(0.0), factor());
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr number() {
        size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.' ||
                src_[pos_] == 'e' || src_[pos_] == 'E' ||
                ((src_[pos_] == '+' || src_[pos_] == '-') && pos_ > start &&
                 (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E'))))
            ++pos_;
        try {
            size_t used = 0;
            double v = std::stod(src_.substr(start, pos_ - start), &used);
            if (used != pos_ - start) fail("malformed number");
            return make_num(v);
        } catch (const std::logic_error&) {
            pos_ = start;
            fail("malformed number");
        }
    }

    NodePtr ident_or_call() {
        size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_]))))
            ++pos_;
        std::string name = src_.substr(start, pos_ - start);
        if (name == "t") return make_node(Op::var_t, nullptr);
        if (name == "x1") return make_node(Op::var_x1, nullptr);
        if (name == "x2") return make_node(Op::var_x2, nullptr);

        Op op;
        bool binary = false;
        if (name == "sin") op = Op::sin;
        else if (name == "cos") op = Op::cos;
        else if (name == "exp") op = Op::exp;
        else if (name == "abs") op = Op::abs;
        else if (name == "sign") op = Op::sign;
        else if (name == "min") { op = Op::min; binary = true; }
        else if (name == "max") { op = Op::max; binary = true; }
        else {
            pos_ = start;
            fail("unknown identifier '" + name + "'");
        }
        if (!consume('(')) fail("expected '(' after function name");
        NodePtr a = expr();
        NodePtr b;
        if (binary) {
            if (!consume(',')) fail("expected ',' in binary function");
            b = expr();
        }
        if (!consume(')')) fail("expected ')'");
        return make_node(op, a, b);
    }
};

}  // namespace

CoeffExpr::CoeffExpr() : root_(make_num(0.0)) {}
CoeffExpr::CoeffExpr(double constant) : root_(make_num(constant)) {}
CoeffExpr::CoeffExpr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

double CoeffExpr::eval(double t, double x1, double x2) const {
    return eval_node(*root_, t, x1, x2);
}

std::string CoeffExpr::to_string() const {
    std::ostringstream os;
    print_node(*root_, os);
    return os.str();
}

bool CoeffExpr::depends_on_time() const { return depends(*root_, true); }
bool CoeffExpr::depends_on_space() const { return depends(*root_, false); }

CoeffExpr CoeffExpr::constant(double c) { return CoeffExpr(c); }

CoeffExpr CoeffExpr::add(const CoeffExpr& a, const CoeffExpr& b) {
    return CoeffExpr(make_node(Op::add, a.root_, b.root_));
}

CoeffExpr CoeffExpr::mul(const CoeffExpr& a, const CoeffExpr& b) {
    return CoeffExpr(make_node(Op::mul, a.root_, b.root_));
}

CoeffExpr CoeffExpr::oscillation(double amp, long m, bool in_time) {
    NodePtr arg = make_node(Op::mul, make_num(2.0 * kPi * static_cast<double>(m)),
                            make_node(in_time ? Op::var_t : Op::var_x1, nullptr));
    return CoeffExpr(make_node(Op::mul, make_num(amp), make_node(Op::sin, arg)));
}

namespace {

NodePtr reverse_node(const NodePtr& n, const NodePtr& replacement) {
    if (n->op == Op::var_t) return replacement;
    if (!n->lhs) return n;
    NodePtr l = reverse_node(n->lhs, replacement);
    NodePtr r = n->rhs ? reverse_node(n->rhs, replacement) : nullptr;
    if (l == n->lhs && r == n->rhs) return n;
    auto copy = std::make_shared<CoeffExpr::Node>(*n);
    copy->lhs = l;
    copy->rhs = r;
    return copy;
}

}  // namespace

CoeffExpr CoeffExpr::with_reversed_time(const CoeffExpr& e, double shift) {
    NodePtr repl = make_node(Op::sub, make_num(shift), make_node(Op::var_t, nullptr));
    return CoeffExpr(reverse_node(e.root(), repl));
}

CoeffExpr parse_expr(const std::string& src) {
    Parser p(src);
    return CoeffExpr(p.parse());
}

}  // namespace pdde
