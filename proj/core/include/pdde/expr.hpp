#pragma once

#include <memory>
#include <stdexcept>
#include <string>

namespace pdde {

/// Closed-form coefficient expression over (t, x1, x2).
///
/// Grammar (fixed):
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := base ('^' factor)?
///   base   := number | ident | func '(' expr ')' | '(' expr ')'
/// idents: t, x1, x2; funcs: sin, cos, exp, abs, sign, min, max
/// (min/max binary, comma-separated).
class CoeffExpr {
public:
    CoeffExpr();                               // constant 0
    explicit CoeffExpr(double constant);

    double eval(double t, double x1, double x2 = 0.0) const;

    // pretty-print; parse(to_string(e)) evaluates identically to e
    std::string to_string() const;

    // does the expression reference t / x1 / x2 anywhere?
    bool depends_on_time() const;
    bool depends_on_space() const;

    // algebraic constructors, used by the weak-* sequence generators
    static CoeffExpr constant(double c);
    static CoeffExpr add(const CoeffExpr& a, const CoeffExpr& b);
    static CoeffExpr mul(const CoeffExpr& a, const CoeffExpr& b);
    // amp * sin(2*pi*m*t) or amp * sin(2*pi*m*x1)
    static CoeffExpr oscillation(double amp, long m, bool in_time);
    // structural substitution t -> (shift - t), used by the adjoint
    // rediscretization's reversed clock
    static CoeffExpr with_reversed_time(const CoeffExpr& e, double shift);

    struct Node;
    explicit CoeffExpr(std::shared_ptr<const Node> root);
    const std::shared_ptr<const Node>& root() const { return root_; }

private:
    std::shared_ptr<const Node> root_;
};

struct ParseError : std::runtime_error {
    size_t position;
    ParseError(const std::string& msg, size_t pos)
        : std::runtime_error(msg + " at position " + std::to_string(pos)), position(pos) {}
};

CoeffExpr parse_expr(const std::string& src);

}  // namespace pdde
