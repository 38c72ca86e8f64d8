#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hypofbi {

/// Real-analytic scalar expressions over x1..xm and t1..tn.
///
/// Grammar: numbers, variables `x<k>`/`t<k>` (bare `x`/`t` mean index 1),
/// binary + - * /, unary -, integer powers `^k` (expanded into repeated
/// multiplication at parse time), and exp/sin/cos. Nodes are immutable and
/// shared, so copies are cheap and concurrent evaluation is safe.
class Expr {
public:
    enum class Kind { Const, XVar, TVar, Add, Sub, Mul, Div, Neg, Exp, Sin, Cos };

    struct Node {
        Kind kind;
        double value = 0.0;        // Const
        int index = 0;             // XVar/TVar, zero based
        long offset = -1;          // byte offset in the source text
        std::shared_ptr<const Node> lhs;
        std::shared_ptr<const Node> rhs;
    };

    Expr();  // constant zero
    explicit Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

    static Expr constant(double v);
    static Expr x(int index);
    static Expr t(int index);

    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a);
    friend Expr exp(const Expr& a);
    friend Expr sin(const Expr& a);
    friend Expr cos(const Expr& a);
    Expr pow(int exponent) const;

    const Node& node() const { return *root_; }
    Kind kind() const { return root_->kind; }
    bool is_constant(double v) const;

    /// Number of x / t variables referenced (highest index + 1, 0 if none).
    int x_arity() const;
    int t_arity() const;

    double eval(std::span<const double> x, std::span<const double> t) const;

    /// Symbolic partial derivative. Variables are numbered x1..xm first,
    /// then t1..tn, so `var < m` differentiates in x.
    Expr diff_x(int index) const;
    Expr diff_t(int index) const;

    /// Fully parenthesised infix text that parses back to the same tree.
    std::string print() const;

    /// Tree size in nodes (shared subtrees counted once per reference).
    std::size_t size() const;

    friend bool operator==(const Expr& a, const Expr& b);

private:
    std::shared_ptr<const Node> root_;
};

Expr parse(std::string_view text);

/// Multi-index over the (m + n) variables, x first then t.
using MultiIndex = std::vector<int>;

/// All partials of total order <= order at one point.
struct Jet {
    int order = 0;
    int m = 0;
    int n = 0;
    double value = 0.0;
    std::map<MultiIndex, double> partials;

    double at(const MultiIndex& alpha) const;
    double dx(int k) const;
    double dt(int j) const;
    Jet truncated(int new_order) const;
};

/// Derivative expressions of one Expr for every multi-index up to `order`,
/// built once and evaluated at many points.
class DerivativeTable {
public:
    DerivativeTable(const Expr& e, int m, int n, int order);

    Jet eval(std::span<const double> x, std::span<const double> t) const;
    const Expr& derivative(const MultiIndex& alpha) const;
    int order() const { return order_; }

private:
    int m_;
    int n_;
    int order_;
    std::map<MultiIndex, Expr> table_;
};

Jet jet(const Expr& e, std::span<const double> x, std::span<const double> t, int order);

/// Multi-indices of length `vars` with |alpha| <= order, graded then lexicographic.
std::vector<MultiIndex> multi_indices(int vars, int order);

} // namespace hypofbi
