#include "hypofbi/expr.hpp"

#include "hypofbi/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <unordered_map>

namespace hypofbi {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::Syntax: return "syntax";
    case ErrorCode::UnknownIdentifier: return "unknown_identifier";
    case ErrorCode::BadExponent: return "bad_exponent";
    case ErrorCode::DivisionByZero: return "division_by_zero";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Singular: return "singular";
    case ErrorCode::BranchCut: return "branch_cut";
    case ErrorCode::Overflow: return "overflow";
    case ErrorCode::Undersampled: return "undersampled";
    case ErrorCode::FitFailure: return "fit_failure";
    case ErrorCode::NotASolution: return "not_a_solution";
    case ErrorCode::EmptyFiber: return "empty_fiber";
    }
    return "unknown";
}

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;
using Kind = Expr::Kind;

NodePtr leaf(Kind kind, double value, int index, long offset) {
    return std::make_shared<const Expr::Node>(Expr::Node{kind, value, index, offset, nullptr, nullptr});
}

NodePtr node(Kind kind, NodePtr lhs, NodePtr rhs, long offset) {
    return std::make_shared<const Expr::Node>(Expr::Node{kind, 0.0, 0, offset, std::move(lhs), std::move(rhs)});
}

bool is_const(const NodePtr& p) { return p->kind == Kind::Const; }
bool is_const(const NodePtr& p, double v) { return p->kind == Kind::Const && p->value == v; }

// Constructors with constant folding and 0/1 identities.
NodePtr make_const(double v, long offset = -1) { return leaf(Kind::Const, v, 0, offset); }

NodePtr make_add(NodePtr a, NodePtr b, long offset = -1) {
    if (is_const(a) && is_const(b)) return make_const(a->value + b->value, offset);
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    return node(Kind::Add, std::move(a), std::move(b), offset);
}

NodePtr make_neg(NodePtr a, long offset = -1) {
    if (is_const(a)) return make_const(-a->value, offset);
    return node(Kind::Neg, std::move(a), nullptr, offset);
}

NodePtr make_sub(NodePtr a, NodePtr b, long offset = -1) {
    if (is_const(a) && is_const(b)) return make_const(a->value - b->value, offset);
    if (is_const(b, 0.0)) return a;
    if (is_const(a, 0.0)) return make_neg(std::move(b), offset);
    return node(Kind::Sub, std::move(a), std::move(b), offset);
}

NodePtr make_mul(NodePtr a, NodePtr b, long offset = -1) {
    if (is_const(a) && is_const(b)) return make_const(a->value * b->value, offset);
    if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0, offset);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    return node(Kind::Mul, std::move(a), std::move(b), offset);
}

NodePtr make_div(NodePtr a, NodePtr b, long offset = -1) {
    if (is_const(a) && is_const(b) && b->value != 0.0) return make_const(a->value / b->value, offset);
    if (is_const(b, 1.0)) return a;
    return node(Kind::Div, std::move(a), std::move(b), offset);
}

NodePtr make_unary(Kind kind, NodePtr a, long offset = -1) {
    if (is_const(a)) {
        const double v = a->value;
        switch (kind) {
        case Kind::Exp: return make_const(std::exp(v), offset);
        case Kind::Sin: return make_const(std::sin(v), offset);
        case Kind::Cos: return make_const(std::cos(v), offset);
        default: break;
        }
    }
    return node(kind, std::move(a), nullptr, offset);
}

NodePtr make_pow(const NodePtr& base, long exponent, long offset = -1) {
    if (exponent == 0) return make_const(1.0, offset);
    const long k = exponent < 0 ? -exponent : exponent;
    NodePtr acc = base;
    for (long i = 1; i < k; ++i) acc = make_mul(acc, base, offset);
    if (exponent < 0) return make_div(make_const(1.0, offset), acc, offset);
    return acc;
}

bool equal(const NodePtr& a, const NodePtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
    case Kind::Const: return a->value == b->value;
    case Kind::XVar:
    case Kind::TVar: return a->index == b->index;
    default: return equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
    }
}

double eval_node(const Expr::Node& n, std::span<const double> x, std::span<const double> t) {
    switch (n.kind) {
    case Kind::Const: return n.value;
    case Kind::XVar:
        if (static_cast<std::size_t>(n.index) >= x.size())
            throw Error(ErrorCode::Domain, "x" + std::to_string(n.index + 1) + " not supplied", n.offset);
        return x[n.index];
    case Kind::TVar:
        if (static_cast<std::size_t>(n.index) >= t.size())
            throw Error(ErrorCode::Domain, "t" + std::to_string(n.index + 1) + " not supplied", n.offset);
        return t[n.index];
    case Kind::Add: return eval_node(*n.lhs, x, t) + eval_node(*n.rhs, x, t);
    case Kind::Sub: return eval_node(*n.lhs, x, t) - eval_node(*n.rhs, x, t);
    case Kind::Mul: return eval_node(*n.lhs, x, t) * eval_node(*n.rhs, x, t);
    case Kind::Div: {
        const double den = eval_node(*n.rhs, x, t);
        if (den == 0.0)
            throw Error(ErrorCode::DivisionByZero,
                        "division by zero at offset " + std::to_string(n.offset), n.offset);
        return eval_node(*n.lhs, x, t) / den;
    }
    case Kind::Neg: return -eval_node(*n.lhs, x, t);
    case Kind::Exp: return std::exp(eval_node(*n.lhs, x, t));
    case Kind::Sin: return std::sin(eval_node(*n.lhs, x, t));
    case Kind::Cos: return std::cos(eval_node(*n.lhs, x, t));
    }
    return 0.0;
}

class Differentiator {
public:
    Differentiator(Kind var_kind, int index) : var_kind_(var_kind), index_(index) {}

    NodePtr operator()(const NodePtr& p) {
        if (auto it = memo_.find(p.get()); it != memo_.end()) return it->second;
        NodePtr d = compute(p);
        memo_.emplace(p.get(), d);
        return d;
    }

private:
    NodePtr compute(const NodePtr& p) {
        const long off = p->offset;
        switch (p->kind) {
        case Kind::Const: return make_const(0.0);
        case Kind::XVar:
        case Kind::TVar:
            return make_const(p->kind == var_kind_ && p->index == index_ ? 1.0 : 0.0);
        case Kind::Add: return make_add((*this)(p->lhs), (*this)(p->rhs), off);
        case Kind::Sub: return make_sub((*this)(p->lhs), (*this)(p->rhs), off);
        case Kind::Mul:
            return make_add(make_mul((*this)(p->lhs), p->rhs, off), make_mul(p->lhs, (*this)(p->rhs), off), off);
        case Kind::Div: {
            NodePtr num = make_sub(make_mul((*this)(p->lhs), p->rhs, off), make_mul(p->lhs, (*this)(p->rhs), off), off);
            return make_div(num, make_mul(p->rhs, p->rhs, off), off);
        }
        case Kind::Neg: return make_neg((*this)(p->lhs), off);
        case Kind::Exp: return make_mul(p, (*this)(p->lhs), off);
        case Kind::Sin: return make_mul(make_unary(Kind::Cos, p->lhs, off), (*this)(p->lhs), off);
        case Kind::Cos:
            return make_neg(make_mul(make_unary(Kind::Sin, p->lhs, off), (*this)(p->lhs), off), off);
        }
        return make_const(0.0);
    }

    Kind var_kind_;
    int index_;
    std::unordered_map<const Expr::Node*, NodePtr> memo_;
};

void append_number(std::string& out, double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

void print_node(const Expr::Node& n, std::string& out) {
    auto binary = [&](char op) {
        out += '(';
        print_node(*n.lhs, out);
        out += op;
        print_node(*n.rhs, out);
        out += ')';
    };
    auto call = [&](const char* name) {
        out += name;
        out += '(';
        print_node(*n.lhs, out);
        out += ')';
    };
    switch (n.kind) {
    case Kind::Const:
        if (std::signbit(n.value)) {
            out += "(-";
            append_number(out, -n.value);
            out += ')';
        } else {
            append_number(out, n.value);
        }
        break;
    case Kind::XVar: out += 'x'; out += std::to_string(n.index + 1); break;
    case Kind::TVar: out += 't'; out += std::to_string(n.index + 1); break;
    case Kind::Add: binary('+'); break;
    case Kind::Sub: binary('-'); break;
    case Kind::Mul: binary('*'); break;
    case Kind::Div: binary('/'); break;
    case Kind::Neg:
        out += "(-";
        print_node(*n.lhs, out);
        out += ')';
        break;
    case Kind::Exp: call("exp"); break;
    case Kind::Sin: call("sin"); break;
    case Kind::Cos: call("cos"); break;
    }
}

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    NodePtr run() {
        NodePtr e = expression();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg, ErrorCode code = ErrorCode::Syntax) const {
        throw Error(code, msg + " at offset " + std::to_string(pos_), static_cast<long>(pos_));
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expression() {
        NodePtr lhs = term();
        for (;;) {
            skip_ws();
            const long off = static_cast<long>(pos_);
            if (accept('+')) lhs = make_add(lhs, term(), off);
            else if (accept('-')) lhs = make_sub(lhs, term(), off);
            else return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            skip_ws();
            const long off = static_cast<long>(pos_);
            if (accept('*')) lhs = make_mul(lhs, unary(), off);
            else if (accept('/')) lhs = make_div(lhs, unary(), off);
            else return lhs;
        }
    }

    NodePtr unary() {
        skip_ws();
        const long off = static_cast<long>(pos_);
        if (accept('-')) return make_neg(unary(), off);
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        skip_ws();
        const long off = static_cast<long>(pos_);
        if (!accept('^')) return base;
        skip_ws();
        std::size_t start = pos_;
        if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
        std::size_t digits = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ == digits) {
            pos_ = start;
            fail("exponent must be an integer literal", ErrorCode::BadExponent);
        }
        if (pos_ < s_.size() && (s_[pos_] == '.' || s_[pos_] == 'e' || s_[pos_] == 'E')) {
            pos_ = start;
            fail("exponent must be an integer literal", ErrorCode::BadExponent);
        }
        long k = 0;
        const char* first = s_.data() + start + (s_[start] == '+' ? 1 : 0);
        auto res = std::from_chars(first, s_.data() + pos_, k);
        if (res.ec != std::errc{} || k > 64 || k < -64) {
            pos_ = start;
            fail("exponent out of range", ErrorCode::BadExponent);
        }
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == '^') fail("chained exponents need parentheses");
        return make_pow(base, k, off);
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const long off = static_cast<long>(pos_);
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expression();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            std::string_view id = s_.substr(start, pos_ - start);
            if (id == "exp" || id == "sin" || id == "cos") {
                if (!accept('(')) fail("expected '(' after " + std::string(id));
                NodePtr arg = expression();
                if (!accept(')')) fail("expected ')'");
                const Kind k = id == "exp" ? Kind::Exp : id == "sin" ? Kind::Sin : Kind::Cos;
                return make_unary(k, arg, off);
            }
            if ((id[0] == 'x' || id[0] == 't')) {
                int index = 1;
                if (id.size() > 1) {
                    auto res = std::from_chars(id.data() + 1, id.data() + id.size(), index);
                    if (res.ec != std::errc{} || res.ptr != id.data() + id.size() || index < 1) {
                        pos_ = start;
                        fail("unknown identifier '" + std::string(id) + "'", ErrorCode::UnknownIdentifier);
                    }
                }
                return leaf(id[0] == 'x' ? Kind::XVar : Kind::TVar, 0.0, index - 1, off);
            }
            pos_ = start;
            fail("unknown identifier '" + std::string(id) + "'", ErrorCode::UnknownIdentifier);
        }
        fail("unexpected character '" + std::string(1, c) + "'");
    }

    NodePtr number() {
        const long off = static_cast<long>(pos_);
        double v = 0.0;
        auto res = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
        if (res.ec != std::errc{}) fail("malformed number");
        pos_ = static_cast<std::size_t>(res.ptr - s_.data());
        return make_const(v, off);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

int arity(const Expr::Node& n, Kind var) {
    if (n.kind == var) return n.index + 1;
    int a = 0;
    if (n.lhs) a = std::max(a, arity(*n.lhs, var));
    if (n.rhs) a = std::max(a, arity(*n.rhs, var));
    return a;
}

std::size_t count(const Expr::Node& n) {
    return 1 + (n.lhs ? count(*n.lhs) : 0) + (n.rhs ? count(*n.rhs) : 0);
}

} // namespace

Expr::Expr() : root_(make_const(0.0)) {}

Expr Expr::constant(double v) { return Expr(make_const(v)); }
Expr Expr::x(int index) { return Expr(leaf(Kind::XVar, 0.0, index, -1)); }
Expr Expr::t(int index) { return Expr(leaf(Kind::TVar, 0.0, index, -1)); }

Expr operator+(const Expr& a, const Expr& b) { return Expr(make_add(a.root_, b.root_)); }
Expr operator-(const Expr& a, const Expr& b) { return Expr(make_sub(a.root_, b.root_)); }
Expr operator*(const Expr& a, const Expr& b) { return Expr(make_mul(a.root_, b.root_)); }
Expr operator/(const Expr& a, const Expr& b) { return Expr(make_div(a.root_, b.root_)); }
Expr operator-(const Expr& a) { return Expr(make_neg(a.root_)); }
Expr exp(const Expr& a) { return Expr(make_unary(Kind::Exp, a.root_)); }
Expr sin(const Expr& a) { return Expr(make_unary(Kind::Sin, a.root_)); }
Expr cos(const Expr& a) { return Expr(make_unary(Kind::Cos, a.root_)); }
Expr Expr::pow(int exponent) const { return Expr(make_pow(root_, exponent)); }

bool Expr::is_constant(double v) const { return is_const(root_, v); }
int Expr::x_arity() const { return arity(*root_, Kind::XVar); }
int Expr::t_arity() const { return arity(*root_, Kind::TVar); }

double Expr::eval(std::span<const double> x, std::span<const double> t) const {
    return eval_node(*root_, x, t);
}

Expr Expr::diff_x(int index) const { return Expr(Differentiator(Kind::XVar, index)(root_)); }
Expr Expr::diff_t(int index) const { return Expr(Differentiator(Kind::TVar, index)(root_)); }

std::string Expr::print() const {
    std::string out;
    print_node(*root_, out);
    return out;
}

std::size_t Expr::size() const { return count(*root_); }

bool operator==(const Expr& a, const Expr& b) { return equal(a.root_, b.root_); }

Expr parse(std::string_view text) { return Expr(Parser(text).run()); }

double Jet::at(const MultiIndex& alpha) const {
    auto it = partials.find(alpha);
    if (it == partials.end()) throw Error(ErrorCode::InvalidArgument, "multi-index beyond jet order");
    return it->second;
}

double Jet::dx(int k) const {
    MultiIndex a(m + n, 0);
    a[k] = 1;
    return at(a);
}

double Jet::dt(int j) const {
    MultiIndex a(m + n, 0);
    a[m + j] = 1;
    return at(a);
}

Jet Jet::truncated(int new_order) const {
    Jet out{new_order, m, n, value, {}};
    for (const auto& [alpha, v] : partials) {
        int total = 0;
        for (int a : alpha) total += a;
        if (total <= new_order) out.partials.emplace(alpha, v);
    }
    return out;
}

std::vector<MultiIndex> multi_indices(int vars, int order) {
    std::vector<MultiIndex> out;
    MultiIndex cur(vars, 0);
    for (int total = 0; total <= order; ++total) {
        // all compositions of `total` into `vars` parts, lexicographically descending
        std::function<void(int, int)> rec = [&](int pos, int left) {
            if (pos == vars - 1) {
                cur[pos] = left;
                out.push_back(cur);
                return;
            }
            for (int v = left; v >= 0; --v) {
                cur[pos] = v;
                rec(pos + 1, left - v);
            }
        };
        if (vars == 0) {
            if (total == 0) out.push_back({});
            continue;
        }
        rec(0, total);
    }
    return out;
}

DerivativeTable::DerivativeTable(const Expr& e, int m, int n, int order) : m_(m), n_(n), order_(order) {
    if (order < 0) throw Error(ErrorCode::InvalidArgument, "jet order must be non-negative");
    if (e.x_arity() > m || e.t_arity() > n)
        throw Error(ErrorCode::Domain, "expression references variables beyond (m, n)");
    for (const MultiIndex& alpha : multi_indices(m + n, order)) {
        auto first = std::find_if(alpha.begin(), alpha.end(), [](int a) { return a > 0; });
        if (first == alpha.end()) {
            table_.emplace(alpha, e);
            continue;
        }
        const int var = static_cast<int>(first - alpha.begin());
        MultiIndex pred = alpha;
        --pred[var];
        const Expr& base = table_.at(pred);
        table_.emplace(alpha, var < m ? base.diff_x(var) : base.diff_t(var - m));
    }
}

Jet DerivativeTable::eval(std::span<const double> x, std::span<const double> t) const {
    if (x.size() < static_cast<std::size_t>(m_) || t.size() < static_cast<std::size_t>(n_))
        throw Error(ErrorCode::InvalidArgument, "point dimension smaller than (m, n)");
    Jet out{order_, m_, n_, 0.0, {}};
    for (const auto& [alpha, d] : table_) out.partials.emplace(alpha, d.eval(x, t));
    out.value = out.partials.at(MultiIndex(m_ + n_, 0));
    return out;
}

const Expr& DerivativeTable::derivative(const MultiIndex& alpha) const {
    auto it = table_.find(alpha);
    if (it == table_.end()) throw Error(ErrorCode::InvalidArgument, "multi-index beyond table order");
    return it->second;
}

Jet jet(const Expr& e, std::span<const double> x, std::span<const double> t, int order) {
    return DerivativeTable(e, static_cast<int>(x.size()), static_cast<int>(t.size()), order).eval(x, t);
}

} // namespace hypofbi
