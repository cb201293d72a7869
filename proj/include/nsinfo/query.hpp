#pragma once

#include <cctype>
#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "nsinfo/errors.hpp"
#include "nsinfo/geometry.hpp"

namespace nsinfo {

// ---------------------------------------------------------------------------
// Scalar query expressions f: R^n -> R.
//
// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ('^' integer)?
//   base   := number | 'x'index | '(' expr ')' | '-' base
// ---------------------------------------------------------------------------

enum class ExprKind { Constant, Variable, Negate, Add, Sub, Mul, Div, Pow };

struct ExprNode {
    ExprKind kind = ExprKind::Constant;
    double value = 0.0; // Constant
    int var = 0;        // Variable (0-based)
    int expo = 0;       // Pow
    std::shared_ptr<const ExprNode> a, b;
};

using ExprPtr = std::shared_ptr<const ExprNode>;

namespace detail {

inline ExprPtr make_const(double v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Constant;
    n->value = v;
    return n;
}
inline ExprPtr make_var(int i) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Variable;
    n->var = i;
    return n;
}
inline ExprPtr make_unary(ExprKind k, ExprPtr a) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->a = std::move(a);
    return n;
}
inline ExprPtr make_binary(ExprKind k, ExprPtr a, ExprPtr b) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}
inline ExprPtr make_pow(ExprPtr a, int e) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Pow;
    n->a = std::move(a);
    n->expo = e;
    return n;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Separable quadratic form  c + sum_i (lin_i x_i + quad_i x_i^2).
// Detected structurally; its range over a box is exact (each coordinate
// contributes independently), which makes images and preimages of affine and
// diagonal-quadratic queries certified without branch and bound.
// ---------------------------------------------------------------------------

struct SeparableForm {
    double c = 0.0;
    std::vector<double> lin, quad;

    explicit SeparableForm(int dim)
        : lin(static_cast<size_t>(dim), 0.0), quad(static_cast<size_t>(dim), 0.0) {}

    bool is_affine() const {
        for (double q : quad)
            if (q != 0.0) return false;
        return true;
    }

    bool is_constant() const {
        if (!is_affine()) return false;
        for (double a : lin)
            if (a != 0.0) return false;
        return true;
    }

    // support: -1 if constant, the single variable index, or -2 if several
    int single_var() const {
        int v = -1;
        for (size_t i = 0; i < lin.size(); ++i) {
            if (lin[i] != 0.0 || quad[i] != 0.0) {
                if (v >= 0) return -2;
                v = static_cast<int>(i);
            }
        }
        return v;
    }

    // exact range of  q t^2 + a t  over [lo, hi]
    static Interval coord_range(double q, double a, const Interval& t) {
        if (q == 0.0) {
            double v1 = a * t.lo, v2 = a * t.hi;
            return {std::min(v1, v2), std::max(v1, v2)};
        }
        double v1 = q * t.lo * t.lo + a * t.lo;
        double v2 = q * t.hi * t.hi + a * t.hi;
        double lo = std::min(v1, v2), hi = std::max(v1, v2);
        double crit = -a / (2.0 * q);
        if (t.lo < crit && crit < t.hi) {
            double vc = q * crit * crit + a * crit;
            lo = std::min(lo, vc);
            hi = std::max(hi, vc);
        }
        return {lo, hi};
    }

    Interval range_on(std::span<const Interval> box) const {
        double lo = c, hi = c;
        for (size_t d = 0; d < lin.size(); ++d) {
            if (lin[d] == 0.0 && quad[d] == 0.0) continue;
            Interval r = coord_range(quad[d], lin[d], box[d]);
            lo += r.lo;
            hi += r.hi;
        }
        return {lo, hi};
    }
};

namespace detail {

inline std::optional<SeparableForm> separable_of(const ExprPtr& e, int dim) {
    switch (e->kind) {
    case ExprKind::Constant: {
        SeparableForm f(dim);
        f.c = e->value;
        return f;
    }
    case ExprKind::Variable: {
        SeparableForm f(dim);
        f.lin[static_cast<size_t>(e->var)] = 1.0;
        return f;
    }
    case ExprKind::Negate: {
        auto f = separable_of(e->a, dim);
        if (!f) return std::nullopt;
        f->c = -f->c;
        for (auto& v : f->lin) v = -v;
        for (auto& v : f->quad) v = -v;
        return f;
    }
    case ExprKind::Add:
    case ExprKind::Sub: {
        auto fa = separable_of(e->a, dim);
        auto fb = separable_of(e->b, dim);
        if (!fa || !fb) return std::nullopt;
        double s = e->kind == ExprKind::Add ? 1.0 : -1.0;
        fa->c += s * fb->c;
        for (size_t i = 0; i < fa->lin.size(); ++i) {
            fa->lin[i] += s * fb->lin[i];
            fa->quad[i] += s * fb->quad[i];
        }
        return fa;
    }
    case ExprKind::Mul: {
        auto fa = separable_of(e->a, dim);
        auto fb = separable_of(e->b, dim);
        if (!fa || !fb) return std::nullopt;
        auto scaled = [](SeparableForm f, double k) {
            f.c *= k;
            for (auto& v : f.lin) v *= k;
            for (auto& v : f.quad) v *= k;
            return f;
        };
        if (fb->is_constant()) return scaled(*fa, fb->c);
        if (fa->is_constant()) return scaled(*fb, fa->c);
        // affine * affine in one shared variable stays separable
        if (fa->is_affine() && fb->is_affine()) {
            int va = fa->single_var(), vb = fb->single_var();
            if (va >= 0 && va == vb) {
                SeparableForm f(dim);
                size_t v = static_cast<size_t>(va);
                double a1 = fa->lin[v], c1 = fa->c, a2 = fb->lin[v], c2 = fb->c;
                f.quad[v] = a1 * a2;
                f.lin[v] = a1 * c2 + a2 * c1;
                f.c = c1 * c2;
                return f;
            }
        }
        return std::nullopt;
    }
    case ExprKind::Div: {
        auto fa = separable_of(e->a, dim);
        auto fb = separable_of(e->b, dim);
        if (!fa || !fb || !fb->is_constant() || fb->c == 0.0) return std::nullopt;
        double k = 1.0 / fb->c;
        fa->c *= k;
        for (auto& v : fa->lin) v *= k;
        for (auto& v : fa->quad) v *= k;
        return fa;
    }
    case ExprKind::Pow: {
        auto fa = separable_of(e->a, dim);
        if (!fa) return std::nullopt;
        if (fa->is_constant()) {
            SeparableForm f(dim);
            f.c = std::pow(fa->c, e->expo);
            return f;
        }
        if (e->expo == 0) {
            SeparableForm f(dim);
            f.c = 1.0;
            return f;
        }
        if (e->expo == 1) return fa;
        if (e->expo == 2 && fa->is_affine()) {
            int v = fa->single_var();
            if (v >= 0) {
                SeparableForm f(dim);
                size_t vi = static_cast<size_t>(v);
                double a = fa->lin[vi], c = fa->c;
                f.quad[vi] = a * a;
                f.lin[vi] = 2.0 * a * c;
                f.c = c * c;
                return f;
            }
        }
        return std::nullopt;
    }
    }
    return std::nullopt;
}

inline double eval_node(const ExprNode* e, std::span<const double> x) {
    switch (e->kind) {
    case ExprKind::Constant: return e->value;
    case ExprKind::Variable: return x[static_cast<size_t>(e->var)];
    case ExprKind::Negate: return -eval_node(e->a.get(), x);
    case ExprKind::Add: return eval_node(e->a.get(), x) + eval_node(e->b.get(), x);
    case ExprKind::Sub: return eval_node(e->a.get(), x) - eval_node(e->b.get(), x);
    case ExprKind::Mul: return eval_node(e->a.get(), x) * eval_node(e->b.get(), x);
    case ExprKind::Div: {
        double d = eval_node(e->b.get(), x);
        if (d == 0.0) throw ComputeError("query evaluation: division by zero");
        return eval_node(e->a.get(), x) / d;
    }
    case ExprKind::Pow: {
        double b = eval_node(e->a.get(), x);
        if (e->expo < 0 && b == 0.0) throw ComputeError("query evaluation: zero to negative power");
        return std::pow(b, e->expo);
    }
    }
    return 0.0;
}

inline Interval eval_node_interval(const ExprNode* e, std::span<const Interval> box) {
    switch (e->kind) {
    case ExprKind::Constant: return Interval(e->value, e->value);
    case ExprKind::Variable: return box[static_cast<size_t>(e->var)];
    case ExprKind::Negate: return -eval_node_interval(e->a.get(), box);
    case ExprKind::Add: return eval_node_interval(e->a.get(), box) + eval_node_interval(e->b.get(), box);
    case ExprKind::Sub: return eval_node_interval(e->a.get(), box) - eval_node_interval(e->b.get(), box);
    case ExprKind::Mul: return eval_node_interval(e->a.get(), box) * eval_node_interval(e->b.get(), box);
    case ExprKind::Div:
        return interval_div(eval_node_interval(e->a.get(), box), eval_node_interval(e->b.get(), box));
    case ExprKind::Pow: return interval_pow(eval_node_interval(e->a.get(), box), e->expo);
    }
    return Interval();
}

inline ExprPtr derivative_node(const ExprPtr& e, int var) {
    using namespace detail;
    switch (e->kind) {
    case ExprKind::Constant: return make_const(0.0);
    case ExprKind::Variable: return make_const(e->var == var ? 1.0 : 0.0);
    case ExprKind::Negate: return make_unary(ExprKind::Negate, derivative_node(e->a, var));
    case ExprKind::Add: return make_binary(ExprKind::Add, derivative_node(e->a, var), derivative_node(e->b, var));
    case ExprKind::Sub: return make_binary(ExprKind::Sub, derivative_node(e->a, var), derivative_node(e->b, var));
    case ExprKind::Mul:
        return make_binary(ExprKind::Add,
                           make_binary(ExprKind::Mul, derivative_node(e->a, var), e->b),
                           make_binary(ExprKind::Mul, e->a, derivative_node(e->b, var)));
    case ExprKind::Div:
        // (a/b)' = (a'b - ab') / b^2
        return make_binary(ExprKind::Div,
                           make_binary(ExprKind::Sub,
                                       make_binary(ExprKind::Mul, derivative_node(e->a, var), e->b),
                                       make_binary(ExprKind::Mul, e->a, derivative_node(e->b, var))),
                           make_pow(e->b, 2));
    case ExprKind::Pow:
        if (e->expo == 0) return make_const(0.0);
        return make_binary(ExprKind::Mul,
                           make_binary(ExprKind::Mul, make_const(static_cast<double>(e->expo)),
                                       make_pow(e->a, e->expo - 1)),
                           derivative_node(e->a, var));
    }
    return make_const(0.0);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Query: a parsed expression bound to a dimension.
// ---------------------------------------------------------------------------

class Query {
public:
    Query() = default;
    Query(ExprPtr root, int dim, std::string text)
        : root_(std::move(root)), dim_(dim), text_(std::move(text)) {
        sep_ = detail::separable_of(root_, dim_);
    }

    bool valid() const { return root_ != nullptr; }
    int dim() const { return dim_; }
    const std::string& text() const { return text_; }
    const std::optional<SeparableForm>& separable() const { return sep_; }
    bool is_affine() const { return sep_ && sep_->is_affine(); }

    double eval(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != dim_) throw InputError("query: point dimension mismatch");
        return detail::eval_node(root_.get(), x);
    }

    // Inclusion-isotonic range bound over a box. The separable closed form
    // (exact) is used when available unless the caller forces the generic
    // interval-arithmetic walk.
    Interval eval_interval(std::span<const Interval> box, bool force_generic = false) const {
        if (static_cast<int>(box.size()) != dim_) throw InputError("query: box dimension mismatch");
        if (sep_ && !force_generic) return sep_->range_on(box);
        return detail::eval_node_interval(root_.get(), box);
    }

    Query derivative(int var) const {
        if (var < 0 || var >= dim_) throw InputError("query: derivative variable out of range");
        std::ostringstream t;
        t << "d/dx" << (var + 1) << "(" << text_ << ")";
        return Query(detail::derivative_node(root_, var), dim_, t.str());
    }

    const ExprPtr& root() const { return root_; }

private:
    ExprPtr root_;
    int dim_ = 0;
    std::string text_;
    std::optional<SeparableForm> sep_;
};

// ---------------------------------------------------------------------------
// Recursive-descent parser
// ---------------------------------------------------------------------------

namespace detail {

class Parser {
public:
    Parser(const std::string& s, int dim) : s_(s), dim_(dim) {}

    ExprPtr parse() {
        auto e = parse_expr();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    const std::string& s_;
    int dim_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        std::ostringstream os;
        os << "query parse error at position " << pos_ << ": " << msg;
        throw InputError(os.str());
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    ExprPtr parse_expr() {
        auto e = parse_term();
        for (;;) {
            if (eat('+')) e = make_binary(ExprKind::Add, e, parse_term());
            else if (eat('-')) e = make_binary(ExprKind::Sub, e, parse_term());
            else return e;
        }
    }

    ExprPtr parse_term() {
        auto e = parse_factor();
        for (;;) {
            if (eat('*')) e = make_binary(ExprKind::Mul, e, parse_factor());
            else if (eat('/')) e = make_binary(ExprKind::Div, e, parse_factor());
            else return e;
        }
    }

    ExprPtr parse_factor() {
        auto e = parse_base();
        if (eat('^')) return make_pow(e, parse_int());
        return e;
    }

    int parse_int() {
        skip_ws();
        size_t start = pos_;
        bool neg = false;
        if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) {
            neg = s_[pos_] == '-';
            ++pos_;
        }
        long v = 0;
        bool any = false;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            v = v * 10 + (s_[pos_] - '0');
            if (v > 64) fail("exponent too large");
            ++pos_;
            any = true;
        }
        if (!any) {
            pos_ = start;
            fail("expected integer exponent");
        }
        return static_cast<int>(neg ? -v : v);
    }

    ExprPtr parse_base() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (c == '-') {
            ++pos_;
            return make_unary(ExprKind::Negate, parse_base());
        }
        if (c == '(') {
            ++pos_;
            auto e = parse_expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (c == 'x' || c == 'X') {
            ++pos_;
            size_t start = pos_;
            long idx = 0;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                idx = idx * 10 + (s_[pos_] - '0');
                if (idx > 1000000) break;
                ++pos_;
            }
            if (pos_ == start) fail("expected variable index after 'x'");
            if (idx < 1 || idx > dim_) {
                std::ostringstream os;
                os << "variable x" << idx << " out of range for dimension " << dim_;
                throw InputError(os.str());
            }
            return make_var(static_cast<int>(idx - 1));
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t end = pos_;
            while (end < s_.size() &&
                   (std::isdigit(static_cast<unsigned char>(s_[end])) || s_[end] == '.' ||
                    s_[end] == 'e' || s_[end] == 'E' ||
                    ((s_[end] == '+' || s_[end] == '-') && end > pos_ &&
                     (s_[end - 1] == 'e' || s_[end - 1] == 'E'))))
                ++end;
            std::string num = s_.substr(pos_, end - pos_);
            try {
                size_t used = 0;
                double v = std::stod(num, &used);
                if (used != num.size()) fail("bad numeric literal");
                pos_ = end;
                return make_const(v);
            } catch (const std::exception&) {
                fail("bad numeric literal");
            }
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

} // namespace detail

inline Query parse_query(const std::string& text, int dim) {
    if (dim < 1) throw InputError("query: dimension must be >= 1");
    detail::Parser p(text, dim);
    return Query(p.parse(), dim, text);
}

inline Query query_difference(const Query& a, const Query& b) {
    if (a.dim() != b.dim()) throw InputError("query difference: dimension mismatch");
    return Query(detail::make_binary(ExprKind::Sub, a.root(), b.root()), a.dim(),
                 "(" + a.text() + ") - (" + b.text() + ")");
}

} // namespace nsinfo
