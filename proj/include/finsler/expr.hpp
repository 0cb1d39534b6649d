#pragma once
#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "finsler/dual.hpp"
#include "finsler/error.hpp"
#include "finsler/linalg.hpp"
#include "finsler/poly_function.hpp"

// Small arithmetic grammar for inline fields:
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := ('-' | '+') unary | power
//   power  := atom ('^' unary)?
//   atom   := number | x1 | x2 | pi | e | func '(' expr (',' expr)? ')' | '(' expr ')'
//   func   := exp | ln | log | sin | cos | sqrt | pow

namespace finsler::expr {

struct Node {
    enum Kind { Num, Var, Add, Sub, Mul, Div, Neg, Pow, Exp, Ln, Sin, Cos, Sqrt } kind = Num;
    double num = 0.0;
    int var = 0;
    std::shared_ptr<const Node> a, b;

    bool constant() const {
        if (kind == Num) return true;
        if (kind == Var) return false;
        return (!a || a->constant()) && (!b || b->constant());
    }
};

using NodePtr = std::shared_ptr<const Node>;

template <class T>
T eval(const Node& n, const Vec2<T>& x) {
    using std::cos;
    using std::exp;
    using std::log;
    using std::pow;
    using std::sin;
    using std::sqrt;
    switch (n.kind) {
        case Node::Num: return T(n.num);
        case Node::Var: return x[n.var];
        case Node::Add: return eval(*n.a, x) + eval(*n.b, x);
        case Node::Sub: return eval(*n.a, x) - eval(*n.b, x);
        case Node::Mul: return eval(*n.a, x) * eval(*n.b, x);
        case Node::Div: return eval(*n.a, x) / eval(*n.b, x);
        case Node::Neg: return -eval(*n.a, x);
        case Node::Pow: {
            if (n.b->constant()) {
                const double p = eval(*n.b, Vec2<double>{0.0, 0.0});
                if (p == 2.0) {
                    const T base = eval(*n.a, x);
                    return base * base;
                }
                return pow(eval(*n.a, x), p);
            }
            return exp(eval(*n.b, x) * log(eval(*n.a, x)));
        }
        case Node::Exp: return exp(eval(*n.a, x));
        case Node::Ln: return log(eval(*n.a, x));
        case Node::Sin: return sin(eval(*n.a, x));
        case Node::Cos: return cos(eval(*n.a, x));
        case Node::Sqrt: return sqrt(eval(*n.a, x));
    }
    return T(0.0);
}

class Parser {
public:
    explicit Parser(std::string src) : s_(std::move(src)) {}

    NodePtr parse() {
        NodePtr n = expression();
        skip();
        if (i_ != s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
        return n;
    }

private:
    std::string s_;
    std::size_t i_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::ConfigError,
                    "expression \"" + s_ + "\": " + what + " at position " + std::to_string(i_));
    }
    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    bool eat(char c) {
        skip();
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }
    static NodePtr make(Node::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }
    static NodePtr number(double v) {
        auto n = std::make_shared<Node>();
        n->num = v;
        return n;
    }

    NodePtr expression() {
        NodePtr n = term();
        for (;;) {
            if (eat('+'))
                n = make(Node::Add, n, term());
            else if (eat('-'))
                n = make(Node::Sub, n, term());
            else
                return n;
        }
    }
    NodePtr term() {
        NodePtr n = unary();
        for (;;) {
            if (eat('*'))
                n = make(Node::Mul, n, unary());
            else if (eat('/'))
                n = make(Node::Div, n, unary());
            else
                return n;
        }
    }
    NodePtr unary() {
        if (eat('-')) return make(Node::Neg, unary());
        if (eat('+')) return unary();
        return power();
    }
    NodePtr power() {
        NodePtr base = atom();
        if (eat('^')) return make(Node::Pow, base, unary());
        return base;
    }
    NodePtr atom() {
        skip();
        if (i_ >= s_.size()) fail("unexpected end");
        if (eat('(')) {
            NodePtr n = expression();
            if (!eat(')')) fail("expected ')'");
            return n;
        }
        const char c = s_[i_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(s_.substr(i_), &used);
            } catch (const std::exception&) {
                fail("bad number");
            }
            i_ += used;
            return number(v);
        }
        if (!std::isalpha(static_cast<unsigned char>(c))) fail("unexpected '" + std::string(1, c) + "'");
        std::size_t j = i_;
        while (j < s_.size() && std::isalnum(static_cast<unsigned char>(s_[j]))) ++j;
        const std::string id = s_.substr(i_, j - i_);
        i_ = j;
        if (id == "x1" || id == "x2") {
            auto n = std::make_shared<Node>();
            n->kind = Node::Var;
            n->var = id == "x1" ? 0 : 1;
            return n;
        }
        if (id == "pi") return number(std::numbers::pi);
        if (id == "e") return number(std::numbers::e);
        Node::Kind k;
        if (id == "exp")
            k = Node::Exp;
        else if (id == "ln" || id == "log")
            k = Node::Ln;
        else if (id == "sin")
            k = Node::Sin;
        else if (id == "cos")
            k = Node::Cos;
        else if (id == "sqrt")
            k = Node::Sqrt;
        else if (id == "pow")
            k = Node::Pow;
        else
            fail("unknown identifier '" + id + "'");
        if (!eat('(')) fail("expected '(' after " + id);
        NodePtr a = expression();
        NodePtr b;
        if (k == Node::Pow) {
            if (!eat(',')) fail("pow takes two arguments");
            b = expression();
        }
        if (!eat(')')) fail("expected ')'");
        return make(k, a, b);
    }
};

inline NodePtr parse(const std::string& src) { return Parser(src).parse(); }

inline ScalarField to_field(const std::string& src) {
    NodePtr n = parse(src);
    return [n](const auto& x) { return eval(*n, x); };
}

}  // namespace finsler::expr
