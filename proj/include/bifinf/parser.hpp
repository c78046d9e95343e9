#pragma once

// Precedence-climbing parser for polynomial text.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' exponent)*
//   exponent:= ['-'] integer | '(' ['-'] integer ')'
//   primary := number | identifier | '(' expr ')'
//
// Binary operators are left-associative; `^` binds tighter than unary minus,
// so -x^2 is -(x^2). Juxtaposition ("2x") is a syntax error. Numbers are
// integers or decimals, both read exactly.
//
// The value semantics come from an Algebra policy:
//   using value_type;
//   value_type literal(const Rational&);
//   std::optional<value_type> identifier(std::string_view);
//   value_type add(a, b), sub(a, b), mul(a, b), neg(a);
//   value_type div(a, b, position);        // may throw ParseError
//   value_type power(a, long e, position); // may throw ParseError

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bifinf/error.hpp"
#include "bifinf/rational.hpp"
#include "bifinf/sparse_poly.hpp"

namespace bifinf {

template <class Algebra>
class ExpressionParser {
public:
    using value_type = typename Algebra::value_type;

    ExpressionParser(std::string_view text, Algebra& algebra) : text_(text), alg_(algebra) {}

    value_type parse() {
        pos_ = 0;
        skip_space();
        if (pos_ == text_.size()) throw ParseError("empty expression", pos_);
        value_type v = expr();
        skip_space();
        if (pos_ != text_.size()) throw ParseError(unexpected(), pos_);
        return v;
    }

private:
    value_type expr() {
        value_type acc = term();
        for (;;) {
            skip_space();
            if (accept('+')) {
                acc = alg_.add(acc, term());
            } else if (accept('-')) {
                acc = alg_.sub(acc, term());
            } else {
                return acc;
            }
        }
    }

    value_type term() {
        value_type acc = unary();
        for (;;) {
            skip_space();
            std::size_t at = pos_;
            if (accept('*')) {
                acc = alg_.mul(acc, unary());
            } else if (accept('/')) {
                acc = alg_.div(acc, unary(), at);
            } else {
                return acc;
            }
        }
    }

    value_type unary() {
        skip_space();
        if (accept('-')) return alg_.neg(unary());
        if (accept('+')) return unary();
        return power();
    }

    value_type power() {
        value_type base = primary();
        for (;;) {
            skip_space();
            std::size_t at = pos_;
            if (!accept('^')) return base;
            long e = exponent();
            base = alg_.power(base, e, at);
        }
    }

    long exponent() {
        skip_space();
        bool paren = accept('(');
        skip_space();
        bool negative = accept('-');
        skip_space();
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (start == pos_) throw ParseError("exponent must be an integer literal", start);
        if (pos_ - start > 9) throw ParseError("exponent too large", start);
        long e = std::stol(std::string(text_.substr(start, pos_ - start)));
        if (paren) {
            skip_space();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
        }
        return negative ? -e : e;
    }

    value_type primary() {
        skip_space();
        if (pos_ == text_.size()) throw ParseError("unexpected end of input", pos_);
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            value_type v = expr();
            skip_space();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            return v;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            std::string_view name = text_.substr(start, pos_ - start);
            auto v = alg_.identifier(name);
            if (!v) throw ParseError("unknown identifier '" + std::string(name) + "'", start);
            return *v;
        }
        throw ParseError(unexpected(), pos_);
    }

    value_type number() {
        std::size_t start = pos_;
        bool dot = false;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (std::isdigit(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (c == '.' && !dot) {
                dot = true;
                ++pos_;
            } else {
                break;
            }
        }
        std::string lit(text_.substr(start, pos_ - start));
        if (lit == ".") throw ParseError("malformed number", start);
        if (lit.back() == '.') lit += "0";
        if (lit.front() == '.') lit = "0" + lit;
        return alg_.literal(parse_rational(lit));
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string unexpected() const {
        if (pos_ >= text_.size()) return "unexpected end of input";
        return std::string("unexpected character '") + text_[pos_] + "'";
    }

    std::string_view text_;
    Algebra& alg_;
    std::size_t pos_ = 0;
};

/// Polynomial semantics: division only by nonzero constants, exponents >= 0.
class PolyAlgebra {
public:
    using value_type = SparsePoly;

    explicit PolyAlgebra(std::vector<std::string> vars) : vars_(std::move(vars)) {}

    SparsePoly literal(const Rational& r) const { return SparsePoly::constant(vars_.size(), r); }

    std::optional<SparsePoly> identifier(std::string_view name) const {
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i] == name) return SparsePoly::variable(vars_.size(), i);
        return std::nullopt;
    }

    SparsePoly add(const SparsePoly& a, const SparsePoly& b) const { return a + b; }
    SparsePoly sub(const SparsePoly& a, const SparsePoly& b) const { return a - b; }
    SparsePoly mul(const SparsePoly& a, const SparsePoly& b) const { return a * b; }
    SparsePoly neg(const SparsePoly& a) const { return -a; }

    SparsePoly div(const SparsePoly& a, const SparsePoly& b, std::size_t at) const {
        if (!b.is_constant() || b.is_zero())
            throw ParseError("division only by a nonzero constant", at);
        return a * (1 / b.constant_term());
    }

    SparsePoly power(const SparsePoly& a, long e, std::size_t at) const {
        if (e < 0) throw ParseError("negative exponent", at);
        return a.pow(static_cast<std::uint32_t>(e));
    }

private:
    std::vector<std::string> vars_;
};

/// Parses `text` into canonical expanded form over the ordered variables `vars`.
inline SparsePoly parse_poly(std::string_view text, const std::vector<std::string>& vars) {
    for (std::size_t i = 0; i < vars.size(); ++i)
        for (std::size_t j = i + 1; j < vars.size(); ++j)
            if (vars[i] == vars[j]) throw ValidationError("duplicate variable name '" + vars[i] + "'");
    PolyAlgebra alg(vars);
    ExpressionParser<PolyAlgebra> parser(text, alg);
    return parser.parse();
}

}  // namespace bifinf
