#pragma once

// Laurent expressions in one parameter, e.g. "t, -1/t" or "2*t^3 - t^-1".
// Same grammar as polynomial text; division and negative powers are allowed
// when the divisor (or base) is a single term c*t^k.

#include <string>
#include <string_view>
#include <vector>

#include "bifinf/laurent.hpp"
#include "bifinf/parser.hpp"

namespace bifinf {

class LaurentAlgebra {
public:
    using value_type = Laurent<Rational>;

    explicit LaurentAlgebra(std::string param = "t") : param_(std::move(param)) {}

    value_type literal(const Rational& r) const { return value_type::constant(r); }

    std::optional<value_type> identifier(std::string_view name) const {
        if (name == param_) return value_type::monomial(1, Rational(1));
        return std::nullopt;
    }

    value_type add(const value_type& a, const value_type& b) const { return (a + b).trimmed(); }
    value_type sub(const value_type& a, const value_type& b) const { return (a - b).trimmed(); }
    value_type mul(const value_type& a, const value_type& b) const { return (a * b).trimmed(); }
    value_type neg(const value_type& a) const { return -a; }

    value_type div(const value_type& a, const value_type& b, std::size_t at) const {
        return mul(a, inverse(b, at));
    }

    value_type power(const value_type& a, long e, std::size_t at) const {
        value_type base = a;
        if (e < 0) {
            base = inverse(a, at);
            e = -e;
        }
        value_type out = value_type::constant(Rational(1));
        for (long i = 0; i < e; ++i) out = mul(out, base);
        return out;
    }

private:
    static value_type inverse(const value_type& b, std::size_t at) {
        value_type s = b.trimmed();
        if (s.is_zero()) throw ParseError("division by zero", at);
        if (s.lo() != s.hi()) throw ParseError("can only divide by a single term c*t^k", at);
        return value_type::monomial(-s.lo(), 1 / s.at(s.lo()));
    }

    std::string param_;
};

inline Laurent<Rational> parse_laurent(std::string_view text, const std::string& param = "t") {
    LaurentAlgebra alg(param);
    ExpressionParser<LaurentAlgebra> parser(text, alg);
    return parser.parse();
}

/// Comma-separated components, one Laurent expression each.
inline LaurentArc<Rational> parse_laurent_arc(std::string_view text, const std::string& param = "t") {
    std::vector<Laurent<Rational>> comps;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i < text.size() && text[i] == '(') ++depth;
        if (i < text.size() && text[i] == ')') --depth;
        if (i == text.size() || (text[i] == ',' && depth == 0)) {
            try {
                comps.push_back(parse_laurent(text.substr(start, i - start), param));
            } catch (const ParseError& e) {
                throw ParseError(std::string("in path component ") + std::to_string(comps.size() + 1) +
                                     ": " + e.what(),
                                 start + e.position());
            }
            start = i + 1;
        }
    }
    return LaurentArc<Rational>::from_components(comps);
}

/// Canonical text for a Laurent series, highest exponent first.
template <class T>
std::string laurent_to_string(const Laurent<T>& s, const std::string& param = "t") {
    std::string out;
    for (int e = s.hi(); e >= s.lo(); --e) {
        Rational c = s.at(e);
        if (c == 0) continue;
        Rational mag = abs(c);
        if (out.empty()) {
            if (c < 0) out += "-";
        } else {
            out += c < 0 ? " - " : " + ";
        }
        if (e == 0) {
            out += mag.get_str();
            continue;
        }
        if (mag != 1) out += mag.get_str() + "*";
        out += param;
        if (e != 1) out += "^" + (e < 0 ? "(" + std::to_string(e) + ")" : std::to_string(e));
    }
    return out.empty() ? "0" : out;
}

inline std::string arc_to_string(const LaurentArc<Rational>& arc, const std::string& param = "t") {
    std::string out;
    for (std::size_t i = 0; i < arc.dim(); ++i) {
        if (i) out += ", ";
        out += laurent_to_string(arc.component(i), param);
    }
    return out;
}

}  // namespace bifinf
