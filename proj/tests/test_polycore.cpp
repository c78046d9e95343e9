#include <gtest/gtest.h>

#include "bifinf/parser.hpp"
#include "bifinf/path_parser.hpp"
#include "bifinf/poly_map.hpp"
#include "test_support.hpp"

using namespace bifinf;

namespace {

const std::vector<std::string> XY{"x", "y"};
const char* const kTzText = "y*(2*x^2*y^2-9*x*y+12)";

SparsePoly P(const std::string& s, const std::vector<std::string>& vars = XY) { return parse_poly(s, vars); }

LaurentArc<Rational> arc_of(const std::string& s) { return parse_laurent_arc(s); }

}  // namespace

TEST(Parse, TzPolynomialExpandsToThreeTerms) {
    SparsePoly tz = P(kTzText);
    EXPECT_EQ(tz.term_count(), 3u);
    EXPECT_EQ(tz.coefficient({2, 3}), 2);
    EXPECT_EQ(tz.coefficient({1, 2}), -9);
    EXPECT_EQ(tz.coefficient({0, 1}), 12);
    EXPECT_EQ(tz.total_degree(), 5);
}

TEST(Parse, ZeroIsEmpty) {
    SparsePoly z = P("0");
    EXPECT_TRUE(z.is_zero());
    EXPECT_EQ(z.total_degree(), -1);
    EXPECT_EQ(z.to_string(XY), "0");
}

TEST(Parse, EvaluatesBackBySubstitution) {
    SparsePoly q = P("x^2+y");
    std::vector<Rational> pt{1, 1};
    EXPECT_EQ(q.evaluate(pt), 2);
}

TEST(Parse, PrecedenceAndAssociativity) {
    EXPECT_EQ(P("-x^2"), -P("x*x"));
    EXPECT_EQ(P("x-y-x"), -P("y"));
    EXPECT_EQ(P("2*-x"), P("-2*x"));
    EXPECT_EQ(P("(x+y)^2"), P("x^2+2*x*y+y^2"));
    EXPECT_EQ(P("x^2^3"), P("x^6"));
    EXPECT_EQ(P("3/4*x + 0.25*y"), P("(3*x+y)/4"));
}

TEST(Parse, Errors) {
    EXPECT_THROW(P("2x"), ParseError);
    EXPECT_THROW(P("x+"), ParseError);
    EXPECT_THROW(P("(x+y"), ParseError);
    EXPECT_THROW(P("x^-1"), ParseError);
    EXPECT_THROW(P("x/y"), ParseError);
    EXPECT_THROW(P(""), ParseError);
    try {
        P("x + z");
        FAIL() << "expected unknown identifier";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.position(), 4u);
        EXPECT_NE(std::string(e.what()).find("unknown identifier"), std::string::npos);
    }
}

TEST(Parse, PrintIsCanonicalGradedLex) {
    EXPECT_EQ(P(kTzText).to_string(XY), "2*x^2*y^3 - 9*x*y^2 + 12*y");
    EXPECT_EQ(P("1 - x + y^2 - x*y").to_string(XY), "-x*y + y^2 - x + 1");
}

TEST(Eval, Examples) {
    SparsePoly tz = P(kTzText);
    EXPECT_EQ(tz.evaluate(std::vector<Rational>{0, 0}), 0);
    EXPECT_EQ(tz.evaluate(std::vector<Rational>{1, 1}), 5);
    EXPECT_EQ(P("x^2+y").evaluate(std::vector<Rational>{2, -4}), 0);
    EXPECT_DOUBLE_EQ(tz.evaluate(std::vector<double>{1.0, 1.0}), 5.0);
    EXPECT_THROW(tz.evaluate(std::vector<Rational>{1}), ValidationError);
}

TEST(Derivative, TzPartialsMatchFactoredForms) {
    SparsePoly tz = P(kTzText);
    EXPECT_EQ(tz.partial_derivative(1), P("6*(x*y-1)*(x*y-2)"));
    EXPECT_EQ(tz.partial_derivative(0), P("y^2*(4*x*y-9)"));
    EXPECT_TRUE(P("12").partial_derivative(0).is_zero());
    EXPECT_THROW(tz.partial_derivative(2), ValidationError);
}

TEST(Compose, ExactCancellation) {
    auto g = compose(P("x*y"), arc_of("t, 1/t"));
    EXPECT_EQ(g.trimmed(), Laurent<Rational>::constant(Rational(1)));
}

TEST(Compose, BroughtonMapAlongHyperbola) {
    auto g = compose(P("y*(x^2*y^2+3*x*y+3)"), arc_of("t, -1/t"));
    EXPECT_EQ(g.trimmed(), Laurent<Rational>::monomial(-1, Rational(-1)));
}

TEST(Compose, TzVanishesOnXAxis) {
    auto g = compose(P(kTzText), arc_of("t, 0"));
    EXPECT_TRUE(g.is_zero());
    EXPECT_EQ(ord_t(g), kNegInfinity);
}

TEST(Compose, WindowWithinDegreeTimesArcWindow) {
    testkit::Gen gen(7);
    for (int trial = 0; trial < 30; ++trial) {
        SparsePoly q = gen.poly(2, 4, 5);
        auto arc = gen.arc(2, -3, 2);
        auto g = compose(q, arc);
        int d = std::max(q.total_degree(), 0);
        int top = g.order();
        if (top != kNegInfinity) {
            EXPECT_LE(top, d * arc.hi());
            EXPECT_GE(*g.low_order(), std::min(0, d * arc.lo()));
        }
    }
    EXPECT_THROW(compose(P("x"), LaurentArc<Rational>(3, 0, 1, Rational(0))), ValidationError);
}

TEST(Compose, PrunedExpansionKeepsHighCoefficients) {
    testkit::Gen gen(11);
    for (int trial = 0; trial < 40; ++trial) {
        SparsePoly q = gen.poly(3, 5, 6);
        auto arc = gen.arc(3, -6, 3);
        int keep = gen.integer(-4, 6);
        auto full = compose(q, arc);
        auto pruned = compose(q, arc, keep);
        for (int e = keep; e <= std::max(full.hi(), keep); ++e)
            EXPECT_EQ(full.coefficient(e), pruned.coefficient(e)) << "exponent " << e;
    }
}

TEST(Order, Examples) {
    EXPECT_EQ(ord_t(parse_laurent("3*t^2 + t^-1")), 2);
    EXPECT_EQ(ord_t(Laurent<Rational>(-2, 3, Rational(0))), kNegInfinity);
    EXPECT_EQ(ord_t(parse_laurent("-1/t")), -1);
}

TEST(Truncate, Examples) {
    auto arc = arc_of("t + t^-1 + t^-5");
    auto cut = truncate_arc(arc, -1);
    EXPECT_EQ(cut, arc_of("t + 1/t"));
    EXPECT_EQ(cut.lo(), -1);

    auto high = arc_of("t^2 + t");
    EXPECT_EQ(truncate_arc(high, -3), high);
    EXPECT_THROW(truncate_arc(high, 3), ValidationError);
}

TEST(Truncate, SquareExampleAgreesOnConstantTerm) {
    // h = x^2, degree 2, s = 1, D = -2*1 + 1 = -1.
    auto x = arc_of("t + 2/t + 7*t^-3");
    auto xt = truncate_arc(x, -1);
    EXPECT_EQ(xt, arc_of("t + 2/t"));
    std::vector<std::string> one{"x"};
    auto h = compose(P("x^2", one), x);
    auto ht = compose(P("x^2", one), xt);
    EXPECT_EQ(h.coefficient(0), 4);
    EXPECT_EQ(ht.coefficient(0), 4);
    for (int k = 0; k <= 2; ++k) EXPECT_EQ(h.coefficient(k), ht.coefficient(k));
}

TEST(PathParser, NegativePowersAndDivision) {
    auto s = parse_laurent("2*t^3 - t^(-1) + 1/(2*t^2)");
    EXPECT_EQ(s.coefficient(3), 2);
    EXPECT_EQ(s.coefficient(-1), -1);
    EXPECT_EQ(s.coefficient(-2), make_rational(1, 2));
    EXPECT_THROW(parse_laurent("1/(t+1)"), ParseError);
    EXPECT_THROW(parse_laurent("1/0"), ParseError);
    EXPECT_EQ(laurent_to_string(s), "2*t^3 - t^(-1) + 1/2*t^(-2)");
    EXPECT_EQ(parse_laurent(laurent_to_string(s)), s);
}

TEST(Property, RingAxioms) {
    testkit::Gen gen(2024);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = static_cast<std::size_t>(gen.integer(1, 4));
        SparsePoly a = gen.poly(n, 4, 5), b = gen.poly(n, 4, 5), c = gen.poly(n, 4, 5);
        EXPECT_EQ((a + b) + c, a + (b + c));
        EXPECT_EQ(a * (b + c), a * b + a * c);
        EXPECT_EQ(a * b, b * a);
        EXPECT_TRUE((a - a).is_zero());
    }
}

TEST(Property, ParsePrintRoundTrip) {
    testkit::Gen gen(99);
    std::vector<std::string> names{"x", "y", "z"};
    for (int trial = 0; trial < 200; ++trial) {
        SparsePoly a = gen.poly(3, 5, 6);
        std::string text = a.to_string(names);
        SparsePoly back = parse_poly(text, names);
        EXPECT_EQ(back, a) << text;
        EXPECT_EQ(back.to_string(names), text);
    }
}

TEST(Property, ComposeIsRingHomomorphism) {
    testkit::Gen gen(5);
    for (int trial = 0; trial < 60; ++trial) {
        SparsePoly f = gen.poly(2, 3, 4), g = gen.poly(2, 3, 4);
        auto arc = gen.arc(2, -2, 2);
        EXPECT_EQ(compose(f * g, arc), compose(f, arc) * compose(g, arc));
        EXPECT_EQ(compose(f + g, arc), compose(f, arc) + compose(g, arc));
    }
}

TEST(Property, TruncationLemmaPreservesNonNegativeCoefficients) {
    testkit::Gen gen(31337);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t k = static_cast<std::size_t>(gen.integer(1, 3));
        int dt = gen.integer(1, 3);
        int s = gen.integer(1, 3);
        SparsePoly h = gen.poly(k, dt, 5);
        int W = dt * s + gen.integer(1, 4);
        auto arc = gen.arc(k, -W, s);
        int D = -dt * s + s - gen.integer(0, 2);
        if (D > arc.hi()) continue;
        auto full = compose(h, arc);
        auto cut = compose(h, truncate_arc(arc, D));
        for (int e = 0; e <= std::max(full.hi(), cut.hi()); ++e)
            ASSERT_EQ(full.coefficient(e), cut.coefficient(e)) << "trial " << trial << " exponent " << e;
    }
}

TEST(PolyMapTest, ValidatesDimensions) {
    EXPECT_NO_THROW(PolyMap::parse({kTzText}, XY));
    EXPECT_EQ(PolyMap::parse({kTzText}, XY).d(), 5);
    EXPECT_THROW(PolyMap::parse({"x", "y"}, XY), ValidationError);
    EXPECT_THROW(PolyMap::parse({"3"}, XY), ValidationError);
    auto g = PolyMap::parse({"x^2+y", "y*z"}, {"x", "y", "z"});
    EXPECT_EQ(g.p(), 2u);
    EXPECT_EQ(g.d(), 2);
}

TEST(BestRational, RecoversSimpleFractions) {
    EXPECT_EQ(best_rational(0.75, 100), make_rational(3, 4));
    EXPECT_EQ(best_rational(-1.0 / 3.0 + 1e-12, 100), make_rational(-1, 3));
    EXPECT_EQ(best_rational(3.14159265358979, 10), make_rational(22, 7));
    EXPECT_EQ(best_rational(0.0, 10), 0);
}
