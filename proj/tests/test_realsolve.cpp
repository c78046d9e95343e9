#include <gtest/gtest.h>

#include <cmath>

#include "bifinf/curve_sphere.hpp"
#include "bifinf/parser.hpp"
#include "bifinf/resultant.hpp"
#include "bifinf/univariate.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace bifinf;

namespace {

UnivariatePoly U(std::initializer_list<long> ascending) {
    std::vector<Rational> c;
    for (long v : ascending) c.emplace_back(v);
    return UnivariatePoly(std::move(c));
}

const std::vector<std::string> XY{"x", "y"};

using oracle::distinct_real_roots;

}  // namespace

TEST(Isolate, SqrtTwo) {
    auto q = U({-2, 0, 1});
    auto ivs = isolate_real_roots(q);
    ASSERT_EQ(ivs.size(), 2u);
    Rational eps = make_rational(1, 1000000);
    Rational r0 = refine_root(q, ivs[0], eps), r1 = refine_root(q, ivs[1], eps);
    EXPECT_TRUE(r0 >= -2 && r0 <= -1);
    EXPECT_TRUE(r1 >= 1 && r1 <= 2);
    for (const auto& iv : ivs) {
        EXPECT_LT(iv.lo, iv.hi);
        EXPECT_NE(q.sign_at(iv.lo), 0);
        EXPECT_NE(q.sign_at(iv.hi), 0);
    }
}

TEST(Isolate, NoRealRoots) { EXPECT_TRUE(isolate_real_roots(U({1, 0, 1})).empty()); }

TEST(Isolate, ThreeConstructedRoots) {
    auto q = U({0, -1, 0, 1});  // t(t-1)(t+1)
    auto ivs = isolate_real_roots(q);
    ASSERT_EQ(ivs.size(), 3u);
    for (std::size_t i = 1; i < ivs.size(); ++i) EXPECT_LE(ivs[i - 1].hi, ivs[i].lo);
}

TEST(Isolate, MultiplicitiesReportedSeparately) {
    // (t-1)^3 (t+2)
    auto q = U({-1, 1}) * U({-1, 1}) * U({-1, 1}) * U({2, 1});
    auto ivs = isolate_real_roots(q);
    ASSERT_EQ(ivs.size(), 2u);
    EXPECT_EQ(ivs[0].multiplicity, 1);
    EXPECT_EQ(ivs[1].multiplicity, 3);
}

TEST(Isolate, ZeroPolynomialRejected) { EXPECT_THROW(isolate_real_roots(UnivariatePoly()), ValidationError); }

TEST(Refine, Examples) {
    auto q = U({-2, 0, 1});
    Rational r = refine_root(q, RootInterval{1, 2}, make_rational(1, 1000000000000L));
    EXPECT_NEAR(r.get_d(), std::sqrt(2.0), 1e-12);
    EXPECT_EQ(refine_root(U({0, 1}), RootInterval{-1, 1}, make_rational(1, 1000)), 0);
    EXPECT_EQ(refine_root(U({-3, 1}), RootInterval{2, 4}, make_rational(1, 1000)), 3);
}

TEST(Refine, RelativePrecisionForTinyRoots) {
    // root at 1e-13 next to one at 3e-13
    Rational a = make_rational(1, 10000000000000L), b = 3 * a;
    auto q = UnivariatePoly::linear_root(a) * UnivariatePoly::linear_root(b) * U({-1, 0, 1});
    auto ivs = isolate_real_roots(q);
    ASSERT_EQ(ivs.size(), 4u);
    Rational r = refine_root_relative(q, ivs[1], 1e-20);
    EXPECT_LT(abs(r - a) / a, Rational(1e-18));
}

TEST(Resultant, Examples) {
    auto r1 = resultant(parse_poly("x+y", XY), parse_poly("x-y", XY), 1);
    EXPECT_EQ(r1.poly, U({0, 2}));
    // standard Sylvester sign convention gives -1; the pair never vanishes together
    auto r2 = resultant(parse_poly("y", XY), parse_poly("y-1", XY), 1);
    EXPECT_EQ(r2.poly.degree(), 0);
    EXPECT_EQ(abs(r2.poly.leading()), 1);
    auto r3 = resultant(parse_poly("x^2+y^2", XY), parse_poly("y", XY), 1);
    EXPECT_EQ(r3.poly, U({0, 0, 1}));
    EXPECT_FALSE(r3.degenerate);
}

TEST(Resultant, SharedComponentIsDegenerate) {
    auto r = resultant(parse_poly("(x+y)*(x-1)", XY), parse_poly("(x+y)*y", XY), 1);
    EXPECT_TRUE(r.degenerate);
    EXPECT_FALSE(sylvester_matrix_text(parse_poly("x+y", XY), parse_poly("x-y", XY), 1).empty());
}

TEST(Resultant, VanishesAtCommonRootOfKeptVariable) {
    testkit::Gen gen(17);
    for (int trial = 0; trial < 20; ++trial) {
        // construct a common root at (x0, y0)
        Rational x0 = gen.small_rational(), y0 = gen.small_rational();
        SparsePoly q1 = parse_poly("x", XY) - SparsePoly::constant(2, x0) + gen.poly(2, 2, 3) * (parse_poly("y", XY) - SparsePoly::constant(2, y0));
        SparsePoly q2 = parse_poly("y", XY) - SparsePoly::constant(2, y0) + gen.poly(2, 2, 3) * (parse_poly("x", XY) - SparsePoly::constant(2, x0));
        auto r = resultant(q1, q2, 1);
        if (r.degenerate) continue;
        EXPECT_EQ(r.poly.evaluate(x0), 0);
    }
}

TEST(CurveSphere, AxisMeetsCircle) {
    auto res = curve_sphere_intersect(parse_poly("2*y", XY), 0, 0, 5);
    ASSERT_EQ(res.points.size(), 2u);
    EXPECT_DOUBLE_EQ(res.points[0].x, 5.0);
    EXPECT_DOUBLE_EQ(res.points[0].y, 0.0);
    EXPECT_DOUBLE_EQ(res.points[1].x, -5.0);
    EXPECT_DOUBLE_EQ(res.points[1].y, 0.0);
    EXPECT_TRUE(res.points[1].parameter_at_infinity);
}

TEST(CurveSphere, TzMilnorCurveAtRadiusThousand) {
    SparsePoly m = parse_poly("2*(y^2*(4*x*y-9)*y - 6*x*(x*y-1)*(x*y-2))", XY);
    auto res = curve_sphere_intersect(m, 0, 0, 1000);
    EXPECT_FALSE(res.degenerate);
    ASSERT_FALSE(res.points.empty());
    for (const auto& p : res.points) {
        EXPECT_LT(p.residual, 1e-10);
        EXPECT_LT(p.sphere_residual, 1e-12);
    }
}

TEST(CurveSphere, EmptyRealCurve) {
    auto res = curve_sphere_intersect(parse_poly("x^2+y^2+1", XY), 0, 0, 3);
    EXPECT_TRUE(res.points.empty());
    EXPECT_FALSE(res.degenerate);
}

TEST(CurveSphere, CircleItselfIsDegenerate) {
    auto res = curve_sphere_intersect(parse_poly("x^2+y^2-4", XY), 0, 0, 2);
    EXPECT_TRUE(res.degenerate);
}

TEST(Property, IsolationCountMatchesSturmOracle) {
    testkit::Gen gen(500);
    for (int trial = 0; trial < 500; ++trial) {
        int deg = gen.integer(1, 12);
        std::vector<Rational> c;
        for (int i = 0; i <= deg; ++i) c.push_back(gen.small_rational(20, 3));
        if (c.back() == 0) c.back() = 1;
        UnivariatePoly q(c);
        ASSERT_EQ(static_cast<int>(isolate_real_roots(q).size()), distinct_real_roots(q)) << q.to_string();
    }
}

TEST(Property, IsolationCountOnConstructedRoots) {
    testkit::Gen gen(501);
    for (int trial = 0; trial < 100; ++trial) {
        UnivariatePoly q = UnivariatePoly::constant(gen.nonzero_rational());
        std::vector<Rational> roots;
        int k = gen.integer(0, 6);
        for (int i = 0; i < k; ++i) {
            Rational r = gen.small_rational(12, 5);
            q = q * UnivariatePoly::linear_root(r);
            if (std::find(roots.begin(), roots.end(), r) == roots.end()) roots.push_back(r);
        }
        int quad = gen.integer(0, 2);
        for (int i = 0; i < quad; ++i) q = q * UnivariatePoly({gen.integer(1, 5), 0, 1});
        if (q.degree() <= 0) continue;
        auto ivs = isolate_real_roots(q);
        ASSERT_EQ(ivs.size(), roots.size());
        for (const auto& r : roots) {
            int hits = 0;
            for (const auto& iv : ivs) hits += (iv.lo < r && r < iv.hi);
            EXPECT_EQ(hits, 1);
        }
    }
}

TEST(Property, ResultantWithDerivativeDetectsRepeatedRoots) {
    testkit::Gen gen(502);
    std::vector<std::string> vars{"x", "y"};
    for (int trial = 0; trial < 60; ++trial) {
        UnivariatePoly q = UnivariatePoly::constant(Rational(1));
        int k = gen.integer(1, 5);
        for (int i = 0; i < k; ++i) q = q * UnivariatePoly::linear_root(gen.small_rational(4, 2));
        if (gen.integer(0, 1)) q = q * UnivariatePoly({1, 0, 1});
        // embed q(y) as a bivariate polynomial and eliminate y
        SparsePoly qy(2), dqy(2);
        for (int i = 0; i <= q.degree(); ++i) qy.add_term({0, static_cast<std::uint32_t>(i)}, q.coeff(i));
        dqy = qy.partial_derivative(1);
        if (dqy.is_zero()) continue;
        auto r = resultant(qy, dqy, 1);
        bool repeated = q.square_free_part().degree() < q.degree();
        EXPECT_EQ(r.poly.is_zero(), repeated) << q.to_string();
    }
}

TEST(CurveSphere, NonCanonicalInputsGiveExactCircleCertificates) {
    Rational a1(4, 2), a2(-6, 3), R(10, 2);
    auto res = curve_sphere_intersect(parse_poly("x*y - 1", XY), a1, a2, R);
    ASSERT_FALSE(res.points.empty());
    for (const auto& p : res.points) {
        Rational dx = p.exact_x - 2, dy = p.exact_y + 2;
        EXPECT_EQ(Rational(dx * dx + dy * dy), Rational(25));
    }
}

TEST(CurveSphere, AxisComponentHasSmallNormwiseResidual) {
    // every monomial carries x, so term-relative measures break down near x = 0
    auto res = curve_sphere_intersect(parse_poly("5/2*x^2*y^3 - 2*x*y", XY), 0, 0, 5);
    ASSERT_FALSE(res.points.empty());
    for (const auto& p : res.points) EXPECT_LT(p.residual, 1e-10);
}
