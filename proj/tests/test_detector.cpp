#include <gtest/gtest.h>

#include <cmath>

#include "bifinf/detector.hpp"
#include "test_support.hpp"

using namespace bifinf;

namespace {

const std::vector<std::string> XY{"x", "y"};
const char* const kTzText = "y*(2*x^2*y^2-9*x*y+12)";
const char* const kBroughtonText = "y*(x^2*y^2+3*x*y+3)";

PolyMap map1(const char* text) { return PolyMap::parse({text}, XY); }

std::vector<std::vector<Rational>> paper_centers() { return {{1, 2}, {-3, 5}}; }

bool has_value_near(const CenterResult& c, const std::vector<double>& v, double tol) {
    for (const auto& k : c.clusters)
        if (detail::dist(k.value, v) <= tol) return true;
    return false;
}

// Shared TZ report; detection takes a couple of seconds.
const DetectionReport& tz_report() {
    static const DetectionReport rep = s_infty_estimate(map1(kTzText), paper_centers(), DetectorOptions{});
    return rep;
}

}  // namespace

TEST(Schedule, RadiiAndValidation) {
    RadiusSchedule s;
    auto r = s.radii();
    ASSERT_EQ(r.size(), 5u);
    EXPECT_DOUBLE_EQ(r.front(), 100.0);
    EXPECT_DOUBLE_EQ(r.back(), 1e6);
    auto fine = s.refined().radii();
    EXPECT_EQ(fine.size(), 9u);
    EXPECT_NEAR(fine.back(), 1e6, 1e-6);
    EXPECT_THROW((RadiusSchedule{0, 10, 5}.radii()), ValidationError);
    EXPECT_THROW((RadiusSchedule{1, 1, 5}.radii()), ValidationError);
    EXPECT_THROW((RadiusSchedule{1, 10, 3}.radii()), ValidationError);
}

TEST(Centers, OriginUserThenSeededRandom) {
    auto c = choose_centers(2, paper_centers(), 5, 9);
    ASSERT_EQ(c.size(), 8u);
    EXPECT_EQ(c[0], (std::vector<Rational>{0, 0}));
    EXPECT_EQ(c[1], (std::vector<Rational>{1, 2}));
    for (std::size_t i = 3; i < c.size(); ++i)
        for (const auto& v : c[i]) EXPECT_LE(abs(v), 10);
    EXPECT_EQ(c, choose_centers(2, paper_centers(), 5, 9));
    EXPECT_NE(c, choose_centers(2, paper_centers(), 5, 10));
    EXPECT_THROW(choose_centers(2, {{1, 2, 3}}, 0, 1), ValidationError);
}

TEST(MilnorLimits, TzOriginHasOneNontrivialClusterAtZero) {
    auto res = milnor_limits(map1(kTzText), {0, 0}, DetectorOptions{});
    EXPECT_EQ(res.mode, "exact");
    ASSERT_EQ(res.clusters.size(), 1u);
    const auto& c = res.clusters[0];
    EXPECT_LT(std::abs(c.value[0]), 1e-3);
    EXPECT_TRUE(c.nontrivial);
    EXPECT_TRUE(c.audit_pass);
    EXPECT_LE(c.spread, 1e-3);
}

TEST(MilnorLimits, LinearMapHasNoClusters) {
    for (std::vector<Rational> a : {std::vector<Rational>{0, 0}, std::vector<Rational>{3, -2}}) {
        auto res = milnor_limits(map1("x"), a, DetectorOptions{});
        EXPECT_TRUE(res.clusters.empty());
        EXPECT_FALSE(res.branches.empty());
    }
}

TEST(MilnorLimits, DegenerateSystemFallsBackToSampling) {
    auto res = milnor_limits(map1("x^2+y^2"), {0, 0}, DetectorOptions{});
    EXPECT_TRUE(res.degenerate);
    EXPECT_EQ(res.mode, "fallback");
    ASSERT_FALSE(res.warnings.empty());
    EXPECT_EQ(res.points_per_radius[0], 64u);
    EXPECT_TRUE(res.clusters.empty());
}

TEST(MilnorLimits, LinksOnlyConsecutiveRadii) {
    auto res = milnor_limits(map1(kBroughtonText), {1, 2}, DetectorOptions{});
    for (const auto& b : res.branches)
        for (std::size_t i = 1; i < b.points.size(); ++i)
            EXPECT_EQ(b.points[i].radius_index, b.points[i - 1].radius_index + 1);
}

TEST(Detect, TzProtocol) {
    const auto& rep = tz_report();
    ASSERT_EQ(rep.centers.size(), 8u);
    ASSERT_EQ(rep.s_infty.size(), 1u);
    EXPECT_LT(std::abs(rep.s_infty[0].value[0]), 1e-3);
    ASSERT_EQ(rep.ns_infty.size(), 1u);
    EXPECT_EQ(rep.ns_infty[0].value, rep.s_infty[0].value);
    EXPECT_TRUE(rep.all_audits_pass);
}

TEST(Detect, TzClusterIsCenterIndependent) {
    const auto& rep = tz_report();
    const auto& ref = rep.centers[0].clusters[0].value;
    for (const auto& c : rep.centers) EXPECT_TRUE(has_value_near(c, ref, 1e-3));
}

TEST(Detect, BroughtonHasEmptyNontrivialEstimate) {
    auto rep = s_infty_estimate(map1(kBroughtonText), paper_centers(), DetectorOptions{});
    EXPECT_GE(rep.centers.size(), 6u);
    EXPECT_TRUE(rep.ns_infty.empty());
    EXPECT_TRUE(rep.s_infty.empty());
    // the origin sees no bounded Milnor branch, generic centers do
    EXPECT_TRUE(rep.centers[0].clusters.empty());
    EXPECT_TRUE(has_value_near(rep.centers[1], {0.0}, 1e-3));
    EXPECT_TRUE(rep.all_audits_pass);
}

TEST(Detect, LinearMapHasEmptyEstimates) {
    auto rep = s_infty_estimate(map1("x"), {}, DetectorOptions{});
    EXPECT_TRUE(rep.s_infty.empty());
    EXPECT_TRUE(rep.ns_infty.empty());
}

TEST(Audit, StraightLineOnLinearMapFails) {
    RadiusSchedule s;
    auto radii = s.radii();
    std::vector<std::vector<double>> xs;
    for (double R : radii) xs.push_back({R / std::sqrt(2.0), R / std::sqrt(2.0)});
    auto track = make_track(map1("x"), xs, radii);
    auto audit = audit_rabier(track);
    EXPECT_FALSE(audit.pass);
    EXPECT_NEAR(audit.products.back(), 1e6, 1e-3);
}

TEST(Audit, TzHyperbolaPasses) {
    RadiusSchedule s;
    auto radii = s.radii();
    std::vector<std::vector<double>> xs;
    for (double R : radii) xs.push_back({R, 1 / R});
    auto audit = audit_rabier(make_track(map1(kTzText), xs, radii));
    EXPECT_TRUE(audit.pass) << audit.diagnostic;
}

TEST(Report, JsonHasFixedKeysAndDisclaimer) {
    auto j = report_to_json(tz_report());
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    std::vector<std::string> expect{"tool",    "version", "map",     "variables",        "n",
                                    "p",       "d",       "s",       "seed",    "schedule",         "tolerances",
                                    "centers", "s_infty_estimate",   "ns_infty_estimate", "all_audits_pass",
                                    "disclaimer"};
    EXPECT_EQ(keys, expect);
    EXPECT_NE(j["disclaimer"].get<std::string>().find("not computed"), std::string::npos);
}

TEST(Report, CsvAndSvg) {
    const auto& rep = tz_report();
    auto csv = branch_traces_csv(rep);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "center,branch,radius_index,radius,x_1,x_2,f_1,sing,product,converged,trivial");
    std::size_t rows = 0;
    for (const auto& c : rep.centers)
        for (const auto& b : c.branches) rows += b.points.size();
    EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), rows + 1);
    auto svg = report_to_svg(rep);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("<polyline"), std::string::npos);
}

TEST(Property, DeterministicReports) {
    DetectorOptions opt;
    opt.seed = 17;
    auto f = map1(kBroughtonText);
    auto a = report_to_json(s_infty_estimate(f, {}, opt)).dump();
    auto b = report_to_json(s_infty_estimate(f, {}, opt)).dump();
    EXPECT_EQ(a, b);
}

TEST(Property, RefinementKeepsClusterValues) {
    auto f = map1(kTzText);
    DetectorOptions opt;
    auto coarse = milnor_limits(f, {1, 2}, opt);
    opt.schedule = opt.schedule.refined();
    auto fine = milnor_limits(f, {1, 2}, opt);
    for (const auto& c : coarse.clusters) EXPECT_TRUE(has_value_near(fine, c.value, opt.cluster_tol));
}

TEST(Property, ReportInvariantsOnRandomMaps) {
    testkit::Gen gen(81);
    DetectorOptions opt;
    opt.random_centers = 2;
    for (int trial = 0; trial < 8; ++trial) {
        SparsePoly q = gen.poly(2, 4, 5);
        if (q.total_degree() < 1) continue;
        PolyMap f({q}, XY);
        auto rep = s_infty_estimate(f, {}, opt);
        for (const auto& e : rep.s_infty)
            for (const auto& c : rep.centers) EXPECT_TRUE(has_value_near(c, e.value, 2 * opt.match_tol));
        for (const auto& e : rep.ns_infty)
            for (std::size_t c = 0; c < rep.centers.size(); ++c)
                EXPECT_TRUE(rep.centers[c].clusters[e.cluster_index[c]].nontrivial);
        for (const auto& c : rep.centers)
            for (const auto& k : c.clusters) {
                EXPECT_LE(k.spread, opt.cluster_tol);
                EXPECT_TRUE(k.audit_pass) << f.describe() << " cluster at " << k.value[0];
                bool any_trivial = false;
                for (std::size_t m : k.members) any_trivial = any_trivial || c.branches[m].trivial;
                EXPECT_EQ(k.nontrivial, !any_trivial);
            }
    }
}

TEST(Continuation, CylinderOverTzMap) {
    std::vector<std::string> xyz{"x", "y", "z"};
    auto f = PolyMap::parse({kTzText}, xyz);
    auto rep = s_infty_estimate(f, {}, DetectorOptions{});
    EXPECT_EQ(rep.centers[0].mode, "continuation");
    ASSERT_EQ(rep.s_infty.size(), 1u);
    EXPECT_LT(std::abs(rep.s_infty[0].value[0]), 1e-3);
    EXPECT_TRUE(rep.all_audits_pass);
}

TEST(Continuation, LinearAndProperMaps) {
    std::vector<std::string> xyz{"x", "y", "z"};
    auto lin = s_infty_estimate(PolyMap::parse({"x"}, xyz), {}, DetectorOptions{});
    for (const auto& c : lin.centers) EXPECT_TRUE(c.clusters.empty());
    auto proper = milnor_limits(PolyMap::parse({"x^2+y^2+z^2"}, xyz), {0, 0, 0}, DetectorOptions{});
    EXPECT_EQ(proper.mode, "fallback");
    EXPECT_TRUE(proper.clusters.empty());
}
