#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "bifinf/cli.hpp"

using namespace bifinf;

namespace {

const std::string kJobs = BIFINF_JOBS_DIR;

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "bifinf");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "bifinf_cli_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

void write(const std::filesystem::path& p, const std::string& text) { cli::write_atomic(p.string(), text); }

}  // namespace

TEST(Job, ParsesKeysCommentsAndCenters) {
    auto job = parse_job("variables = x, y  # source\nf1 = x*y\n\ncenter = 1/2, -3\nseed = 9\nleads = 1-3, 5\n");
    EXPECT_EQ(job.variables, (std::vector<std::string>{"x", "y"}));
    ASSERT_EQ(job.centers.size(), 1u);
    EXPECT_EQ(job.centers[0], (std::vector<Rational>{Rational(1, 2), -3}));
    EXPECT_EQ(job.seed, 9u);
    EXPECT_EQ(job.leads, (std::vector<int>{1, 2, 3, 5}));
    EXPECT_EQ(job.map().d(), 2);
}

TEST(Job, RejectsBadInput) {
    EXPECT_THROW(parse_job("variables = x, y\nwhat = 1\n"), ValidationError);
    EXPECT_THROW(parse_job("variables = x, y\nf2 = x\n"), ValidationError);
    EXPECT_THROW(parse_job("r0 = ten\n"), ValidationError);
    EXPECT_THROW(parse_job("no equals sign\n"), ValidationError);
    EXPECT_THROW(parse_job("variables = x, y\nf1 = x\ncluster_tol = 0\n").validate(), ValidationError);
    EXPECT_THROW(parse_job("variables = x\nf1 = x\n").validate(), ValidationError);  // n > p
    EXPECT_THROW(parse_job("variables = x, y\nf1 = x\ncenter = 1\n").validate(), ValidationError);
}

TEST(Job, NormalizedTextRoundTrips) {
    auto job = parse_job(cli::read_file(kJobs + "/tz.job"));
    std::string once = job_to_text(job);
    std::string twice = job_to_text(parse_job(once));
    EXPECT_EQ(once, twice);
    EXPECT_NE(once.find("center = -3, 5"), std::string::npos);
}

TEST(Cli, BoundPrintsDegreeBound) {
    auto r = run({"bound", "--n", "2", "--p", "1", "--d", "3"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "3\n");
    EXPECT_EQ(run({"bound", "--n", "3", "--p", "2", "--d", "2"}).out, "12\n");
}

TEST(Cli, ExitCodesAndDiagnostics) {
    auto usage = run({"frobnicate"});
    EXPECT_EQ(usage.code, 2);
    auto bad = run({"bound", "--n", "1", "--p", "1", "--d", "3"});
    EXPECT_EQ(bad.code, 2);
    auto diag = nlohmann::json::parse(bad.err);
    EXPECT_EQ(diag["error"], "validation");
    EXPECT_EQ(std::count(bad.err.begin(), bad.err.end(), '\n'), 1);

    auto job = scratch("broken.job");
    write(job, "variables = x, y\nf1 = x*(y\n");
    auto parse = run({"sing", job.string()});
    EXPECT_EQ(parse.code, 2);
    EXPECT_EQ(nlohmann::json::parse(parse.err)["error"], "parse");
    EXPECT_EQ(run({"sing", (kJobs + "/missing.job")}).code, 2);
}

TEST(Cli, DumpConfigAppliesOverrides) {
    auto r = run({"detect", kJobs + "/tz.job", "--set", "r0=1000", "--set", "center=7,8", "--seed", "42", "--dump-config"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("r0 = 1000\n"), std::string::npos);
    EXPECT_NE(r.out.find("seed = 42\n"), std::string::npos);
    EXPECT_NE(r.out.find("center = 7, 8\n"), std::string::npos);
    EXPECT_EQ(r.out.find("center = 1, 2"), std::string::npos);
    EXPECT_EQ(job_to_text(parse_job(r.out)), r.out);
}

TEST(Cli, MilnorAndSingCarryHeaders) {
    auto m = run({"milnor", kJobs + "/tz.job"});
    ASSERT_EQ(m.code, 0) << m.err;
    for (const char* key : {"# tool: bifinf", "# map: ", "# n: 2", "# p: 1", "# d: 5", "# s: 5", "# seed: 1"})
        EXPECT_NE(m.out.find(key), std::string::npos) << key;
    EXPECT_NE(m.out.find("# center: 1, 2"), std::string::npos);
    auto sym = run({"milnor", kJobs + "/tz.job", "--symbolic"});
    EXPECT_NE(sym.out.find("# center: symbolic"), std::string::npos);
    auto s = run({"sing", kJobs + "/tz.job"});
    EXPECT_EQ(s.code, 0);
    EXPECT_NE(s.out.find("# sing system"), std::string::npos);
}

TEST(Cli, VerifyArcOnBroughtonWitness) {
    auto r = run({"verify-arc", kJobs + "/broughton.job", "--witness", kJobs + "/broughton.witness"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("result: PASS"), std::string::npos);
    EXPECT_NE(r.out.find("alpha0 = 0 (0)"), std::string::npos);
    EXPECT_NE(r.out.find("kinfty_evidence: PASS"), std::string::npos);
}

TEST(Cli, NuProfileAlongPath) {
    auto r = run({"nu", kJobs + "/broughton.job"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("# kinfty_evidence: PASS"), std::string::npos);
    EXPECT_NE(r.out.find("t,norm_x,nu,product,f_1\n"), std::string::npos);
    EXPECT_EQ(run({"nu", kJobs + "/broughton.job", "--set", "path="}).code, 2);
}

TEST(Cli, ArcsEmitsOneSystemPerLead) {
    auto r = run({"arcs", kJobs + "/tz.job", "--set", "leads=1,2"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::size_t systems = 0;
    for (std::size_t pos = 0; (pos = r.out.find("# condition system", pos)) != std::string::npos; ++pos) ++systems;
    EXPECT_EQ(systems, 2u);
}

TEST(Cli, DetectWritesArtifactsAtomicallyAndReproducibly) {
    auto report = scratch("tz.json"), traces = scratch("tz.csv"), plot = scratch("tz.svg");
    std::vector<std::string> args{"detect",  kJobs + "/tz.job",  "--set",  "random_centers=1",
                                  "--out",   report.string(),    "--traces", traces.string(),
                                  "--plot",  plot.string()};
    ASSERT_EQ(run(args).code, 0);
    std::string first = cli::read_file(report.string());
    auto j = nlohmann::json::parse(first);
    EXPECT_EQ(j["s"], 5);
    EXPECT_EQ(j["s_infty_estimate"].size(), 1u);
    EXPECT_EQ(cli::read_file(traces.string()).rfind("# tool: bifinf", 0), 0u);
    EXPECT_EQ(cli::read_file(plot.string()).rfind("<!--", 0), 0u);
    EXPECT_FALSE(std::filesystem::exists(report.string() + ".tmp"));
    ASSERT_EQ(run(args).code, 0);
    EXPECT_EQ(cli::read_file(report.string()), first);
}
