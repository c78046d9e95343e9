#pragma once

// Command-line front end. `run_cli` is the whole program; the executable only
// forwards argv and the standard streams.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bifinf/arcspace.hpp"
#include "bifinf/detector.hpp"
#include "bifinf/diffgeo.hpp"
#include "bifinf/error.hpp"
#include "bifinf/job.hpp"
#include "bifinf/path_parser.hpp"
#include "bifinf/rabier.hpp"

namespace bifinf {

enum ExitCode : int { kExitOk = 0, kExitInternal = 1, kExitInvalid = 2, kExitNumeric = 3 };

namespace cli {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

/// Writes through a sibling temporary file and renames it into place.
inline void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path() && !fs::exists(target.parent_path()))
        throw ValidationError("output directory does not exist: " + target.parent_path().string());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw ValidationError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw ValidationError("cannot rename into '" + path + "'");
    }
}

/// `# key: value` lines identifying the map, its size and the run.
inline std::string header_block(const PolyMap& f, std::uint64_t seed, const std::string& prefix = "# ") {
    std::ostringstream os;
    os << prefix << "tool: bifinf " << kToolVersion << "\n";
    os << prefix << "map: " << f.describe() << "\n";
    os << prefix << "n: " << f.n() << "\n" << prefix << "p: " << f.p() << "\n" << prefix << "d: " << f.d() << "\n";
    os << prefix << "s: ";
    try {
        os << degree_bound(f.n(), f.p(), f.d());
    } catch (const ValidationError&) {
        os << "overflow";
    }
    os << "\n" << prefix << "seed: " << seed << "\n";
    return os.str();
}

struct WitnessText {
    std::string x, y;
};

/// Witness files use the job syntax with keys `x` and optionally `y`.
inline WitnessText parse_witness(const std::string& text) {
    WitnessText w;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ValidationError("witness line " + std::to_string(lineno) + ": expected key = value");
        std::string key = detail::trim(line.substr(0, eq)), value = detail::trim(line.substr(eq + 1));
        if (key == "x") w.x = value;
        else if (key == "y") w.y = value;
        else throw ValidationError("witness line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (w.x.empty()) throw ValidationError("witness has no x arc");
    return w;
}

inline std::string diagnostic(const std::string& kind, const std::string& message) {
    nlohmann::ordered_json j;
    j["error"] = kind;
    j["message"] = message;
    return j.dump();
}

struct Emitter {
    std::ostream& out;
    std::string path;  ///< empty: standard output

    void emit(const std::string& content) const {
        if (path.empty()) out << content;
        else write_atomic(path, content);
    }
};

/// Witness description followed by its K_inf evidence along the job's t schedule.
inline std::string witness_block(const PolyMap& f, const ArcWitness& w, const JobSpec& job) {
    std::ostringstream os;
    os << w.describe();
    if (w.pass) {
        auto profile = rabier_profile(f, w.x, geometric_schedule(job.t0, job.t_ratio, job.t_steps));
        auto ev = kinfty_evidence(profile, job.nu_tol, job.cauchy_window);
        os << "kinfty_evidence: " << (ev.pass ? "PASS" : "FAIL") << " (" << ev.diagnostic << ", t up to "
           << profile.back().t << ", |x| nu = " << profile.back().product << ")\n";
    }
    return os.str();
}

struct Context {
    JobSpec job;
    std::string job_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool dump_config = false;

    /// Loads the job file and applies --set and --seed, in that order.
    void load() {
        if (job_path.empty()) throw ValidationError("a job file is required");
        job = parse_job(read_file(job_path));
        bool centers_cleared = false;
        for (const auto& kv : overrides) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
            std::string key = detail::trim(kv.substr(0, eq));
            if (key == "center" && !centers_cleared) {
                job.centers.clear();
                centers_cleared = true;
            }
            set_job_key(job, key, detail::trim(kv.substr(eq + 1)));
        }
        if (seed) job.seed = *seed;
        job.validate();
    }
};

inline void add_job_options(CLI::App* sub, Context& ctx) {
    sub->add_option("job", ctx.job_path, "job file (key = value lines)")->required();
    sub->add_option("--set", ctx.overrides, "override a job key, e.g. --set r0=1000")->take_all();
    sub->add_option("--seed", ctx.seed, "override the job seed");
    sub->add_option("--out", ctx.out, "output file (default: job setting or standard output)");
    sub->add_flag("--dump-config", ctx.dump_config, "print the normalized job file and exit");
}

inline int cmd_milnor(const Context& ctx, bool symbolic, std::ostream& out) {
    PolyMap f = ctx.job.map();
    std::optional<std::vector<Rational>> center;
    if (!symbolic && !ctx.job.centers.empty()) center = ctx.job.centers.front();
    auto sys = milnor_system(f, center);
    Emitter{out, ctx.out}.emit(header_block(f, ctx.job.seed) + milnor_to_text(sys));
    return kExitOk;
}

inline int cmd_sing(const Context& ctx, std::ostream& out) {
    PolyMap f = ctx.job.map();
    Emitter{out, ctx.out}.emit(header_block(f, ctx.job.seed) + sing_to_text(sing_system(f), f.var_names()));
    return kExitOk;
}

inline int cmd_arcs(const Context& ctx, std::ostream& out) {
    PolyMap f = ctx.job.map();
    ArcTemplate full = build_template(f);
    std::vector<int> leads = ctx.job.leads;
    if (leads.empty())
        for (int k = 1; k <= full.s; ++k) leads.push_back(k);
    std::ostringstream os;
    os << header_block(f, ctx.job.seed);
    for (int k : leads) {
        ArcTemplate tpl = build_template(f, k);
        ConditionSystem sys = generate_conditions(f, tpl);
        os << condition_system_to_text(sys);
        if (ctx.job.solve) {
            SolveResult res = solve_conditions(f, sys, ctx.job.solve_options());
            const auto& d = res.diagnostics;
            os << "# solve: restarts " << d.restarts_run << ", converged " << d.converged << ", snapped " << d.snapped
               << ", verified " << d.verified << ", witnesses " << res.witnesses.size();
            if (!d.note.empty()) os << " (" << d.note << ")";
            os << "\n";
            for (const auto& w : res.witnesses) {
                std::istringstream lines(witness_block(f, w, ctx.job));
                for (std::string line; std::getline(lines, line);) os << "#   " << line << "\n";
            }
        }
    }
    Emitter{out, ctx.out}.emit(os.str());
    return kExitOk;
}

inline int cmd_verify_arc(const Context& ctx, const std::string& witness_path, std::ostream& out) {
    PolyMap f = ctx.job.map();
    WitnessText wt{ctx.job.witness_x, ctx.job.witness_y};
    if (!witness_path.empty()) wt = parse_witness(read_file(witness_path));
    if (wt.x.empty()) throw ValidationError("no witness arc: pass --witness FILE or set witness_x in the job");
    LaurentArc<Rational> x = parse_laurent_arc(wt.x);
    std::optional<LaurentArc<Rational>> y;
    if (!wt.y.empty()) y = parse_laurent_arc(wt.y);
    ArcWitness w = verify_witness(f, x, y);
    Emitter{out, ctx.out}.emit(header_block(f, ctx.job.seed) + witness_block(f, w, ctx.job));
    return kExitOk;
}

inline int cmd_nu(const Context& ctx, std::ostream& out) {
    PolyMap f = ctx.job.map();
    if (ctx.job.path.empty()) throw ValidationError("nu needs a path, e.g. --set \"path=t, -1/t\"");
    LaurentArc<Rational> arc = parse_laurent_arc(ctx.job.path);
    auto profile = rabier_profile(f, arc, geometric_schedule(ctx.job.t0, ctx.job.t_ratio, ctx.job.t_steps));
    auto ev = kinfty_evidence(profile, ctx.job.nu_tol, ctx.job.cauchy_window);
    std::ostringstream os;
    os << header_block(f, ctx.job.seed);
    os << "# path: " << arc_to_string(arc) << "\n";
    os << "# kinfty_evidence: " << (ev.pass ? "PASS" : "FAIL") << " (" << ev.diagnostic << ")\n";
    if (!ev.limit.empty()) {
        os << "# limit:";
        for (double v : ev.limit) os << " " << detail::format_double(v);
        os << "\n";
    }
    os << profile_to_csv(profile, f.p());
    Emitter{out, ctx.out}.emit(os.str());
    return kExitOk;
}

inline int cmd_detect(const Context& ctx, const std::string& traces, const std::string& plot, std::ostream& out) {
    PolyMap f = ctx.job.map();
    DetectionReport rep = s_infty_estimate(f, ctx.job.centers, ctx.job.detector_options());
    std::string report_path = !ctx.out.empty() ? ctx.out : ctx.job.report;
    Emitter{out, report_path}.emit(report_to_json(rep).dump(2) + "\n");
    std::string traces_path = !traces.empty() ? traces : ctx.job.traces;
    if (!traces_path.empty()) write_atomic(traces_path, header_block(f, ctx.job.seed) + branch_traces_csv(rep));
    std::string plot_path = !plot.empty() ? plot : ctx.job.plot;
    if (!plot_path.empty()) write_atomic(plot_path, "<!--\n" + header_block(f, ctx.job.seed, "") + "-->\n" + report_to_svg(rep));
    return kExitOk;
}

}  // namespace cli

/// Runs one command line. Returns the process exit code; errors go to `err`
/// as a single JSON line.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    using namespace cli;
    CLI::App app{"Estimates of the bifurcation locus at infinity of real polynomial maps", "bifinf"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    Context ctx;
    bool symbolic = false;
    std::string witness_path, traces, plot;
    std::size_t bn = 0, bp = 0;
    int bd = 0;

    auto* milnor = app.add_subcommand("milnor", "Milnor-set equations for the job's first center (symbolic if none)");
    add_job_options(milnor, ctx);
    milnor->add_flag("--symbolic", symbolic, "keep the center symbolic");

    auto* sing = app.add_subcommand("sing", "maximal minors of Df");
    add_job_options(sing, ctx);

    auto* bound = app.add_subcommand("bound", "print the arc degree bound s");
    bound->add_option("--n", bn, "source dimension")->required();
    bound->add_option("--p", bp, "target dimension")->required();
    bound->add_option("--d", bd, "degree")->required();

    auto* arcs = app.add_subcommand("arcs", "arc condition systems per lead index, optionally solved");
    add_job_options(arcs, ctx);

    auto* verify = app.add_subcommand("verify-arc", "exact check of a witness arc");
    add_job_options(verify, ctx);
    verify->add_option("--witness", witness_path, "witness file with x = ... and optionally y = ...");

    auto* nu_cmd = app.add_subcommand("nu", "|x| nu(Df) profile along a Laurent path");
    add_job_options(nu_cmd, ctx);

    auto* detect = app.add_subcommand("detect", "Milnor-set sweep and S_inf / NS_inf estimates");
    add_job_options(detect, ctx);
    detect->add_option("--traces", traces, "branch traces CSV");
    detect->add_option("--plot", plot, "SVG plot of the branches");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << diagnostic("usage", e.what()) << "\n";
        return kExitInvalid;
    }

    try {
        if (bound->parsed()) {
            out << degree_bound(bn, bp, bd) << "\n";
            return kExitOk;
        }
        ctx.load();
        if (ctx.dump_config) {
            out << job_to_text(ctx.job);
            return kExitOk;
        }
        if (milnor->parsed()) return cmd_milnor(ctx, symbolic, out);
        if (sing->parsed()) return cmd_sing(ctx, out);
        if (arcs->parsed()) return cmd_arcs(ctx, out);
        if (verify->parsed()) return cmd_verify_arc(ctx, witness_path, out);
        if (nu_cmd->parsed()) return cmd_nu(ctx, out);
        if (detect->parsed()) return cmd_detect(ctx, traces, plot, out);
    } catch (const ParseError& e) {
        err << diagnostic("parse", e.what()) << "\n";
        return kExitInvalid;
    } catch (const ValidationError& e) {
        err << diagnostic("validation", e.what()) << "\n";
        return kExitInvalid;
    } catch (const NumericError& e) {
        err << diagnostic("numeric", e.what()) << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        err << diagnostic("internal", e.what()) << "\n";
        return kExitInternal;
    }
    return kExitInternal;
}

}  // namespace bifinf
