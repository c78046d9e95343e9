#pragma once

// Job files: one `key = value` per line, `#` starts a comment. Map components
// are f1, f2, ...; `center` may repeat. Unknown keys are rejected.
//
//   variables = x, y
//   f1 = y*(2*x^2*y^2 - 9*x*y + 12)
//   center = 1, 2
//   seed = 7

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bifinf/arcspace.hpp"
#include "bifinf/detector.hpp"
#include "bifinf/error.hpp"
#include "bifinf/poly_map.hpp"
#include "bifinf/rational.hpp"

namespace bifinf {

struct JobSpec {
    std::vector<std::string> variables;
    std::vector<std::string> components;
    std::vector<std::vector<Rational>> centers;

    // detect
    double r0 = 100, ratio = 10;
    std::size_t steps = 5;
    std::size_t random_centers = 5;
    double cluster_tol = 1e-3, match_tol = 1e-3, sing_threshold = 1e-6, audit_tol = 1e-3;
    std::size_t cauchy_window = 3;
    std::uint64_t seed = 1;

    // arcs
    std::vector<int> leads;  ///< empty: every lead index 1..s
    bool solve = false;
    std::size_t restarts = 400;
    std::size_t max_witnesses = 16;

    // nu
    std::string path;
    double t0 = 10, t_ratio = 10;
    std::size_t t_steps = 6;
    double nu_tol = 1e-3;

    // verify-arc
    std::string witness_x, witness_y;

    // outputs; empty means standard output or not written
    std::string report, traces, plot;

    PolyMap map() const {
        if (variables.empty()) throw ValidationError("job has no variables");
        if (components.empty()) throw ValidationError("job has no components (f1 = ...)");
        return PolyMap::parse(components, variables);
    }

    DetectorOptions detector_options() const {
        DetectorOptions o;
        o.schedule = {r0, ratio, steps};
        o.cluster_tol = cluster_tol;
        o.match_tol = match_tol;
        o.sing_threshold = sing_threshold;
        o.audit_tol = audit_tol;
        o.cauchy_window = cauchy_window;
        o.random_centers = random_centers;
        o.seed = seed;
        return o;
    }

    SolveOptions solve_options() const {
        SolveOptions o;
        o.restarts = restarts;
        o.seed = seed;
        o.max_witnesses = max_witnesses;
        return o;
    }

    void validate() const {
        PolyMap f = map();
        for (const auto& c : centers)
            if (c.size() != f.n()) throw ValidationError("center has " + std::to_string(c.size()) + " coordinates, map has n = " + std::to_string(f.n()));
        for (double v : {cluster_tol, match_tol, sing_threshold, audit_tol, nu_tol})
            if (!(v > 0)) throw ValidationError("all tolerances must be positive");
        detector_options().validate();
        if (!(t0 > 0) || !(t_ratio > 1) || t_steps < 3) throw ValidationError("nu schedule needs t0 > 0, t_ratio > 1, t_steps >= 3");
        for (int k : leads)
            if (k < 1) throw ValidationError("lead indices start at 1");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) out.push_back(trim(item));
    return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ValidationError("key '" + key + "' expects a number, got '" + v + "'");
    }
}

inline std::uint64_t parse_count(const std::string& key, const std::string& v) {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
        throw ValidationError("key '" + key + "' expects a non-negative integer, got '" + v + "'");
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw ValidationError("key '" + key + "' is out of range");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw ValidationError("key '" + key + "' expects true or false, got '" + v + "'");
}

/// "1-3, 5" -> {1, 2, 3, 5}
inline std::vector<int> parse_index_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    for (const auto& item : split_commas(v)) {
        auto dash = item.find('-');
        if (dash == std::string::npos) {
            out.push_back(static_cast<int>(parse_count(key, item)));
            continue;
        }
        int lo = static_cast<int>(parse_count(key, trim(item.substr(0, dash))));
        int hi = static_cast<int>(parse_count(key, trim(item.substr(dash + 1))));
        if (hi < lo) throw ValidationError("key '" + key + "' has an empty range '" + item + "'");
        for (int k = lo; k <= hi; ++k) out.push_back(k);
    }
    return out;
}

inline std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace detail

/// Sets one key; used by the file parser and by command-line overrides.
inline void set_job_key(JobSpec& job, const std::string& key, const std::string& value) {
    using namespace detail;
    const std::string& v = value;
    if (key == "variables") {
        job.variables = split_commas(v);
        for (const auto& name : job.variables)
            if (name.empty()) throw ValidationError("empty variable name");
    } else if (key.size() > 1 && key[0] == 'f' && key.find_first_not_of("0123456789", 1) == std::string::npos) {
        std::size_t i = std::stoul(key.substr(1));
        if (i < 1) throw ValidationError("components are numbered from f1");
        if (i > job.components.size() + 1) throw ValidationError("component " + key + " skips f" + std::to_string(job.components.size() + 1));
        if (i == job.components.size() + 1) job.components.push_back(v);
        else job.components[i - 1] = v;
    } else if (key == "center") {
        std::vector<Rational> c;
        for (const auto& item : split_commas(v)) c.push_back(parse_rational(item));
        job.centers.push_back(std::move(c));
    } else if (key == "r0") job.r0 = parse_double(key, v);
    else if (key == "ratio") job.ratio = parse_double(key, v);
    else if (key == "steps") job.steps = parse_count(key, v);
    else if (key == "random_centers") job.random_centers = parse_count(key, v);
    else if (key == "cluster_tol") job.cluster_tol = parse_double(key, v);
    else if (key == "match_tol") job.match_tol = parse_double(key, v);
    else if (key == "sing_threshold") job.sing_threshold = parse_double(key, v);
    else if (key == "audit_tol") job.audit_tol = parse_double(key, v);
    else if (key == "cauchy_window") job.cauchy_window = parse_count(key, v);
    else if (key == "seed") job.seed = parse_count(key, v);
    else if (key == "leads") job.leads = v == "all" ? std::vector<int>{} : parse_index_list(key, v);
    else if (key == "solve") job.solve = parse_bool(key, v);
    else if (key == "restarts") job.restarts = parse_count(key, v);
    else if (key == "max_witnesses") job.max_witnesses = parse_count(key, v);
    else if (key == "path") job.path = v;
    else if (key == "t0") job.t0 = parse_double(key, v);
    else if (key == "t_ratio") job.t_ratio = parse_double(key, v);
    else if (key == "t_steps") job.t_steps = parse_count(key, v);
    else if (key == "nu_tol") job.nu_tol = parse_double(key, v);
    else if (key == "witness_x") job.witness_x = v;
    else if (key == "witness_y") job.witness_y = v;
    else if (key == "report") job.report = v;
    else if (key == "traces") job.traces = v;
    else if (key == "plot") job.plot = v;
    else throw ValidationError("unknown job key '" + key + "'");
}

inline JobSpec parse_job(const std::string& text) {
    JobSpec job;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ValidationError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = detail::trim(line.substr(0, eq)), value = detail::trim(line.substr(eq + 1));
        try {
            set_job_key(job, key, value);
        } catch (const ValidationError& e) {
            throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return job;
}

/// Normalized job file: every key in a fixed order, components canonical.
inline std::string job_to_text(const JobSpec& job) {
    using detail::format_double;
    std::ostringstream os;
    auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
        return s;
    };
    os << "variables = " << join(job.variables) << "\n";
    PolyMap f = job.map();
    for (std::size_t i = 0; i < f.p(); ++i)
        os << "f" << i + 1 << " = " << f.component(i).to_string(f.var_names()) << "\n";
    for (const auto& c : job.centers) {
        std::vector<std::string> parts;
        for (const auto& r : c) parts.push_back(to_string(r));
        os << "center = " << join(parts) << "\n";
    }
    os << "r0 = " << format_double(job.r0) << "\n";
    os << "ratio = " << format_double(job.ratio) << "\n";
    os << "steps = " << job.steps << "\n";
    os << "random_centers = " << job.random_centers << "\n";
    os << "cluster_tol = " << format_double(job.cluster_tol) << "\n";
    os << "match_tol = " << format_double(job.match_tol) << "\n";
    os << "sing_threshold = " << format_double(job.sing_threshold) << "\n";
    os << "audit_tol = " << format_double(job.audit_tol) << "\n";
    os << "cauchy_window = " << job.cauchy_window << "\n";
    os << "seed = " << job.seed << "\n";
    if (job.leads.empty()) {
        os << "leads = all\n";
    } else {
        std::vector<std::string> parts;
        for (int k : job.leads) parts.push_back(std::to_string(k));
        os << "leads = " << join(parts) << "\n";
    }
    os << "solve = " << (job.solve ? "true" : "false") << "\n";
    os << "restarts = " << job.restarts << "\n";
    os << "max_witnesses = " << job.max_witnesses << "\n";
    if (!job.path.empty()) os << "path = " << job.path << "\n";
    os << "t0 = " << format_double(job.t0) << "\n";
    os << "t_ratio = " << format_double(job.t_ratio) << "\n";
    os << "t_steps = " << job.t_steps << "\n";
    os << "nu_tol = " << format_double(job.nu_tol) << "\n";
    if (!job.witness_x.empty()) os << "witness_x = " << job.witness_x << "\n";
    if (!job.witness_y.empty()) os << "witness_y = " << job.witness_y << "\n";
    if (!job.report.empty()) os << "report = " << job.report << "\n";
    if (!job.traces.empty()) os << "traces = " << job.traces << "\n";
    if (!job.plot.empty()) os << "plot = " << job.plot << "\n";
    return os.str();
}

}  // namespace bifinf
