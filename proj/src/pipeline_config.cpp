#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include "tractdim/pipeline.hpp"

namespace tractdim::pipeline {

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* v = std::getenv("TRACTDIM_LOG");
        const std::string s = v ? v : "";
        if (s == "debug") return LogLevel::Debug;
        if (s == "info") return LogLevel::Info;
        return LogLevel::Error;
    }();
    return level;
}

void log(LogLevel level, const std::string& message) {
    if (level > log_level()) return;
    static std::mutex m;
    static const char* names[] = {"error", "info", "debug"};
    std::lock_guard lock(m);
    std::cerr << "[tractdim " << names[static_cast<int>(level)] << "] " << message << '\n';
}

namespace {

[[noreturn]] void config_error(const std::string& what) { throw StageError(kConfig, "config", what); }

void only_keys(const nlohmann::json& j, const std::string& section, std::initializer_list<const char*> keys) {
    if (!j.is_object()) config_error("section '" + section + "' must be an object");
    for (const auto& [k, v] : j.items()) {
        bool known = false;
        for (const char* key : keys) known = known || k == key;
        if (!known) config_error("unknown key '" + section + "." + k + "'");
    }
}

template <class T>
void take(const nlohmann::json& j, const char* key, T& out, const std::string& section) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        config_error("bad value for '" + section + "." + key + "'");
    }
}

}  // namespace

std::string digest(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

bool increasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) return false;
    return true;
}

}  // namespace

std::vector<double> parse_grid(const nlohmann::json& j, const std::string& name) {
    std::vector<double> out;
    if (j.is_array()) {
        for (const auto& v : j) {
            if (!v.is_number()) config_error("grid '" + name + "' must hold numbers");
            out.push_back(v.get<double>());
        }
        return out;
    }
    if (!j.is_object()) config_error("grid '" + name + "' must be a list or a range object");
    const bool log = j.contains("log_from");
    const char* kf = log ? "log_from" : "from";
    const char* kt = log ? "log_to" : "to";
    const char* ks = log ? "log_step" : "step";
    only_keys(j, name, {kf, kt, ks});
    if (!j.contains(kf) || !j.contains(kt) || !j.contains(ks)) config_error("incomplete range for '" + name + "'");
    double a, b, s;
    try {
        a = j.at(kf).get<double>();
        b = j.at(kt).get<double>();
        s = j.at(ks).get<double>();
    } catch (const nlohmann::json::exception&) {
        config_error("bad range for '" + name + "'");
    }
    if (!(s > 0.0) || !(b >= a)) config_error("range for '" + name + "' needs step > 0 and to >= from");
    const long n = std::lround(std::floor((b - a) / s + 1e-9));
    for (long i = 0; i <= n; ++i) {
        // Rounded so the grid reads the same however it was written.
        const double x = std::round((a + s * i) * 1e12) / 1e12;
        out.push_back(log ? std::exp(x) : x);
    }
    return out;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig c;
    only_keys(j, "config", {"generator", "tract", "chart", "spectrum", "pressure", "verify", "output", "seed", "jobs"});
    if (j.contains("generator")) {
        const auto& g = j["generator"];
        only_keys(g, "generator", {"family", "theta", "depth", "n", "path", "base"});
        take(g, "family", c.generator.family, "generator");
        take(g, "theta", c.generator.theta, "generator");
        take(g, "depth", c.generator.depth, "generator");
        take(g, "n", c.generator.n, "generator");
        take(g, "path", c.generator.path, "generator");
        take(g, "base", c.generator.base, "generator");
    }
    if (j.contains("tract")) {
        const auto& t = j["tract"];
        only_keys(t, "tract", {"k_min", "k_max", "side"});
        take(t, "k_min", c.tract.k_min, "tract");
        take(t, "k_max", c.tract.k_max, "tract");
        std::string side = to_string(c.tract.side);
        take(t, "side", side, "tract");
        try {
            c.tract.side = side_from_string(side);
        } catch (const Error& e) {
            config_error(e.what());
        }
    }
    if (j.contains("chart")) {
        const auto& ch = j["chart"];
        only_keys(ch, "chart", {"resolution", "kappa", "one_sided", "mu_tolerance", "disk_points"});
        take(ch, "resolution", c.chart.resolution, "chart");
        take(ch, "kappa", c.chart.kappa, "chart");
        take(ch, "one_sided", c.chart.one_sided, "chart");
        take(ch, "mu_tolerance", c.chart.mu_tolerance, "chart");
        take(ch, "disk_points", c.chart.disk_points, "chart");
    }
    if (j.contains("spectrum")) {
        const auto& s = j["spectrum"];
        only_keys(s, "spectrum", {"t_grid", "R_grid", "method", "rel_tol", "max_depth"});
        if (s.contains("t_grid")) c.spectrum.t_grid = parse_grid(s["t_grid"], "spectrum.t_grid");
        if (s.contains("R_grid")) c.spectrum.R_grid = parse_grid(s["R_grid"], "spectrum.R_grid");
        std::string method = to_string(c.spectrum.method);
        take(s, "method", method, "spectrum");
        try {
            c.spectrum.method = beta_method_from_string(method);
        } catch (const Error& e) {
            config_error(e.what());
        }
        take(s, "rel_tol", c.spectrum.rel_tol, "spectrum");
        take(s, "max_depth", c.spectrum.max_depth, "spectrum");
    }
    if (j.contains("pressure")) {
        const auto& p = j["pressure"];
        only_keys(p, "pressure", {"threshold_A", "t_offsets", "t_grid", "R_grid", "N_grid", "s0"});
        take(p, "threshold_A", c.pressure.threshold_A, "pressure");
        if (p.contains("t_offsets")) c.pressure.t_offsets = parse_grid(p["t_offsets"], "pressure.t_offsets");
        if (p.contains("t_grid")) c.pressure.t_grid = parse_grid(p["t_grid"], "pressure.t_grid");
        if (p.contains("R_grid")) c.pressure.R_grid = parse_grid(p["R_grid"], "pressure.R_grid");
        if (p.contains("N_grid")) {
            c.pressure.N_grid.clear();
            for (double v : parse_grid(p["N_grid"], "pressure.N_grid")) {
                if (v != std::floor(v)) config_error("pressure.N_grid must hold integers");
                c.pressure.N_grid.push_back(static_cast<long>(v));
            }
        }
        take(p, "s0", c.pressure.s0, "pressure");
    }
    if (j.contains("verify")) {
        const auto& v = j["verify"];
        only_keys(v, "verify",
                  {"samples", "slack", "kappa_alt", "kappa_tolerance", "beta_one_floor", "slope_slack",
                   "convexity_tolerance"});
        take(v, "samples", c.verify.samples, "verify");
        take(v, "slack", c.verify.slack, "verify");
        take(v, "kappa_alt", c.verify.kappa_alt, "verify");
        take(v, "kappa_tolerance", c.verify.kappa_tolerance, "verify");
        take(v, "beta_one_floor", c.verify.beta_one_floor, "verify");
        take(v, "slope_slack", c.verify.slope_slack, "verify");
        take(v, "convexity_tolerance", c.verify.convexity_tolerance, "verify");
    }
    if (j.contains("output")) {
        const auto& o = j["output"];
        only_keys(o, "output", {"dir", "formats"});
        take(o, "dir", c.output.dir, "output");
        if (o.contains("formats")) {
            std::vector<std::string> f;
            take(o, "formats", f, "output");
            c.output.formats = std::set<std::string>(f.begin(), f.end());
        }
    }
    take(j, "seed", c.seed, "config");
    take(j, "jobs", c.jobs, "config");
    for (const auto& f : c.output.formats)
        if (f != "csv" && f != "json" && f != "svg") config_error("unknown output format '" + f + "'");
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) config_error("cannot read config file '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        config_error("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return from_json(j);
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["generator"] = {{"family", generator.family}, {"theta", generator.theta}, {"depth", generator.depth},
                      {"n", generator.n},           {"path", generator.path},   {"base", generator.base}};
    j["tract"] = {{"k_min", tract.k_min}, {"k_max", tract.k_max}, {"side", to_string(tract.side)}};
    j["chart"] = {{"resolution", chart.resolution},
                  {"kappa", chart.kappa},
                  {"one_sided", chart.one_sided},
                  {"mu_tolerance", chart.mu_tolerance},
                  {"disk_points", chart.disk_points}};
    j["spectrum"] = {{"t_grid", spectrum.t_grid},
                     {"R_grid", spectrum.R_grid},
                     {"method", to_string(spectrum.method)},
                     {"rel_tol", spectrum.rel_tol},
                     {"max_depth", spectrum.max_depth}};
    j["pressure"] = {{"threshold_A", pressure.threshold_A}, {"t_offsets", pressure.t_offsets},
                     {"t_grid", pressure.t_grid},           {"R_grid", pressure.R_grid},
                     {"N_grid", pressure.N_grid},           {"s0", pressure.s0}};
    j["verify"] = {{"samples", verify.samples},
                   {"slack", verify.slack},
                   {"kappa_alt", verify.kappa_alt},
                   {"kappa_tolerance", verify.kappa_tolerance},
                   {"beta_one_floor", verify.beta_one_floor},
                   {"slope_slack", verify.slope_slack},
                   {"convexity_tolerance", verify.convexity_tolerance}};
    j["output"] = {{"dir", output.dir}, {"formats", std::vector<std::string>(output.formats.begin(), output.formats.end())}};
    j["seed"] = seed;
    j["jobs"] = jobs;
    return j;
}

std::string RunConfig::hash() const {
    nlohmann::json j = to_json();
    // Worker count and output location do not change any result.
    j.erase("jobs");
    j["output"].erase("dir");
    return digest(j.dump());
}

std::string RunConfig::chart_key() const {
    const nlohmann::json j = to_json();
    return digest(nlohmann::json{{"generator", j["generator"]}, {"tract", j["tract"]}, {"chart", j["chart"]}}.dump());
}

std::string RunConfig::theta_key() const {
    return chart_key() + ":" + digest(to_json()["spectrum"].dump());
}

void validate(const RunConfig& c, Needs needs) {
    const auto& g = c.generator;
    if (g.family != "circle" && g.family != "koch" && g.family != "file") {
        config_error("generator.family must be circle, koch or file");
    }
    if (g.family == "circle" && g.n < 8) config_error("generator.n must be at least 8");
    if (g.family == "koch") {
        if (!(g.theta > 0.0 && g.theta < kPi / 2.0)) config_error("generator.theta must lie in (0, pi/2)");
        if (g.depth < 0 || g.depth > 10) config_error("generator.depth must lie in [0, 10]");
    }
    if (g.family == "file" && g.path.empty()) config_error("generator.path is required for family file");
    if (c.output.dir.empty()) config_error("output.dir must not be empty");
    if (needs == Needs::Generator) return;
    if (c.tract.k_min >= c.tract.k_max) config_error("tract.k_min must be below tract.k_max");
    if (!(c.chart.kappa > 0.0 && c.chart.kappa < 1.0)) config_error("chart.kappa must lie in (0, 1)");
    if (c.chart.resolution < 0) config_error("chart.resolution must be >= 0");
    if (!(c.chart.mu_tolerance > 0.0)) config_error("chart.mu_tolerance must be positive");
    if (c.chart.disk_points < 3) config_error("chart.disk_points must be at least 3");
    if (needs == Needs::Chart) return;
    if (c.spectrum.R_grid.empty()) config_error("spectrum.R_grid is missing");
    if (c.spectrum.t_grid.empty()) config_error("spectrum.t_grid is missing");
    if (!increasing(c.spectrum.R_grid) || !(c.spectrum.R_grid.front() > 1.0)) {
        config_error("spectrum.R_grid must be increasing with values > 1");
    }
    if (!increasing(c.spectrum.t_grid) || c.spectrum.t_grid.front() < 0.0) {
        config_error("spectrum.t_grid must be increasing with values >= 0");
    }
    if (!(c.spectrum.rel_tol > 0.0)) config_error("spectrum.rel_tol must be positive");
    if (c.spectrum.max_depth < 0) config_error("spectrum.max_depth must be >= 0");
    if (!(c.verify.kappa_alt > 0.0 && c.verify.kappa_alt < 1.0)) config_error("verify.kappa_alt must lie in (0, 1)");
    if (c.verify.samples < 1) config_error("verify.samples must be positive");
    if (needs == Needs::Spectrum) return;
    if (c.pressure.R_grid.empty()) config_error("pressure.R_grid is missing");
    if (c.pressure.N_grid.empty()) config_error("pressure.N_grid is missing");
    if (!increasing(c.pressure.R_grid) || !(c.pressure.R_grid.front() > std::exp(1.0))) {
        config_error("pressure.R_grid must be increasing with values > e");
    }
    for (std::size_t i = 0; i < c.pressure.N_grid.size(); ++i) {
        if (c.pressure.N_grid[i] < 1 || (i > 0 && c.pressure.N_grid[i] <= c.pressure.N_grid[i - 1])) {
            config_error("pressure.N_grid must be increasing positive integers");
        }
    }
    if (!(c.pressure.threshold_A > 0.0)) config_error("pressure.threshold_A must be positive");
    if (!(c.pressure.s0 > 0.0)) config_error("pressure.s0 must be positive");
    if (c.pressure.t_grid.empty() && c.pressure.t_offsets.empty()) config_error("pressure needs a t grid or offsets");
    if (!c.pressure.t_grid.empty() && !increasing(c.pressure.t_grid)) {
        config_error("pressure.t_grid must be increasing");
    }
}

}  // namespace tractdim::pipeline
