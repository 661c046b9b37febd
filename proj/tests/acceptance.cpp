// Acceptance runner: `acceptance <criterion 1..8> <work dir> <tractdim binary>`.
// Prints detail lines, then one PASS/FAIL line; exit status 0 on pass.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "tractdim/curves.hpp"
#include "tractdim/disk_chart.hpp"
#include "tractdim/pipeline.hpp"
#include "tractdim/pressure.hpp"
#include "tractdim/spectra.hpp"

#ifndef TRACTDIM_SOURCE_DIR
#error "TRACTDIM_SOURCE_DIR must be defined"
#endif

namespace fs = std::filesystem;
using namespace tractdim;
using namespace tractdim::pipeline;
using nlohmann::json;

namespace {

fs::path g_work, g_cli;

std::string fmt(double x, int prec = 4) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(prec);
    os << x;
    return os.str();
}

void detail(const std::string& s) { std::cout << "  " << s << '\n'; }

RunConfig config(const std::string& name) {
    RunConfig c = RunConfig::load(std::string(TRACTDIM_SOURCE_DIR) + "/configs/" + name + ".json");
    c.output.dir = (g_work / name).string();
    return c;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json read_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

// Theta stage for a config, reusing stored results when their key matches.
struct ThetaOutput {
    double theta = NAN, seconds = 0.0;
    json beta;
    bool reused = false;
};

ThetaOutput theta_for(const RunConfig& c) {
    const fs::path dir = c.output.dir;
    ThetaOutput out;
    if (fs::exists(dir / "theta.json") && fs::exists(dir / "beta_inf.json")) {
        const json th = read_json(dir / "theta.json");
        if (th.value("key", "") == c.theta_key()) {
            out.theta = th.at("theta").get<double>();
            out.beta = read_json(dir / "beta_inf.json");
            out.reused = true;
            return out;
        }
    }
    const auto t0 = std::chrono::steady_clock::now();
    Run run(c);
    run.emit_chart();
    run.emit_theta();
    run.finish("theta");
    out.seconds = seconds_since(t0);
    out.theta = run.theta().theta;
    out.beta = run.beta().to_json();
    return out;
}

// Verification items for a config, reusing a stored verify.json from the same config.
json verify_for(const RunConfig& c) {
    const fs::path dir = c.output.dir;
    if (fs::exists(dir / "verify.json") && fs::exists(dir / "manifest.json")) {
        const json m = read_json(dir / "manifest.json");
        if (m.value("command", "") == "verify" && m.value("config_hash", "") == c.hash()) {
            return read_json(dir / "verify.json");
        }
    }
    Run run(c);
    run.verify();
    run.finish("verify");
    return read_json(dir / "verify.json");
}

const json* find_item(const json& v, const std::string& name) {
    for (const auto& it : v.at("items"))
        if (it.at("name") == name) return &it;
    return nullptr;
}

int run_cli(const std::string& args, const std::string& log_name) {
    const std::string cmd = "\"" + g_cli.string() + "\" " + args + " > \"" + (g_work / log_name).string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_text(const fs::path& p, const std::string& s) {
    fs::create_directories(p.parent_path());
    std::ofstream(p) << s;
}

std::size_t index_of(const std::vector<double>& grid, double t) {
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (std::abs(grid[k] - t) < 1e-9) return k;
    throw std::runtime_error("t = " + fmt(t) + " is not on the grid");
}

// 1. Circle generator end to end.
bool criterion1() {
    const RunConfig c = config("circle");
    fs::remove_all(c.output.dir);
    const ThetaOutput th = theta_for(c);
    const auto t = th.beta.at("t").get<std::vector<double>>();
    const auto b = th.beta.at("beta_inf").get<std::vector<double>>();
    double worst = 0.0;
    for (double x : b) worst = std::max(worst, std::abs(x));
    const bool span = t.front() <= 1e-12 && t.back() >= 2.0 - 1e-12;
    detail("max |beta_inf(t)| on t in [" + fmt(t.front(), 1) + ", " + fmt(t.back(), 1) + "] = " + fmt(worst) +
           " (<= 0.02)");
    detail("Theta = " + fmt(th.theta) + " (1 +/- 0.02)");
    detail("runtime " + fmt(th.seconds, 1) + " s (< 120 s)");
    return span && worst <= 0.02 && std::abs(th.theta - 1.0) <= 0.02 && th.seconds < 120.0;
}

// 2. Theta and box counting against the similarity dimension of Koch curves.
bool criterion2() {
    bool ok = true;
    double total = 0.0;
    for (const char* name : {"koch_pi6", "koch_pi4", "koch_pi3"}) {
        const RunConfig c = config(name);
        const double D = koch_similarity_dimension(c.generator.theta);
        const ThetaOutput th = theta_for(c);
        total += th.seconds;
        Run run(c);
        const double box = run.mdim().dimension;
        const bool pass = std::abs(th.theta - D) <= 0.08 && std::abs(box - D) <= 0.06 && c.generator.depth >= 6;
        ok = ok && pass;
        detail(std::string(name) + " depth " + std::to_string(c.generator.depth) + ": D = " + fmt(D) +
               ", Theta = " + fmt(th.theta) + " (|diff| " + fmt(std::abs(th.theta - D)) + " <= 0.08), box = " +
               fmt(box) + " (|diff| " + fmt(std::abs(box - D)) + " <= 0.06)" + (th.reused ? " [reused]" : "") +
               (pass ? "" : " FAIL"));
    }
    detail("runtime " + fmt(total / 60.0, 1) + " min on " + std::to_string(std::thread::hardware_concurrency()) +
           " hardware threads");
    return ok;
}

// 3. Tract-side beta_inf against the classical disk spectrum of the Koch interior.
bool criterion3() {
    const RunConfig c = config("koch_pi3");
    const ThetaOutput th = theta_for(c);
    const auto tg = th.beta.at("t").get<std::vector<double>>();
    const auto bt = th.beta.at("beta_inf").get<std::vector<double>>();
    const auto st = th.beta.at("spread").get<std::vector<double>>();

    const GeneratorCurve g = koch_generator(c.generator.theta, 6);
    const DiskChart chart = fit_disk_chart(g.vertices, 0.0);
    const std::vector<double> r{0.9, 0.95, 0.98, 0.99, 0.995};
    const std::vector<double> t{0.5, 1.0, 1.5};
    const ClassicalBeta cb = classical_beta(chart, r, t);
    bool ok = chart.accepted();
    for (std::size_t k = 0; k < t.size(); ++k) {
        // Disk error: regression error plus half the range of the local slopes.
        double lo = INFINITY, hi = -INFINITY;
        for (std::size_t i = 0; i + 1 < r.size(); ++i) {
            const double s = std::log(cb.means[i + 1][k] / cb.means[i][k]) / std::log((1 - r[i]) / (1 - r[i + 1]));
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        const double ed = cb.std_error[k] + 0.5 * (hi - lo);
        const std::size_t q = index_of(tg, t[k]);
        const double diff = std::abs(bt[q] - cb.beta[k]), bar = st[q] + ed;
        const bool pass = diff <= bar;
        ok = ok && pass;
        detail("t = " + fmt(t[k], 1) + ": tract " + fmt(bt[q]) + " +/- " + fmt(st[q]) + ", disk " + fmt(cb.beta[k]) +
               " +/- " + fmt(ed) + ", |diff| " + fmt(diff) + (pass ? " <= " : " > ") + fmt(bar));
    }
    return ok;
}

bool items_pass(const json& v, const std::vector<std::string>& prefixes, const std::string& tag, int& count) {
    bool ok = true;
    for (const auto& it : v.at("items")) {
        const std::string name = it.at("name");
        for (const auto& p : prefixes)
            if (name.rfind(p, 0) == 0 || name.find("]_" + p) != std::string::npos) {
                ++count;
                if (!it.at("pass").get<bool>()) {
                    ok = false;
                    detail(tag + ": " + name + " FAIL " + it.at("detail").dump());
                }
            }
    }
    return ok;
}

// 4. Distortion gates on every accepted chart; an eight-point chart must be refused.
bool criterion4() {
    bool ok = true;
    const std::vector<std::string> gates{"disk_chart_accepted", "disk_koebe", "disk_half_plane", "disk_ratio",
                                         "disk_quarter", "disk_derivative", "accepted", "half_plane", "ratio",
                                         "derivative"};
    for (const char* name : {"circle", "koch_pi6"}) {
        const RunConfig c = config(name);
        const json v = verify_for(c);
        int count = 0;
        const bool pass = items_pass(v, gates, name, count);
        ok = ok && pass && count >= 12;
        detail(std::string(name) + ": " + std::to_string(count) + " gate checks at " +
               std::to_string(c.verify.samples) + " samples, " + (pass ? "all pass" : "failures"));
    }
    RunConfig c = config("koch_pi6");
    c.chart.resolution = 8;
    const DiskChart coarse = generator_chart(Run(c).generator(), 8, false);
    detail("resolution 8 chart: relative accuracy " + fmt(coarse.relative_accuracy()) +
           (coarse.accepted() ? ", accepted" : ", rejected"));
    return ok && !coarse.accepted();
}

// 5. Convexity, slope of h, beta_inf(1) and kappa independence.
bool criterion5() {
    bool ok = true;
    for (const char* name : {"circle", "koch_pi6"}) {
        const json v = verify_for(config(name));
        for (const char* item : {"convexity", "h_slope", "beta_at_one", "kappa_independence"}) {
            const json* it = find_item(v, item);
            const bool pass = it && it->at("pass").get<bool>();
            ok = ok && pass;
            detail(std::string(name) + " " + item + ": " + (pass ? "pass " : "FAIL ") + (it ? it->at("detail").dump() : "missing"));
        }
    }
    return ok;
}

// Direct summation over the exact half-plane branch points.
double direct_sigma(double R, double t) {
    const double L = std::log(R), y = std::sqrt(R * R - L * L);
    const long N = static_cast<long>(std::floor((y / kDefaultKappa - y) / kTwoPi)) - 1;
    double s = 0.0;
    for (long k = 0; k <= N; ++k) s += std::pow(std::hypot(L, y + kTwoPi * k), -t);
    return s;
}

// Pressure stage for a config, reusing a stored pressure.json from the same config.
json pressure_for(const RunConfig& c) {
    const fs::path dir = c.output.dir;
    if (fs::exists(dir / "pressure.json") && fs::exists(dir / "manifest.json")) {
        const json m = read_json(dir / "manifest.json");
        if (m.value("command", "") == "pressure" && m.value("config_hash", "") == c.hash()) {
            return read_json(dir / "pressure.json");
        }
    }
    Run run(c);
    run.emit_pressure(false);
    run.finish("pressure");
    return read_json(dir / "pressure.json");
}

double num(const json& x) { return x.is_null() ? NAN : x.get<double>(); }

std::string row_of(const json& a, int prec = 3) {
    std::string row;
    for (const auto& x : a) row += " " + fmt(num(x), prec);
    return row;
}

// 6. Divergence of the pressure sums.
bool criterion6() {
    bool ok = true;
    {
        const json p = pressure_for(config("circle")).at("bkz");
        const json& t = p.at("t");
        const json& R = p.at("R");
        double worst = 0.0;
        for (std::size_t k = 0; k < t.size(); ++k)
            for (std::size_t i = 0; i < R.size(); ++i) {
                const double d = std::abs(num(p["full_sums"][k][i]) / direct_sigma(R[i], t[k]) - 1.0);
                worst = std::isfinite(d) ? std::max(worst, d) : INFINITY;
            }
        const bool oracle = worst <= 0.005;
        detail("circle: max relative deviation from direct summation " + fmt(worst, 6) + " (<= 0.005)");
        bool pattern = true;
        for (std::size_t k = 0; k < t.size(); ++k) {
            bool any = false;
            for (const auto& b : p["attained"][k]) any = any || b.get<bool>();
            const bool want = t[k].get<double>() <= 0.95 + 1e-12;
            pattern = pattern && (any == want);
            detail("circle t = " + fmt(t[k], 2) + ": Sigma_l over log R = 4..10:" + row_of(p["sums"][k]) +
                   (any ? "  attains " : "  below ") + fmt(p["threshold_A"], 0) + (any == want ? "" : " (unexpected)"));
        }
        ok = ok && oracle && pattern;
    }
    {
        const json po = pressure_for(config("koch_pi3"));
        const json& p = po.at("bkz");
        const double theta = po.at("theta");
        const auto t = p.at("t").get<std::vector<double>>();
        auto attained_near = [&](double target) {
            std::size_t best = 0;
            for (std::size_t k = 1; k < t.size(); ++k)
                if (std::abs(t[k] - target) < std::abs(t[best] - target)) best = k;
            bool any = false;
            for (const auto& b : p["attained"][best]) any = any || b.get<bool>();
            detail("koch_pi3 t = " + fmt(t[best], 3) + ": Sigma_l over log R = 4..10:" + row_of(p["sums"][best]) +
                   (any ? "  attains " : "  below ") + fmt(p["threshold_A"], 0));
            return any;
        };
        detail("koch_pi3 Theta = " + fmt(theta));
        const bool below = attained_near(theta - 0.15), above = attained_near(theta + 0.15);
        ok = ok && below && !above;
    }
    return ok;
}

// 7. Growth of the strict-inequality sums.
bool criterion7() {
    bool ok = true;
    {
        std::vector<long> N;
        for (long n = 7; n <= 12; ++n) N.push_back(n);
        const PressureReport r = strict_scan(TractModel(), 1.0, N);
        std::string row;
        for (double s : r.sums[0]) row += " " + fmt(s, 3);
        detail("circle (exact half-plane map): S(N) for N = 7..12:" + row + ", exponent " +
               fmt(r.growth_exponent[0]) + " vs 1 +/- 0.15, verdict " + r.verdict);
        ok = ok && r.verdict == "strict-evidence";
    }
    {
        const json po = pressure_for(config("koch_pi3"));
        const json& r = po.at("strict");
        const json& N = r.at("N");
        detail("koch_pi3 at Theta = " + fmt(po.at("theta")) + ": S(N) for N = " + fmt(N.front(), 0) + ".." +
               fmt(N.back(), 0) + ":" + row_of(r["sums"][0]) + ", exponent " + fmt(num(r["growth_exponent"][0])) +
               " vs " + fmt(num(r["predicted_exponent"][0])) + " +/- 0.15, verdict " + r["verdict"].get<std::string>());
        ok = ok && r["verdict"] == "strict-evidence";
    }
    return ok;
}

bool same_tree(const fs::path& a, const fs::path& b, int& files) {
    bool ok = true;
    for (const auto& e : fs::directory_iterator(a)) {
        const std::string name = e.path().filename().string();
        if (name == "manifest.json" || name == "run.log") continue;
        std::ifstream fa(e.path(), std::ios::binary), fb(b / name, std::ios::binary);
        const std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {});
        ++files;
        if (!fb || sa != sb) {
            ok = false;
            detail("differs: " + name);
        }
    }
    return ok;
}

// 8. Determinism and the exit-code contract.
bool criterion8() {
    const fs::path dir = g_work / "interfaces";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const json base = {
        {"generator", {{"family", "circle"}, {"n", 360}}},
        {"spectrum", {{"t_grid", {{"from", 0.0}, {"to", 2.0}, {"step", 0.25}}}, {"R_grid", {{"log_from", 2.0}, {"log_to", 7.0}, {"log_step", 1.0}}}}},
        {"pressure", {{"t_grid", {0.5, 1.2}}, {"R_grid", {{"log_from", 4.0}, {"log_to", 6.0}, {"log_step", 1.0}}}, {"N_grid", {7, 8}}}}};
    auto write_cfg = [&](const std::string& name, const json& j) {
        write_text(dir / (name + ".json"), j.dump(2));
        return "--config \"" + (dir / (name + ".json")).string() + "\"";
    };
    const std::string cfg = write_cfg("base", base);
    bool same = true;
    int files = 0;
    for (const char* cmd : {"theta", "pressure"}) {
        const int a = run_cli(std::string(cmd) + " " + cfg + " --jobs 1 --out \"" + (dir / "run_a").string() + "\"",
                              "interfaces/run_a.log");
        const int b = run_cli(std::string(cmd) + " " + cfg + " --jobs 3 --out \"" + (dir / "run_b").string() + "\"",
                              "interfaces/run_b.log");
        same = same && a == 0 && b == 0;
    }
    same = same && same_tree(dir / "run_a", dir / "run_b", files) && files > 0;
    detail("repeated theta + pressure runs (1 and 3 workers): " + std::to_string(files) + " files " +
           (same ? "byte-identical" : "DIFFER"));

    write_text(dir / "bow.txt", "1 0\n1 1\n-1 1\n-1.5 -0.5\n-1.5 0.5\n-1 -1\n1 -1\n");
    json no_r = base;
    no_r["spectrum"].erase("R_grid");
    json kappa = base;
    kappa["chart"] = {{"kappa", 1.5}};
    json short_ladder = base;
    short_ladder["tract"] = {{"k_min", -6}, {"k_max", 1}};
    json quad = base;
    quad["spectrum"]["rel_tol"] = 1e-15;
    quad["spectrum"]["max_depth"] = 0;
    json no_root = base;
    no_root["spectrum"]["t_grid"] = {0.1, 0.5};
    json small_n = base;
    small_n["pressure"]["N_grid"] = {2, 3};
    json coarse = {{"generator", {{"family", "koch"}, {"theta", kPi / 3.0}, {"depth", 4}}},
                   {"chart", {{"resolution", 8}}},
                   {"spectrum", base["spectrum"]}};
    struct Scenario {
        std::string label, args;
        int expected;
    };
    const std::string out = " --out \"" + (dir / "fail").string() + "\"";
    const std::vector<Scenario> scenarios{
        {"missing spectrum.R_grid", "spectrum " + write_cfg("no_r", no_r), kConfig},
        {"self-intersecting generator file",
         "generate --family file --path \"" + (dir / "bow.txt").string() + "\"", kConfig},
        {"kappa = 1.5", "chart " + write_cfg("kappa", kappa), kConfig},
        {"tract ladder cut at k_max = 1", "chart " + write_cfg("ladder", short_ladder), kChart},
        {"unreachable quadrature tolerance", "spectrum " + write_cfg("quad", quad), kSpectrum},
        {"t grid without a root of h", "theta " + write_cfg("no_root", no_root), kSolver},
        {"N grid below the admissible range", "pressure " + write_cfg("small_n", small_n), kPressure},
        {"verify with an eight-point chart", "verify " + write_cfg("coarse", coarse), kVerifyFail},
    };
    bool codes = true;
    int k = 0;
    for (const auto& s : scenarios) {
        const int code = run_cli(s.args + out, "interfaces/scenario" + std::to_string(++k) + ".log");
        const bool pass = code == s.expected;
        codes = codes && pass;
        detail(s.label + ": exit " + std::to_string(code) + " (expected " + std::to_string(s.expected) + ")" +
               (pass ? "" : " FAIL"));
    }
    return same && codes;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 4) {
        std::cerr << "usage: acceptance <criterion 1..8> <work dir> <tractdim binary>\n";
        return 2;
    }
    const int n = std::atoi(argv[1]);
    g_work = fs::absolute(argv[2]);
    g_cli = fs::absolute(argv[3]);
    fs::create_directories(g_work);
    bool pass = false;
    try {
        switch (n) {
            case 1: pass = criterion1(); break;
            case 2: pass = criterion2(); break;
            case 3: pass = criterion3(); break;
            case 4: pass = criterion4(); break;
            case 5: pass = criterion5(); break;
            case 6: pass = criterion6(); break;
            case 7: pass = criterion7(); break;
            case 8: pass = criterion8(); break;
            default: std::cerr << "unknown criterion " << n << '\n'; return 2;
        }
    } catch (const std::exception& e) {
        detail(std::string("error: ") + e.what());
    }
    std::cout << "criterion " << n << ": " << (pass ? "PASS" : "FAIL") << std::endl;
    return pass ? 0 : 1;
}
