#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tractdim/pipeline.hpp"

using namespace tractdim;
using namespace tractdim::pipeline;

namespace {

struct Flags {
    std::string config;
    unsigned jobs = 0;
    bool jobs_set = false;
    std::uint64_t seed = 0;
    std::string out;
    std::string formats;
    // generate
    std::string family, path, base;
    double theta = NAN;
    int depth = -1, n = -1;
    // pressure
    bool dump_terms = false;
    double threshold = NAN;
};

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

RunConfig assemble(const Flags& f, const CLI::App& app) {
    RunConfig c = f.config.empty() ? RunConfig{} : RunConfig::load(f.config);
    // Command-line flags take precedence over the config file.
    if (app.count("--jobs")) c.jobs = f.jobs;
    if (app.count("--seed")) c.seed = f.seed;
    if (!f.out.empty()) c.output.dir = f.out;
    if (app.count("--format")) {
        c.output.formats.clear();
        for (const auto& x : split(f.formats)) {
            if (x != "csv" && x != "json" && x != "svg") {
                throw StageError(kConfig, "config", "unknown output format '" + x + "'");
            }
            c.output.formats.insert(x);
        }
    }
    if (!f.family.empty()) c.generator.family = f.family;
    if (!f.path.empty()) c.generator.path = f.path;
    if (!f.base.empty()) c.generator.base = f.base;
    if (!std::isnan(f.theta)) c.generator.theta = f.theta;
    if (f.depth >= 0) c.generator.depth = f.depth;
    if (f.n >= 0) c.generator.n = f.n;
    if (!std::isnan(f.threshold)) c.pressure.threshold_A = f.threshold;
    return c;
}

std::string fixed(double v, int digits = 4) {
    if (!std::isfinite(v)) return "n/a";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

nlohmann::json read_json(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) return nullptr;
    try {
        return nlohmann::json::parse(in);
    } catch (const std::exception&) {
        return nullptr;
    }
}

int cmd_report(Run& run) {
    namespace fs = std::filesystem;
    const fs::path dir = run.config().output.dir;
    nlohmann::json r = nlohmann::json::object();
    for (const char* name : {"theta", "mdim", "pressure", "verify", "beta_inf"}) {
        nlohmann::json j = read_json(dir / (std::string(name) + ".json"));
        if (!j.is_null()) r[name] = j;
    }
    if (r.empty()) {
        throw StageError(kConfig, "report", "no results found in '" + dir.string() + "'; run theta or pressure first");
    }
    std::ostringstream md;
    md << "# tractdim report\n\n";
    if (r.contains("theta")) {
        md << "- Theta = " << fixed(r["theta"]["theta"].get<double>()) << " (+/- "
           << fixed(r["theta"].value("uncertainty", NAN)) << ")\n";
        run.note("theta", r["theta"]["theta"]);
    }
    if (r.contains("mdim")) {
        md << "- box-counting dimension of the generator = " << fixed(r["mdim"]["dimension"].get<double>()) << "\n";
        run.note("mdim", r["mdim"]["dimension"]);
    }
    if (r.contains("pressure")) {
        const auto& b = r["pressure"]["bkz"];
        const auto& s = r["pressure"]["strict"];
        md << "- pressure scan: " << b["verdict"].get<std::string>() << ", best lower bound "
           << (b["best_lower_bound"].is_null() ? "n/a" : fixed(b["best_lower_bound"].get<double>())) << "\n";
        md << "- strict test: " << s["verdict"].get<std::string>() << ", exponent "
           << (s["growth_exponent"][0].is_null() ? "n/a" : fixed(s["growth_exponent"][0].get<double>()))
           << " against " << fixed(s["predicted_exponent"][0].get<double>()) << "\n";
        run.note("pressure_verdict", b["verdict"]);
        run.note("strict_verdict", s["verdict"]);
    }
    if (r.contains("verify")) {
        long failed = 0;
        for (const auto& it : r["verify"]["items"]) failed += it["pass"].get<bool>() ? 0 : 1;
        md << "- verification: " << (failed == 0 ? "all invariants pass" : std::to_string(failed) + " failing")
           << "\n";
        run.note("verify", r["verify"]["pass"]);
    }
    run.write("report.md", md.str());
    run.write_json("report.json", r);
    std::cout << md.str();
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hyperbolic-dimension lower bounds for tract models built from quasicircles"};
    app.require_subcommand(1);
    app.fallthrough();
    Flags f;
    app.add_option("--config", f.config, "JSON run configuration");
    app.add_option("--jobs", f.jobs, "worker threads (0: all cores)");
    app.add_option("--seed", f.seed, "sampling seed");
    app.add_option("--out", f.out, "output directory");
    app.add_option("--format", f.formats, "comma-separated subset of csv,json,svg");

    auto* gen = app.add_subcommand("generate", "write the generator curve");
    gen->add_option("--family", f.family, "circle | koch | file");
    gen->add_option("--theta", f.theta, "Koch bump angle in radians");
    gen->add_option("--depth", f.depth, "Koch depth");
    gen->add_option("--n", f.n, "circle vertices");
    gen->add_option("--path", f.path, "polyline file for family file");
    gen->add_option("--base", f.base, "Koch base polygon: triangle | square");
    auto* tract = app.add_subcommand("tract", "build the tract boundary and its box-counting dimension");
    auto* chart = app.add_subcommand("chart", "fit the tract maps");
    auto* spec = app.add_subcommand("spectrum", "integral means spectrum and beta_inf");
    auto* theta = app.add_subcommand("theta", "solve for Theta");
    auto* press = app.add_subcommand("pressure", "pressure scan and strict growth test");
    press->add_flag("--dump-terms", f.dump_terms, "write the per-branch terms to terms.csv");
    press->add_option("--threshold", f.threshold, "pressure threshold A");
    auto* verify = app.add_subcommand("verify", "run the invariant suites");
    auto* report = app.add_subcommand("report", "summarize results found in the output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    std::string command;
    for (auto* s : {gen, tract, chart, spec, theta, press, verify, report})
        if (s->parsed()) command = s->get_name();

    std::unique_ptr<Run> run;
    try {
        RunConfig config = assemble(f, app);
        const Needs needs = command == "generate" ? Needs::Generator
                            : command == "tract" || command == "chart" ? Needs::Chart
                            : command == "pressure" ? Needs::Pressure
                            : command == "report" ? Needs::Generator
                                                  : Needs::Spectrum;
        validate(config, needs);
        run = std::make_unique<Run>(std::move(config));
        int code = kOk;
        if (command == "generate") {
            run->emit_generator();
            std::cout << "generator: " << run->generator().vertices.size() << " vertices";
            if (run->generator().meta.similarity_dimension) {
                std::cout << ", similarity dimension " << fixed(*run->generator().meta.similarity_dimension);
            }
            std::cout << '\n';
        } else if (command == "tract") {
            run->emit_tract();
            std::cout << "box-counting dimension " << fixed(run->mdim().dimension) << '\n';
        } else if (command == "chart") {
            run->emit_chart();
            std::cout << "tract maps: mu = " << fixed(run->maps().upper->mu(), 6) << ", "
                      << run->maps().upper->size() << " vertices\n";
        } else if (command == "spectrum") {
            run->emit_spectrum();
            std::cout << "spectrum: " << run->spectrum().R_values.size() << " R values x "
                      << run->spectrum().t_values.size() << " t values\n";
        } else if (command == "theta") {
            run->emit_theta();
            run->emit_tract();
            const double th = run->theta().theta;
            std::cout << "HypDim(f) >= Theta = " << fixed(th) << " (+/-" << fixed(run->theta_uncertainty()) << ")\n";
            if (run->generator().meta.family != "circle") {
                std::cout << "box-counting dimension " << fixed(run->mdim().dimension) << ", |Theta - Mdim| = "
                          << fixed(std::abs(th - run->mdim().dimension)) << '\n';
            }
        } else if (command == "pressure") {
            run->emit_pressure(f.dump_terms);
            const auto& p = run->pressure();
            std::cout << "pressure: " << p.bkz.verdict << ", best lower bound "
                      << fixed(p.bkz.best_lower_bound) << " at A = " << p.bkz.threshold_A << "; strict test at "
                      << fixed(p.theta) << ": " << p.strict.verdict << " (exponent "
                      << fixed(p.strict.growth_exponent[0]) << " vs " << fixed(p.strict.predicted_exponent[0])
                      << ")\n";
        } else if (command == "verify") {
            const auto items = run->verify();
            bool all = true;
            for (const auto& it : items) {
                all = all && it.pass;
                std::cout << (it.pass ? "PASS " : "FAIL ") << it.name;
                if (std::isfinite(it.margin)) std::cout << "  margin " << fixed(it.margin);
                if (it.detail.is_object() && it.detail.contains("error")) {
                    std::cout << "  (" << it.detail["error"].get<std::string>() << ')';
                }
                std::cout << '\n';
            }
            code = all ? kOk : kVerifyFail;
        } else {
            code = cmd_report(*run);
        }
        run->finish(command);
        return code;
    } catch (const StageError& e) {
        std::cerr << "tractdim " << command << ": [" << e.stage() << "] " << e.what() << '\n';
        if (run) {
            run->note("error", {{"stage", e.stage()}, {"message", e.what()}, {"exit_code", e.code()}});
            try {
                run->finish(command);
            } catch (const std::exception&) {
            }
        }
        return e.code();
    } catch (const std::exception& e) {
        std::cerr << "tractdim " << command << ": " << e.what() << '\n';
        return kConfig;
    }
}
