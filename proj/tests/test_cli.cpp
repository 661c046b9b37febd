#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "tractdim/pipeline.hpp"
#include "tractdim/svg.hpp"

using namespace tractdim;
using namespace tractdim::pipeline;

namespace {

int config_code(const nlohmann::json& j, Needs needs) {
    try {
        validate(RunConfig::from_json(j), needs);
    } catch (const StageError& e) {
        return e.code();
    }
    return kOk;
}

nlohmann::json circle() {
    return {{"generator", {{"family", "circle"}, {"n", 360}}},
            {"spectrum", {{"t_grid", {0.5, 1.0, 1.5}}, {"R_grid", {{"log_from", 2}, {"log_to", 7}, {"log_step", 1}}}}},
            {"pressure", {{"R_grid", {100.0, 1000.0}}, {"N_grid", {7, 8}}}}};
}

}  // namespace

TEST_CASE("grids accept lists and ranges") {
    CHECK(parse_grid(nlohmann::json::array({1.0, 2.0}), "g") == std::vector<double>{1.0, 2.0});
    const auto lin = parse_grid({{"from", 0.0}, {"to", 2.0}, {"step", 0.1}}, "g");
    REQUIRE(lin.size() == 21);
    CHECK(lin[3] == 0.3);
    const auto lg = parse_grid({{"log_from", 2.0}, {"log_to", 7.0}, {"log_step", 0.5}}, "g");
    REQUIRE(lg.size() == 11);
    CHECK(lg.front() == doctest::Approx(std::exp(2.0)));
    CHECK(lg.back() == doctest::Approx(std::exp(7.0)));
    CHECK_THROWS_AS(parse_grid({{"from", 0.0}, {"step", 0.1}}, "g"), StageError);
}

TEST_CASE("a complete config validates for every command") {
    for (Needs n : {Needs::Generator, Needs::Chart, Needs::Spectrum, Needs::Pressure}) {
        CHECK(config_code(circle(), n) == kOk);
    }
}

TEST_CASE("config errors map to exit code 2") {
    nlohmann::json j = circle();
    j["spectrum"].erase("R_grid");
    CHECK(config_code(j, Needs::Spectrum) == kConfig);
    CHECK(config_code(j, Needs::Generator) == kOk);

    j = circle();
    j["chart"] = {{"kappa", 1.5}};
    CHECK(config_code(j, Needs::Chart) == kConfig);

    j = circle();
    j["generator"]["colour"] = "red";
    CHECK(config_code(j, Needs::Generator) == kConfig);

    j = circle();
    j["spectrum"]["t_grid"] = {1.0, 0.5};
    CHECK(config_code(j, Needs::Spectrum) == kConfig);

    j = circle();
    j["output"] = {{"formats", {"csv", "pdf"}}};
    CHECK(config_code(j, Needs::Generator) == kConfig);

    j = circle();
    j["generator"] = {{"family", "koch"}, {"theta", 2.0}};
    CHECK(config_code(j, Needs::Generator) == kConfig);

    CHECK_THROWS_AS(RunConfig::load("/nonexistent/config.json"), StageError);
}

TEST_CASE("config hash ignores the worker count and the output directory") {
    RunConfig a = RunConfig::from_json(circle());
    RunConfig b = a;
    b.jobs = 7;
    b.output.dir = "elsewhere";
    CHECK(a.hash() == b.hash());
    b.seed = 2;
    CHECK(a.hash() != b.hash());
    CHECK(a.chart_key() == b.chart_key());
    CHECK(RunConfig::from_json(a.to_json()).to_json() == a.to_json());
    CHECK(digest("") == "cbf29ce484222325");
}

TEST_CASE("generate writes one line per circle vertex") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "tractdim_test_generate";
    fs::remove_all(dir);
    nlohmann::json j = circle();
    j["output"] = {{"dir", dir.string()}};
    Run run(RunConfig::from_json(j));
    run.emit_generator();
    run.finish("generate");
    std::ifstream in(dir / "sigma.txt");
    long lines = 0;
    for (std::string s; std::getline(in, s);) lines += !s.empty();
    CHECK(lines == 360);
    std::ifstream mf(dir / "manifest.json");
    const nlohmann::json m = nlohmann::json::parse(mf);
    for (const auto& f : m["files"]) CHECK(fs::file_size(f.get<std::string>()) > 0);
    fs::remove_all(dir);
}

TEST_CASE("a Koch generator records its similarity dimension") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "tractdim_test_koch";
    nlohmann::json j = {{"generator", {{"family", "koch"}, {"theta", 1.0472}, {"depth", 5}}},
                        {"output", {{"dir", dir.string()}, {"formats", {"json"}}}}};
    Run run(RunConfig::from_json(j));
    run.emit_generator();
    run.finish("generate");
    std::ifstream mf(dir / "manifest.json");
    const nlohmann::json m = nlohmann::json::parse(mf);
    CHECK(m["verdicts"]["similarity_dimension"].get<double>() == doctest::Approx(1.2619).epsilon(1e-4));
    CHECK_FALSE(fs::exists(dir / "sigma.svg"));
    fs::remove_all(dir);
}

TEST_CASE("svg output is well formed") {
    const std::string s = svg::plot({{"a", {0.0, 1.0}, {1.0, NAN}}}, "t<1", "x", "y");
    CHECK(s.rfind("<svg", 0) == 0);
    CHECK(s.find("t&lt;1") != std::string::npos);
    CHECK(s.find("</svg>") != std::string::npos);
}
