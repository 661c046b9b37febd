#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "tractdim/curves.hpp"
#include "tractdim/distortion.hpp"
#include "tractdim/pressure.hpp"
#include "tractdim/spectra.hpp"

namespace tractdim::pipeline {

enum ExitCode : int {
    kOk = 0,
    kVerifyFail = 1,
    kConfig = 2,
    kChart = 3,
    kSpectrum = 4,
    kSolver = 5,
    kPressure = 6,
};

/// A failure tagged with the stage that raised it and its exit code.
class StageError : public std::runtime_error {
public:
    StageError(int code, std::string stage, const std::string& what)
        : std::runtime_error(what), code_(code), stage_(std::move(stage)) {}
    int code() const noexcept { return code_; }
    const std::string& stage() const noexcept { return stage_; }

private:
    int code_;
    std::string stage_;
};

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };
/// Level from TRACTDIM_LOG (error | info | debug), default error.
LogLevel log_level();
void log(LogLevel level, const std::string& message);

struct RunConfig {
    struct Generator {
        std::string family = "circle";  // circle | koch | file
        double theta = kPi / 3.0;
        int depth = 6;
        int n = 720;
        std::string path;
        std::string base = "triangle";
    } generator;
    struct Tract {
        int k_min = -6;
        int k_max = 12;
        Side side = Side::Right;
    } tract;
    struct Chart {
        int resolution = 0;       // 0: library defaults
        double kappa = kDefaultKappa;
        bool one_sided = true;    // separate maps for the two sides of the tract
        double mu_tolerance = 1e-2;
        int disk_points = 4096;   // boundary points of the interior disk chart
    } chart;
    struct Spectrum {
        std::vector<double> t_grid;
        std::vector<double> R_grid;
        BetaMethod method = BetaMethod::Extrapolate;
        double rel_tol = 1e-4;
        int max_depth = 12;
    } spectrum;
    struct Pressure {
        double threshold_A = 10.0;
        std::vector<double> t_offsets{-0.3, -0.15, 0.0, 0.15, 0.3};  // relative to theta
        std::vector<double> t_grid;  // absolute; replaces the offsets when set
        std::vector<double> R_grid;
        std::vector<long> N_grid;
        double s0 = 0.1;
    } pressure;
    struct Verify {
        int samples = 500;
        double slack = 0.01;
        double kappa_alt = 0.5;
        double kappa_tolerance = 0.16;
        double beta_one_floor = -0.05;
        double slope_slack = 0.05;
        double convexity_tolerance = 1e-9;
    } verify;
    struct Output {
        std::string dir = "out";
        std::set<std::string> formats{"csv", "json", "svg"};
    } output;
    std::uint64_t seed = 1;
    unsigned jobs = 0;

    /// Parses a config document; unknown keys are rejected. Throws StageError
    /// with code kConfig.
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::string& path);
    nlohmann::json to_json() const;
    /// Hex digest of the canonical JSON form.
    std::string hash() const;
    /// Digest of the sections that determine the tract maps.
    std::string chart_key() const;
    /// Digest of the sections that determine theta.
    std::string theta_key() const;
};

/// Grids are lists or {"from", "to", "step"}; R grids also accept
/// {"log_from", "log_to", "log_step"}.
std::vector<double> parse_grid(const nlohmann::json& j, const std::string& name);

/// Requirements of a command, checked before any computation.
enum class Needs { Generator, Chart, Spectrum, Pressure };
void validate(const RunConfig& config, Needs needs);

struct Maps {
    std::shared_ptr<const TractMap> upper, lower;  // lower is null for a two-sided map
};

struct VerifyItem {
    std::string name;
    bool pass = false;
    double margin = NAN;
    nlohmann::json detail;
};

struct PressureOutcome {
    PressureReport bkz;
    PressureReport strict;
    double theta = NAN;
};

/// One pipeline run. Stages are computed on demand and memoized; output files
/// go to config.output.dir and are listed in the manifest.
class Run {
public:
    explicit Run(RunConfig config);

    const RunConfig& config() const { return config_; }

    const GeneratorCurve& generator();
    const TractBoundary& tract();
    const MdimEstimate& mdim();
    const Maps& maps();
    TractModel model();
    const SpectrumGrid& spectrum();
    const BetaInfinity& beta();
    const ThetaResult& theta();
    /// Uncertainty of theta from the spread of beta_inf and the slope of h.
    double theta_uncertainty();
    const PressureOutcome& pressure();
    std::vector<VerifyItem> verify();

    /// Writes a file when its format is enabled; returns false otherwise.
    bool write(const std::string& name, const std::string& content);
    void write_json(const std::string& name, const nlohmann::json& j);
    void note(const std::string& key, const nlohmann::json& value) { verdicts_[key] = value; }
    /// Writes manifest.json.
    void finish(const std::string& command);

    // Stage outputs.
    void emit_generator();
    void emit_tract();
    void emit_chart();
    void emit_spectrum();
    void emit_theta();
    void emit_pressure(bool dump_terms);

private:
    template <class F>
    auto stage(const std::string& name, int code, F&& body) -> decltype(body());

    RunConfig config_;
    std::optional<GeneratorCurve> generator_;
    std::optional<TractBoundary> tract_;
    std::optional<MdimEstimate> mdim_;
    std::optional<Maps> maps_;
    std::optional<SpectrumGrid> spectrum_;
    std::optional<BetaInfinity> beta_;
    std::optional<ThetaResult> theta_;
    std::optional<PressureOutcome> pressure_;
    std::vector<std::pair<std::string, double>> timings_;
    std::vector<std::string> files_;
    nlohmann::json verdicts_ = nlohmann::json::object();
};

/// Interior-domain chart of a generator fitted on about n boundary points; the
/// accuracy gate still measures against the full curve.
DiskChart generator_chart(const GeneratorCurve& sigma, int n_points, bool throw_on_reject = true);

/// Box-counting dimension of a generator over scales from its finest edge to a
/// fifth of its diameter.
MdimEstimate generator_mdim(const GeneratorCurve& sigma);

std::string version();

/// 64-bit FNV-1a digest as 16 hex digits.
std::string digest(const std::string& s);

}  // namespace tractdim::pipeline
