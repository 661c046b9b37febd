#include "tractdim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "tractdim/parallel.hpp"
#include "tractdim/polyline.hpp"
#include "tractdim/svg.hpp"

namespace tractdim::pipeline {

namespace fs = std::filesystem;

std::string version() { return "0.3.0"; }

DiskChart generator_chart(const GeneratorCurve& sigma, int n_points, bool throw_on_reject) {
    DiskChartOptions o;
    o.resolution = n_points;
    o.throw_on_reject = throw_on_reject;
    return fit_disk_chart(sigma.vertices, 0.0, o);
}

MdimEstimate generator_mdim(const GeneratorCurve& sigma) {
    const auto& v = sigma.vertices;
    double edge = INFINITY, diam = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        edge = std::min(edge, std::abs(v[(i + 1) % v.size()] - v[i]));
        diam = std::max(diam, std::abs(v[i] - v[0]));
    }
    const double lo = std::max(edge, 1e-4 * diam);
    return box_count_dim(v, true, lo, 0.2 * diam, 12);
}

Run::Run(RunConfig config) : config_(std::move(config)) {
    set_jobs(config_.jobs);
    std::error_code ec;
    fs::create_directories(config_.output.dir, ec);
    if (ec || !fs::is_directory(config_.output.dir)) {
        throw StageError(kConfig, "config", "output directory '" + config_.output.dir + "' is not writable");
    }
}

template <class F>
auto Run::stage(const std::string& name, int code, F&& body) -> decltype(body()) {
    const auto start = std::chrono::steady_clock::now();
    log(LogLevel::Info, "stage " + name);
    try {
        if constexpr (std::is_void_v<decltype(body())>) {
            body();
            timings_.emplace_back(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        } else {
            auto r = body();
            timings_.emplace_back(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
            return r;
        }
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(code, name, std::string(to_string(e.kind())) + ": " + e.what());
    } catch (const std::exception& e) {
        throw StageError(code, name, e.what());
    }
}

const GeneratorCurve& Run::generator() {
    if (!generator_) {
        generator_ = stage("generate", kConfig, [&] {
            const auto& g = config_.generator;
            GeneratorCurve c;
            if (g.family == "circle") {
                c = circle_generator(g.n);
            } else if (g.family == "koch") {
                c = koch_generator(g.theta, g.depth, g.base);
            } else {
                GeneratorMeta meta;
                meta.family = "file";
                Polyline pts;
                try {
                    pts = read_polyline_file(g.path);
                } catch (const Error& e) {
                    throw StageError(kConfig, "generate", e.what());
                }
                c = normalize_generator(std::move(pts), meta);
            }
            validate_generator(c);
            return c;
        });
    }
    return *generator_;
}

const TractBoundary& Run::tract() {
    if (!tract_) {
        const GeneratorCurve& g = generator();
        tract_ = stage("tract", kConfig, [&] {
            return build_tract(exp_lift(g), config_.tract.k_min, config_.tract.k_max, config_.tract.side);
        });
    }
    return *tract_;
}

const MdimEstimate& Run::mdim() {
    if (!mdim_) {
        const GeneratorCurve& g = generator();
        mdim_ = stage("mdim", kConfig, [&] { return generator_mdim(g); });
    }
    return *mdim_;
}

const Maps& Run::maps() {
    if (maps_) return *maps_;
    const std::string key = config_.chart_key();
    const fs::path cache = fs::path(config_.output.dir) / "chart.json";
    if (fs::exists(cache)) {
        try {
            std::ifstream in(cache);
            const nlohmann::json j = nlohmann::json::parse(in);
            if (j.value("key", "") == key) {
                Maps m;
                m.upper = std::make_shared<TractMap>(TractMap::from_json(j.at("upper")));
                if (j.contains("lower") && !j["lower"].is_null()) {
                    m.lower = std::make_shared<TractMap>(TractMap::from_json(j.at("lower")));
                }
                log(LogLevel::Info, "reusing tract maps from " + cache.string());
                maps_ = m;
                return *maps_;
            }
        } catch (const std::exception& e) {
            log(LogLevel::Info, std::string("ignoring chart cache: ") + e.what());
        }
    }
    const TractBoundary& t = tract();
    maps_ = stage("chart", kChart, [&] {
        TractMapOptions o;
        o.resolution = config_.chart.resolution;
        Maps m;
        auto fit = [&](TractMapOptions::Focus f) {
            o.focus = f;
            auto map = std::make_shared<TractMap>(fit_tract_map(t, o));
            const MuEstimate& mu = map->mu_estimate();
            std::ostringstream os;
            os << "mu = " << mu.mu << ", residual " << mu.residual << ", " << map->size() << " vertices";
            log(LogLevel::Info, os.str());
            if (!(mu.residual <= config_.chart.mu_tolerance)) {
                std::ostringstream err;
                err << "scaling multiplier residual " << mu.residual << " exceeds chart.mu_tolerance "
                    << config_.chart.mu_tolerance;
                throw Error(ErrorKind::ChartRejected, err.str());
            }
            return map;
        };
        if (config_.chart.one_sided) {
            m.upper = fit(TractMapOptions::Focus::Upper);
            m.lower = fit(TractMapOptions::Focus::Lower);
        } else {
            m.upper = fit(TractMapOptions::Focus::Both);
        }
        return m;
    });
    return *maps_;
}

TractModel Run::model() {
    const Maps& m = maps();
    return TractModel(m.upper, m.lower);
}

const SpectrumGrid& Run::spectrum() {
    if (!spectrum_) {
        const Maps& m = maps();
        spectrum_ = stage("spectrum", kSpectrum, [&] {
            SpectrumOptions o;
            o.kappa = config_.chart.kappa;
            o.rel_tol = config_.spectrum.rel_tol;
            o.max_depth = config_.spectrum.max_depth;
            return compute_tract_spectrum(m.upper, config_.spectrum.t_grid, config_.spectrum.R_grid, o, m.lower);
        });
    }
    return *spectrum_;
}

const BetaInfinity& Run::beta() {
    if (!beta_) {
        const SpectrumGrid& g = spectrum();
        beta_ = stage("beta", kSolver, [&] { return beta_infinity(g, config_.spectrum.method); });
    }
    return *beta_;
}

const ThetaResult& Run::theta() {
    if (!theta_) {
        const BetaInfinity& b = beta();
        theta_ = stage("theta", kSolver, [&] { return solve_theta(b); });
    }
    return *theta_;
}

double Run::theta_uncertainty() {
    const ThetaResult& th = theta();
    const BetaInfinity& b = beta();
    const auto& t = b.t_values;
    std::size_t i = 0;
    while (i + 2 < t.size() && t[i + 1] < th.theta) ++i;
    const double w = (th.theta - t[i]) / (t[i + 1] - t[i]);
    const double spread = (1.0 - w) * b.spread[i] + w * b.spread[i + 1];
    const double slope = (b.beta_inf[i + 1] - b.beta_inf[i]) / (t[i + 1] - t[i]) - 1.0;
    return spread / std::max(std::abs(slope), 1e-3) + 0.5 * (th.t_hi - th.t_lo);
}

const PressureOutcome& Run::pressure() {
    if (pressure_) return *pressure_;
    double theta = NAN;
    const fs::path stored = fs::path(config_.output.dir) / "theta.json";
    if (fs::exists(stored)) {
        try {
            std::ifstream in(stored);
            const nlohmann::json j = nlohmann::json::parse(in);
            if (j.value("key", "") == config_.theta_key()) theta = j.at("theta").get<double>();
        } catch (const std::exception&) {
        }
    }
    if (std::isnan(theta)) theta = this->theta().theta;
    TractModel m = model();
    pressure_ = stage("pressure", kPressure, [&] {
        PressureOutcome out;
        out.theta = theta;
        std::vector<double> t = config_.pressure.t_grid;
        if (t.empty()) {
            for (double d : config_.pressure.t_offsets) t.push_back(std::round((theta + d) * 1e9) / 1e9);
            std::sort(t.begin(), t.end());
        }
        BkzOptions bo;
        bo.kappa = std::min(config_.chart.kappa, 0.49);
        out.bkz = pressure_scan(m, t, config_.pressure.R_grid, config_.pressure.threshold_A,
                                beta_ ? &*beta_ : nullptr, bo);
        bool any = false;
        for (const auto& s : out.bkz.diagnostics["systems"]) any = any || !s.contains("error");
        if (!any) throw Error(ErrorKind::RTooSmall, "no R in pressure.R_grid admits a branch system");
        StrictOptions so;
        so.s0 = config_.pressure.s0;
        out.strict = strict_scan(m, theta, config_.pressure.N_grid, so);
        if (std::none_of(out.strict.sums[0].begin(), out.strict.sums[0].end(),
                         [](double v) { return std::isfinite(v); })) {
            throw Error(ErrorKind::NTooSmall, "no N in pressure.N_grid admits the strict construction");
        }
        return out;
    });
    return *pressure_;
}

bool Run::write(const std::string& name, const std::string& content) {
    const std::string ext = fs::path(name).extension().string();
    const std::string fmt = ext.empty() ? "" : ext.substr(1);
    if ((fmt == "csv" || fmt == "json" || fmt == "svg") && !config_.output.formats.count(fmt)) return false;
    const fs::path p = fs::path(config_.output.dir) / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    if (!out) throw StageError(kConfig, "output", "cannot write " + p.string());
    if (std::find(files_.begin(), files_.end(), p.string()) == files_.end()) files_.push_back(p.string());
    log(LogLevel::Debug, "wrote " + p.string());
    return true;
}

void Run::write_json(const std::string& name, const nlohmann::json& j) { write(name, j.dump(2) + "\n"); }

void Run::finish(const std::string& command) {
    nlohmann::json m;
    m["command"] = command;
    m["config_hash"] = config_.hash();
    m["config"] = config_.to_json();
    m["versions"] = {{"tractdim", version()},
                     {"compiler", __VERSION__},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                     {"cli11", CLI11_VERSION}};
    nlohmann::json t = nlohmann::json::array();
    for (const auto& [name, sec] : timings_) t.push_back({{"stage", name}, {"seconds", sec}});
    m["timings"] = t;
    m["files"] = files_;
    m["verdicts"] = verdicts_;
    const fs::path p = fs::path(config_.output.dir) / "manifest.json";
    std::ofstream out(p, std::ios::binary);
    out << m.dump(2) << '\n';
    if (!out) throw StageError(kConfig, "output", "cannot write " + p.string());
}

// Stage outputs -------------------------------------------------------------

namespace {

std::string polyline_text(const Polyline& p) {
    std::ostringstream os;
    write_polyline(os, p);
    return os.str();
}

nlohmann::json num_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

void Run::emit_generator() {
    const GeneratorCurve& g = generator();
    write("sigma.txt", polyline_text(g.vertices));
    write("gamma1.txt", polyline_text(exp_lift(g)));
    write("sigma.svg", svg::curves({g.vertices}, {true}, "generator (" + g.meta.family + ")"));
    note("family", g.meta.family);
    note("vertices", g.vertices.size());
    if (g.meta.similarity_dimension) note("similarity_dimension", *g.meta.similarity_dimension);
}

void Run::emit_tract() {
    const TractBoundary& t = tract();
    const MdimEstimate& d = mdim();
    write("tract.txt", polyline_text(t.full_curve));
    // Levels near the fundamental period only; the full ladder spans decades.
    Polyline near;
    for (cplx z : t.full_curve)
        if (std::abs(z) < 16.0 * kPi) near.push_back(z);
    write("tract.svg", svg::curves({near}, {false}, "tract boundary near the origin"));
    std::ostringstream csv;
    csv << std::setprecision(12) << "scale,count\n";
    for (std::size_t i = 0; i < d.scales.size(); ++i) csv << d.scales[i] << ',' << d.counts[i] << '\n';
    write("mdim.csv", csv.str());
    write_json("mdim.json", {{"dimension", d.dimension}, {"fit_residual", d.fit_residual}});
    note("mdim", d.dimension);
    if (generator().meta.similarity_dimension) note("similarity_dimension", *generator().meta.similarity_dimension);
}

void Run::emit_chart() {
    const Maps& m = maps();
    nlohmann::json j;
    j["key"] = config_.chart_key();
    j["upper"] = m.upper->to_json();
    j["lower"] = m.lower ? m.lower->to_json() : nlohmann::json(nullptr);
    write_json("chart.json", j);
    // Images of a polar grid of the half-plane around the fundamental period.
    std::vector<Polyline> lines;
    std::vector<bool> closed;
    const double mu = m.upper->mu();
    for (int k = 0; k <= 4; ++k) {
        const double r = std::pow(mu, k / 2.0);
        Polyline arc;
        for (int s = 0; s <= 96; ++s) arc.push_back(TractModel(m.upper, m.lower).eval(std::polar(r, -0.5 * kPi + kPi * s / 96.0) * kTwoPi).value);
        lines.push_back(arc);
        closed.push_back(false);
    }
    write("chart.svg", svg::curves(lines, closed, "images of half circles |z| = mu^(k/2)"));
    note("mu", mu);
    note("chart_vertices", m.upper->size());
}

void Run::emit_spectrum() {
    const SpectrumGrid& g = spectrum();
    write("spectrum.csv", g.to_csv());
    std::vector<svg::Series> s;
    for (std::size_t i = 0; i < g.R_values.size(); ++i) {
        std::ostringstream label;
        label << "log R = " << std::setprecision(3) << std::log(g.R_values[i]);
        s.push_back({label.str(), g.t_values, g.beta[i]});
    }
    try {
        const BetaInfinity& b = beta();
        write_json("beta_inf.json", b.to_json());
        s.push_back({"beta_inf", b.t_values, b.beta_inf});
    } catch (const StageError&) {
        write("spectrum.svg", svg::plot(s, "beta_R(t)", "t", "beta"));
        throw;
    }
    write("spectrum.svg", svg::plot(s, "beta_R(t)", "t", "beta"));
}

void Run::emit_theta() {
    emit_spectrum();
    const ThetaResult& th = theta();
    nlohmann::json j = th.to_json();
    j["uncertainty"] = theta_uncertainty();
    j["key"] = config_.theta_key();
    j["method"] = to_string(config_.spectrum.method);
    write_json("theta.json", j);
    note("theta", th.theta);
    note("theta_uncertainty", theta_uncertainty());
}

void Run::emit_pressure(bool dump_terms) {
    const PressureOutcome& p = pressure();
    nlohmann::json j{{"theta", p.theta}, {"bkz", p.bkz.to_json()}, {"strict", p.strict.to_json()}};
    write_json("pressure.json", j);
    std::ostringstream csv;
    csv << std::setprecision(12) << "t,R,sigma_l,sigma,attained\n";
    for (std::size_t k = 0; k < p.bkz.t_values.size(); ++k)
        for (std::size_t i = 0; i < p.bkz.scan.size(); ++i)
            csv << p.bkz.t_values[k] << ',' << p.bkz.scan[i] << ',' << p.bkz.sums[k][i] << ','
                << p.bkz.full_sums[k][i] << ',' << (p.bkz.attained[k][i] ? 1 : 0) << '\n';
    write("pressure.csv", csv.str());
    std::ostringstream st;
    st << std::setprecision(12) << "N,S\n";
    for (std::size_t i = 0; i < p.strict.scan.size(); ++i) st << p.strict.scan[i] << ',' << p.strict.sums[0][i] << '\n';
    write("strict.csv", st.str());
    std::vector<svg::Series> s;
    std::vector<double> logR;
    for (double R : p.bkz.scan) logR.push_back(std::log(R));
    for (std::size_t k = 0; k < p.bkz.t_values.size(); ++k) {
        std::ostringstream label;
        label << "t = " << std::setprecision(4) << p.bkz.t_values[k];
        s.push_back({label.str(), logR, p.bkz.sums[k]});
    }
    s.push_back({"A", {logR.front(), logR.back()}, {p.bkz.threshold_A, p.bkz.threshold_A}});
    write("pressure.svg", svg::plot(s, "pressure sums over R", "log R", "Sigma_{t,l}", true));
    if (dump_terms) {
        BkzOptions bo;
        bo.kappa = std::min(config_.chart.kappa, 0.49);
        std::vector<double> R;
        for (std::size_t i = 0; i < p.bkz.scan.size(); ++i)
            if (!p.bkz.diagnostics["systems"][i].contains("error")) R.push_back(p.bkz.scan[i]);
        write("terms.csv", bkz_terms_csv(model(), p.bkz.t_values, R, bo));
    }
    note("best_lower_bound", num_or_null(p.bkz.best_lower_bound));
    note("pressure_verdict", p.bkz.verdict);
    note("strict_verdict", p.strict.verdict);
    note("strict_exponent", num_or_null(p.strict.growth_exponent[0]));
}

// Verification suite --------------------------------------------------------

namespace {

VerifyItem bound_item(const std::string& name, const BoundCheck& b, nlohmann::json extra = {}) {
    VerifyItem it{name, b.pass(), b.checked > 0 ? b.worst_margin : NAN, b.to_json()};
    if (!extra.is_null()) it.detail.update(extra);
    return it;
}

}  // namespace

std::vector<VerifyItem> Run::verify() {
    std::vector<VerifyItem> items;
    auto guarded = [&](const std::string& name, auto&& body) {
        try {
            body();
        } catch (const std::exception& e) {
            items.push_back({name, false, NAN, {{"error", e.what()}}});
        }
    };
    DistortionOptions dopt;
    dopt.samples = config_.verify.samples;
    dopt.slack = config_.verify.slack;
    dopt.seed = config_.seed;

    double alpha = NAN;
    guarded("generator", [&] {
        const GeneratorCheck c = check_generator(generator());
        items.push_back({"generator", c.simple && c.ray_hits == 1 && c.winding == 1, NAN,
                         {{"simple", c.simple}, {"ray_hits", c.ray_hits}, {"winding", c.winding}}});
    });
    guarded("disk_chart", [&] {
        const int n = config_.chart.resolution > 0 ? config_.chart.resolution : config_.chart.disk_points;
        const DiskChart chart = stage("disk chart", kChart, [&] { return generator_chart(generator(), n, false); });
        items.push_back({"disk_chart_accepted", chart.accepted(), NAN,
                         {{"relative_accuracy", chart.relative_accuracy()}, {"resolution", chart.resolution()}}});
        const DistortionReport r = stage("disk distortion", kChart, [&] { return verify_distortion(chart, dopt); });
        items.push_back(bound_item("disk_koebe", r.koebe, {{"accepted", r.accepted}}));
        items.push_back(bound_item("disk_half_plane", r.half_plane));
        items.push_back(bound_item("disk_ratio", r.line_shift));
        items.push_back(bound_item("disk_quarter", r.quarter));
        items.push_back({"disk_derivative", r.derivative_violations == 0, NAN,
                         {{"max_relative_error", r.derivative_error}, {"violations", r.derivative_violations}}});
        const HolderFit h = fit_holder(chart);
        alpha = h.alpha;
        items.push_back({"holder_constants", h.consistent(), NAN, h.to_json()});
        const double d0 = std::abs(chart.derivative(0.0));
        const double lhs = chart.diameter() / d0, rhs = h.H_const * std::pow(2.0, h.alpha);
        items.push_back({"holder_diameter", lhs <= rhs * (1.0 + config_.verify.slack), std::log(rhs / lhs),
                         {{"diam_over_derivative", lhs}, {"bound", rhs}}});
    });
    guarded("tract_charts", [&] {
        const Maps& m = maps();
        const auto& R = config_.spectrum.R_grid;
        for (double r : {R.front(), R.back()}) {
            const TractChart chart = stage("tract chart", kChart, [&] {
                return fit_tract_chart(m.upper, r, config_.chart.kappa, 96, m.lower);
            });
            std::ostringstream tag;
            tag << "tract[R=" << std::setprecision(4) << r << "]";
            items.push_back({tag.str() + "_accepted", chart.accepted(), NAN, chart.to_json()});
            const DistortionReport d = stage("tract distortion", kChart, [&] { return verify_distortion(chart, dopt); });
            items.push_back(bound_item(tag.str() + "_half_plane", d.half_plane));
            items.push_back(bound_item(tag.str() + "_ratio", d.line_shift));
            items.push_back({tag.str() + "_derivative", d.derivative_violations == 0, NAN,
                             {{"max_relative_error", d.derivative_error}, {"violations", d.derivative_violations}}});
            // |g| >= m and diam g(Q_1) = 1 give |g(z1)| / |g(z2)| <= 1 + 1/m.
            const double bound = 1.0 + 1.0 / chart.m;
            items.push_back({tag.str() + "_modulus_ratio", chart.M <= bound, std::log(bound / chart.M),
                             {{"M", chart.M}, {"m", chart.m}, {"bound", bound}}});
        }
    });
    guarded("spectrum", [&] {
        const SpectrumGrid& g = spectrum();
        double worst = INFINITY;
        for (std::size_t i = 0; i < g.R_values.size(); ++i)
            for (std::size_t k = 1; k + 1 < g.t_values.size(); ++k) {
                auto side = [&](const std::vector<std::vector<double>>& I, std::size_t q) { return std::log(I[i][q]); };
                const double h0 = g.t_values[k] - g.t_values[k - 1], h1 = g.t_values[k + 1] - g.t_values[k];
                for (const auto* I : {&g.I_plus, &g.I_minus}) {
                    const double c = (side(*I, k + 1) - side(*I, k)) / h1 - (side(*I, k) - side(*I, k - 1)) / h0;
                    worst = std::min(worst, c);
                }
            }
        items.push_back({"convexity", !(worst < -config_.verify.convexity_tolerance), worst,
                         {{"min_second_difference", worst}}});
        const BetaInfinity& b = beta();
        const double b1 = b.at(1.0);
        items.push_back({"beta_at_one", b1 >= config_.verify.beta_one_floor, b1 - config_.verify.beta_one_floor,
                         {{"beta_inf_1", b1}}});
        if (std::isfinite(alpha)) {
            double worst_slope = -INFINITY;
            for (std::size_t k = 0; k + 1 < b.t_values.size(); ++k) {
                const double dh = (b.beta_inf[k + 1] - b.beta_inf[k]) / (b.t_values[k + 1] - b.t_values[k]) - 1.0;
                worst_slope = std::max(worst_slope, dh);
            }
            const double limit = -alpha + config_.verify.slope_slack;
            items.push_back({"h_slope", worst_slope <= limit, limit - worst_slope,
                             {{"max_slope", worst_slope}, {"limit", limit}, {"alpha", alpha}}});
        }
        const double theta = this->theta().theta;
        SpectrumOptions o;
        o.kappa = config_.verify.kappa_alt;
        o.rel_tol = config_.spectrum.rel_tol;
        o.max_depth = config_.spectrum.max_depth;
        const Maps& m = maps();
        const double theta_alt = stage("kappa spectrum", kSpectrum, [&] {
            const SpectrumGrid alt = compute_tract_spectrum(m.upper, config_.spectrum.t_grid, config_.spectrum.R_grid, o, m.lower);
            return solve_theta(beta_infinity(alt, config_.spectrum.method)).theta;
        });
        const double diff = std::abs(theta - theta_alt);
        items.push_back({"kappa_independence", diff <= config_.verify.kappa_tolerance,
                         config_.verify.kappa_tolerance - diff,
                         {{"theta", theta}, {"theta_alt", theta_alt}, {"kappa_alt", config_.verify.kappa_alt}}});
    });
    nlohmann::json out = nlohmann::json::array();
    bool all = true;
    for (const auto& it : items) {
        all = all && it.pass;
        out.push_back({{"name", it.name}, {"pass", it.pass}, {"margin", num_or_null(it.margin)}, {"detail", it.detail}});
    }
    write_json("verify.json", {{"pass", all}, {"items", out}});
    note("verify", all);
    return items;
}

}  // namespace tractdim::pipeline
