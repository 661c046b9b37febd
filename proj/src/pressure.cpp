#include "tractdim/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tractdim/parallel.hpp"
#include "tractdim/polyline.hpp"

namespace tractdim {

TractModel::TractModel(std::shared_ptr<const TractMap> upper, std::shared_ptr<const TractMap> lower)
    : upper_(std::move(upper)), lower_(std::move(lower)) {
    if (!upper_) throw Error(ErrorKind::InvalidParameter, "tract model needs a map");
}

Zipper::Eval TractModel::eval(cplx xi) const {
    if (!upper_) return {xi, 1.0};
    const TractMap& m = lower_ && xi.imag() < 0.0 ? *lower_ : *upper_;
    const Zipper::Eval e = m.phi(xi / kTwoPi);
    return {e.value, e.derivative / kTwoPi};
}

void TractModel::eval(std::span<const cplx> xi, std::span<Zipper::Eval> out) const {
    if (!upper_) {
        for (std::size_t i = 0; i < xi.size(); ++i) out[i] = {xi[i], 1.0};
        return;
    }
    // Chunks keep the batched layer loop busy and the work spread over threads.
    constexpr std::size_t kChunk = 256;
    const std::size_t chunks = (xi.size() + kChunk - 1) / kChunk;
    parallel_for(chunks, [&](std::size_t c) {
        const std::size_t lo = c * kChunk;
        const std::size_t n = std::min(kChunk, xi.size() - lo);
        std::vector<cplx> up, down;
        std::vector<std::size_t> iu, id;
        for (std::size_t i = lo; i < lo + n; ++i) {
            const bool low = lower_ && xi[i].imag() < 0.0;
            (low ? down : up).push_back(xi[i] / kTwoPi);
            (low ? id : iu).push_back(i);
        }
        std::vector<Zipper::Eval> e(std::max(up.size(), down.size()));
        if (!up.empty()) {
            upper_->phi(up, std::span<Zipper::Eval>(e.data(), up.size()));
            for (std::size_t j = 0; j < up.size(); ++j) out[iu[j]] = {e[j].value, e[j].derivative / kTwoPi};
        }
        if (!down.empty()) {
            lower_->phi(down, std::span<Zipper::Eval>(e.data(), down.size()));
            for (std::size_t j = 0; j < down.size(); ++j) out[id[j]] = {e[j].value, e[j].derivative / kTwoPi};
        }
    });
}

Zipper::Eval TractModel::eval_direct(cplx xi) const {
    if (!upper_) return {xi, 1.0};
    const TractMap& m = lower_ && xi.imag() < 0.0 ? *lower_ : *upper_;
    const Zipper::Eval e = m.phi_direct(xi / kTwoPi);
    return {e.value, e.derivative / kTwoPi};
}

double TractModel::mu() const { return upper_ ? upper_->mu() : 2.0; }

double TractModel::ratio_bound(double T, double kappa, int n) const {
    std::vector<cplx> pts;
    auto edge = [&](cplx a, cplx b) {
        for (int i = 0; i <= n; ++i) pts.push_back(a + (b - a) * (double(i) / n));
    };
    const double k = kappa * T;
    edge(cplx(0, -T), cplx(2 * T, -T));
    edge(cplx(2 * T, -T), cplx(2 * T, T));
    edge(cplx(2 * T, T), cplx(0, T));
    edge(cplx(0, k), cplx(0, T));
    edge(cplx(0, -k), cplx(0, -T));
    edge(cplx(0, -k), cplx(2 * k, -k));
    edge(cplx(2 * k, -k), cplx(2 * k, k));
    edge(cplx(2 * k, k), cplx(0, k));
    std::vector<Zipper::Eval> e(pts.size());
    eval(pts, e);
    double lo = INFINITY, hi = 0.0;
    for (const auto& v : e) {
        lo = std::min(lo, std::abs(v.value));
        hi = std::max(hi, std::abs(v.value));
    }
    return lo > 0.0 ? hi / lo : INFINITY;
}

double cylindrical_derivative(const TractModel& model, cplx w) {
    const Zipper::Eval e = model.eval(w);
    const double d = std::abs(e.derivative);
    if (!(d >= 1e-14)) throw Error(ErrorKind::Singularity, "derivative vanishes at the requested point");
    return std::abs(e.value) / d;
}

namespace {

nlohmann::json pt(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

// Sector of arg z in [0, 2 pi), eighths.
int sector_of(cplx z) {
    double a = std::arg(z);
    if (a < 0.0) a += kTwoPi;
    return std::min(7, static_cast<int>(std::floor(a / (kPi / 4.0))));
}

void choose_sector(BkzBranchSystem& s) {
    double mass[8] = {};
    for (std::size_t k = 0; k < s.b.size(); ++k) mass[sector_of(s.b[k])] += s.terms[k];
    s.l = static_cast<int>(std::min_element(mass, mass + 8) - mass);
    s.ray_angle = (2 * s.l + 1) * kPi / 8.0;
    s.E.clear();
    for (std::size_t k = 0; k < s.b.size(); ++k)
        if (sector_of(s.b[k]) != s.l) s.E.push_back(static_cast<long>(k));
}

// Closed curve of images crossing the segment [p, q]?
bool curve_meets(const std::vector<cplx>& curve, cplx p, cplx q) {
    for (std::size_t i = 0; i < curve.size(); ++i)
        if (segments_intersect(curve[i], curve[(i + 1) % curve.size()], p, q)) return true;
    return false;
}

std::vector<cplx> rectangle(double x0, double x1, double y0, double y1, int n) {
    std::vector<cplx> r;
    const cplx c[4] = {cplx(x0, y0), cplx(x1, y0), cplx(x1, y1), cplx(x0, y1)};
    for (int e = 0; e < 4; ++e)
        for (int i = 0; i < n; ++i) r.push_back(c[e] + (c[(e + 1) % 4] - c[e]) * (double(i) / n));
    return r;
}

std::vector<long> spread_indices(std::size_t size, int count) {
    std::vector<long> out;
    if (size == 0 || count <= 0) return out;
    const std::size_t m = std::min<std::size_t>(size, count);
    for (std::size_t j = 0; j < m; ++j) out.push_back(static_cast<long>(m == 1 ? 0 : j * (size - 1) / (m - 1)));
    return out;
}

}  // namespace

nlohmann::json BkzBranchSystem::to_json() const {
    return {{"R", R},
            {"t", t},
            {"a0", pt(a0)},
            {"T", T},
            {"N", N},
            {"M_const", M_const},
            {"M_chart", M_chart},
            {"C_const", C_const},
            {"l", l},
            {"E_size", E.size()},
            {"annulus", {annulus_inner, annulus_outer}},
            {"ray_angle", ray_angle},
            {"containment_checked", containment_checked}};
}

BkzBranchSystem build_bkz(const TractModel& model, double R, double t, const BkzOptions& opt) {
    if (!(R > std::exp(1.0))) throw Error(ErrorKind::InvalidParameter, "R must exceed e");
    if (!(opt.kappa > 0.0 && opt.kappa < 0.5)) throw Error(ErrorKind::InvalidParameter, "kappa must lie in (0, 1/2)");
    const double x = std::log(R);
    auto excess = [&](double y) { return std::abs(model.eval(cplx(x, y)).value) - R; };
    if (!(excess(0.0) < 0.0)) {
        throw Error(ErrorKind::RTooSmall, "|psi(log R)| >= R; the line Re = log R does not cross |z| = R");
    }
    // Bracket the first crossing on a doubling grid, then bisect.
    double lo = 0.0, hi = std::max(1.0, x);
    while (excess(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) throw Error(ErrorKind::RTooSmall, "no crossing of |z| = R on the line Re = log R");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) < 0.0 ? lo : hi) = mid;
    }
    BkzBranchSystem s;
    s.R = R;
    s.t = t;
    s.a0 = cplx(x, hi);
    s.T = hi / opt.kappa;
    s.N = static_cast<long>(std::floor((s.T - hi) / kTwoPi)) - 1;
    if (s.N < 0) throw Error(ErrorKind::RTooSmall, "no room for branches below T");
    s.C_const = R / (hi * hi);
    s.a.resize(s.N + 1);
    for (long k = 0; k <= s.N; ++k) s.a[k] = s.a0 + cplx(0.0, kTwoPi * k);
    std::vector<Zipper::Eval> e(s.a.size());
    model.eval(s.a, e);
    s.b.resize(s.a.size());
    s.ratio.resize(s.a.size());
    s.terms.resize(s.a.size());
    for (std::size_t k = 0; k < s.a.size(); ++k) {
        s.b[k] = e[k].value;
        s.ratio[k] = std::abs(e[k].derivative) / std::abs(e[k].value);
        if (!(s.ratio[k] > 0.0) || !std::isfinite(s.ratio[k])) {
            throw Error(ErrorKind::Singularity, "degenerate branch derivative at k = " + std::to_string(k));
        }
        s.terms[k] = std::pow(s.ratio[k], t);
        s.M_const = std::max({s.M_const, std::abs(s.b[k]) / R, R / std::abs(s.b[k])});
    }
    s.M_chart = model.ratio_bound(s.T, opt.kappa);
    choose_sector(s);
    s.annulus_inner = R / (2.0 * s.M_const);
    s.annulus_outer = 2.0 * s.M_const * R;

    // Spot check that psi(closure U_k) stays inside A minus the ray.
    const double x0 = std::log(s.annulus_inner);
    const double x1 = std::log(s.annulus_outer);
    if (!(x0 > 0.0)) throw Error(ErrorKind::RTooSmall, "annulus reaches the boundary of the half-plane");
    const cplx ray_in = std::polar(s.annulus_inner, s.ray_angle);
    const cplx ray_out = std::polar(s.annulus_outer, s.ray_angle);
    for (long idx : spread_indices(s.E.size(), opt.containment_checks)) {
        const long k = s.E[idx];
        const double j = std::floor((s.a[k].imag() - s.ray_angle) / kTwoPi);
        const double y0 = s.ray_angle + kTwoPi * j;
        const auto rect = rectangle(x0, x1, y0, y0 + kTwoPi, opt.containment_samples);
        std::vector<Zipper::Eval> img(rect.size());
        model.eval(rect, img);
        std::vector<cplx> curve(rect.size());
        for (std::size_t i = 0; i < rect.size(); ++i) {
            curve[i] = img[i].value;
            const double r = std::abs(curve[i]);
            if (!(r > s.annulus_inner && r < s.annulus_outer)) {
                throw Error(ErrorKind::RTooSmall, "branch domain V_" + std::to_string(k) + " leaves the annulus");
            }
        }
        if (curve_meets(curve, ray_in, ray_out)) {
            throw Error(ErrorKind::RTooSmall, "branch domain V_" + std::to_string(k) + " meets the excluded ray");
        }
        ++s.containment_checked;
    }
    return s;
}

SigmaSums sigma_sum(const BkzBranchSystem& s) {
    SigmaSums r;
    for (double v : s.terms) r.sigma += v;
    for (long k : s.E) r.sigma_l += s.terms[k];
    return r;
}

BkzBranchSystem reweight(const BkzBranchSystem& system, double t) {
    BkzBranchSystem s = system;
    s.t = t;
    for (std::size_t k = 0; k < s.ratio.size(); ++k) s.terms[k] = std::pow(s.ratio[k], t);
    const double x0 = s.annulus_inner, x1 = s.annulus_outer;
    choose_sector(s);
    s.annulus_inner = x0;
    s.annulus_outer = x1;
    return s;
}

nlohmann::json PressureReport::to_json() const {
    nlohmann::json j;
    j["kind"] = kind;
    j["t"] = t_values;
    j[kind == "strict" ? "N" : "R"] = scan;
    auto clean = [](const std::vector<std::vector<double>>& m) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& row : m) {
            nlohmann::json r = nlohmann::json::array();
            for (double v : row) r.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr));
            a.push_back(r);
        }
        return a;
    };
    j["sums"] = clean(sums);
    if (!full_sums.empty()) j["full_sums"] = clean(full_sums);
    nlohmann::json att = nlohmann::json::array();
    for (const auto& row : attained) att.push_back(std::vector<bool>(row.begin(), row.end()));
    j["attained"] = att;
    j["threshold_A"] = threshold_A;
    j["best_lower_bound"] = std::isfinite(best_lower_bound) ? nlohmann::json(best_lower_bound) : nlohmann::json(nullptr);
    j["growth_exponent"] = clean({growth_exponent})[0];
    if (!predicted_exponent.empty()) j["predicted_exponent"] = clean({predicted_exponent})[0];
    if (!shape_constant.empty()) j["shape_constant"] = clean({shape_constant})[0];
    j["monotone"] = monotone;
    j["verdict"] = verdict;
    j["diagnostics"] = diagnostics;
    return j;
}

namespace {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (std::isfinite(x[i]) && std::isfinite(y[i])) {
            xs.push_back(x[i]);
            ys.push_back(y[i]);
        }
    if (xs.size() < 2) return NAN;
    return linear_fit(xs, ys)[1];
}

}  // namespace

PressureReport pressure_scan(const TractModel& model, const std::vector<double>& t_grid,
                             const std::vector<double>& R_grid, double threshold_A, const BetaInfinity* beta,
                             const BkzOptions& options) {
    PressureReport rep;
    rep.kind = "bkz";
    rep.t_values = t_grid;
    rep.scan = R_grid;
    rep.threshold_A = threshold_A;
    const std::size_t nt = t_grid.size(), nr = R_grid.size();
    rep.sums.assign(nt, std::vector<double>(nr, NAN));
    rep.full_sums.assign(nt, std::vector<double>(nr, NAN));
    rep.attained.assign(nt, std::vector<bool>(nr, false));
    std::vector<double> logT(nr, NAN), loglogR(nr, NAN);
    auto& systems = rep.diagnostics["systems"] = nlohmann::json::array();
    for (std::size_t i = 0; i < nr; ++i) {
        try {
            const BkzBranchSystem base = build_bkz(model, R_grid[i], t_grid.empty() ? 1.0 : t_grid[0], options);
            logT[i] = std::log(base.T);
            loglogR[i] = std::log(std::log(R_grid[i]));
            nlohmann::json sj = base.to_json();
            nlohmann::json ls = nlohmann::json::array();
            for (std::size_t k = 0; k < nt; ++k) {
                const BkzBranchSystem s = reweight(base, t_grid[k]);
                const SigmaSums sum = sigma_sum(s);
                rep.sums[k][i] = sum.sigma_l;
                rep.full_sums[k][i] = sum.sigma;
                rep.attained[k][i] = sum.sigma_l >= threshold_A;
                ls.push_back(s.l);
            }
            sj["l_per_t"] = ls;
            systems.push_back(sj);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::RTooSmall) throw;
            systems.push_back({{"R", R_grid[i]}, {"error", e.what()}});
        }
    }
    for (std::size_t k = 0; k < nt; ++k) {
        const bool any = std::any_of(rep.attained[k].begin(), rep.attained[k].end(), [](bool b) { return b; });
        if (any && !(rep.best_lower_bound >= t_grid[k])) rep.best_lower_bound = t_grid[k];
        std::vector<double> ls(nr);
        for (std::size_t i = 0; i < nr; ++i) ls[i] = std::log(rep.full_sums[k][i]);
        rep.growth_exponent.push_back(fit_slope(logT, ls));
        if (beta) {
            const double pred = 1.0 - t_grid[k] + beta->at(t_grid[k]);
            rep.predicted_exponent.push_back(pred);
            double c = INFINITY;
            for (std::size_t i = 0; i < nr; ++i)
                if (std::isfinite(ls[i])) c = std::min(c, ls[i] - (pred * logT[i] - 3.0 * t_grid[k] * loglogR[i]));
            rep.shape_constant.push_back(std::isfinite(c) ? c : NAN);
        }
    }
    // A larger t attaining the threshold forces every smaller t to attain it.
    std::vector<std::size_t> order(nt);
    for (std::size_t k = 0; k < nt; ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return t_grid[a] < t_grid[b]; });
    for (std::size_t a = 0; a < nt; ++a)
        for (std::size_t b = a + 1; b < nt; ++b) {
            const auto& hi = rep.attained[order[b]];
            const auto& lo = rep.attained[order[a]];
            const bool hi_any = std::any_of(hi.begin(), hi.end(), [](bool v) { return v; });
            const bool lo_any = std::any_of(lo.begin(), lo.end(), [](bool v) { return v; });
            if (hi_any && !lo_any) rep.monotone = false;
        }
    rep.verdict = std::isfinite(rep.best_lower_bound) ? "bound-attained" : "inconclusive";
    return rep;
}

std::string bkz_terms_csv(const TractModel& model, const std::vector<double>& t_grid,
                          const std::vector<double>& R_grid, const BkzOptions& options) {
    std::ostringstream os;
    os.precision(17);
    os << "R,t,k,a_re,a_im,b_re,b_im,term,in_E\n";
    for (double R : R_grid) {
        const BkzBranchSystem base = build_bkz(model, R, t_grid.empty() ? 1.0 : t_grid[0], options);
        for (double t : t_grid) {
            const BkzBranchSystem s = reweight(base, t);
            std::vector<bool> inE(s.a.size(), false);
            for (long k : s.E) inE[k] = true;
            for (std::size_t k = 0; k < s.a.size(); ++k) {
                os << R << ',' << t << ',' << k << ',' << s.a[k].real() << ',' << s.a[k].imag() << ','
                   << s.b[k].real() << ',' << s.b[k].imag() << ',' << s.terms[k] << ',' << (inE[k] ? 1 : 0)
                   << '\n';
            }
        }
    }
    return os.str();
}

long StrictBranchSystem::size() const {
    long n = 0;
    for (const auto& [lo, hi] : index_sets) n += hi - lo;
    return n;
}

nlohmann::json StrictBranchSystem::to_json() const {
    nlohmann::json sets = nlohmann::json::array();
    for (const auto& [lo, hi] : index_sets) sets.push_back({lo, hi});
    return {{"N", N},
            {"mu", mu},
            {"S_lower0", S_lower0},
            {"S_upper0", S_upper0},
            {"S_lower", S_lower},
            {"S_upper", S_upper},
            {"s0", s0},
            {"index_sets", sets},
            {"branches", size()},
            {"propagation_residual", propagation_residual},
            {"containment_checked", containment_checked}};
}

StrictBranchSystem build_strict(const TractModel& model, long N, const StrictOptions& opt) {
    if (N < 1) throw Error(ErrorKind::InvalidParameter, "N must be at least 1");
    if (model.side() != Side::Right) {
        throw Error(ErrorKind::InvalidParameter, "the slit construction needs the tract side off the negative axis");
    }
    StrictBranchSystem s;
    s.N = N;
    s.mu = model.mu();
    s.s0 = opt.s0;
    if (!(s.mu > 1.0)) throw Error(ErrorKind::NoConvergence, "scaling multiplier not available");

    // Extremes of |psi| over the closure of Q_{2 mu} \ Q_{1/mu} sit on its boundary.
    const double big = 2.0 * s.mu, small = 1.0 / s.mu;
    const int n = std::max(16, opt.boundary_samples);
    std::vector<cplx> pts;
    auto edge = [&](cplx a, cplx b) {
        for (int i = 0; i <= n; ++i) pts.push_back(a + (b - a) * (double(i) / n));
    };
    edge(cplx(0, -big), cplx(2 * big, -big));
    edge(cplx(2 * big, -big), cplx(2 * big, big));
    edge(cplx(2 * big, big), cplx(0, big));
    edge(cplx(0, small), cplx(0, big));
    edge(cplx(0, -small), cplx(0, -big));
    edge(cplx(0, -small), cplx(2 * small, -small));
    edge(cplx(2 * small, -small), cplx(2 * small, small));
    edge(cplx(2 * small, small), cplx(0, small));
    std::vector<Zipper::Eval> e(pts.size());
    model.eval(pts, e);
    double lo = INFINITY, hi = 0.0;
    for (const auto& v : e) {
        lo = std::min(lo, std::abs(v.value));
        hi = std::max(hi, std::abs(v.value));
    }
    s.S_lower0 = 0.99 * lo;
    s.S_upper0 = 1.01 * hi + 1.0;
    s.S_lower = std::ldexp(s.S_lower0, static_cast<int>(N));
    s.S_upper = std::ldexp(s.S_upper0, static_cast<int>(2 * N));
    if (!(std::pow(s.mu, -double(N)) * std::log(s.S_upper) < s.s0)) {
        std::ostringstream os;
        os << "mu^-N log S_upper = " << std::pow(s.mu, -double(N)) * std::log(s.S_upper) << " is not below s0 = "
           << s.s0;
        throw Error(ErrorKind::NTooSmall, os.str());
    }
    for (long m = N; m <= 2 * N - 1; ++m) {
        const long k_lo = static_cast<long>(std::ceil(std::pow(s.mu, double(m)) / kTwoPi));
        const long k_hi = static_cast<long>(std::ceil(std::pow(s.mu, double(m + 1)) / kTwoPi));
        s.index_sets.push_back({k_lo, std::max(k_lo, k_hi)});
    }

    // Differentiated functional equation on a few fundamental-period points.
    for (double re : {0.05, 0.2}) {
        for (double im : {1.1, 1.5, 1.9}) {
            const cplx z = kTwoPi * cplx(re, im);
            const cplx d1 = model.eval_direct(z).derivative;
            const cplx d2 = model.eval_direct(s.mu * z).derivative * (s.mu / 2.0);
            s.propagation_residual = std::max(s.propagation_residual, std::abs(d2 - d1) / std::abs(d1));
        }
    }

    // U_k = psi(V_k) inside U for a spread of k.
    std::vector<long> ks;
    for (const auto& [a, b] : s.index_sets)
        for (long k = a; k < b; ++k) ks.push_back(k);
    const double x0 = std::log(s.S_lower), x1 = std::log(s.S_upper);
    for (long idx : spread_indices(ks.size(), opt.containment_checks)) {
        const long k = ks[idx];
        const auto rect = rectangle(x0, x1, kTwoPi * k - kPi, kTwoPi * k + kPi, opt.containment_samples);
        std::vector<Zipper::Eval> img(rect.size());
        model.eval(rect, img);
        std::vector<cplx> curve(rect.size());
        for (std::size_t i = 0; i < rect.size(); ++i) {
            curve[i] = img[i].value;
            const double r = std::abs(curve[i]);
            if (!(r > s.S_lower && r < s.S_upper)) {
                throw Error(ErrorKind::NTooSmall, "U_" + std::to_string(k) + " leaves the annulus of U");
            }
        }
        if (curve_meets(curve, cplx(-s.S_upper, 0.0), cplx(-s.S_lower, 0.0))) {
            throw Error(ErrorKind::NTooSmall, "U_" + std::to_string(k) + " meets the slit of U");
        }
        ++s.containment_checked;
    }
    return s;
}

double strict_sum_at(const TractModel& model, const StrictBranchSystem& s, double theta,
                     const std::vector<cplx>& w_samples) {
    if (w_samples.empty()) throw Error(ErrorKind::InvalidParameter, "no base points");
    double best = INFINITY;
    std::vector<cplx> xi;
    xi.reserve(s.size());
    for (cplx w : w_samples) {
        const cplx lw = std::log(w);
        xi.clear();
        for (const auto& [a, b] : s.index_sets)
            for (long k = a; k < b; ++k) xi.push_back(lw + cplx(0.0, kTwoPi * k));
        std::vector<Zipper::Eval> e(xi.size());
        model.eval(xi, e);
        double sum = 0.0;
        for (const auto& v : e) sum += std::pow(std::abs(v.derivative) / std::abs(v.value), theta);
        best = std::min(best, sum);
    }
    return best;
}

std::vector<cplx> strict_base_points(const StrictBranchSystem& s, Side side, int n_moduli, int n_arguments) {
    if (side != Side::Right) throw Error(ErrorKind::InvalidParameter, "base points need the right-side slit");
    std::vector<cplx> w;
    const double l0 = std::log(s.S_lower), l1 = std::log(s.S_upper);
    for (int i = 0; i < n_moduli; ++i) {
        const double u = n_moduli == 1 ? 0.5 : 0.25 + 0.5 * i / (n_moduli - 1);
        for (int j = 0; j < n_arguments; ++j) {
            const double a = n_arguments == 1 ? 0.0 : -0.75 * kPi + 1.5 * kPi * j / (n_arguments - 1);
            w.push_back(std::polar(std::exp(l0 + u * (l1 - l0)), a));
        }
    }
    return w;
}

PressureReport strict_scan(const TractModel& model, double theta, const std::vector<long>& N_grid,
                           const StrictOptions& options, int n_moduli, int n_arguments) {
    PressureReport rep;
    rep.kind = "strict";
    rep.t_values = {theta};
    rep.threshold_A = 2.0;
    rep.sums.assign(1, {});
    rep.attained.assign(1, {});
    auto& systems = rep.diagnostics["systems"] = nlohmann::json::array();
    std::vector<double> lx, ly;
    for (long N : N_grid) {
        rep.scan.push_back(static_cast<double>(N));
        try {
            const StrictBranchSystem s = build_strict(model, N, options);
            const double S = strict_sum_at(model, s, theta, strict_base_points(s, model.side(), n_moduli, n_arguments));
            rep.sums[0].push_back(S);
            rep.attained[0].push_back(S >= 2.0);
            lx.push_back(std::log(double(N)));
            ly.push_back(std::log(S));
            nlohmann::json sj = s.to_json();
            sj["S"] = S;
            systems.push_back(sj);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NTooSmall) throw;
            rep.sums[0].push_back(NAN);
            rep.attained[0].push_back(false);
            systems.push_back({{"N", N}, {"error", e.what()}});
        }
    }
    rep.growth_exponent.push_back(fit_slope(lx, ly));
    rep.predicted_exponent.push_back(2.0 - theta);
    const bool reached = !rep.sums[0].empty() && rep.sums[0].back() >= 2.0;
    const double e = rep.growth_exponent[0];
    if (std::any_of(rep.attained[0].begin(), rep.attained[0].end(), [](bool b) { return b; })) {
        for (std::size_t i = 0; i < rep.scan.size(); ++i)
            if (rep.attained[0][i]) {
                rep.best_lower_bound = theta;
                break;
            }
    }
    rep.verdict = (std::isfinite(e) && std::abs(e - (2.0 - theta)) <= 0.15 && reached && theta < 2.0)
                      ? "strict-evidence"
                      : "inconclusive";
    return rep;
}

}  // namespace tractdim
