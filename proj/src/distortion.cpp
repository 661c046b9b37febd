#include "tractdim/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tractdim/polyline.hpp"
#include "tractdim/quadrature.hpp"

namespace tractdim {

void BoundCheck::record(double value, double lower, double upper, double slack) {
    ++checked;
    const double margin =
        std::min(std::log(value / (lower * (1.0 - slack))), std::log(upper * (1.0 + slack) / value));
    if (!(margin >= 0.0)) ++violations;
    worst_margin = std::min(worst_margin, std::isnan(margin) ? -INFINITY : margin);
}

nlohmann::json BoundCheck::to_json() const {
    nlohmann::json j{{"checked", checked}, {"violations", violations}};
    j["worst_margin"] = checked > 0 ? nlohmann::json(worst_margin) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json DistortionReport::to_json() const {
    return {{"accepted", accepted},
            {"samples", samples},
            {"koebe", koebe.to_json()},
            {"half_plane", half_plane.to_json()},
            {"line_shift", line_shift.to_json()},
            {"quarter", quarter.to_json()},
            {"derivative_error", derivative_error},
            {"angle_error", angle_error},
            {"derivative_violations", derivative_violations},
            {"pass", pass()}};
}

namespace {

using Map = std::function<Zipper::Eval(cplx)>;

// Fourth-order central differences along 1 and i. The charts carry some
// roundoff from their many layers, so h should stay near 1% of the distance
// to the boundary.
std::pair<cplx, cplx> fd_frame(const Map& f, cplx z, double h) {
    auto diff = [&](cplx dir) {
        const cplx a = f(z + h * dir).value - f(z - h * dir).value;
        const cplx b = f(z + 2.0 * h * dir).value - f(z - 2.0 * h * dir).value;
        return (8.0 * a - b) / (12.0 * h);
    };
    return {diff(1.0), diff(kI)};
}

void check_derivative(const Map& f, cplx z, double h, double tol, DistortionReport& rep) {
    const auto [dx, dy] = fd_frame(f, z, h);
    const cplx d = f(z).derivative;
    const double err = std::abs(dx - d) / std::abs(d);
    rep.derivative_error = std::max(rep.derivative_error, err);
    if (!(err <= tol)) ++rep.derivative_violations;
    const double angle = std::abs(std::arg(dy / dx)) - 0.5 * kPi;
    rep.angle_error = std::max(rep.angle_error, std::abs(angle));
}

// The half-plane inequality and its line-shift consequence for a univalent map
// psi of the right half-plane, sampled at x in (1, x_max], |y| <= y_max.
void check_half_plane(const Map& psi, double y_max, double x_max, std::mt19937_64& rng,
                      const DistortionOptions& opt, DistortionReport& rep) {
    std::uniform_real_distribution<double> ux(1.0, x_max), uy(-y_max, y_max);
    const std::vector<double> t{0.5, 1.0, 2.0};
    for (int s = 0; s < opt.samples; ++s) {
        const double x = ux(rng);
        const double y = uy(rng);
        const double d1 = std::abs(psi(cplx(1.0, y)).derivative);
        const double dx = std::abs(psi(cplx(x, y)).derivative);
        rep.half_plane.record(d1 / dx, 1.0 / (8.0 * x), 2.0 * x * x * x, opt.slack);
        for (double tk : t) {
            rep.line_shift.record(std::pow(dx / d1, tk), std::pow(2.0, -tk) * std::pow(x, -3.0 * tk),
                                  std::pow(8.0, tk) * std::pow(x, tk), opt.slack);
        }
    }
    // Integrated form on [kappa T, T].
    std::uniform_real_distribution<double> uT(1.0, y_max);
    for (int s = 0; s < opt.integrated_checks; ++s) {
        const double x = ux(rng);
        const double T = std::max(1.0, uT(rng));
        QuadratureOptions q;
        q.initial_panels = 32;
        auto mean = [&](double re) {
            VectorIntegrand f = [&](double y, std::vector<double>& v) {
                const double ld = std::log(std::abs(psi(cplx(re, y)).derivative));
                for (std::size_t k = 0; k < t.size(); ++k) v[k] = std::exp(t[k] * ld);
            };
            return integrate(f, t.size(), kDefaultKappa * T, T, q).value;
        };
        const auto ix = mean(x);
        const auto i1 = mean(1.0);
        for (std::size_t k = 0; k < t.size(); ++k) {
            rep.line_shift.record(ix[k] / i1[k], std::pow(2.0, -t[k]) * std::pow(x, -3.0 * t[k]),
                                  std::pow(8.0, t[k]) * std::pow(x, t[k]), opt.slack);
        }
    }
}

}  // namespace

DistortionReport verify_distortion(const DiskChart& chart, const DistortionOptions& opt) {
    DistortionReport rep;
    rep.accepted = chart.accepted();
    rep.samples = opt.samples;
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const Map f = [&chart](cplx z) { return chart.eval(z); };
    const double d0 = std::abs(chart.derivative(0.0));
    for (int s = 0; s < opt.samples; ++s) {
        const double r = 0.999 * std::sqrt(u01(rng));
        const cplx z = std::polar(r, kTwoPi * u01(rng));
        const double ratio = std::abs(chart.derivative(z)) / d0;
        rep.koebe.record(ratio, (1.0 - r) / 8.0, 2.0 / std::pow(1.0 - r, 3), opt.slack);
        if (r <= 0.9) check_derivative(f, z, 1e-2 * (1.0 - r), opt.derivative_tolerance, rep);
    }
    const double dist = distance_to_polyline(chart.boundary(), true, chart.center());
    rep.quarter.record(d0 / dist, 1.0, 4.0, opt.slack);
    // Half-plane form through the Cayley map w -> (w - 1) / (w + 1).
    const Map psi = [&chart](cplx w) {
        const cplx z = (w - 1.0) / (w + 1.0);
        const Zipper::Eval e = chart.eval(z);
        return Zipper::Eval{e.value, e.derivative * 2.0 / ((w + 1.0) * (w + 1.0))};
    };
    check_half_plane(psi, 8.0, 8.0, rng, opt, rep);
    return rep;
}

DistortionReport verify_distortion(const TractChart& chart, const DistortionOptions& opt) {
    DistortionReport rep;
    rep.accepted = chart.accepted();
    rep.samples = opt.samples;
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const Map phi = [&chart](cplx z) { return chart.phi(z); };
    const Map g = [&chart](cplx z) { return chart.g(z); };
    const double R = chart.R;
    for (int s = 0; s < opt.samples; ++s) {
        // Q_1 \ Q_kappa at distance at least 1/R from the imaginary axis.
        cplx z;
        do {
            z = cplx(1.0 / R + (2.0 - 2.0 / R) * u01(rng), 2.0 * u01(rng) - 1.0);
        } while (std::max(z.real() / 2.0, std::abs(z.imag())) < chart.kappa);
        const double h = 1e-2 * std::min(z.real(), 1.0);
        // Keep the stencil inside one period of the continuation.
        auto level = [&](cplx w) { return chart.map_for(R * w).level(R * w); };
        const int n = level(z);
        bool same = std::abs(z.imag()) > 4.0 * h;
        for (cplx dir : {cplx(1.0), kI}) {
            for (double k : {-2.0, 2.0}) same = same && level(z + k * h * dir) == n;
        }
        if (same) check_derivative(g, z, h, opt.derivative_tolerance, rep);
    }
    check_half_plane(phi, R, 8.0, rng, opt, rep);
    return rep;
}

nlohmann::json HolderFit::to_json() const {
    return {{"alpha", alpha},        {"exponent", exponent},         {"H_const", H_const},
            {"M_const", M_const},    {"c", c},                       {"sample_count", sample_count},
            {"holder", holder},      {"consistent", consistent()}};
}

HolderFit fit_holder(const DiskChart& chart, int n_directions, int levels) {
    if (n_directions < 8 || levels < 3) throw Error(ErrorKind::InvalidParameter, "too few Hoelder samples");
    HolderFit fit;
    const double d0 = std::abs(chart.derivative(0.0));
    std::vector<double> x, y;
    std::vector<std::vector<cplx>> ring(levels);
    std::vector<std::vector<double>> deriv(levels);
    // Uniform rays for the Hoelder quotients; the derivative peaks sit on the
    // rays through prevertices, which a uniform set misses once 1 - r is
    // smaller than its spacing.
    const std::vector<double> peaks = chart.prevertex_angles();
    for (int k = 1; k <= levels; ++k) {
        const double r = 1.0 - std::ldexp(1.0, -k);
        double mx = 0.0;
        for (int j = 0; j < n_directions; ++j) {
            const cplx z = std::polar(r, kTwoPi * (j + 0.5) / n_directions);
            const Zipper::Eval e = chart.eval(z);
            ring[k - 1].push_back(e.value);
            deriv[k - 1].push_back(std::abs(e.derivative) / d0);
            mx = std::max(mx, deriv[k - 1].back());
            ++fit.sample_count;
        }
        for (double a : peaks) {
            mx = std::max(mx, std::abs(chart.derivative(std::polar(r, a))) / d0);
            ++fit.sample_count;
        }
        x.push_back(k * std::log(2.0));
        y.push_back(std::log(mx));
    }
    // The outer rings only see the bulk of the domain; fit the inner half.
    const std::size_t half = x.size() / 2;
    fit.exponent = linear_fit(std::vector<double>(x.begin() + half, x.end()),
                              std::vector<double>(y.begin() + half, y.end()))[1];
    fit.holder = fit.exponent < 1.0;
    fit.alpha = std::clamp(1.0 - fit.exponent, 1e-6, 1.0);
    // M from the derivative bound, H from Hoelder quotients of neighbouring
    // samples on each ring and along each ray.
    for (int k = 0; k < levels; ++k) {
        const double one_r = std::ldexp(1.0, -(k + 1));
        const double r = 1.0 - one_r;
        for (int j = 0; j < n_directions; ++j) {
            fit.M_const = std::max(fit.M_const, deriv[k][j] * std::pow(one_r, 1.0 - fit.alpha));
            const int jn = (j + 1) % n_directions;
            const double step = 2.0 * r * std::sin(kPi / n_directions);
            fit.H_const = std::max(fit.H_const, std::abs(ring[k][jn] - ring[k][j]) / (d0 * std::pow(step, fit.alpha)));
            if (k + 1 < levels) {
                fit.H_const = std::max(fit.H_const, std::abs(ring[k + 1][j] - ring[k][j]) /
                                                        (d0 * std::pow(0.5 * one_r, fit.alpha)));
            }
        }
    }
    return fit;
}

}  // namespace tractdim
