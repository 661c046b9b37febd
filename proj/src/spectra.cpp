#include "tractdim/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace tractdim {

IntegralMeans integral_mean_tract(const TractChart& chart, const std::vector<double>& t,
                                  const SpectrumOptions& options) {
    const double R = chart.R;
    const double kappa = chart.kappa;
    QuadratureOptions q;
    q.rel_tol = options.rel_tol;
    q.max_depth = options.max_depth;
    q.initial_panels = std::max(8, static_cast<int>(std::ceil(options.panels_per_R * R * (1.0 - kappa))));
    const std::size_t m = t.size();

    IntegralMeans out;
    out.error.assign(m, 0.0);
    for (int sign : {1, -1}) {
        BatchIntegrand f = [&](std::span<const double> y, std::span<double> v) {
            std::vector<cplx> z(y.size());
            std::vector<Zipper::Eval> e(y.size());
            for (std::size_t i = 0; i < y.size(); ++i) z[i] = cplx(1.0 / R, sign * y[i]);
            chart.g(z, e);
            for (std::size_t i = 0; i < y.size(); ++i) {
                const double d = std::abs(e[i].derivative);
                if (!(d > 0.0) || !std::isfinite(d)) {
                    throw Error(ErrorKind::Quadrature,
                                "derivative evaluation failed at y = " + std::to_string(sign * y[i]));
                }
                const double ld = std::log(d);
                for (std::size_t k = 0; k < m; ++k) v[i * m + k] = t[k] == 0.0 ? 1.0 : std::exp(t[k] * ld);
            }
        };
        // Break the segment where it crosses the period circles of the
        // continuation; the chart is only continuous up to its accuracy there.
        std::vector<double> cuts{kappa};
        const TractMap& side_map = chart.map_for(cplx(0.0, sign));
        const double a = side_map.base_radius(sign > 0);
        const double mu = side_map.mu();
        for (double rad = a * std::pow(mu, std::ceil(std::log(std::hypot(1.0, kappa * R) / a) / std::log(mu)));
             rad < std::hypot(1.0, R); rad *= mu) {
            const double y = std::sqrt(rad * rad - 1.0) / R;
            if (y > cuts.back() + 1e-12 && y < 1.0 - 1e-12) cuts.push_back(y);
        }
        cuts.push_back(1.0);
        std::vector<double> total(m, 0.0), err(m, 0.0);
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            QuadratureOptions qc = q;
            qc.initial_panels = std::max(2, static_cast<int>(std::ceil(q.initial_panels * (cuts[c + 1] - cuts[c]) /
                                                                       (1.0 - kappa))));
            const QuadratureResult r = integrate_batch(f, m, cuts[c], cuts[c + 1], qc);
            if (!r.converged) throw Error(ErrorKind::Quadrature, "tract integral mean did not converge");
            for (std::size_t k = 0; k < m; ++k) {
                total[k] += r.value[k];
                err[k] += r.error[k];
            }
            out.evaluations += r.evaluations;
        }
        (sign > 0 ? out.plus : out.minus) = total;
        for (std::size_t k = 0; k < m; ++k) out.error[k] = std::max(out.error[k], err[k] / total[k]);
    }
    return out;
}

std::vector<double> integral_mean_disk(const DerivativeFn& derivative, double r, const std::vector<double>& t,
                                       double rel_tol) {
    if (!(r > 0.0 && r <= 0.999)) throw Error(ErrorKind::InvalidParameter, "radius must lie in (0, 0.999]");
    QuadratureOptions q;
    q.rel_tol = rel_tol;
    q.initial_panels = std::max(16, static_cast<int>(std::ceil(kTwoPi / (1.0 - r) / 2.0)));
    const std::size_t m = t.size();
    VectorIntegrand f = [&](double s, std::vector<double>& v) {
        const double d = std::abs(derivative(std::polar(r, s)));
        const double ld = std::log(d);
        for (std::size_t k = 0; k < m; ++k) v[k] = t[k] == 0.0 ? 1.0 : std::exp(t[k] * ld);
    };
    const QuadratureResult res = integrate(f, m, 0.0, kTwoPi, q);
    if (!res.converged) {
        throw Error(ErrorKind::Quadrature, "disk integral mean did not converge (estimate " +
                                               std::to_string(res.value.front()) + ")");
    }
    return res.value;
}

std::vector<double> integral_mean_disk(const DiskChart& chart, double r, const std::vector<double>& t,
                                       double rel_tol) {
    return integral_mean_disk([&](cplx z) { return chart.derivative(z); }, r, t, rel_tol);
}

SpectrumGrid SpectrumGrid::from_beta(std::vector<double> t, std::vector<double> R,
                                     std::vector<std::vector<double>> beta) {
    SpectrumGrid g;
    g.t_values = std::move(t);
    g.R_values = std::move(R);
    g.beta = std::move(beta);
    const std::size_t nr = g.R_values.size(), nt = g.t_values.size();
    g.I_plus.assign(nr, std::vector<double>(nt));
    g.I_minus = g.I_plus;
    g.quad_err.assign(nr, std::vector<double>(nt, 0.0));
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t k = 0; k < nt; ++k)
            g.I_plus[i][k] = g.I_minus[i][k] = std::exp(g.beta[i][k] * std::log(g.R_values[i]));
    return g;
}

std::string SpectrumGrid::to_csv() const {
    std::ostringstream os;
    os << std::setprecision(12);
    os << "R,t,I_plus,I_minus,beta_R,quad_err\n";
    for (std::size_t i = 0; i < R_values.size(); ++i)
        for (std::size_t k = 0; k < t_values.size(); ++k)
            os << R_values[i] << ',' << t_values[k] << ',' << I_plus[i][k] << ',' << I_minus[i][k] << ','
               << beta[i][k] << ',' << quad_err[i][k] << '\n';
    return os.str();
}

SpectrumGrid compute_tract_spectrum(std::shared_ptr<const TractMap> map, const std::vector<double>& t,
                                    const std::vector<double>& R, const SpectrumOptions& options,
                                    std::shared_ptr<const TractMap> lower) {
    if (t.empty() || R.empty()) throw Error(ErrorKind::InvalidParameter, "empty spectrum grid");
    if (!std::is_sorted(t.begin(), t.end()) || !std::is_sorted(R.begin(), R.end()) || t.front() < 0.0 ||
        !(R.front() > 1.0)) {
        throw Error(ErrorKind::InvalidParameter, "t grid must be increasing and >= 0, R grid increasing and > 1");
    }
    SpectrumGrid g;
    g.t_values = t;
    g.R_values = R;
    g.kappa = options.kappa;
    for (double r : R) {
        TractChart chart = fit_tract_chart(map, r, options.kappa, 96, lower);
        const IntegralMeans im = integral_mean_tract(chart, t, options);
        std::vector<double> beta(t.size());
        for (std::size_t k = 0; k < t.size(); ++k) {
            if (!(im.plus[k] > 0.0 && im.minus[k] > 0.0) || !std::isfinite(im.plus[k] + im.minus[k])) {
                throw Error(ErrorKind::Quadrature, "non-positive integral mean");
            }
            beta[k] = std::log(std::max(im.plus[k], im.minus[k])) / std::log(r);
        }
        g.I_plus.push_back(im.plus);
        g.I_minus.push_back(im.minus);
        g.beta.push_back(beta);
        g.quad_err.push_back(im.error);
        g.charts.push_back(chart);
    }
    return g;
}

const char* to_string(BetaMethod m) { return m == BetaMethod::MaxTail ? "max-tail" : "extrapolate"; }

BetaMethod beta_method_from_string(const std::string& s) {
    if (s == "max-tail") return BetaMethod::MaxTail;
    if (s == "extrapolate") return BetaMethod::Extrapolate;
    throw Error(ErrorKind::InvalidParameter, "unknown beta method '" + s + "'");
}

double BetaInfinity::at(double t) const {
    if (t <= t_values.front()) return beta_inf.front();
    if (t >= t_values.back()) return beta_inf.back();
    const auto it = std::upper_bound(t_values.begin(), t_values.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - t_values.begin());
    const double s = (t - t_values[i - 1]) / (t_values[i] - t_values[i - 1]);
    return beta_inf[i - 1] + s * (beta_inf[i] - beta_inf[i - 1]);
}

nlohmann::json BetaInfinity::to_json() const {
    return {{"method", to_string(method)},   {"t", t_values},          {"beta_inf", beta_inf},
            {"spread", spread},              {"max_tail", max_tail},   {"extrapolated", extrapolated},
            {"tail_spread", tail_spread},    {"fit_spread", fit_spread}};
}

BetaInfinity beta_infinity(const SpectrumGrid& grid, BetaMethod method) {
    const std::size_t nr = grid.R_values.size();
    if (nr < 4) throw Error(ErrorKind::Range, "beta_infinity needs at least 4 R values");
    if (std::log10(grid.R_values.back() / grid.R_values.front()) < 2.0 - 1e-9) {
        throw Error(ErrorKind::Range, "R values must span at least two decades");
    }
    BetaInfinity b;
    b.method = method;
    b.t_values = grid.t_values;
    std::vector<double> x(nr);
    for (std::size_t i = 0; i < nr; ++i) x[i] = 1.0 / std::log(grid.R_values[i]);
    const std::size_t tail_start = nr / 2;
    for (std::size_t k = 0; k < grid.t_values.size(); ++k) {
        std::vector<double> y(nr);
        for (std::size_t i = 0; i < nr; ++i) y[i] = grid.beta[i][k];
        const auto [lo, hi] = std::minmax_element(y.begin() + tail_start, y.end());
        // Only the tail is regressed: the small-R values are dominated by the
        // approach to the asymptotic regime and bend the fit.
        const auto fit = linear_fit(std::vector<double>(x.begin() + tail_start, x.end()),
                                    std::vector<double>(y.begin() + tail_start, y.end()));
        b.max_tail.push_back(*hi);
        b.tail_spread.push_back(*hi - *lo);
        b.extrapolated.push_back(fit[0]);
        b.fit_spread.push_back(fit[2]);
        const double gap = std::abs(*hi - fit[0]);
        if (gap > 3.0 * (b.tail_spread.back() + b.fit_spread.back()) + 1e-3) {
            std::ostringstream os;
            os << "beta estimators disagree at t = " << grid.t_values[k] << " (max-tail " << *hi
               << ", extrapolated " << fit[0] << "); increase k_max or the resolution";
            throw Error(ErrorKind::UnstableSpectrum, os.str());
        }
    }
    b.beta_inf = method == BetaMethod::MaxTail ? b.max_tail : b.extrapolated;
    b.spread = method == BetaMethod::MaxTail ? b.tail_spread : b.fit_spread;
    return b;
}

nlohmann::json ThetaResult::to_json() const {
    return {{"theta", theta},
            {"bracket", {t_lo, t_hi}},
            {"beta_at_theta", beta_at_theta},
            {"diagnostics", {{"below_one", below_one}, {"max_increase_of_h", max_increase}}}};
}

ThetaResult solve_theta(const BetaInfinity& beta, double monotone_tol) {
    const auto& t = beta.t_values;
    const std::size_t n = t.size();
    if (n < 2) throw Error(ErrorKind::Range, "t grid too short");
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = beta.beta_inf[i] - t[i] + 1.0;
    ThetaResult res;
    for (std::size_t i = 0; i + 1 < n; ++i) res.max_increase = std::max(res.max_increase, h[i + 1] - h[i]);
    if (res.max_increase > monotone_tol) {
        throw Error(ErrorKind::DataQuality, "h(t) = beta(t) - t + 1 is not decreasing on the grid");
    }
    std::size_t seg = n;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (h[i] >= 0.0 && h[i + 1] <= 0.0 && !(h[i] == 0.0 && h[i + 1] == 0.0)) {
            seg = i;
            break;
        }
    }
    if (seg == n) throw Error(ErrorKind::Range, "h(t) has no sign change on the t grid; extend the grid");
    auto interp = [&](double s) {
        const std::size_t i = std::min<std::size_t>(
            n - 2, static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), s) - t.begin()) - 1);
        const double u = (s - t[i]) / (t[i + 1] - t[i]);
        return h[i] + u * (h[i + 1] - h[i]);
    };
    double lo = t[seg], hi = t[seg + 1];
    while (hi - lo >= 1e-4) {
        const double mid = 0.5 * (lo + hi);
        if (interp(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    res.t_lo = lo;
    res.t_hi = hi;
    res.theta = 0.5 * (lo + hi);
    res.beta_at_theta = beta.at(res.theta);
    res.below_one = res.theta < 1.0 - 1e-3;
    return res;
}

ClassicalBeta classical_beta(const DiskChart& chart, const std::vector<double>& r, const std::vector<double>& t,
                             double rel_tol) {
    if (r.size() < 2) throw Error(ErrorKind::InvalidParameter, "need at least two radii");
    ClassicalBeta cb;
    cb.t_values = t;
    cb.r_values = r;
    for (double ri : r) cb.means.push_back(integral_mean_disk(chart, ri, t, rel_tol));
    std::vector<double> x(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) x[i] = -std::log(1.0 - r[i]);
    for (std::size_t k = 0; k < t.size(); ++k) {
        std::vector<double> y(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) y[i] = std::log(cb.means[i][k]);
        const auto fit = linear_fit(x, y);
        cb.beta.push_back(fit[1]);
        cb.std_error.push_back(fit[3]);
    }
    return cb;
}

}  // namespace tractdim
