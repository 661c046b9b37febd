#include "tractdim/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

#include "tractdim/parallel.hpp"

namespace tractdim {

namespace {

using Rule = boost::math::quadrature::gauss<double, 8>;

struct Panel {
    std::vector<double> value;
    std::vector<double> error;
    long evaluations = 0;
    bool converged = true;
};

// Nodes of the rule mapped to [a, b], with weights including the half-width.
void panel_nodes(double a, double b, std::vector<double>& x, std::vector<double>& w) {
    const auto& ax = Rule::abscissa();
    const auto& aw = Rule::weights();
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    for (std::size_t i = 0; i < ax.size(); ++i) {
        if (ax[i] == 0.0) {
            x.push_back(c);
            w.push_back(h * aw[i]);
        } else {
            x.push_back(c - h * ax[i]);
            w.push_back(h * aw[i]);
            x.push_back(c + h * ax[i]);
            w.push_back(h * aw[i]);
        }
    }
}

// Evaluates f on the nodes of each interval in one batch; sums[j] gets the
// rule on interval j.
void gauss_panels(const BatchIntegrand& f, std::size_t m, std::span<const std::array<double, 2>> iv,
                  std::vector<std::vector<double>>& sums, long& evals) {
    std::vector<double> x, w, y;
    for (const auto& [a, b] : iv) panel_nodes(a, b, x, w);
    y.assign(x.size() * m, 0.0);
    f(x, y);
    evals += static_cast<long>(x.size());
    const std::size_t per = x.size() / iv.size();
    sums.resize(iv.size());
    for (std::size_t j = 0; j < iv.size(); ++j) {
        sums[j].assign(m, 0.0);
        for (std::size_t i = j * per; i < (j + 1) * per; ++i)
            for (std::size_t k = 0; k < m; ++k) sums[j][k] += w[i] * y[i * m + k];
    }
}

// A split is accepted when the halves agree with the whole either relative to
// the panel itself or relative to the panel's share of the total, so an
// isolated kink or jump does not force endless refinement.
void refine(const BatchIntegrand& f, std::size_t m, double a, double b, const std::vector<double>& whole,
            const std::vector<double>& share, int depth, const QuadratureOptions& opt, Panel& out) {
    const double mid = 0.5 * (a + b);
    const std::array<std::array<double, 2>, 2> halves{{{a, mid}, {mid, b}}};
    std::vector<std::vector<double>> lr;
    gauss_panels(f, m, halves, lr, out.evaluations);
    const std::vector<double>& left = lr[0];
    const std::vector<double>& right = lr[1];
    bool ok = true;
    std::vector<double> err(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double both = left[k] + right[k];
        err[k] = std::abs(both - whole[k]);
        const double ref = std::max(std::abs(both), share[k] * (b - a));
        if (!(err[k] <= std::max(opt.rel_tol * ref, opt.abs_tol))) ok = false;
    }
    if (ok || depth >= opt.max_depth) {
        if (!ok) out.converged = false;
        for (std::size_t k = 0; k < m; ++k) {
            out.value[k] += left[k] + right[k];
            out.error[k] += err[k];
        }
        return;
    }
    refine(f, m, a, mid, left, share, depth + 1, opt, out);
    refine(f, m, mid, b, right, share, depth + 1, opt, out);
}

}  // namespace

QuadratureResult integrate(const VectorIntegrand& f, std::size_t m, double a, double b,
                           const QuadratureOptions& options) {
    auto batch = [&f, m](std::span<const double> x, std::span<double> y) {
        std::vector<double> v(m);
        for (std::size_t i = 0; i < x.size(); ++i) {
            f(x[i], v);
            std::copy(v.begin(), v.end(), y.begin() + i * m);
        }
    };
    return integrate_batch(batch, m, a, b, options);
}

QuadratureResult integrate_batch(const BatchIntegrand& f, std::size_t m, double a, double b,
                                 const QuadratureOptions& options) {
    const int n = std::max(1, options.initial_panels);
    std::vector<Panel> panels(n);
    std::vector<std::vector<double>> wholes(n, std::vector<double>(m));
    auto lo_of = [&](std::size_t i) { return a + (b - a) * double(i) / n; };
    auto hi_of = [&](std::size_t i) { return i + 1 == static_cast<std::size_t>(n) ? b : lo_of(i + 1); };
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        const std::array<std::array<double, 2>, 1> iv{{{lo_of(i), hi_of(i)}}};
        std::vector<std::vector<double>> out;
        gauss_panels(f, m, iv, out, panels[i].evaluations);
        wholes[i] = std::move(out[0]);
    });
    // Total per unit length, from the unrefined panels.
    std::vector<double> share(m, 0.0);
    for (const auto& w : wholes)
        for (std::size_t k = 0; k < m; ++k) share[k] += std::abs(w[k]);
    for (double& s : share) s /= std::abs(b - a);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        Panel& p = panels[i];
        p.value.assign(m, 0.0);
        p.error.assign(m, 0.0);
        refine(f, m, lo_of(i), hi_of(i), wholes[i], share, 0, options, p);
    });
    QuadratureResult r;
    r.value.assign(m, 0.0);
    r.error.assign(m, 0.0);
    for (const Panel& p : panels) {
        for (std::size_t k = 0; k < m; ++k) {
            r.value[k] += p.value[k];
            r.error[k] += p.error[k];
        }
        r.evaluations += p.evaluations;
        r.converged = r.converged && p.converged;
    }
    return r;
}

}  // namespace tractdim
