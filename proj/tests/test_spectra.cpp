#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "tractdim/curves.hpp"
#include "tractdim/spectra.hpp"

using namespace tractdim;

namespace {

// (1/2pi) integral of |1 - r e^{is}|^{-2a} ds = 2F1(a, a; 1; r^2).
double mean_oracle(double a, double r) {
    double term = 1.0, sum = 1.0;
    for (int n = 0; n < 20000; ++n) {
        const double ratio = (n + a) / (n + 1.0);
        term *= ratio * ratio * r * r;
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return kTwoPi * sum;
}

struct CircleMaps {
    std::shared_ptr<const TractMap> upper, lower;
};

const CircleMaps& circle_maps() {
    static const CircleMaps m = [] {
        const TractBoundary t = build_tract(exp_lift(circle_generator(720)), -6, 12);
        TractMapOptions up, down;
        up.focus = TractMapOptions::Focus::Upper;
        down.focus = TractMapOptions::Focus::Lower;
        return CircleMaps{std::make_shared<TractMap>(fit_tract_map(t, up)),
                          std::make_shared<TractMap>(fit_tract_map(t, down))};
    }();
    return m;
}

}  // namespace

TEST_CASE("disk integral means match the hypergeometric series") {
    const DerivativeFn d = [](cplx z) { return 1.0 / ((1.0 - z) * (1.0 - z)); };
    const std::vector<double> t{0.25, 0.5, 1.0, 1.5};
    for (double r : {0.5, 0.9, 0.99}) {
        const auto I = integral_mean_disk(d, r, t, 1e-8);
        for (std::size_t k = 0; k < t.size(); ++k) CHECK(I[k] == doctest::Approx(mean_oracle(t[k], r)).epsilon(1e-5));
    }
}

TEST_CASE("half-plane tract: I_R(0) = 1 - kappa and I_R(t) does not depend on R") {
    const auto& m = circle_maps();
    const std::vector<double> t{0.0, 0.5, 1.0, 2.0};
    const SpectrumGrid g = compute_tract_spectrum(m.upper, t, {std::exp(3.0), std::exp(5.0)}, {}, m.lower);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(g.I_plus[i][0] == doctest::Approx(1.0 - kDefaultKappa).epsilon(1e-6));
        CHECK(g.I_minus[i][0] == doctest::Approx(1.0 - kDefaultKappa).epsilon(1e-6));
        CHECK(g.beta[i][0] == doctest::Approx(std::log(1.0 - kDefaultKappa) / std::log(g.R_values[i])).epsilon(1e-6));
    }
    for (std::size_t k = 0; k < t.size(); ++k) CHECK(g.I_plus[0][k] == doctest::Approx(g.I_plus[1][k]).epsilon(1e-3));
}

TEST_CASE("extrapolation in 1/log R removes the constant term") {
    std::vector<double> t{0.8, 1.0, 1.2, 1.4}, R;
    for (double L = 2.0; L <= 7.01; L += 0.5) R.push_back(std::exp(L));
    std::vector<std::vector<double>> beta;
    for (double r : R) {
        std::vector<double> row;
        for (double tk : t) row.push_back(0.4 * (tk - 1.0) + 0.1 * tk / std::log(r) - 0.3 / std::log(r));
        beta.push_back(row);
    }
    const SpectrumGrid g = SpectrumGrid::from_beta(t, R, beta);
    const BetaInfinity b = beta_infinity(g, BetaMethod::Extrapolate);
    for (std::size_t k = 0; k < t.size(); ++k) CHECK(b.beta_inf[k] == doctest::Approx(0.4 * (t[k] - 1.0)).epsilon(1e-9));
    // h(t) = 0.4 (t - 1) - t + 1 vanishes at t = 1.
    const ThetaResult th = solve_theta(b);
    CHECK(th.theta == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(th.t_lo <= th.theta);
    CHECK(th.theta <= th.t_hi);
}

TEST_CASE("solver rejects grids without a sign change") {
    std::vector<double> t{0.1, 0.3, 0.5}, R;
    for (double L = 2.0; L <= 7.01; L += 1.0) R.push_back(std::exp(L));
    std::vector<std::vector<double>> beta(R.size(), std::vector<double>(t.size(), 0.0));
    const BetaInfinity b = beta_infinity(SpectrumGrid::from_beta(t, R, beta), BetaMethod::MaxTail);
    CHECK_THROWS_AS(solve_theta(b), Error);
}

TEST_CASE("short R ranges are refused") {
    std::vector<double> t{0.5, 1.0, 1.5}, R{std::exp(2.0), std::exp(2.5), std::exp(3.0), std::exp(3.5)};
    std::vector<std::vector<double>> beta(R.size(), std::vector<double>(t.size(), 0.0));
    CHECK_THROWS_AS(beta_infinity(SpectrumGrid::from_beta(t, R, beta)), Error);
}

TEST_CASE("log I_R(t) is convex in t for a Koch tract") {
    const TractBoundary tb = build_tract(exp_lift(koch_generator(kPi / 3.0, 3)), -6, 12);
    TractMapOptions up, down;
    up.focus = TractMapOptions::Focus::Upper;
    down.focus = TractMapOptions::Focus::Lower;
    auto upper = std::make_shared<TractMap>(fit_tract_map(tb, up));
    auto lower = std::make_shared<TractMap>(fit_tract_map(tb, down));
    std::vector<double> t;
    for (double x = 0.0; x <= 2.01; x += 0.25) t.push_back(x);
    const SpectrumGrid g = compute_tract_spectrum(upper, t, {std::exp(3.0)}, {}, lower);
    for (const auto* I : {&g.I_plus, &g.I_minus})
        for (std::size_t k = 1; k + 1 < t.size(); ++k) {
            const double second = std::log((*I)[0][k + 1]) - 2.0 * std::log((*I)[0][k]) + std::log((*I)[0][k - 1]);
            CHECK(second >= -1e-9);
        }
}
