#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "tractdim/curves.hpp"
#include "tractdim/disk_chart.hpp"
#include "tractdim/distortion.hpp"
#include "tractdim/quadrature.hpp"
#include "tractdim/tract_chart.hpp"

using namespace tractdim;

namespace {

Polyline square(int per_side) {
    Polyline p;
    const cplx c[4] = {{1, -1}, {1, 1}, {-1, 1}, {-1, -1}};
    for (int e = 0; e < 4; ++e)
        for (int i = 0; i < per_side; ++i) p.push_back(c[e] + (c[(e + 1) % 4] - c[e]) * (double(i) / per_side));
    return p;
}

}  // namespace

TEST_CASE("disk chart of a fine circle polygon is close to the identity") {
    const DiskChart chart = fit_disk_chart(circle_generator(1024).vertices, 0.0);
    CHECK(chart.accepted());
    for (cplx z : {cplx(0.3, 0.1), cplx(-0.5, 0.4), cplx(0.0, -0.7)}) {
        CHECK(std::abs(chart.forward(z) - z) < 1e-3);
        CHECK(std::abs(chart.derivative(z) - 1.0) < 1e-2);
        CHECK(std::abs(chart.inverse(chart.forward(z)) - z) < 1e-8);
    }
}

TEST_CASE("disk chart JSON record reloads exactly") {
    const DiskChart chart = fit_disk_chart(square(64), 0.0);
    const DiskChart back = DiskChart::from_json(chart.to_json());
    for (cplx z : {cplx(0.2, 0.3), cplx(-0.6, -0.1)}) {
        CHECK(back.forward(z) == chart.forward(z));
        CHECK(back.derivative(z) == chart.derivative(z));
    }
}

TEST_CASE("square chart passes the distortion gates and has Hoelder exponent 1/2") {
    const DiskChart chart = fit_disk_chart(square(256), 0.0);
    DistortionOptions o;
    o.samples = 200;
    const DistortionReport r = verify_distortion(chart, o);
    CHECK(r.koebe.pass());
    CHECK(r.half_plane.pass());
    CHECK(r.line_shift.pass());
    CHECK(r.quarter.pass());
    CHECK(r.derivative_violations == 0);
    CHECK(r.pass());
    // Right-angle corners: phi' grows like (1 - r)^(-1/2).
    const HolderFit h = fit_holder(chart);
    CHECK(h.alpha == doctest::Approx(0.5).epsilon(0.1));
    CHECK(h.consistent());
}

TEST_CASE("an eight-point Koch chart is rejected by the accuracy gate") {
    const GeneratorCurve g = koch_generator(kPi / 3.0, 5);
    DiskChartOptions o;
    o.resolution = 8;
    o.throw_on_reject = false;
    const DiskChart chart = fit_disk_chart(g.vertices, 0.0, o);
    CHECK_FALSE(chart.accepted());
    CHECK(chart.relative_accuracy() > o.tolerance);
    o.throw_on_reject = true;
    CHECK_THROWS_AS(fit_disk_chart(g.vertices, 0.0, o), Error);
}

TEST_CASE("half-plane tract map is phi(zeta) = 2 pi zeta") {
    const TractBoundary t = build_tract(exp_lift(circle_generator(720)), -6, 12);
    const TractMap map = fit_tract_map(t);
    CHECK(map.mu() == doctest::Approx(2.0).epsilon(1e-3));
    for (cplx z : {cplx(0.3, 0.7), cplx(0.05, -0.4), cplx(5.0, 20.0), cplx(40.0, -3.0)}) {
        const Zipper::Eval e = map.phi(z);
        CHECK(std::abs(e.value / (kTwoPi * z) - 1.0) < 1e-3);
        CHECK(std::abs(e.derivative / kTwoPi - 1.0) < 1e-2);
    }
}

TEST_CASE("tract map JSON record reloads exactly") {
    const TractBoundary t = build_tract(exp_lift(koch_generator(kPi / 4.0, 2)), -6, 12);
    const TractMap map = fit_tract_map(t);
    const TractMap back = TractMap::from_json(map.to_json());
    CHECK(back.mu() == map.mu());
    for (cplx z : {cplx(0.2, 0.9), cplx(3.0, -7.0)}) CHECK(back.phi(z).value == map.phi(z).value);
}

TEST_CASE("rescaled Koch tract chart is accepted and passes its checks") {
    const TractBoundary t = build_tract(exp_lift(koch_generator(kPi / 3.0, 3)), -6, 12);
    TractMapOptions up, down;
    up.focus = TractMapOptions::Focus::Upper;
    down.focus = TractMapOptions::Focus::Lower;
    auto upper = std::make_shared<TractMap>(fit_tract_map(t, up));
    auto lower = std::make_shared<TractMap>(fit_tract_map(t, down));
    CHECK(upper->mu() == doctest::Approx(2.0).epsilon(0.05));
    const TractChart chart = fit_tract_chart(upper, std::exp(3.0), kDefaultKappa, 96, lower);
    CHECK(chart.accepted());
    DistortionOptions o;
    o.samples = 150;
    o.integrated_checks = 4;
    const DistortionReport r = verify_distortion(chart, o);
    CHECK(r.half_plane.pass());
    CHECK(r.line_shift.pass());
    CHECK(r.derivative_violations == 0);
}

TEST_CASE("Gauss-Legendre panels integrate polynomials exactly and refine near singularities") {
    const QuadratureResult p = integrate([](double x, std::vector<double>& v) { v[0] = std::pow(x, 5); }, 1, 0.0, 1.0);
    CHECK(p.value[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
    BatchIntegrand f = [](std::span<const double> x, std::span<double> y) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            y[2 * i] = 1.0 / std::sqrt(x[i]);
            y[2 * i + 1] = std::cos(x[i]);
        }
    };
    QuadratureOptions o;
    o.rel_tol = 1e-8;
    o.max_depth = 40;
    const QuadratureResult r = integrate_batch(f, 2, 0.0, 1.0, o);
    CHECK(r.value[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(r.value[1] == doctest::Approx(std::sin(1.0)).epsilon(1e-10));
}
