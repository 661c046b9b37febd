#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "tractdim/pressure.hpp"

using namespace tractdim;

namespace {

// Sum over k = 0..N of |a0 + 2 pi i k|^-t for the half-plane tract.
double direct_sum(double R, double t, long& N) {
    const double L = std::log(R);
    const double y = std::sqrt(R * R - L * L);
    N = static_cast<long>(std::floor((y / kDefaultKappa - y) / kTwoPi)) - 1;
    double s = 0.0;
    for (long k = 0; k <= N; ++k) s += std::pow(std::hypot(L, y + kTwoPi * k), -t);
    return s;
}

}  // namespace

TEST_CASE("identity model: branch points solve |log R + i y| = R") {
    const TractModel id;
    CHECK(id.identity());
    CHECK(id.mu() == 2.0);
    const BkzBranchSystem s = build_bkz(id, std::exp(6.0), 0.5);
    CHECK(s.a0.real() == doctest::Approx(6.0));
    CHECK(std::abs(s.a0) == doctest::Approx(std::exp(6.0)).epsilon(1e-12));
    CHECK(s.T == doctest::Approx(s.a0.imag() / kDefaultKappa));
    CHECK(s.containment_checked > 0);
    CHECK(s.M_const >= 1.0);
    CHECK(cylindrical_derivative(id, cplx(3.0, 4.0)) == doctest::Approx(5.0));
}

TEST_CASE("identity model: pressure sums equal the direct summation") {
    const TractModel id;
    for (double L : {4.0, 7.0, 10.0}) {
        for (double t : {0.5, 0.95, 1.2}) {
            long N = 0;
            const double ref = direct_sum(std::exp(L), t, N);
            const BkzBranchSystem s = build_bkz(id, std::exp(L), t);
            CHECK(s.N == N);
            CHECK(sigma_sum(s).sigma == doctest::Approx(ref).epsilon(1e-10));
            CHECK(sigma_sum(s).sigma_l <= sigma_sum(s).sigma);
            const SigmaSums r = sigma_sum(reweight(build_bkz(id, std::exp(L), 1.0), t));
            CHECK(r.sigma == doctest::Approx(ref).epsilon(1e-10));
        }
    }
}

TEST_CASE("identity model: lowering the threshold attains more t values") {
    const TractModel id;
    std::vector<double> R;
    for (double L = 4.0; L <= 8.01; L += 1.0) R.push_back(std::exp(L));
    const std::vector<double> t{0.3, 0.5, 0.7, 0.9, 1.2};
    auto count = [](const PressureReport& r) {
        long n = 0;
        for (const auto& row : r.attained)
            for (bool b : row) n += b;
        return n;
    };
    const PressureReport hi = pressure_scan(id, t, R, 10.0);
    const PressureReport lo = pressure_scan(id, t, R, 1.0001);
    CHECK(count(lo) > count(hi));
    CHECK(hi.monotone);
    CHECK(lo.best_lower_bound >= hi.best_lower_bound);
    CHECK(hi.best_lower_bound == doctest::Approx(0.5));
}

TEST_CASE("too small R and N are refused") {
    const TractModel id;
    CHECK_THROWS_AS(build_bkz(id, 2.0, 1.0), Error);
    try {
        build_strict(id, 4);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NTooSmall);
    }
}

TEST_CASE("identity model: strict sums grow like N log 2 / 2 pi") {
    const TractModel id;
    for (long N : {7, 8, 9}) {
        const StrictBranchSystem s = build_strict(id, N);
        CHECK(s.index_sets.size() == static_cast<std::size_t>(N));
        CHECK(s.S_upper == doctest::Approx(std::ldexp(s.S_upper0, static_cast<int>(2 * N))));
        CHECK(std::pow(2.0, -double(N)) * std::log(s.S_upper) < s.s0);
        const double S = strict_sum_at(id, s, 1.0, strict_base_points(s, Side::Right));
        CHECK(S == doctest::Approx(N * std::log(2.0) / kTwoPi).epsilon(0.01));
    }
    const PressureReport r = strict_scan(id, 1.0, {7, 8, 9, 10});
    CHECK(r.growth_exponent[0] == doctest::Approx(1.0).epsilon(0.05));
    CHECK(r.predicted_exponent[0] == 1.0);
}

TEST_CASE("reports serialize non-finite values as null") {
    PressureReport r;
    r.kind = "bkz";
    r.t_values = {1.0};
    r.scan = {100.0};
    r.sums = {{NAN}};
    r.full_sums = {{NAN}};
    r.attained = {{false}};
    r.growth_exponent = {NAN};
    const nlohmann::json j = r.to_json();
    CHECK(j["sums"][0][0].is_null());
    CHECK(j["best_lower_bound"].is_null());
    CHECK(j["verdict"] == "inconclusive");
}
