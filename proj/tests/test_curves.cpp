#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "tractdim/curves.hpp"
#include "tractdim/polyline.hpp"

using namespace tractdim;

TEST_CASE("circle generator has the requested vertices and starts at 1") {
    const GeneratorCurve g = circle_generator(360);
    CHECK(g.vertices.size() == 360);
    CHECK(g.vertices[0] == cplx(1.0, 0.0));
    CHECK_NOTHROW(validate_generator(g));
    const GeneratorCheck c = check_generator(g);
    CHECK(c.simple);
    CHECK(c.ray_hits == 1);
    CHECK(c.winding == 1);
}

TEST_CASE("Koch generator vertex count and similarity dimension") {
    const GeneratorCurve g = koch_generator(kPi / 3.0, 4);
    CHECK(g.vertices.size() == 3u * 256u);
    CHECK_NOTHROW(validate_generator(g));
    // log 4 / log 3 for the classical snowflake.
    CHECK(koch_similarity_dimension(kPi / 3.0) == doctest::Approx(std::log(4.0) / std::log(3.0)).epsilon(1e-12));
    CHECK(koch_similarity_dimension(kPi / 3.0) == doctest::Approx(1.2619).epsilon(1e-4));
    REQUIRE(g.meta.similarity_dimension.has_value());
    CHECK(*g.meta.similarity_dimension == doctest::Approx(koch_similarity_dimension(kPi / 3.0)));
}

TEST_CASE("self-intersecting input is not a Jordan curve") {
    // Square around the origin with a figure-eight twist on its left side.
    Polyline bow{{1.0, 0.0}, {1.0, 1.0}, {-1.0, 1.0}, {-1.5, -0.5}, {-1.5, 0.5}, {-1.0, -1.0}, {1.0, -1.0}};
    GeneratorMeta meta;
    meta.family = "file";
    bool thrown = false;
    try {
        validate_generator(normalize_generator(bow, meta));
    } catch (const Error& e) {
        thrown = true;
        CHECK(std::string(e.what()).find("not a Jordan curve") != std::string::npos);
    }
    CHECK(thrown);
}

TEST_CASE("exponential lift runs from 2 pi i to 4 pi i") {
    const Polyline lift = exp_lift(circle_generator(64));
    CHECK(std::abs(lift.front() - cplx(0.0, kTwoPi)) < 1e-12);
    CHECK(std::abs(lift.back() - cplx(0.0, 2.0 * kTwoPi)) < 1e-12);
    for (cplx z : lift) CHECK(std::abs(z.real()) < 1e-12);
}

TEST_CASE("tract ladder is symmetric and starts its levels at 2^k pi i") {
    const TractBoundary t = build_tract(exp_lift(koch_generator(kPi / 4.0, 2)), -2, 4);
    CHECK(TractBoundary::level_start(1) == cplx(0.0, kTwoPi));
    CHECK(std::abs(t.gamma_plus.front() - TractBoundary::level_start(-2)) < 1e-12);
    CHECK(std::abs(t.gamma_plus.back() - TractBoundary::level_start(5)) < 1e-9);
    const std::size_t n = t.full_curve.size();
    CHECK(std::abs(t.full_curve.front() + t.full_curve.back()) < 1e-9);
    CHECK(is_simple(t.full_curve, false));
    CHECK(n == 2 * t.gamma_plus.size() + 1);
}

TEST_CASE("box counting recovers the dimension of a segment and a Koch curve") {
    Polyline seg{{0.0, 0.0}, {1.0, 0.0}};
    CHECK(box_count_dim(seg, false, 1e-3, 1e-1, 8).dimension == doctest::Approx(1.0).epsilon(0.02));
    const GeneratorCurve g = koch_generator(kPi / 3.0, 6);
    const MdimEstimate m = box_count_dim(g.vertices, true, 0.0014, 0.35, 12);
    CHECK(std::abs(m.dimension - koch_similarity_dimension(kPi / 3.0)) <= 0.06);
}

TEST_CASE("polyline text round trip") {
    const Polyline p{{1.0, 0.0}, {0.25, -3.5}, {1e-9, 7.0}};
    std::stringstream ss;
    write_polyline(ss, p);
    const Polyline q = read_polyline(ss);
    REQUIRE(q.size() == p.size());
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(q[i] == p[i]);
}

TEST_CASE("segment intersection and simplicity") {
    CHECK(segments_intersect({0, 0}, {1, 1}, {0, 1}, {1, 0}));
    CHECK_FALSE(segments_intersect({0, 0}, {1, 0}, {0, 1}, {1, 1}));
    const Polyline square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(is_simple(square, true));
    CHECK(signed_area(square) == doctest::Approx(1.0));
    CHECK(winding_number(square, {0.5, 0.5}) == 1);
}

TEST_CASE("linear fit is exact on a line") {
    const auto f = linear_fit({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 5.0, 7.0});
    CHECK(f[0] == doctest::Approx(1.0));
    CHECK(f[1] == doctest::Approx(2.0));
    CHECK(f[3] == doctest::Approx(0.0));
}
