#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "tractdim/common.hpp"

namespace tractdim {

struct GeneratorMeta {
    std::string family;  // circle | koch | file
    int n_points = 0;
    double theta = 0.0;
    int depth = 0;
    std::string base;
    std::optional<double> similarity_dimension;
};

/// A closed polyline quasicircle through 1 that winds once around the origin.
struct GeneratorCurve {
    Polyline vertices;
    bool closed = true;
    GeneratorMeta meta;
};

enum class Side { Right, Left };

const char* to_string(Side side);
Side side_from_string(const std::string& s);

/// The dyadic ladder built from the exponential lift of a generator curve.
struct TractBoundary {
    Polyline gamma1;      // lift from 2 pi i to 4 pi i
    int k_min = 0;
    int k_max = 0;
    Polyline gamma_plus;  // union of 2^{k-1} gamma1, bottom to top
    Polyline full_curve;  // reverse(-gamma_plus), 0, gamma_plus (oriented upward)
    Side side = Side::Right;

    /// Boundary point where the ladder level k starts (2^k pi i).
    static cplx level_start(int k) { return std::ldexp(kPi, k) * kI; }
};

struct MdimEstimate {
    double dimension = 0.0;
    std::vector<double> scales;
    std::vector<long long> counts;
    double fit_residual = 0.0;
};

struct GeneratorCheck {
    bool simple = false;
    int ray_hits = 0;
    double ray_hit_error = 0.0;  // |hit - 1|
    int winding = 0;
};

GeneratorCurve circle_generator(int n_points);

inline constexpr std::size_t kDefaultMaxVertices = std::size_t{1} << 22;

/// Koch tent family: each edge is replaced depth times by four segments of
/// ratio 1/(2+2cos theta) with a bump of angle theta. base: "triangle" | "square".
GeneratorCurve koch_generator(double theta, int depth, const std::string& base = "triangle",
                              std::size_t max_vertices = kDefaultMaxVertices);

/// log 4 / log(2 + 2 cos theta).
double koch_similarity_dimension(double theta);

/// Normalize an arbitrary closed polyline (e.g. read from file) so it meets the
/// positive real axis exactly once, at 1, runs counterclockwise and starts there.
GeneratorCurve normalize_generator(Polyline vertices, GeneratorMeta meta);

GeneratorCheck check_generator(const GeneratorCurve& sigma);

/// Throws Geometry when any generator invariant fails.
void validate_generator(const GeneratorCurve& sigma);

/// Continuous branch of log(sigma) from 2 pi i to 4 pi i.
Polyline exp_lift(const GeneratorCurve& sigma);

TractBoundary build_tract(const Polyline& gamma1, int k_min, int k_max, Side side = Side::Right);

MdimEstimate box_count_dim(const Polyline& curve, bool closed, double scale_min, double scale_max,
                           int n_scales);

Polyline read_polyline(std::istream& in);
Polyline read_polyline_file(const std::string& path);
void write_polyline(std::ostream& out, const Polyline& pts);
void write_polyline_file(const std::string& path, const Polyline& pts);

}  // namespace tractdim
