#pragma once

#include <array>
#include <span>
#include <vector>

#include "tractdim/common.hpp"

namespace tractdim {

/// Winding number of a closed polyline (closure implicit) around p.
int winding_number(std::span<const cplx> closed, cplx p);

bool point_in_polygon(std::span<const cplx> closed, cplx p);

/// Proper or touching intersection of segments [a,b] and [c,d].
bool segments_intersect(cplx a, cplx b, cplx c, cplx d);

/// True when no two non-adjacent edges meet. Uses a bounding-box hierarchy over
/// consecutive edges, which is near n log n for the curves built here.
bool is_simple(std::span<const cplx> pts, bool closed);

double distance_to_segment(cplx p, cplx a, cplx b);
double distance_to_polyline(std::span<const cplx> pts, bool closed, cplx p);

/// Subdivide edges uniformly until every edge is shorter than max_len.
Polyline densify(std::span<const cplx> pts, bool closed, double max_len);

double perimeter(std::span<const cplx> pts, bool closed);
double diameter_estimate(std::span<const cplx> pts);
double signed_area(std::span<const cplx> closed);

/// Least squares y = a + b x. Returns {a, b, stderr(a), stderr(b)}.
std::array<double, 4> linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace tractdim
