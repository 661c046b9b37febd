#include "tractdim/curves.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "tractdim/parallel.hpp"
#include "tractdim/polyline.hpp"

namespace tractdim {

const char* to_string(Side side) { return side == Side::Right ? "right" : "left"; }

Side side_from_string(const std::string& s) {
    if (s == "right") return Side::Right;
    if (s == "left") return Side::Left;
    throw Error(ErrorKind::InvalidParameter, "side must be 'left' or 'right', got '" + s + "'");
}

namespace {

// Distinct points where the closed polyline meets [0, inf).
std::vector<double> positive_axis_hits(const Polyline& v) {
    std::vector<double> hits;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const cplx a = v[i];
        const cplx b = v[(i + 1) % n];
        if (a.imag() == 0.0 && a.real() >= 0.0) hits.push_back(a.real());
        if ((a.imag() < 0.0 && b.imag() > 0.0) || (a.imag() > 0.0 && b.imag() < 0.0)) {
            const double s = a.imag() / (a.imag() - b.imag());
            const double x = a.real() + s * (b.real() - a.real());
            if (x >= 0.0) hits.push_back(x);
        }
    }
    std::sort(hits.begin(), hits.end());
    std::vector<double> distinct;
    for (double h : hits) {
        if (distinct.empty() || std::abs(h - distinct.back()) > 1e-12 * std::max(1.0, h))
            distinct.push_back(h);
    }
    return distinct;
}

}  // namespace

GeneratorCurve circle_generator(int n_points) {
    if (n_points < 3) {
        throw Error(ErrorKind::InvalidParameter, "circle generator needs at least 3 points");
    }
    GeneratorCurve g;
    g.vertices.reserve(static_cast<std::size_t>(n_points));
    for (int k = 0; k < n_points; ++k) {
        g.vertices.push_back(std::polar(1.0, kTwoPi * k / n_points));
    }
    g.vertices[0] = 1.0;
    g.meta.family = "circle";
    g.meta.n_points = n_points;
    g.meta.similarity_dimension = 1.0;
    return g;
}

double koch_similarity_dimension(double theta) {
    return std::log(4.0) / std::log(2.0 + 2.0 * std::cos(theta));
}

GeneratorCurve koch_generator(double theta, int depth, const std::string& base,
                              std::size_t max_vertices) {
    if (!(theta > 0.0 && theta <= kPi / 2 + 1e-15)) {
        throw Error(ErrorKind::InvalidParameter, "koch angle must lie in (0, pi/2]");
    }
    if (depth < 0) throw Error(ErrorKind::InvalidParameter, "koch depth must be >= 0");
    Polyline poly;
    if (base == "triangle") {
        for (int k = 0; k < 3; ++k) poly.push_back(std::polar(1.0, kTwoPi * k / 3));
    } else if (base == "square") {
        for (int k = 0; k < 4; ++k) poly.push_back(std::polar(1.0, kTwoPi * k / 4));
    } else {
        throw Error(ErrorKind::InvalidParameter, "unknown koch base polygon '" + base + "'");
    }
    const double predicted =
        static_cast<double>(poly.size()) * std::pow(4.0, static_cast<double>(depth));
    if (predicted > static_cast<double>(max_vertices)) {
        throw Error(ErrorKind::Resource, "koch generator would need " +
                                             std::to_string(static_cast<long long>(predicted)) +
                                             " vertices, budget is " +
                                             std::to_string(max_vertices));
    }
    const double r = 1.0 / (2.0 + 2.0 * std::cos(theta));
    const cplx turn = std::polar(1.0, -theta);  // outward for a counterclockwise polygon
    for (int level = 0; level < depth; ++level) {
        Polyline next;
        next.reserve(poly.size() * 4);
        const std::size_t n = poly.size();
        for (std::size_t i = 0; i < n; ++i) {
            const cplx a = poly[i];
            const cplx b = poly[(i + 1) % n];
            const cplx e = b - a;
            const cplx p1 = a + r * e;
            next.push_back(a);
            next.push_back(p1);
            next.push_back(p1 + r * e * turn);
            next.push_back(b - r * e);
        }
        poly = std::move(next);
    }
    GeneratorMeta meta;
    meta.family = "koch";
    meta.theta = theta;
    meta.depth = depth;
    meta.base = base;
    meta.similarity_dimension = koch_similarity_dimension(theta);
    GeneratorCurve g = normalize_generator(std::move(poly), std::move(meta));
    if (!is_simple(g.vertices, true)) {
        throw Error(ErrorKind::Geometry, "koch curve self-intersects (not a Jordan curve)");
    }
    return g;
}

GeneratorCurve normalize_generator(Polyline v, GeneratorMeta meta) {
    if (v.size() < 3) throw Error(ErrorKind::Geometry, "generator needs at least 3 vertices");
    if (signed_area(v) < 0) std::reverse(v.begin(), v.end());
    if (winding_number(v, 0.0) != 1) {
        throw Error(ErrorKind::Geometry, "origin is not enclosed by the generator curve");
    }
    const auto hits = positive_axis_hits(v);
    if (hits.size() != 1) {
        throw Error(ErrorKind::Geometry,
                    "generator meets the positive real axis " + std::to_string(hits.size()) +
                        " times; exactly one crossing is required");
    }
    const double scale = hits.front();
    for (auto& z : v) z /= scale;
    // Make the crossing point a vertex and rotate the list so it comes first.
    const std::size_t n = v.size();
    std::size_t start = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(v[i] - 1.0) < 1e-12) {
            start = i;
            break;
        }
    }
    if (start == n) {
        for (std::size_t i = 0; i < n; ++i) {
            const cplx a = v[i];
            const cplx b = v[(i + 1) % n];
            if (a.imag() < 0.0 && b.imag() > 0.0) {
                v.insert(v.begin() + static_cast<std::ptrdiff_t>(i + 1), cplx(1.0, 0.0));
                start = i + 1;
                break;
            }
        }
    }
    if (start == v.size()) throw Error(ErrorKind::Geometry, "could not locate the crossing at 1");
    std::rotate(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(start), v.end());
    v[0] = 1.0;
    GeneratorCurve g;
    g.vertices = std::move(v);
    g.meta = std::move(meta);
    return g;
}

GeneratorCheck check_generator(const GeneratorCurve& sigma) {
    GeneratorCheck c;
    c.simple = is_simple(sigma.vertices, true);
    const auto hits = positive_axis_hits(sigma.vertices);
    c.ray_hits = static_cast<int>(hits.size());
    c.ray_hit_error = hits.empty() ? INFINITY : std::abs(hits.front() - 1.0);
    c.winding = winding_number(sigma.vertices, 0.0);
    return c;
}

void validate_generator(const GeneratorCurve& sigma) {
    const auto c = check_generator(sigma);
    if (!c.simple) throw Error(ErrorKind::Geometry, "generator is not a Jordan curve");
    if (c.ray_hits != 1 || c.ray_hit_error > 1e-9) {
        throw Error(ErrorKind::Geometry, "generator must meet [0, inf) exactly at 1");
    }
    if (std::abs(c.winding) != 1) {
        throw Error(ErrorKind::Geometry, "origin is not in the bounded complementary component");
    }
}

Polyline exp_lift(const GeneratorCurve& sigma) {
    const auto& v = sigma.vertices;
    if (v.size() < 3) throw Error(ErrorKind::InvalidParameter, "generator has too few vertices");
    if (std::abs(v[0] - 1.0) > 1e-9) {
        throw Error(ErrorKind::InvalidParameter, "generator must start at the point 1");
    }
    if (distance_to_polyline(v, true, 0.0) <= 1e-14) {
        throw Error(ErrorKind::Domain, "generator passes through the origin");
    }
    constexpr double kMaxStep = kPi / 8;
    Polyline lift;
    lift.reserve(v.size() + 1);
    lift.push_back(kTwoPi * kI);
    const std::size_t n = v.size();
    // Refine each edge until the argument moves by less than pi/8 per step.
    auto append_edge = [&](cplx a, cplx b, auto&& self, int guard) -> void {
        const cplx step = std::log(b / a);
        if (std::abs(step.imag()) >= kPi - 1e-12) {
            throw Error(ErrorKind::Resolution, "branch jump of pi between consecutive vertices");
        }
        if (std::abs(step.imag()) < kMaxStep || guard > 60) {
            lift.push_back(lift.back() + step);
            return;
        }
        const cplx mid = 0.5 * (a + b);
        self(a, mid, self, guard + 1);
        self(mid, b, self, guard + 1);
    };
    for (std::size_t i = 0; i < n; ++i) append_edge(v[i], v[(i + 1) % n], append_edge, 0);
    const cplx end = lift.back();
    if (std::abs(end - 2.0 * kTwoPi * kI) > 1e-9) {
        throw Error(ErrorKind::Geometry, "lift does not end at 4 pi i (winding number is not 1)");
    }
    lift.back() = 2.0 * kTwoPi * kI;
    return lift;
}

TractBoundary build_tract(const Polyline& gamma1, int k_min, int k_max, Side side) {
    if (!(k_min <= 0 && 0 < k_max)) {
        throw Error(ErrorKind::InvalidParameter, "tract range needs k_min <= 0 < k_max");
    }
    if (gamma1.size() < 2) throw Error(ErrorKind::InvalidParameter, "gamma1 is empty");
    if (std::abs(gamma1.front() - kTwoPi * kI) > 1e-9 ||
        std::abs(gamma1.back() - 2.0 * kTwoPi * kI) > 1e-9) {
        throw Error(ErrorKind::Construction, "gamma1 must run from 2 pi i to 4 pi i");
    }
    TractBoundary t;
    t.gamma1 = gamma1;
    t.k_min = k_min;
    t.k_max = k_max;
    t.side = side;
    const std::size_t m = gamma1.size();
    t.gamma_plus.reserve(static_cast<std::size_t>(k_max - k_min + 1) * (m - 1) + 1);
    for (int k = k_min; k <= k_max; ++k) {
        const double s = std::ldexp(1.0, k - 1);
        if (!t.gamma_plus.empty()) {
            const cplx start = s * gamma1.front();
            if (std::abs(start - t.gamma_plus.back()) > 1e-9 * std::max(1.0, std::abs(start))) {
                throw Error(ErrorKind::Construction, "ladder levels do not chain");
            }
        }
        for (std::size_t j = t.gamma_plus.empty() ? 0 : 1; j < m; ++j) {
            t.gamma_plus.push_back(s * gamma1[j]);
        }
    }
    t.full_curve.reserve(2 * t.gamma_plus.size() + 1);
    for (auto it = t.gamma_plus.rbegin(); it != t.gamma_plus.rend(); ++it) {
        t.full_curve.push_back(-*it);
    }
    t.full_curve.push_back(0.0);
    t.full_curve.insert(t.full_curve.end(), t.gamma_plus.begin(), t.gamma_plus.end());
    return t;
}

MdimEstimate box_count_dim(const Polyline& curve, bool closed, double scale_min, double scale_max,
                           int n_scales) {
    if (!(scale_min > 0.0 && scale_min < scale_max)) {
        throw Error(ErrorKind::InvalidParameter, "box counting needs 0 < scale_min < scale_max");
    }
    if (n_scales < 3) throw Error(ErrorKind::InvalidParameter, "box counting needs >= 3 scales");
    if (curve.size() < 2) throw Error(ErrorKind::InvalidParameter, "curve needs >= 2 vertices");
    const Polyline dense = densify(curve, closed, scale_min / 4.0);
    MdimEstimate est;
    est.scales.resize(static_cast<std::size_t>(n_scales));
    est.counts.resize(static_cast<std::size_t>(n_scales));
    const double ratio = std::log(scale_max / scale_min) / (n_scales - 1);
    for (int j = 0; j < n_scales; ++j) est.scales[j] = scale_min * std::exp(ratio * j);
    parallel_for(static_cast<std::size_t>(n_scales), [&](std::size_t j) {
        const double eps = est.scales[j];
        std::vector<std::pair<long long, long long>> cells;
        cells.reserve(dense.size());
        for (const cplx z : dense) {
            cells.emplace_back(static_cast<long long>(std::floor(z.real() / eps)),
                               static_cast<long long>(std::floor(z.imag() / eps)));
        }
        std::sort(cells.begin(), cells.end());
        est.counts[j] = std::unique(cells.begin(), cells.end()) - cells.begin();
    });
    // Least squares of log N against log eps.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = n_scales;
    for (int j = 0; j < n_scales; ++j) {
        const double x = std::log(est.scales[j]);
        const double y = std::log(static_cast<double>(est.counts[j]));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    double rss = 0.0;
    for (int j = 0; j < n_scales; ++j) {
        const double r = std::log(static_cast<double>(est.counts[j])) -
                         (intercept + slope * std::log(est.scales[j]));
        rss += r * r;
    }
    est.dimension = -slope;
    est.fit_residual = std::sqrt(rss / n);
    return est;
}

Polyline read_polyline(std::istream& in) {
    Polyline pts;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ss(line);
        double re = 0, im = 0;
        if (!(ss >> re)) continue;
        if (!(ss >> im)) {
            throw Error(ErrorKind::Io, "polyline line " + std::to_string(lineno) +
                                           ": expected two numbers 're im'");
        }
        pts.emplace_back(re, im);
    }
    return pts;
}

Polyline read_polyline_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open polyline file '" + path + "'");
    return read_polyline(in);
}

void write_polyline(std::ostream& out, const Polyline& pts) {
    out << std::setprecision(17);
    for (const cplx z : pts) out << z.real() << ' ' << z.imag() << '\n';
}

void write_polyline_file(const std::string& path, const Polyline& pts) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
    write_polyline(out, pts);
}

}  // namespace tractdim
