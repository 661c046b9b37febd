#include "tractdim/polyline.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>

namespace tractdim {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidParameter: return "invalid-parameter";
        case ErrorKind::Geometry: return "geometry";
        case ErrorKind::Resource: return "resource";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Resolution: return "resolution";
        case ErrorKind::Construction: return "construction";
        case ErrorKind::Convergence: return "convergence";
        case ErrorKind::ChartRejected: return "chart-rejected";
        case ErrorKind::Quadrature: return "quadrature";
        case ErrorKind::Range: return "range";
        case ErrorKind::DataQuality: return "data-quality";
        case ErrorKind::UnstableSpectrum: return "unstable-spectrum";
        case ErrorKind::Singularity: return "singularity";
        case ErrorKind::RTooSmall: return "R-too-small";
        case ErrorKind::NTooSmall: return "N-too-small";
        case ErrorKind::NoConvergence: return "no-convergence";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

namespace {

double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }

int orient(cplx a, cplx b, cplx c) {
    const double v = cross(b - a, c - a);
    const double scale = std::abs(b - a) * std::abs(c - a);
    if (std::abs(v) <= 1e-14 * scale) return 0;
    return v > 0 ? 1 : -1;
}

bool on_segment(cplx a, cplx b, cplx p) {
    return std::min(a.real(), b.real()) <= p.real() && p.real() <= std::max(a.real(), b.real()) &&
           std::min(a.imag(), b.imag()) <= p.imag() && p.imag() <= std::max(a.imag(), b.imag());
}

struct Box {
    double x0, x1, y0, y1;
    bool overlaps(const Box& o) const {
        return x0 <= o.x1 && o.x0 <= x1 && y0 <= o.y1 && o.y0 <= y1;
    }
};

Box merge(const Box& a, const Box& b) {
    return {std::min(a.x0, b.x0), std::max(a.x1, b.x1), std::min(a.y0, b.y0), std::max(a.y1, b.y1)};
}

struct Node {
    std::size_t lo, hi;  // edge range [lo, hi)
    Box box;
    std::unique_ptr<Node> left, right;
};

}  // namespace

int winding_number(std::span<const cplx> closed, cplx p) {
    // Crossing-based winding number (Sunday's algorithm).
    int wn = 0;
    const std::size_t n = closed.size();
    for (std::size_t i = 0; i < n; ++i) {
        const cplx a = closed[i];
        const cplx b = closed[(i + 1) % n];
        if (a.imag() <= p.imag()) {
            if (b.imag() > p.imag() && cross(b - a, p - a) > 0) ++wn;
        } else if (b.imag() <= p.imag() && cross(b - a, p - a) < 0) {
            --wn;
        }
    }
    return wn;
}

bool point_in_polygon(std::span<const cplx> closed, cplx p) {
    return winding_number(closed, p) != 0;
}

bool segments_intersect(cplx a, cplx b, cplx c, cplx d) {
    const int o1 = orient(a, b, c);
    const int o2 = orient(a, b, d);
    const int o3 = orient(c, d, a);
    const int o4 = orient(c, d, b);
    if (o1 * o2 < 0 && o3 * o4 < 0) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

bool is_simple(std::span<const cplx> pts, bool closed) {
    const std::size_t n = pts.size();
    if (n < 3) return !closed;
    const std::size_t edges = closed ? n : n - 1;
    auto edge_box = [&](std::size_t e) {
        const cplx a = pts[e];
        const cplx b = pts[(e + 1) % n];
        return Box{std::min(a.real(), b.real()), std::max(a.real(), b.real()),
                   std::min(a.imag(), b.imag()), std::max(a.imag(), b.imag())};
    };
    std::function<std::unique_ptr<Node>(std::size_t, std::size_t)> build =
        [&](std::size_t lo, std::size_t hi) {
            auto node = std::make_unique<Node>();
            node->lo = lo;
            node->hi = hi;
            if (hi - lo <= 8) {
                node->box = edge_box(lo);
                for (std::size_t e = lo + 1; e < hi; ++e) node->box = merge(node->box, edge_box(e));
            } else {
                const std::size_t mid = lo + (hi - lo) / 2;
                node->left = build(lo, mid);
                node->right = build(mid, hi);
                node->box = merge(node->left->box, node->right->box);
            }
            return node;
        };
    const auto root = build(0, edges);

    // Adjacent edges share one vertex; they only clash when they fold back onto each other.
    auto folds_back = [&](std::size_t first, std::size_t second) {
        const cplx v = pts[(first + 1) % n];
        const cplx u = pts[first] - v;
        const cplx w = pts[(second + 1) % n] - v;
        return std::abs(cross(u, w)) <= 1e-14 * std::abs(u) * std::abs(w) &&
               (u.real() * w.real() + u.imag() * w.imag()) > 0;
    };
    auto edges_cross = [&](std::size_t e, std::size_t f) {
        if (e == f) return false;
        if (e + 1 == f) return folds_back(e, f);
        if (f + 1 == e) return folds_back(f, e);
        if (closed && e == 0 && f == edges - 1) return folds_back(f, e);
        if (closed && f == 0 && e == edges - 1) return folds_back(e, f);
        return segments_intersect(pts[e], pts[(e + 1) % n], pts[f], pts[(f + 1) % n]);
    };

    std::function<bool(const Node&, const Node&)> clash = [&](const Node& a, const Node& b) {
        if (!a.box.overlaps(b.box)) return false;
        const bool a_leaf = !a.left;
        const bool b_leaf = !b.left;
        if (a_leaf && b_leaf) {
            for (std::size_t e = a.lo; e < a.hi; ++e) {
                for (std::size_t f = (&a == &b ? e + 1 : b.lo); f < b.hi; ++f) {
                    if (edges_cross(e, f)) return true;
                }
            }
            return false;
        }
        if (&a == &b) {
            return clash(*a.left, *a.left) || clash(*a.right, *a.right) || clash(*a.left, *a.right);
        }
        if (a_leaf || (!b_leaf && b.hi - b.lo > a.hi - a.lo)) {
            return clash(a, *b.left) || clash(a, *b.right);
        }
        return clash(*a.left, b) || clash(*a.right, b);
    };
    return !clash(*root, *root);
}

double distance_to_segment(cplx p, cplx a, cplx b) {
    const cplx ab = b - a;
    const double len2 = std::norm(ab);
    if (len2 == 0.0) return std::abs(p - a);
    double s = ((p - a) * std::conj(ab)).real() / len2;
    s = std::clamp(s, 0.0, 1.0);
    return std::abs(p - (a + s * ab));
}

double distance_to_polyline(std::span<const cplx> pts, bool closed, cplx p) {
    const std::size_t n = pts.size();
    if (n == 0) return INFINITY;
    if (n == 1) return std::abs(p - pts[0]);
    double best = INFINITY;
    const std::size_t edges = closed ? n : n - 1;
    for (std::size_t e = 0; e < edges; ++e) {
        best = std::min(best, distance_to_segment(p, pts[e], pts[(e + 1) % n]));
    }
    return best;
}

Polyline densify(std::span<const cplx> pts, bool closed, double max_len) {
    Polyline out;
    const std::size_t n = pts.size();
    if (n == 0) return out;
    out.reserve(n);
    const std::size_t edges = closed ? n : n - 1;
    for (std::size_t e = 0; e < edges; ++e) {
        const cplx a = pts[e];
        const cplx b = pts[(e + 1) % n];
        const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(b - a) / max_len)));
        for (int j = 0; j < pieces; ++j) out.push_back(a + (b - a) * (double(j) / pieces));
    }
    if (!closed) out.push_back(pts[n - 1]);
    return out;
}

double perimeter(std::span<const cplx> pts, bool closed) {
    double len = 0.0;
    const std::size_t n = pts.size();
    if (n < 2) return 0.0;
    const std::size_t edges = closed ? n : n - 1;
    for (std::size_t e = 0; e < edges; ++e) len += std::abs(pts[(e + 1) % n] - pts[e]);
    return len;
}

double diameter_estimate(std::span<const cplx> pts) {
    // Exact diameter is attained on the convex hull; for the sizes used here the
    // bounding-box diagonal bracket [d/sqrt2, d] is refined by a pass from extremes.
    if (pts.empty()) return 0.0;
    double best = 0.0;
    std::vector<cplx> ext;
    auto by = [&](auto key) {
        return *std::max_element(pts.begin(), pts.end(),
                                 [&](cplx a, cplx b) { return key(a) < key(b); });
    };
    for (int k = 0; k < 16; ++k) {
        const cplx dir = std::polar(1.0, kPi * k / 16.0);
        ext.push_back(by([&](cplx z) { return (z * std::conj(dir)).real(); }));
        ext.push_back(by([&](cplx z) { return -(z * std::conj(dir)).real(); }));
    }
    for (const cplx a : ext)
        for (const cplx p : pts) best = std::max(best, std::abs(p - a));
    return best;
}

double signed_area(std::span<const cplx> closed) {
    double a = 0.0;
    const std::size_t n = closed.size();
    for (std::size_t i = 0; i < n; ++i) a += cross(closed[i], closed[(i + 1) % n]);
    return 0.5 * a;
}

std::array<double, 4> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw Error(ErrorKind::InvalidParameter, "linear fit needs two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw Error(ErrorKind::InvalidParameter, "linear fit with constant abscissa");
    const double b = sxy / sxx;
    const double a = my - b * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) ssr += std::pow(y[i] - a - b * x[i], 2);
    const double s = n > 2 ? std::sqrt(ssr / (n - 2)) : 0.0;
    return {a, b, s * std::sqrt(1.0 / n + mx * mx / sxx), s / std::sqrt(sxx)};
}

}  // namespace tractdim
