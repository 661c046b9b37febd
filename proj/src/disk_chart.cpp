#include "tractdim/disk_chart.hpp"

#include <algorithm>
#include <cmath>

#include "tractdim/parallel.hpp"
#include "tractdim/polyline.hpp"

namespace tractdim {

Polyline resample_closed(std::span<const cplx> pts, std::size_t n) {
    const std::size_t m = pts.size();
    if (n == 0 || n == m) return Polyline(pts.begin(), pts.end());
    Polyline out;
    if (n < m) {
        const std::size_t stride = (m + n - 1) / n;
        for (std::size_t i = 0; i < m; i += stride) out.push_back(pts[i]);
        return out;
    }
    const std::size_t per_edge = n / m;
    const std::size_t extra = n % m;
    for (std::size_t i = 0; i < m; ++i) {
        const cplx a = pts[i];
        const cplx b = pts[(i + 1) % m];
        const std::size_t k = per_edge + (i < extra ? 1 : 0);
        for (std::size_t j = 0; j < k; ++j) out.push_back(a + (b - a) * (double(j) / double(k)));
    }
    return out;
}

namespace {

// Largest distance between boundary midpoints of the zipper and the polyline.
double boundary_error(const Zipper& zp, std::span<const cplx> original, std::size_t max_samples) {
    const std::size_t n = zp.size();
    if (n < 4) return INFINITY;
    const std::size_t edges = n - 2;  // skip the two edges touching the point at infinity
    const std::size_t stride = std::max<std::size_t>(1, edges / max_samples);
    const std::size_t count = (edges + stride - 1) / stride;
    std::vector<double> err(count, 0.0);
    parallel_for(count, [&](std::size_t s) {
        const std::size_t i = 1 + s * stride;
        const double xa = zp.vertex_image(i);
        const double xb = zp.vertex_image(i + 1);
        const cplx p = zp.from_half_plane(cplx(0.5 * (xa + xb), 0.0)).value;
        err[s] = std::isfinite(p.real()) && std::isfinite(p.imag())
                     ? distance_to_polyline(original, true, p)
                     : INFINITY;
    });
    return *std::max_element(err.begin(), err.end());
}

}  // namespace

DiskChart fit_disk_chart(std::span<const cplx> boundary, cplx interior_point,
                         const DiskChartOptions& options) {
    if (boundary.size() < 3) throw Error(ErrorKind::Geometry, "boundary needs at least 3 vertices");
    if (options.resolution < 0 || (options.resolution > 0 && options.resolution < 3)) {
        throw Error(ErrorKind::InvalidParameter, "chart resolution must be 0 or at least 3");
    }
    if (!is_simple(boundary, true)) throw Error(ErrorKind::Geometry, "boundary is not a Jordan curve");
    if (!point_in_polygon(boundary, interior_point)) {
        throw Error(ErrorKind::Geometry, "interior point is not inside the boundary");
    }

    DiskChart chart;
    chart.boundary_.assign(boundary.begin(), boundary.end());
    chart.center_ = interior_point;
    chart.diameter_ = diameter_estimate(boundary);

    const Polyline pts = resample_closed(boundary, static_cast<std::size_t>(options.resolution));
    auto zp = std::make_shared<Zipper>(Zipper::fit(pts, interior_point, 0));
    chart.h_ = zp->to_half_plane(interior_point).value;
    chart.zipper_ = zp;
    chart.rotation_ = 1.0;
    const cplx d0 = chart.eval(0.0).derivative;
    chart.rotation_ = std::conj(d0) / std::abs(d0);

    chart.accuracy_ = boundary_error(*zp, boundary, 1000);
    chart.accepted_ = chart.accuracy_ <= options.tolerance * chart.diameter_;
    if (!chart.accepted_ && options.throw_on_reject) {
        throw Error(ErrorKind::Convergence,
                    "disk chart boundary error " + std::to_string(chart.relative_accuracy()) +
                        " exceeds tolerance; raise the resolution");
    }
    return chart;
}

// forward = Z^{-1} o D^{-1} with D(u) = conj(rotation) (u - h)/(u - conj h);
// the rotation is folded in on the disk side so forward'(0) > 0.
Zipper::Eval DiskChart::eval(cplx z) const {
    const cplx v = z * rotation_;
    const cplx hb = std::conj(h_);
    const cplx one_v = 1.0 - v;
    const cplx u = (h_ - hb * v) / one_v;
    const cplx du = rotation_ * (h_ - hb) / (one_v * one_v);
    const Zipper::Eval e = zipper_->from_half_plane(u);
    return {e.value, e.derivative * du};
}

cplx DiskChart::forward(cplx z) const { return eval(z).value; }

cplx DiskChart::derivative(cplx z) const { return eval(z).derivative; }

std::vector<double> DiskChart::prevertex_angles() const {
    std::vector<double> out;
    out.reserve(zipper_->size());
    for (std::size_t j = 0; j < zipper_->size(); ++j) {
        const double u = zipper_->vertex_image(j);
        const cplx z = std::isfinite(u) ? (u - h_) / (u - std::conj(h_)) / rotation_ : 1.0 / rotation_;
        out.push_back(std::arg(z));
    }
    return out;
}

cplx DiskChart::inverse(cplx w) const {
    const cplx u = zipper_->to_half_plane(w).value;
    return (u - h_) / (u - std::conj(h_)) / rotation_;
}

nlohmann::json DiskChart::to_json() const {
    auto pt = [](cplx z) { return nlohmann::json::array({z.real(), z.imag()}); };
    nlohmann::json j;
    j["kind"] = "disk";
    j["center"] = pt(center_);
    j["h"] = pt(h_);
    j["rotation"] = pt(rotation_);
    j["accuracy"] = accuracy_;
    j["diameter"] = diameter_;
    j["accepted"] = accepted_;
    auto& b = j["boundary"] = nlohmann::json::array();
    for (cplx z : boundary_) b.push_back(pt(z));
    j["zipper"] = zipper_->to_json();
    return j;
}

DiskChart DiskChart::from_json(const nlohmann::json& j) {
    auto pt = [](const nlohmann::json& v) { return cplx(v.at(0).get<double>(), v.at(1).get<double>()); };
    if (j.value("kind", "") != "disk") throw Error(ErrorKind::Io, "record is not a disk chart");
    DiskChart c;
    c.center_ = pt(j.at("center"));
    c.h_ = pt(j.at("h"));
    c.rotation_ = pt(j.at("rotation"));
    c.accuracy_ = j.at("accuracy").get<double>();
    c.diameter_ = j.at("diameter").get<double>();
    c.accepted_ = j.at("accepted").get<bool>();
    for (const auto& p : j.at("boundary")) c.boundary_.push_back(pt(p));
    c.zipper_ = std::make_shared<Zipper>(Zipper::from_json(j.at("zipper")));
    return c;
}

}  // namespace tractdim
