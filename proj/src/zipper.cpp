#include "tractdim/zipper.hpp"

#include <cmath>

#include "tractdim/polyline.hpp"

namespace tractdim {

namespace {

// Principal square root written out so the sign of a zero imaginary part is
// honoured; points on the real axis then land on the correct side of a slit.
inline cplx csqrt(cplx z) {
    const double x = z.real();
    const double y = z.imag();
    const double r = std::sqrt(x * x + y * y);  // layers keep |z| near 1, no overflow
    if (r == 0.0) return {0.0, y};
    if (x >= 0.0) {
        const double s = std::sqrt(0.5 * (r + x));
        return {s, y / (2.0 * s)};
    }
    const double t = std::sqrt(0.5 * (r - x));
    return {std::abs(y) / (2.0 * t), std::copysign(t, y)};
}

inline cplx times_i(cplx z) { return {-z.imag(), z.real()}; }

// Plain complex quotient; the library operator guards against overflow and
// infinities at a large cost, and the layer arguments stay moderate.
inline cplx cdiv(cplx a, cplx b) {
    const double n = b.real() * b.real() + b.imag() * b.imag();
    return {(a.real() * b.real() + a.imag() * b.imag()) / n, (a.imag() * b.real() - a.real() * b.imag()) / n};
}

}  // namespace

Zipper::Layer Zipper::make_layer(cplx a, double scale) {
    const double n2 = std::norm(a);
    return Layer{a, a.real() / n2, n2 / a.imag(), scale};
}

Zipper Zipper::fit(std::span<const cplx> closed, cplx interior, std::size_t start) {
    const std::size_t n = closed.size();
    if (n < 3) throw Error(ErrorKind::Geometry, "zipper needs at least 3 boundary points");
    if (start >= n) throw Error(ErrorKind::InvalidParameter, "zipper start index out of range");
    Zipper zp;
    zp.start_ = start;
    zp.points_.resize(n);
    for (std::size_t k = 0; k < n; ++k) zp.points_[k] = closed[(start + k) % n];
    zp.z0_ = zp.points_[0];
    zp.z1_ = zp.points_[1];
    const cplx z0 = zp.z0_;
    const cplx z1 = zp.z1_;

    auto first = [&](cplx z) { return times_i(csqrt((z - z1) / (z - z0))); };

    const bool ccw = signed_area(zp.points_) > 0.0;
    const cplx edge = z1 - z0;
    const cplx inward = (ccw ? 1.0 : -1.0) * times_i(edge) * 1e-6;
    zp.side_ = first(0.5 * (z0 + z1) + inward).real() >= 0.0 ? 1.0 : -1.0;

    std::vector<cplx> w(n);
    for (std::size_t k = 2; k < n; ++k) w[k] = first(zp.points_[k]);
    cplx p = first(interior);

    zp.layers_.reserve(n > 2 ? n - 2 : 0);
    for (std::size_t j = 2; j < n; ++j) {
        const cplx a = w[j];
        if (!(a.imag() > 0.0) || !std::isfinite(a.real())) {
            throw Error(ErrorKind::Convergence,
                        "zipper point " + std::to_string(j) +
                            " left the upper half-plane; boundary is not Jordan or under-resolved");
        }
        Layer layer = make_layer(a, 1.0);
        const double ra = layer.ra;
        const double d2 = layer.d * layer.d;
        auto apply = [ra, d2](cplx z) {
            const cplx L = cdiv(z, cplx(1.0 - ra * z.real(), -ra * z.imag()));
            return times_i(csqrt(-(L * L + d2)));
        };
        // Rescale so the next point has unit modulus; otherwise the layers
        // drift geometrically and overflow on long crinkly boundaries.
        if (j + 1 < n) {
            const double m = std::abs(apply(w[j + 1]));
            if (m > 0.0 && std::isfinite(m)) layer.scale = 1.0 / m;
        }
        const double sc = layer.scale;
        zp.layers_.push_back(layer);
        for (std::size_t k = j + 1; k < n; ++k) w[k] = sc * apply(w[k]);
        p = sc * apply(p);
    }

    // Follow the start vertex (at infinity after the first map) through the layers.
    bool inf = true;
    double xe = 0.0;
    for (const Layer& layer : zp.layers_) {
        double L;
        if (inf) {
            if (layer.ra == 0.0) continue;
            L = -1.0 / layer.ra;
            inf = false;
        } else {
            const double den = 1.0 - layer.ra * xe;
            if (den == 0.0) {
                inf = true;
                continue;
            }
            L = xe / den;
        }
        xe = layer.scale * std::copysign(std::sqrt(L * L + layer.d * layer.d), L);
    }
    zp.end_infinite_ = inf;
    zp.x_end_ = xe;
    zp.finish(p);
    return zp;
}

void Zipper::finish(cplx p) {
    const cplx m = end_infinite_ ? p : p / (1.0 - p / x_end_);
    final_sign_ = m.real() > 0.0 ? 1.0 : -1.0;
    const cplx q = final_sign_ * m * m;
    if (!(q.imag() > 0.0)) {
        throw Error(ErrorKind::Convergence, "interior point did not land in the upper half-plane");
    }
}

Zipper::Eval Zipper::to_half_plane(cplx z) const {
    const cplx m = (z - z1_) / (z - z0_);
    const cplx dm = (z1_ - z0_) / ((z - z0_) * (z - z0_));
    const cplx s = csqrt(m);
    cplx w = times_i(s);
    cplx dw = times_i(dm / (2.0 * s));
    for (const Layer& layer : layers_) {
        const cplx den(1.0 - layer.ra * w.real(), -layer.ra * w.imag());
        const cplx L = cdiv(w, den);
        const cplx f = times_i(csqrt(-(L * L + layer.d * layer.d)));
        dw *= layer.scale * cdiv(L, f * den * den);
        w = layer.scale * f;
    }
    if (end_infinite_) {
        return {final_sign_ * w * w, final_sign_ * 2.0 * w * dw};
    }
    const cplx den = 1.0 - w / x_end_;
    const cplx M = w / den;
    return {final_sign_ * M * M, final_sign_ * 2.0 * M * dw / (den * den)};
}

Zipper::Eval Zipper::from_half_plane(cplx u) const {
    Eval e;
    from_half_plane(std::span<const cplx>(&u, 1), std::span<Eval>(&e, 1));
    return e;
}

void Zipper::from_half_plane(std::span<const cplx> u, std::span<Eval> out) const {
    // Points go through the layers in small groups so the square roots and
    // divisions of independent points overlap.
    constexpr std::size_t kGroup = 32;
    cplx w[kGroup], dw[kGroup];
    for (std::size_t base = 0; base < u.size(); base += kGroup) {
        const std::size_t g = std::min(kGroup, u.size() - base);
        for (std::size_t k = 0; k < g; ++k) {
            cplx uk = u[base + k];
            if (uk.imag() == 0.0) uk.imag(0.0);
            const cplx r = csqrt(uk);
            const cplx M = final_sign_ > 0 ? r : times_i(r);
            const cplx dM = cdiv(final_sign_ > 0 ? cplx(1.0) : kI, 2.0 * r);
            if (end_infinite_) {
                w[k] = M;
                dw[k] = dM;
            } else {
                const cplx den = 1.0 + M / x_end_;
                w[k] = cdiv(M, den);
                dw[k] = cdiv(dM, den * den);
            }
        }
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
            const double inv = 1.0 / it->scale;
            const double d = it->d;
            const double ra = it->ra;
            for (std::size_t k = 0; k < g; ++k) {
                cplx wk = w[k] * inv;
                if (wk.imag() == 0.0) wk.imag(0.0);
                // d^2 - w^2 as (d - w)(d + w): no cancellation near the slit
                // base, and the signed zeros put real w outside [-d, d] on
                // the correct side of the cut.
                const double a1 = d - wk.real(), b1 = -wk.imag();
                const double a2 = d + wk.real(), b2 = wk.imag();
                const cplx v = times_i(csqrt(cplx(a1 * a2 - b1 * b2, a1 * b2 + b1 * a2)));
                const cplx den = 1.0 + ra * v;
                dw[k] *= inv * cdiv(wk, v * den * den);
                w[k] = cdiv(v, den);
            }
        }
        for (std::size_t k = 0; k < g; ++k) {
            // Undo the first map: w = i sqrt(m), m = -w^2.
            const cplx m = -w[k] * w[k];
            const cplx one_m = 1.0 - m;
            const cplx z = cdiv(z1_ - z0_ * m, one_m);
            const cplx dz_dm = cdiv(z1_ - z0_, one_m * one_m);
            out[base + k] = {z, dz_dm * (-2.0 * w[k]) * dw[k]};
        }
    }
}

double Zipper::vertex_image(std::size_t j) const {
    const std::size_t n = points_.size();
    const std::size_t k = (j + n - start_ % n) % n;
    if (k == 0) return INFINITY;
    double x = 0.0;
    std::size_t next = 0;  // first layer still to apply
    if (k + 1 < n) {
        // Layer for point k+1 is layers_[k-1]; it sends the base of its slit to side*d.
        x = side_ * layers_[k - 1].d * layers_[k - 1].scale;
        next = k;
    } else {
        next = layers_.size();
    }
    for (std::size_t i = next; i < layers_.size(); ++i) {
        const double L = x / (1.0 - layers_[i].ra * x);
        x = layers_[i].scale * std::copysign(std::sqrt(L * L + layers_[i].d * layers_[i].d), L);
    }
    const double m = end_infinite_ ? x : x / (1.0 - x / x_end_);
    return final_sign_ * m * m;
}

nlohmann::json Zipper::to_json() const {
    nlohmann::json j;
    auto pt = [](cplx z) { return nlohmann::json::array({z.real(), z.imag()}); };
    j["start"] = start_;
    j["z0"] = pt(z0_);
    j["z1"] = pt(z1_);
    j["side"] = side_;
    j["end_infinite"] = end_infinite_;
    j["x_end"] = x_end_;
    j["final_sign"] = final_sign_;
    auto& layers = j["layers"] = nlohmann::json::array();
    for (const Layer& l : layers_) layers.push_back({l.a.real(), l.a.imag(), l.scale});
    auto& points = j["points"] = nlohmann::json::array();
    for (const cplx z : points_) points.push_back(pt(z));
    return j;
}

Zipper Zipper::from_json(const nlohmann::json& j) {
    auto pt = [](const nlohmann::json& v) { return cplx(v.at(0).get<double>(), v.at(1).get<double>()); };
    Zipper zp;
    zp.start_ = j.at("start").get<std::size_t>();
    zp.z0_ = pt(j.at("z0"));
    zp.z1_ = pt(j.at("z1"));
    zp.side_ = j.at("side").get<double>();
    zp.end_infinite_ = j.at("end_infinite").get<bool>();
    zp.x_end_ = j.at("x_end").get<double>();
    zp.final_sign_ = j.at("final_sign").get<double>();
    for (const auto& l : j.at("layers")) zp.layers_.push_back(make_layer(pt(l), l.at(2).get<double>()));
    for (const auto& p : j.at("points")) zp.points_.push_back(pt(p));
    return zp;
}

}  // namespace tractdim
