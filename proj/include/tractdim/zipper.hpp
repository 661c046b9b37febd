#pragma once

#include <span>

#include "json.hpp"

#include "tractdim/common.hpp"

namespace tractdim {

/// Geodesic zipper: a composition of elementary slit maps taking the interior
/// of a closed polygon onto the upper half-plane. Vertex `start` goes to
/// infinity and vertex `start + 1` opens the first slit. Every layer has a
/// closed-form derivative, so derivatives of the whole map are exact up to
/// roundoff in the chain rule.
class Zipper {
public:
    struct Eval {
        cplx value;
        cplx derivative;
    };

    Zipper() = default;

    /// interior: any point strictly inside, used to pick the final quadrant.
    static Zipper fit(std::span<const cplx> closed, cplx interior, std::size_t start = 0);

    /// Polygon interior -> upper half-plane.
    Eval to_half_plane(cplx z) const;
    /// Upper half-plane -> polygon interior.
    Eval from_half_plane(cplx w) const;
    /// Batched form; out must have the size of w.
    void from_half_plane(std::span<const cplx> w, std::span<Eval> out) const;

    /// Image on the real line of vertex j of the fitted polygon (input indexing).
    /// The start vertex maps to infinity.
    double vertex_image(std::size_t j) const;

    std::size_t size() const { return points_.size(); }
    const Polyline& points() const { return points_; }  // zipper ordering
    std::size_t start() const { return start_; }

    nlohmann::json to_json() const;
    static Zipper from_json(const nlohmann::json& j);

private:
    struct Layer {
        cplx a;     // point opened by this layer
        double ra;  // Re a / |a|^2
        double d;   // |a|^2 / Im a
        double scale;
    };
    static Layer make_layer(cplx a, double scale);
    void finish(cplx interior_image);

    Polyline points_;
    std::size_t start_ = 0;
    cplx z0_, z1_;
    std::vector<Layer> layers_;
    double side_ = 1.0;  // side of 0 on which the unzipped boundary lies
    double x_end_ = 0.0;
    bool end_infinite_ = true;
    double final_sign_ = 1.0;
};

}  // namespace tractdim
