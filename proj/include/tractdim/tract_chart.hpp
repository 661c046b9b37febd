#pragma once

#include <memory>
#include <span>

#include "json.hpp"

#include "tractdim/curves.hpp"
#include "tractdim/zipper.hpp"

namespace tractdim {

struct TractMapOptions {
    /// Points kept on the fully resolved copies of gamma1; 0 keeps all.
    int resolution = 0;
    /// Stride of the copies adjacent to the resolved ones; it grows by 4 per
    /// further level.
    int neighbor_stride = 8;
    /// Cap on the points of an adjacent copy, so deep generators do not pay
    /// for detail the fundamental period never sees. 0 disables the cap.
    int max_neighbor_points = 1536;
    /// Floor on the number of points per coarse copy.
    int min_copy_points = 24;
    /// Which side of the boundary keeps its level-1 copy at full resolution.
    /// A one-sided map is cheaper and serves evaluations on that side only.
    enum class Focus { Both, Upper, Lower } focus = Focus::Both;
};

struct MuEstimate {
    double mu = 0.0;
    double residual = INFINITY;
};

/// Conformal map phi from the right half-plane onto the tract, fixing 0 and
/// infinity, with phi(s i) = 2 pi i (s = +1 for the right side, -1 for the
/// left). It is evaluated on a truncated polygon inside a fundamental
/// half-annulus and continued by phi(mu z) = 2 phi(z).
class TractMap {
public:
    TractMap() = default;

    /// Direct evaluation of the truncated chart, no continuation.
    Zipper::Eval phi_direct(cplx zeta) const;
    /// Evaluation through the functional equation (requires mu).
    Zipper::Eval phi(cplx zeta) const;
    void phi(std::span<const cplx> zeta, std::span<Zipper::Eval> out) const;
    /// Preimage of a tract point under the truncated chart.
    cplx phi_inverse_direct(cplx z) const;

    double mu() const { return mu_.mu; }
    const MuEstimate& mu_estimate() const { return mu_; }
    void set_mu(const MuEstimate& mu) { mu_ = mu; }
    double base_radius(bool upper) const { return upper ? a_plus_ : a_minus_; }
    /// Number of dilations by mu used to bring zeta into the fundamental region.
    int level(cplx zeta) const;
    Side side() const { return side_; }
    double truncation_radius() const { return rho_; }
    const Zipper& zipper() const { return *zipper_; }
    std::size_t size() const { return zipper_->size(); }

    nlohmann::json to_json() const;
    static TractMap from_json(const nlohmann::json& j);

    friend TractMap fit_tract_map(const TractBoundary& tract, const TractMapOptions& options);

private:
    std::shared_ptr<const Zipper> zipper_;
    Side side_ = Side::Right;
    double x0_ = 0.0;      // zipper image of the boundary point 0
    double lambda_ = 1.0;  // w = x0 + lambda i zeta
    double a_plus_ = 1.0;
    double a_minus_ = 1.0;
    double rho_ = 0.0;
    MuEstimate mu_;
};

/// Polygon used for the truncated chart. Indices of the marked vertices are
/// returned through the out parameters.
Polyline truncated_tract_polygon(const TractBoundary& tract, const TractMapOptions& options,
                                 std::size_t& zero_index, std::size_t& plus_index,
                                 std::size_t& minus_index);

/// Fits the truncated chart and the scaling multiplier. Throws Construction
/// when the polygon cannot be built and NoConvergence when mu fails.
TractMap fit_tract_map(const TractBoundary& tract, const TractMapOptions& options = {});

/// Golden-section search for mu on the defect |phi(mu z)/2 - phi(z)| / |phi(z)|.
MuEstimate estimate_mu(const TractMap& map, double tolerance = 1e-2);

/// The rescaled map g_R(z) = phi(R z) / diam(phi(Q_R)) on Q_1 = (0,2) x (-1,1).
struct TractChart {
    double R = 1.0;
    double kappa = kDefaultKappa;
    double diam = 1.0;
    double m = 0.0;  // min |g| on Q_1 \ Q_kappa
    double M = 0.0;  // max |g(z1)| / |g(z2)| there
    std::shared_ptr<const TractMap> map;    // Im z >= 0, and everywhere when lower is null
    std::shared_ptr<const TractMap> lower;  // Im z < 0

    const TractMap& map_for(cplx zeta) const { return lower && zeta.imag() < 0.0 ? *lower : *map; }
    Zipper::Eval phi(cplx zeta) const { return map_for(zeta).phi(zeta); }
    Zipper::Eval g(cplx z) const;
    void g(std::span<const cplx> z, std::span<Zipper::Eval> out) const;
    bool accepted() const { return m > 0.0; }
    nlohmann::json to_json() const;
};

TractChart fit_tract_chart(std::shared_ptr<const TractMap> map, double R,
                           double kappa = kDefaultKappa, int samples_per_edge = 96,
                           std::shared_ptr<const TractMap> lower = nullptr);

}  // namespace tractdim
