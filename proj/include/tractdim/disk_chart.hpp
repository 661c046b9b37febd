#pragma once

#include <memory>
#include <span>

#include "json.hpp"

#include "tractdim/common.hpp"
#include "tractdim/zipper.hpp"

namespace tractdim {

struct DiskChartOptions {
    /// Number of boundary points handed to the zipper. 0 keeps the input
    /// vertices; smaller values decimate, larger values subdivide edges.
    int resolution = 0;
    /// Largest accepted boundary error, relative to the boundary diameter.
    double tolerance = 0.02;
    /// When false a rejected chart is returned with accepted = false.
    bool throw_on_reject = true;
};

/// Riemann map of the unit disk onto the interior of a closed polyline,
/// normalized by forward(0) = center and forward'(0) > 0.
class DiskChart {
public:
    DiskChart() = default;

    cplx forward(cplx z) const;
    cplx derivative(cplx z) const;
    Zipper::Eval eval(cplx z) const;
    cplx inverse(cplx w) const;
    /// Arguments of the points on the unit circle that map to the fitted
    /// boundary vertices.
    std::vector<double> prevertex_angles() const;

    const Polyline& boundary() const { return boundary_; }
    cplx center() const { return center_; }
    double accuracy() const { return accuracy_; }          // absolute
    double relative_accuracy() const { return accuracy_ / diameter_; }
    double diameter() const { return diameter_; }
    bool accepted() const { return accepted_; }
    int resolution() const { return static_cast<int>(zipper_->size()); }

    nlohmann::json to_json() const;
    static DiskChart from_json(const nlohmann::json& j);

    friend DiskChart fit_disk_chart(std::span<const cplx> boundary, cplx interior_point,
                                    const DiskChartOptions& options);

private:
    std::shared_ptr<const Zipper> zipper_;
    Polyline boundary_;
    cplx center_;
    cplx h_;         // zipper image of the center
    cplx rotation_;  // unit factor making forward'(0) positive
    double accuracy_ = 0.0;
    double diameter_ = 1.0;
    bool accepted_ = false;
};

DiskChart fit_disk_chart(std::span<const cplx> boundary, cplx interior_point,
                         const DiskChartOptions& options = {});

/// Resample a closed polyline to about n points: stride decimation when it has
/// more vertices, uniform edge subdivision when it has fewer.
Polyline resample_closed(std::span<const cplx> pts, std::size_t n);

}  // namespace tractdim
