#pragma once

#include <cstdint>

#include "json.hpp"

#include "tractdim/disk_chart.hpp"
#include "tractdim/tract_chart.hpp"

namespace tractdim {

/// Outcome of one family of inequality checks. margin is the smallest
/// log-distance of a sampled ratio to the nearer bound after slack; a negative
/// value means a violation.
struct BoundCheck {
    long checked = 0;
    long violations = 0;
    double worst_margin = INFINITY;

    void record(double value, double lower, double upper, double slack);
    bool pass() const { return violations == 0; }
    nlohmann::json to_json() const;
};

struct DistortionReport {
    bool accepted = false;
    long samples = 0;
    BoundCheck koebe;       // disk distortion, disk charts only
    BoundCheck half_plane;  // |phi'(1+iy)| / |phi'(x+iy)| in [1/(8x), 2x^3]
    BoundCheck line_shift;  // integral ratio over [kappa T, T], pointwise and integrated
    BoundCheck quarter;     // |phi'(0)| / dist(phi(0), boundary) in [1, 4], disk charts only
    double derivative_error = 0.0;  // max relative error against finite differences
    double angle_error = 0.0;       // max deviation from a right angle of pushed-forward frames
    long derivative_violations = 0;

    bool pass() const {
        return accepted && koebe.pass() && half_plane.pass() && line_shift.pass() && quarter.pass() &&
               derivative_violations == 0;
    }
    nlohmann::json to_json() const;
};

struct DistortionOptions {
    int samples = 500;
    double slack = 0.01;
    std::uint64_t seed = 1;
    /// Relative tolerance for the analytic derivative against finite differences.
    double derivative_tolerance = 1e-5;
    int integrated_checks = 12;
};

DistortionReport verify_distortion(const DiskChart& chart, const DistortionOptions& options = {});
DistortionReport verify_distortion(const TractChart& chart, const DistortionOptions& options = {});

struct HolderFit {
    double alpha = 1.0;
    double exponent = 0.0;  // growth of max |phi'| against 1/(1-r); alpha = 1 - exponent, clamped
    double H_const = 0.0;
    double M_const = 0.0;
    double c = 4.0;         // consistency factor in H <= c M / alpha
    long sample_count = 0;
    bool holder = true;     // false when the fitted alpha is not positive
    bool consistent() const { return holder && H_const <= c * M_const / alpha; }
    nlohmann::json to_json() const;
};

/// Scale-invariant Hoelder constants of a disk chart from radial samples at
/// 1 - r = 2^-1 .. 2^-levels along n_directions rays.
HolderFit fit_holder(const DiskChart& chart, int n_directions = 256, int levels = 7);

}  // namespace tractdim
