#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "tractdim/disk_chart.hpp"
#include "tractdim/polyline.hpp"
#include "tractdim/quadrature.hpp"
#include "tractdim/tract_chart.hpp"

namespace tractdim {

struct IntegralMeans {
    std::vector<double> plus, minus;  // per t
    std::vector<double> error;        // max of the two quadrature error estimates
    long evaluations = 0;
};

struct SpectrumOptions {
    double kappa = kDefaultKappa;
    double rel_tol = 1e-4;
    /// Initial panels per unit of R along the segment (features have size 1/R).
    double panels_per_R = 0.25;
    /// Largest number of dyadic splits of a panel.
    int max_depth = 12;
};

/// I_R^+(t) and I_R^-(t): integrals of |g_R'(1/R + iy)|^t over y in
/// [kappa, 1] and [-1, -kappa].
IntegralMeans integral_mean_tract(const TractChart& chart, const std::vector<double>& t,
                                  const SpectrumOptions& options = {});

/// Integral of |phi'(r e^{i s})|^t over s in [0, 2 pi], for every t.
std::vector<double> integral_mean_disk(const DiskChart& chart, double r, const std::vector<double>& t,
                                       double rel_tol = 1e-4);

/// Same, for a closed-form derivative supplied by the caller.
using DerivativeFn = std::function<cplx(cplx)>;
std::vector<double> integral_mean_disk(const DerivativeFn& derivative, double r,
                                       const std::vector<double>& t, double rel_tol = 1e-4);

struct SpectrumGrid {
    std::vector<double> t_values;
    std::vector<double> R_values;
    double kappa = kDefaultKappa;
    // [R index][t index]
    std::vector<std::vector<double>> I_plus, I_minus, beta, quad_err;
    std::vector<TractChart> charts;  // one per R

    static SpectrumGrid from_beta(std::vector<double> t, std::vector<double> R,
                                  std::vector<std::vector<double>> beta);
    std::string to_csv() const;
};

/// lower, when given, serves the lower half of every segment.
SpectrumGrid compute_tract_spectrum(std::shared_ptr<const TractMap> map, const std::vector<double>& t,
                                    const std::vector<double>& R, const SpectrumOptions& options = {},
                                    std::shared_ptr<const TractMap> lower = nullptr);

enum class BetaMethod { MaxTail, Extrapolate };
const char* to_string(BetaMethod m);
BetaMethod beta_method_from_string(const std::string& s);

struct BetaInfinity {
    std::vector<double> t_values;
    std::vector<double> beta_inf;  // reported method
    std::vector<double> max_tail, extrapolated;
    std::vector<double> spread;    // spread of the reported method
    std::vector<double> tail_spread, fit_spread;
    BetaMethod method = BetaMethod::Extrapolate;

    double at(double t) const;  // linear interpolation on the grid
    nlohmann::json to_json() const;
};

/// Throws Range when the R grid is too short and UnstableSpectrum when the
/// two estimators disagree by more than three combined spreads.
BetaInfinity beta_infinity(const SpectrumGrid& grid, BetaMethod method = BetaMethod::Extrapolate);

struct ThetaResult {
    double theta = 0.0;
    double t_lo = 0.0, t_hi = 0.0;
    double beta_at_theta = 0.0;
    bool below_one = false;
    double max_increase = 0.0;  // largest upward step of h on the grid
    nlohmann::json to_json() const;
};

/// Root of h(t) = beta_inf(t) - t + 1 by bisection on the piecewise linear
/// interpolant. Range error without a sign change, DataQuality error when h
/// rises by more than monotone_tol between grid points.
ThetaResult solve_theta(const BetaInfinity& beta, double monotone_tol = 0.02);

/// Classical spectrum of a disk map: slope of log I(r,t) against
/// -log(1 - r) over the given radii.
struct ClassicalBeta {
    std::vector<double> t_values, beta, std_error;
    std::vector<double> r_values;
    std::vector<std::vector<double>> means;  // [r][t]
};
ClassicalBeta classical_beta(const DiskChart& chart, const std::vector<double>& r,
                             const std::vector<double>& t, double rel_tol = 1e-4);

}  // namespace tractdim
