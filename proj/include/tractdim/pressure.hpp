#pragma once

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "tractdim/spectra.hpp"
#include "tractdim/tract_chart.hpp"

namespace tractdim {

/// Inverse of the logarithmic change of variable of a tract in the
/// normalization used by the branch systems: psi(zeta) = phi(zeta / 2 pi),
/// so that the half-plane tract is the identity. Without maps it is the
/// identity itself.
class TractModel {
public:
    TractModel() = default;
    explicit TractModel(std::shared_ptr<const TractMap> upper, std::shared_ptr<const TractMap> lower = nullptr);

    Zipper::Eval eval(cplx xi) const;
    void eval(std::span<const cplx> xi, std::span<Zipper::Eval> out) const;
    /// Direct evaluation without the functional equation.
    Zipper::Eval eval_direct(cplx xi) const;
    double mu() const;
    bool identity() const { return !upper_; }
    Side side() const { return upper_ ? upper_->side() : Side::Right; }
    /// max |psi(z1)| / |psi(z2)| over Q_T \ Q_{kappa T}, from its boundary.
    double ratio_bound(double T, double kappa, int samples_per_edge = 96) const;

private:
    std::shared_ptr<const TractMap> upper_, lower_;
};

/// |psi(w)| / |psi'(w)|, the derivative of e^tau in the metric |dz|/|z|.
double cylindrical_derivative(const TractModel& model, cplx w);

struct BkzBranchSystem {
    double R = 0.0;
    double t = 0.0;
    cplx a0;
    double T = 0.0;
    long N = 0;
    std::vector<cplx> a, b;       // a_k and b_k = psi(a_k), k = 0..N
    std::vector<double> ratio;    // |psi'(a_k) / psi(a_k)|
    std::vector<double> terms;    // ratio^t
    double M_const = 1.0;         // all b_k in A(R/M, MR)
    double M_chart = 1.0;         // the chart's ratio bound on Q_T \ Q_kappa T
    double C_const = 0.0;         // R / (Im a0)^2
    int l = 0;                    // excluded sector
    std::vector<long> E;          // retained indices
    double annulus_inner = 0.0, annulus_outer = 0.0;
    double ray_angle = 0.0;
    int containment_checked = 0;

    nlohmann::json to_json() const;
};

struct BkzOptions {
    double kappa = kDefaultKappa;
    /// Number of V_k containment spot checks and samples per rectangle side.
    int containment_checks = 16;
    int containment_samples = 32;
};

/// Throws RTooSmall when |psi(log R + i y)| = R has no solution or the
/// containment check fails.
BkzBranchSystem build_bkz(const TractModel& model, double R, double t, const BkzOptions& options = {});

struct SigmaSums {
    double sigma = 0.0;    // Sigma_t over k = 0..N
    double sigma_l = 0.0;  // over k in E
};
SigmaSums sigma_sum(const BkzBranchSystem& system);
/// Re-weights an existing system at another exponent (same points, new l).
BkzBranchSystem reweight(const BkzBranchSystem& system, double t);

struct PressureReport {
    std::string kind;  // "bkz" or "strict"
    std::vector<double> t_values;
    std::vector<double> scan;                // R values or N values
    std::vector<std::vector<double>> sums;   // [t][scan]; Sigma_{t,l} or S(N)
    std::vector<std::vector<double>> full_sums;  // [t][scan]; Sigma_t (bkz only)
    std::vector<std::vector<bool>> attained;
    double threshold_A = 10.0;
    double best_lower_bound = NAN;
    std::vector<double> growth_exponent;     // per t
    std::vector<double> predicted_exponent;  // per t, when a spectrum was supplied
    std::vector<double> shape_constant;      // lower growth constant of log Sigma per t (bkz)
    bool monotone = true;
    std::string verdict = "inconclusive";    // bound-attained | strict-evidence | inconclusive
    nlohmann::json diagnostics = nlohmann::json::object();

    nlohmann::json to_json() const;
};

/// Sigma scan over (t, R). beta, when given, supplies beta_inf for the
/// predicted growth exponent 1 - t + beta(t) of Sigma_t against T.
PressureReport pressure_scan(const TractModel& model, const std::vector<double>& t_grid,
                             const std::vector<double>& R_grid, double threshold_A = 10.0,
                             const BetaInfinity* beta = nullptr, const BkzOptions& options = {});

/// Per-k terms of every system of a scan as CSV (R, t, k, a, b, term, in_E).
std::string bkz_terms_csv(const TractModel& model, const std::vector<double>& t_grid,
                          const std::vector<double>& R_grid, const BkzOptions& options = {});

struct StrictBranchSystem {
    long N = 0;
    double mu = 2.0;
    double S_lower0 = 0.0, S_upper0 = 0.0;
    double S_lower = 0.0, S_upper = 0.0;
    double s0 = 0.1;
    std::vector<std::pair<long, long>> index_sets;  // [k_lo, k_hi) per n = N..2N-1
    double propagation_residual = 0.0;
    int containment_checked = 0;

    long size() const;
    nlohmann::json to_json() const;
};

struct StrictOptions {
    double s0 = 0.1;
    int containment_checks = 12;
    int containment_samples = 24;
    int boundary_samples = 256;
};

/// Throws NTooSmall when mu^-N log S_upper >= s0 and Construction when a
/// sampled U_k leaves U.
StrictBranchSystem build_strict(const TractModel& model, long N, const StrictOptions& options = {});

/// S = min over w of sum over k in I of |psi'(xi_k) / psi(xi_k)|^theta with
/// xi_k = log w + 2 pi i k.
double strict_sum_at(const TractModel& model, const StrictBranchSystem& system, double theta,
                     const std::vector<cplx>& w_samples);

/// Default base points: a few moduli across (S_lower, S_upper) and arguments
/// away from the slit.
std::vector<cplx> strict_base_points(const StrictBranchSystem& system, Side side, int n_moduli = 2,
                                     int n_arguments = 2);

/// S(N) over the N grid, exponent of S against N and the verdict.
PressureReport strict_scan(const TractModel& model, double theta, const std::vector<long>& N_grid,
                           const StrictOptions& options = {}, int n_moduli = 2, int n_arguments = 2);

}  // namespace tractdim
