#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace tractdim {

using cplx = std::complex<double>;
using Polyline = std::vector<cplx>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

/// Default cutoff of the integral means, kappa^-1 = 1 + 2 pi.
inline constexpr double kDefaultKappa = 1.0 / (1.0 + kTwoPi);

enum class ErrorKind {
    InvalidParameter,
    Geometry,
    Resource,
    Domain,
    Resolution,
    Construction,
    Convergence,
    ChartRejected,
    Quadrature,
    Range,
    DataQuality,
    UnstableSpectrum,
    Singularity,
    RTooSmall,
    NTooSmall,
    NoConvergence,
    Io,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it onto an exit code without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace tractdim
