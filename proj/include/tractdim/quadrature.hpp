#pragma once

#include <functional>
#include <span>
#include <vector>

namespace tractdim {

struct QuadratureOptions {
    int initial_panels = 16;
    double rel_tol = 1e-4;
    double abs_tol = 0.0;
    int max_depth = 12;
};

struct QuadratureResult {
    std::vector<double> value;
    std::vector<double> error;  // per component, from the last dyadic split
    long evaluations = 0;
    bool converged = true;
};

/// Integrand filling out[0..m) at x; all components share the nodes.
using VectorIntegrand = std::function<void(double x, std::vector<double>& out)>;

/// Composite 8-point Gauss-Legendre on equal initial panels. A panel is split
/// in two while the halves disagree with the whole by more than rel_tol
/// (relative, per component). Panels are processed in parallel and summed in
/// panel order.
QuadratureResult integrate(const VectorIntegrand& f, std::size_t components, double a, double b,
                           const QuadratureOptions& options = {});

/// Batch integrand: fills y[i * components + k] for every node x[i].
using BatchIntegrand = std::function<void(std::span<const double> x, std::span<double> y)>;

QuadratureResult integrate_batch(const BatchIntegrand& f, std::size_t components, double a, double b,
                                 const QuadratureOptions& options = {});

}  // namespace tractdim
