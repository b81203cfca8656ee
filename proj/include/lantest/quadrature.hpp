#pragma once

#include <cstddef>
#include <functional>

namespace lantest {

/// Controls for moment integration over the whole real line.
struct QuadratureConfig {
    double initial_halfwidth = 16.0;
    double max_halfwidth = 1 << 20;
    double tail_tol = 1e-9;  // extend [-T, T] until a shell contributes less
    double step_tol = 1e-8;  // node doubling stops below this change
    std::size_t initial_nodes = 256;
    std::size_t max_nodes = 1 << 23;
};

struct QuadratureResult {
    double value = 0.0;
    bool converged = false;
    double halfwidth = 0.0;
    std::size_t nodes = 0;
    double last_change = 0.0;
};

/// Trapezoid rule over [-T, T] for an integrand decaying at both ends.
/// T grows by doubling until the outermost shell is negligible, then the
/// node count doubles until successive results agree.
QuadratureResult integrate_real_line(const std::function<double(double)>& f,
                                     const QuadratureConfig& cfg = {});

} // namespace lantest
