#include "lantest/quadrature.hpp"

#include <cmath>

namespace lantest {

namespace {

double trapezoid(const std::function<double(double)>& f, double lo, double hi,
                 std::size_t n) {
    double h = (hi - lo) / static_cast<double>(n);
    double s = 0.5 * (f(lo) + f(hi));
    for (std::size_t i = 1; i < n; ++i)
        s += f(lo + h * static_cast<double>(i));
    return s * h;
}

} // namespace

QuadratureResult integrate_real_line(const std::function<double(double)>& f,
                                     const QuadratureConfig& cfg) {
    QuadratureResult res;

    double t = cfg.initial_halfwidth;
    while (t < cfg.max_halfwidth) {
        // Coarse estimate of what the next doubling would add.
        double shell = std::abs(trapezoid(f, t, 2.0 * t, 64)) +
                       std::abs(trapezoid(f, -2.0 * t, -t, 64));
        if (shell < cfg.tail_tol) break;
        t *= 2.0;
    }
    res.halfwidth = t;

    std::size_t n = cfg.initial_nodes;
    double h = 2.0 * t / static_cast<double>(n);
    double sum = 0.5 * (f(-t) + f(t));
    for (std::size_t i = 1; i < n; ++i)
        sum += f(-t + h * static_cast<double>(i));
    double value = sum * h;

    while (n < cfg.max_nodes) {
        // Refine by adding midpoints of the current grid.
        double mids = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            mids += f(-t + h * (static_cast<double>(i) + 0.5));
        sum += mids;
        n *= 2;
        h *= 0.5;
        double next = sum * h;
        res.last_change = std::abs(next - value);
        value = next;
        if (res.last_change < cfg.step_tol) {
            res.converged = true;
            break;
        }
    }
    res.value = value;
    res.nodes = n;
    return res;
}

} // namespace lantest
