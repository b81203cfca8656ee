#pragma once

// Test-only oracles, kept independent of the library's computation paths.

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "lantest/model.hpp"
#include "lantest/noise.hpp"

namespace oracle {

/// Least squares via Householder QR on the explicit design matrix
/// (independent of the library's normal-equation route).
inline std::vector<double> qr_least_squares(std::vector<std::vector<double>> a,
                                            std::vector<double> b) {
    const std::size_t rows = a.size();
    const std::size_t cols = a.empty() ? 0 : a[0].size();
    if (rows < cols) throw std::runtime_error("qr: underdetermined");
    for (std::size_t k = 0; k < cols; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < rows; ++i) norm += a[i][k] * a[i][k];
        norm = std::sqrt(norm);
        if (norm == 0.0) throw std::runtime_error("qr: rank deficient");
        double alpha = a[k][k] > 0 ? -norm : norm;
        std::vector<double> v(rows, 0.0);
        v[k] = a[k][k] - alpha;
        for (std::size_t i = k + 1; i < rows; ++i) v[i] = a[i][k];
        double vtv = 0.0;
        for (std::size_t i = k; i < rows; ++i) vtv += v[i] * v[i];
        if (vtv == 0.0) continue;
        for (std::size_t j = k; j < cols; ++j) {
            double dot = 0.0;
            for (std::size_t i = k; i < rows; ++i) dot += v[i] * a[i][j];
            double f = 2.0 * dot / vtv;
            for (std::size_t i = k; i < rows; ++i) a[i][j] -= f * v[i];
        }
        double dot = 0.0;
        for (std::size_t i = k; i < rows; ++i) dot += v[i] * b[i];
        double f = 2.0 * dot / vtv;
        for (std::size_t i = k; i < rows; ++i) b[i] -= f * v[i];
    }
    std::vector<double> x(cols, 0.0);
    for (std::size_t k = cols; k-- > 0;) {
        double s = b[k];
        for (std::size_t j = k + 1; j < cols; ++j) s -= a[k][j] * x[j];
        x[k] = s / a[k][k];
    }
    return x;
}

/// Joint log-density ratio of the locally perturbed model against the
/// null, summed over the conditional densities of each observation; works
/// directly from (y_i, z_i) without going through standardized residuals
/// and the location-scale form.
inline double joint_density_log_ratio(const lantest::SeriesPath& path,
                                      const lantest::ModelSpec& model,
                                      const lantest::LocalAlternative& alt,
                                      const lantest::NoiseSpec& noise) {
    const double inv_root_n =
        1.0 / std::sqrt(static_cast<double>(path.size()));
    double log_null = 0.0, log_alt = 0.0;
    for (std::size_t i = 0; i < path.size(); ++i) {
        auto z = path.z(i);
        double mu = model.mean_fn(model.rho, z);
        double sigma = model.scale_fn(model.theta, z);
        log_null +=
            noise.log_density((path.y[i] - mu) / sigma) - std::log(sigma);
        double mu_alt = mu + alt.h * inv_root_n * alt.g(z);
        double sigma_alt = sigma + alt.h_prime * inv_root_n * alt.s(z);
        if (!(sigma_alt > 0.0))
            throw std::runtime_error("oracle: perturbed scale <= 0");
        log_alt += noise.log_density((path.y[i] - mu_alt) / sigma_alt) -
                   std::log(sigma_alt);
    }
    return log_alt - log_null;
}

/// Central finite difference of a scalar function.
template <typename F>
double fd_derivative(F&& f, double x, double h = 1e-6) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Raw Student-t density at x from the direct closed form with explicit
/// half-integer gamma values (no lgamma), dof must be a small integer.
inline double student_raw_density(double x, int dof) {
    // gamma(k/2) by recursion from gamma(1/2) = sqrt(pi) and gamma(1) = 1.
    auto gamma_half = [](int twice) { // gamma(twice / 2)
        double g = (twice % 2 == 0) ? 1.0 : std::sqrt(std::numbers::pi);
        for (int t = (twice % 2 == 0) ? 2 : 1; t + 2 <= twice; t += 2)
            g *= t / 2.0;
        return g;
    };
    double c = gamma_half(dof + 1) /
               (std::sqrt(dof * std::numbers::pi) * gamma_half(dof));
    return c * std::pow(1.0 + x * x / dof, -(dof + 1) / 2.0);
}

} // namespace oracle
