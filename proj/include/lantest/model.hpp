#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lantest/noise.hpp"
#include "lantest/rng.hpp"

namespace lantest {

using StateFn = std::function<double(std::span<const double>)>;
using ParamFn =
    std::function<double(std::span<const double>, std::span<const double>)>;
using ParamGradFn = std::function<std::vector<double>(std::span<const double>,
                                                      std::span<const double>)>;

/// Parametric conditional mean/scale pair Y_i = m(rho, Z_i) + sigma(theta, Z_i) eps_i.
/// The lag state Z_i holds the last `mean_lags` values of Y (exogenous lag
/// slots are supported in the layout but the built-ins use none).
struct ModelSpec {
    enum class Builtin { Ar, Ar1Arch, Custom };

    int mean_lags = 1; // s: number of Y lags in Z_i
    int exo_lags = 0;  // q: exogenous lag slots (built-ins: 0)
    std::vector<double> rho;
    std::vector<double> theta;

    ParamFn mean_fn;
    ParamFn scale_fn;
    ParamGradFn mean_grad;
    ParamGradFn scale_grad;
    // Hessians as flattened row-major matrices; identically zero for the
    // built-ins (linear mean, parameter-free scale).
    ParamGradFn mean_hess;
    ParamGradFn scale_hess;

    Builtin builtin = Builtin::Custom;
    double arch_beta = 0.0;
    StateFn arch_b; // B(.) inside sqrt(1 + beta B); bounded default keeps sigma > 0

    int zdim() const { return mean_lags + exo_lags; }

    /// AR(m): m(rho, z) = sum_j rho_j z_j, sigma = 1.
    static ModelSpec ar(std::vector<double> rho);

    /// AR(1) with conditional scale sqrt(1 + beta B(z)); beta is a fixed
    /// structural constant, not an estimated parameter.
    static ModelSpec ar1_arch(double rho, double beta, StateFn b = nullptr);

    /// Throws NonstationaryModel if the built-in coefficient check fails.
    void validate() const;
};

/// Perturbation directions (G for the mean, S for the scale) and step
/// sizes (h, h') of the local alternative
///   m + h n^{-1/2} G,  sigma + h' n^{-1/2} S.
struct LocalAlternative {
    enum class Builtin { Ex1, Ex2, Ex3, Custom };

    double h = 1.0;
    double h_prime = 1.0;
    StateFn g_fn; // null means G == 0
    StateFn s_fn; // null means S == 0
    Builtin builtin = Builtin::Custom;
    double a = 0.0;

    double g(std::span<const double> z) const { return g_fn ? g_fn(z) : 0.0; }
    double s(std::span<const double> z) const { return s_fn ? s_fn(z) : 0.0; }

    static LocalAlternative ex1(double a, double h = 1.0, double h_prime = 1.0);
    static LocalAlternative ex2(double a, double h = 1.0, double h_prime = 1.0);
    static LocalAlternative ex3(double a, double h = 1.0, double h_prime = 1.0);
};

/// One simulated trajectory. z(i) is the lag state that generated y[i];
/// eps[i] is the innovation actually drawn. Under the null regime
/// y_i = m(rho, z_i) + sigma(theta, z_i) eps_i reproduces y exactly.
struct SeriesPath {
    enum class Regime { Null, Alternative };

    std::vector<double> y;
    std::vector<double> eps;
    std::vector<double> zflat;
    int zdim = 1;
    Regime regime = Regime::Null;
    int alt_n = 0; // sample size used in the n^{-1/2} drift scaling
    int burnin = 0;

    std::size_t size() const { return y.size(); }
    std::span<const double> z(std::size_t i) const {
        return {zflat.data() + i * static_cast<std::size_t>(zdim),
                static_cast<std::size_t>(zdim)};
    }
};

SeriesPath simulate_null(const ModelSpec& model, const NoiseSpec& noise, int n,
                         int burnin, RandomStream& rng);

/// Drift scaling uses the post-burn-in n (the sample the test will see).
SeriesPath simulate_alternative(const ModelSpec& model,
                                const LocalAlternative& alt,
                                const NoiseSpec& noise, int n, int burnin,
                                RandomStream& rng);

/// eps_i = (y_i - m(rho, z_i)) / sigma(theta, z_i) for each i.
std::vector<double> residuals(const ModelSpec& model, const SeriesPath& path,
                              std::span<const double> rho,
                              std::span<const double> theta);

} // namespace lantest
