#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lantest/model.hpp"
#include "lantest/noise.hpp"

namespace lantest {

/// Least-squares AR coefficients from the path's own lags; rows with
/// pre-sample lags are excluded (regression starts at i = order, 0-based).
std::vector<double> lse_ar(const SeriesPath& path, int order);

/// Componentwise nearest point of the grid {k c / sqrt(n)}; exact half-step
/// ties round toward +inf.
std::vector<double> discretize(std::span<const double> estimate, int n, double c);

struct ConstantsMode {
    enum class Kind { Analytic, ErgodicAverage };
    Kind kind = Kind::Analytic;
    long n_aux = 1'000'000;
};

/// The four vectors of expectations that measure how the central sequence
/// shifts when estimated parameters replace the true ones:
///   K_j  = E[(dm/drho_j / sigma) (M'(eps) G / sigma)]
///   K'_j = E[(dm/drho_j / sigma) (N'(eps) S / sigma)]
///   J_k  = E[(dsigma/dtheta_k / sigma) (eps M'(eps) G / sigma)]
///   J'_k = E[(dsigma/dtheta_k / sigma) (eps N'(eps) S / sigma)]
struct CorrectionConstants {
    std::vector<double> k;
    std::vector<double> k_prime;
    std::vector<double> j;
    std::vector<double> j_prime;
    ConstantsMode mode;
};

/// Estimated along an auxiliary null path drawn from `rng`. Analytic mode
/// zeroes the entries that vanish structurally for symmetric noise
/// (E[N'] = 0 kills K', and J/J' are empty when the scale has no
/// parameters) and fills K_j from E[M'] times the ergodic average of the
/// state factor; ErgodicAverage mode averages all full integrands.
CorrectionConstants correction_constants(const ModelSpec& model,
                                         const LocalAlternative& alt,
                                         const NoiseSpec& noise,
                                         ConstantsMode mode, RandomStream& rng);

/// Same averages evaluated on an existing null path (shared auxiliary path).
CorrectionConstants correction_constants_on_path(const ModelSpec& model,
                                                 const LocalAlternative& alt,
                                                 const NoiseSpec& noise,
                                                 ConstantsMode mode,
                                                 const SeriesPath& aux);

/// Gradient of the central sequence in the parameters, evaluated at
/// `params` = [rho; theta] via the chain rule through the residuals.
/// Unscaled: divide by sqrt(n) for the ergodic limit.
std::vector<double> central_gradient(const SeriesPath& path,
                                     const ModelSpec& model,
                                     const LocalAlternative& alt,
                                     const NoiseSpec& noise,
                                     std::span<const double> params);

/// D_{h,h'}(n) = -[ sqrt(n)(rho_hat - rho0)^T (h K + h' K')
///              +  sqrt(n)(theta_hat - theta0)^T (h J + h' J') ],
/// with the discretized estimate in the role of rho_hat/theta_hat.
double d_n(std::span<const double> discrete, std::span<const double> true_params,
           const CorrectionConstants& constants, const LocalAlternative& alt,
           int n);

/// Copy of `discrete` with component j replaced by
/// discrete[j] + dn / gradient[j]. Throws GradientTooSmall when
/// |gradient[j]| <= 1e-8 max(1, |dn|).
std::vector<double> modified_estimator(std::span<const double> discrete,
                                       double dn,
                                       std::span<const double> gradient,
                                       int component);

/// How D_n's sqrt(n)(estimate - reference) factor is formed: against the
/// known true parameter (the simulation-study convention), or against the
/// undiscretized least-squares estimate when the truth is unavailable
/// (experimental deployment mode; measures the discretization shift only).
enum class DnReference { TrueParam, AuxiliaryEstimate };

struct EstimateSet {
    std::vector<double> lse;
    std::vector<double> discrete;
    std::vector<double> mde;
    int corrected_component = 0;
    double dn = 0.0;
    std::vector<double> gradient;
    bool fallback = false; // gradient too small; mde left at discrete
};

/// Full pipeline: least squares -> grid rounding -> gradient at the
/// discrete point -> D_n -> one-component correction.
EstimateSet estimate_pipeline(const SeriesPath& path, const ModelSpec& model,
                              const LocalAlternative& alt,
                              const NoiseSpec& noise,
                              const CorrectionConstants& constants, double c,
                              int corrected_component,
                              std::span<const double> true_params,
                              DnReference reference = DnReference::TrueParam);

} // namespace lantest
