#pragma once

#include <span>
#include <vector>

#include "lantest/model.hpp"
#include "lantest/noise.hpp"

namespace lantest {

/// Everything the LAN diagnostics need about one path: the central
/// sequence and its mean/scale split, the log-likelihood ratio, tau^2,
/// and the three condition statistics
///   c1 = max_i |g_i - 1|, c2 = sum (g_i - 1)^2, c3_gap = sum (g_i - 1) - V.
struct CentralSequenceReport {
    double v = 0.0;
    double r_part = 0.0;
    double q_part = 0.0;
    std::vector<double> u_terms;
    double tau2 = 0.0;
    double lambda = 0.0;
    double lan_residual = 0.0; // lambda - (v - tau2/2)
    double c1 = 0.0;
    double c2 = 0.0;
    double c3_gap = 0.0;
};

/// One summand of the central sequence:
///   U = -n^{-1/2} { h M(eps) G(z)/sigma + h' (eps M(eps) + 1) S(z)/sigma }.
double u_term(const ModelSpec& model, const LocalAlternative& alt,
              const NoiseSpec& noise, std::span<const double> z, double eps,
              int n);

/// Central sequence V = sum_i U_i evaluated at an arbitrary parameter
/// point (residuals recomputed there), split into the mean part r and the
/// scale part q. Only v, r_part, q_part, u_terms are filled.
CentralSequenceReport central_sequence(const SeriesPath& path,
                                       const ModelSpec& model,
                                       const LocalAlternative& alt,
                                       const NoiseSpec& noise,
                                       std::span<const double> params);

/// Path or population averages of the squared perturbation directions.
struct TauExpectations {
    double g_over_sigma_sq = 0.0;  // E[(G/sigma)^2]
    double s_over_sigma_sq = 0.0;  // E[(S/sigma)^2]
    double gs_over_sigma2 = 0.0;   // E[G S / sigma^2]
};

TauExpectations tau_expectations(const SeriesPath& path, const ModelSpec& model,
                                 const LocalAlternative& alt,
                                 std::span<const double> theta);

/// tau^2 = h^2 I0 E(G/sigma)^2 + h'^2 (I2 - 1) E(S/sigma)^2
///       + 2 h h' I1 E(G S / sigma^2); throws NegativeTau2 if it rounds
/// below zero.
double tau_squared(const LocalAlternative& alt, const NoiseMoments& moments,
                   const TauExpectations& expectations);

struct LikelihoodRatio {
    double lambda = 0.0;
    std::vector<double> g_terms;
};

/// Log-likelihood ratio of the locally perturbed model against the null,
/// Lambda = sum_i log g_i with
///   g_i = F(eps_i; alpha_i, beta_i) / f(eps_i),
///   alpha_i = h n^{-1/2} G/sigma, beta_i = 1 + h' n^{-1/2} S/sigma,
/// computed as a difference of log densities. Residuals are taken at the
/// supplied parameters (defaults: the model's own rho/theta, i.e. the null
/// truth). Throws InvalidScaleShift when some beta_i <= 0.
LikelihoodRatio log_likelihood_ratio(const SeriesPath& path,
                                     const ModelSpec& model,
                                     const LocalAlternative& alt,
                                     const NoiseSpec& noise);
LikelihoodRatio log_likelihood_ratio_at(const SeriesPath& path,
                                        const ModelSpec& model,
                                        const LocalAlternative& alt,
                                        const NoiseSpec& noise,
                                        std::span<const double> params);

struct ConditionChecks {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3_gap = 0.0;
};

ConditionChecks condition_checks(std::span<const double> g_terms, double v);

struct TestDecision {
    bool reject = false;
    double statistic = 0.0;
    double critical = 0.0;
};

/// One-sided test: reject when v / sqrt(tau2) >= upper-alpha normal
/// quantile (the boundary itself rejects).
TestDecision np_test(double v, double tau2, double alpha);

/// Two readings of the asymptotic power at level alpha:
/// PaperTauSquared uses 1 - Phi(Z(alpha) - tau^2); LeCamTau uses
/// 1 - Phi(Z(alpha) - tau), the value implied by V -> N(tau^2, tau^2)
/// under the local alternative. Monte Carlo arbitrates; LeCamTau is the
/// default convention.
enum class PowerConvention { PaperTauSquared, LeCamTau };

double analytic_power(double tau2, double alpha, PowerConvention convention);

/// Convenience: full report (V, Lambda, conditions, residual) for one path
/// at the given parameters with a precomputed tau^2.
CentralSequenceReport evaluate_lan(const SeriesPath& path,
                                   const ModelSpec& model,
                                   const LocalAlternative& alt,
                                   const NoiseSpec& noise,
                                   std::span<const double> params, double tau2);

} // namespace lantest
