#pragma once

#include <string>
#include <vector>

#include "lantest/quadrature.hpp"
#include "lantest/rng.hpp"

namespace lantest {

enum class NoiseFamily { Gaussian, StudentT };

/// Location score M = f'/f, scale score N(x) = 1 + x M(x), and their first
/// two derivatives, all at one evaluation point.
struct ScoreValues {
    double m = 0.0;
    double m_dot = 0.0;
    double m_ddot = 0.0;
    double n = 0.0;
    double n_dot = 0.0;
    double n_ddot = 0.0;
};

/// Moment functionals of the innovation law:
///   i_j = E[eps^j M(eps)^2],  k_j = E[eps^j M(eps)],  j in {0,1,2}.
struct NoiseMoments {
    double i0 = 0.0, i1 = 0.0, i2 = 0.0;
    double k0 = 0.0, k1 = 0.0, k2 = 0.0;
    bool converged = true;
};

struct AuditItem {
    std::string name;
    double value = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct AuditBound {
    std::string name;
    double sup_value = 0.0;
    double bound = 0.0; // NaN means report-only, always passes
    bool pass = false;
};

struct AuditReport {
    std::string family;
    std::vector<AuditItem> functionals; // integration-by-parts identities + mass/mean/variance
    std::vector<AuditBound> sup_norms;  // |M'|, |M''|, |x M''|, |N''| over a dense grid
    bool all_pass = false;
};

/// An i.i.d. innovation law with mean 0 and unit variance. Student-t is
/// stored by its integer degrees of freedom (>= 4 so the fourth moment is
/// finite) and exposed standardized: eps = t * sqrt((dof-2)/dof). The raw,
/// unstandardized t density is kept available for the closed-form bound
/// checks, which are stated for it.
///
/// Immutable after construction; every operation is pure except sample,
/// which mutates only the caller-owned stream.
class NoiseSpec {
public:
    static NoiseSpec gaussian(QuadratureConfig quad = {});
    static NoiseSpec student_t(int dof, QuadratureConfig quad = {});

    NoiseFamily family() const { return family_; }
    int dof() const { return dof_; }
    const QuadratureConfig& quadrature_cfg() const { return quad_; }
    std::string name() const;

    double density(double x) const;
    double log_density(double x) const;
    ScoreValues scores(double x) const;

    /// Unstandardized law (identical to density/scores for Gaussian).
    double raw_density(double x) const;
    ScoreValues raw_scores(double x) const;

    /// F(x; a, b) = (1/b) f((x - a) / b); rejects b <= 0.
    double location_scale_density(double x, double a, double b) const;
    double log_location_scale_density(double x, double a, double b) const;

    double sample(RandomStream& rng) const;

    /// I_j and K_j; closed forms for Gaussian, quadrature for Student-t.
    NoiseMoments moments() const;

    AuditReport audit_regularity() const;

private:
    NoiseSpec() = default;

    NoiseFamily family_ = NoiseFamily::Gaussian;
    int dof_ = 0;
    double scale_ = 1.0;    // sqrt((dof-2)/dof) for Student-t, 1 for Gaussian
    double log_norm_ = 0.0; // log C_dof for raw Student-t
    QuadratureConfig quad_;
};

/// 2^(xi-1) (a^xi + b^xi): a convexity majorant of (a+b)^xi for a, b >= 0
/// and xi >= 2. Exists as a numeric sanity oracle; nothing else calls it.
double power_sum_bound(double a, double b, double xi);

} // namespace lantest
