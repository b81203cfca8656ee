#include "lantest/noise.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "lantest/errors.hpp"

namespace lantest {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

// Raw Student-t scores with l degrees of freedom. The leading factor is
// c = (l+1)/l; q = 1 + x^2/l.
ScoreValues student_raw_scores(double x, double l) {
    const double c = (l + 1.0) / l;
    const double q = 1.0 + x * x / l;
    ScoreValues s;
    s.m = -c * x / q;
    s.m_dot = -c * (1.0 - x * x / l) / (q * q);
    s.m_ddot = c * (2.0 * x / l) * (3.0 - x * x / l) / (q * q * q);
    s.n = 1.0 + x * s.m;
    s.n_dot = s.m + x * s.m_dot;
    s.n_ddot = 2.0 * s.m_dot + x * s.m_ddot;
    return s;
}

} // namespace

NoiseSpec NoiseSpec::gaussian(QuadratureConfig quad) {
    NoiseSpec n;
    n.family_ = NoiseFamily::Gaussian;
    n.quad_ = quad;
    return n;
}

NoiseSpec NoiseSpec::student_t(int dof, QuadratureConfig quad) {
    if (dof < 4)
        throw ConfigError("student_t: degrees of freedom must be an integer >= 4");
    NoiseSpec n;
    n.family_ = NoiseFamily::StudentT;
    n.dof_ = dof;
    n.scale_ = std::sqrt((dof - 2.0) / dof);
    n.log_norm_ = std::lgamma((dof + 1.0) / 2.0) - std::lgamma(dof / 2.0) -
                  0.5 * std::log(dof * std::numbers::pi);
    n.quad_ = quad;
    return n;
}

std::string NoiseSpec::name() const {
    if (family_ == NoiseFamily::Gaussian) return "gaussian";
    return "student-t(" + std::to_string(dof_) + ")";
}

double NoiseSpec::log_density(double x) const {
    if (family_ == NoiseFamily::Gaussian)
        return -0.5 * x * x - 0.5 * kLogTwoPi;
    // Standardized law: f(x) = f_raw(x / s) / s.
    double t = x / scale_;
    return log_norm_ -
           0.5 * (dof_ + 1.0) * std::log1p(t * t / dof_) - std::log(scale_);
}

double NoiseSpec::density(double x) const { return std::exp(log_density(x)); }

double NoiseSpec::raw_density(double x) const {
    if (family_ == NoiseFamily::Gaussian) return density(x);
    return std::exp(log_norm_ - 0.5 * (dof_ + 1.0) * std::log1p(x * x / dof_));
}

ScoreValues NoiseSpec::scores(double x) const {
    if (family_ == NoiseFamily::Gaussian) {
        ScoreValues s;
        s.m = -x;
        s.m_dot = -1.0;
        s.m_ddot = 0.0;
        s.n = 1.0 - x * x;
        s.n_dot = -2.0 * x;
        s.n_ddot = -2.0;
        return s;
    }
    // Scores of the standardized law follow from the raw ones by scaling:
    // M(x) = M_raw(x/s)/s, M'(x) = M_raw'(x/s)/s^2, M''(x) = M_raw''(x/s)/s^3.
    ScoreValues raw = student_raw_scores(x / scale_, dof_);
    ScoreValues s;
    s.m = raw.m / scale_;
    s.m_dot = raw.m_dot / (scale_ * scale_);
    s.m_ddot = raw.m_ddot / (scale_ * scale_ * scale_);
    s.n = 1.0 + x * s.m;
    s.n_dot = s.m + x * s.m_dot;
    s.n_ddot = 2.0 * s.m_dot + x * s.m_ddot;
    return s;
}

ScoreValues NoiseSpec::raw_scores(double x) const {
    if (family_ == NoiseFamily::Gaussian) return scores(x);
    return student_raw_scores(x, dof_);
}

double NoiseSpec::location_scale_density(double x, double a, double b) const {
    return std::exp(log_location_scale_density(x, a, b));
}

double NoiseSpec::log_location_scale_density(double x, double a, double b) const {
    if (!(b > 0.0))
        throw InvalidScaleShift("location_scale_density: scale must be > 0");
    return log_density((x - a) / b) - std::log(b);
}

double NoiseSpec::sample(RandomStream& rng) const {
    if (family_ == NoiseFamily::Gaussian) return rng.normal();
    // t = Z / sqrt(W / l) with W a sum of l squared normals (integer dof),
    // then standardized: eps = t * sqrt((l-2)/l) = Z * sqrt((l-2)/W).
    double z = rng.normal();
    double w = 0.0;
    for (int k = 0; k < dof_; ++k) {
        double g = rng.normal();
        w += g * g;
    }
    return z * std::sqrt((dof_ - 2.0) / w);
}

NoiseMoments NoiseSpec::moments() const {
    NoiseMoments mom;
    if (family_ == NoiseFamily::Gaussian) {
        // M(eps) = -eps, so i_j = E[eps^(j+2)] and k_j = -E[eps^(j+1)].
        mom.i0 = 1.0;
        mom.i1 = 0.0;
        mom.i2 = 3.0;
        mom.k0 = 0.0;
        mom.k1 = -1.0;
        mom.k2 = 0.0;
        mom.converged = true;
        return mom;
    }
    bool ok = true;
    auto integral = [&](int power, bool squared) {
        auto f = [&](double x) {
            double m = scores(x).m;
            double w = squared ? m * m : m;
            for (int k = 0; k < power; ++k) w *= x;
            return w * density(x);
        };
        QuadratureResult r = integrate_real_line(f, quad_);
        ok = ok && r.converged;
        return r.value;
    };
    mom.i0 = integral(0, true);
    mom.i1 = integral(1, true);
    mom.i2 = integral(2, true);
    mom.k0 = integral(0, false);
    mom.k1 = integral(1, false);
    mom.k2 = integral(2, false);
    mom.converged = ok;
    return mom;
}

AuditReport NoiseSpec::audit_regularity() const {
    AuditReport rep;
    rep.family = name();
    const double tol = 1e-6;
    bool ok = true;

    auto quad_of = [&](auto&& integrand) {
        return integrate_real_line(integrand, quad_).value;
    };
    auto add = [&](std::string name, double value, double target) {
        bool pass = std::abs(value - target) <= tol;
        ok = ok && pass;
        rep.functionals.push_back({std::move(name), value, target, tol, pass});
    };

    // Integration-by-parts identities of any smooth unit-variance law.
    add("E[M]", quad_of([&](double x) { return scores(x).m * density(x); }), 0.0);
    add("E[eps M]", quad_of([&](double x) { return x * scores(x).m * density(x); }),
        -1.0);
    add("E[M' + M^2]",
        quad_of([&](double x) {
            ScoreValues s = scores(x);
            return (s.m_dot + s.m * s.m) * density(x);
        }),
        0.0);
    add("E[eps (M' + M^2)]",
        quad_of([&](double x) {
            ScoreValues s = scores(x);
            return x * (s.m_dot + s.m * s.m) * density(x);
        }),
        0.0);
    add("E[eps^2 (M' + M^2)]",
        quad_of([&](double x) {
            ScoreValues s = scores(x);
            return x * x * (s.m_dot + s.m * s.m) * density(x);
        }),
        2.0);

    add("mass", quad_of([&](double x) { return density(x); }), 1.0);
    add("mean", quad_of([&](double x) { return x * density(x); }), 0.0);
    add("variance", quad_of([&](double x) { return x * x * density(x); }), 1.0);

    // Sup norms over a dense grid; the closed-form bounds apply to the raw
    // (unstandardized) law.
    const double lo = -50.0, hi = 50.0, step = 1e-3;
    double sup_mdot = 0.0, sup_mddot = 0.0, sup_xmddot = 0.0, sup_nddot = 0.0;
    for (double x = lo; x <= hi; x += step) {
        ScoreValues s = raw_scores(x);
        sup_mdot = std::max(sup_mdot, std::abs(s.m_dot));
        sup_mddot = std::max(sup_mddot, std::abs(s.m_ddot));
        sup_xmddot = std::max(sup_xmddot, std::abs(x * s.m_ddot));
        sup_nddot = std::max(sup_nddot, std::abs(s.n_ddot));
    }
    auto add_bound = [&](std::string name, double sup, double bound) {
        bool pass = std::isnan(bound) ? true : sup <= bound;
        ok = ok && pass;
        rep.sup_norms.push_back({std::move(name), sup, bound, pass});
    };
    if (family_ == NoiseFamily::Gaussian) {
        add_bound("sup|M'|", sup_mdot, 1.0);
        add_bound("sup|M''|", sup_mddot, 0.0);
        add_bound("sup|x M''|", sup_xmddot, 0.0);
        add_bound("sup|N''|", sup_nddot, 2.0);
    } else {
        const double l = dof_;
        double b_mdot = 3.0 * (l + 1.0) / (2.0 * l);
        double b_mddot = 4.0 * (l + 1.0) * std::sqrt(l) / (l * l);
        double b_xmddot = 14.0 * (l + 1.0) / l;
        add_bound("sup|M'|", sup_mdot, b_mdot);
        add_bound("sup|M''|", sup_mddot, b_mddot);
        add_bound("sup|x M''|", sup_xmddot, b_xmddot);
        // N'' = 2 M' + x M'', so its sup is controlled by the two above.
        add_bound("sup|N''|", sup_nddot, 2.0 * b_mdot + b_xmddot);
    }

    rep.all_pass = ok;
    return rep;
}

double power_sum_bound(double a, double b, double xi) {
    if (a < 0.0 || b < 0.0 || xi < 2.0)
        throw std::domain_error("power_sum_bound: need a, b >= 0 and xi >= 2");
    return std::pow(2.0, xi - 1.0) * (std::pow(a, xi) + std::pow(b, xi));
}

} // namespace lantest
