#include "lantest/lan.hpp"

#include <cmath>

#include "lantest/errors.hpp"
#include "lantest/stats.hpp"

namespace lantest {

double u_term(const ModelSpec& model, const LocalAlternative& alt,
              const NoiseSpec& noise, std::span<const double> z, double eps,
              int n) {
    double sigma = model.scale_fn(model.theta, z);
    if (!(sigma > 0.0)) throw ScaleNotPositive("u_term: sigma <= 0");
    double m = noise.scores(eps).m;
    double root_n = std::sqrt(static_cast<double>(n));
    return -(alt.h * m * alt.g(z) / sigma +
             alt.h_prime * (m * eps + 1.0) * alt.s(z) / sigma) /
           root_n;
}

CentralSequenceReport central_sequence(const SeriesPath& path,
                                       const ModelSpec& model,
                                       const LocalAlternative& alt,
                                       const NoiseSpec& noise,
                                       std::span<const double> params) {
    const std::size_t ell = model.rho.size();
    if (params.size() != ell + model.theta.size())
        throw ConfigError("central_sequence: parameter length mismatch");
    auto rho = params.first(ell);
    auto theta = params.subspan(ell);

    CentralSequenceReport rep;
    rep.u_terms.resize(path.size());
    const double inv_root_n = 1.0 / std::sqrt(static_cast<double>(path.size()));
    double r = 0.0, q = 0.0;
    for (std::size_t i = 0; i < path.size(); ++i) {
        auto z = path.z(i);
        double sigma = model.scale_fn(theta, z);
        if (!(sigma > 0.0))
            throw ScaleNotPositive("central_sequence: sigma <= 0");
        double eps = (path.y[i] - model.mean_fn(rho, z)) / sigma;
        double m = noise.scores(eps).m;
        double rterm = -inv_root_n * alt.h * m * alt.g(z) / sigma;
        double qterm = -inv_root_n * alt.h_prime * (m * eps + 1.0) * alt.s(z) / sigma;
        r += rterm;
        q += qterm;
        rep.u_terms[i] = rterm + qterm;
    }
    rep.r_part = r;
    rep.q_part = q;
    rep.v = r + q;
    return rep;
}

TauExpectations tau_expectations(const SeriesPath& path, const ModelSpec& model,
                                 const LocalAlternative& alt,
                                 std::span<const double> theta) {
    TauExpectations e;
    for (std::size_t i = 0; i < path.size(); ++i) {
        auto z = path.z(i);
        double sigma = model.scale_fn(theta, z);
        if (!(sigma > 0.0))
            throw ScaleNotPositive("tau_expectations: sigma <= 0");
        double g = alt.g(z) / sigma;
        double s = alt.s(z) / sigma;
        e.g_over_sigma_sq += g * g;
        e.s_over_sigma_sq += s * s;
        e.gs_over_sigma2 += g * s;
    }
    const auto n = static_cast<double>(path.size());
    e.g_over_sigma_sq /= n;
    e.s_over_sigma_sq /= n;
    e.gs_over_sigma2 /= n;
    return e;
}

double tau_squared(const LocalAlternative& alt, const NoiseMoments& moments,
                   const TauExpectations& expectations) {
    double t2 = alt.h * alt.h * moments.i0 * expectations.g_over_sigma_sq +
                alt.h_prime * alt.h_prime * (moments.i2 - 1.0) *
                    expectations.s_over_sigma_sq +
                2.0 * alt.h * alt.h_prime * moments.i1 * expectations.gs_over_sigma2;
    if (t2 < 0.0)
        throw NegativeTau2("tau_squared: quadratic form came out negative");
    return t2;
}

LikelihoodRatio log_likelihood_ratio(const SeriesPath& path,
                                     const ModelSpec& model,
                                     const LocalAlternative& alt,
                                     const NoiseSpec& noise) {
    std::vector<double> params(model.rho);
    params.insert(params.end(), model.theta.begin(), model.theta.end());
    return log_likelihood_ratio_at(path, model, alt, noise, params);
}

LikelihoodRatio log_likelihood_ratio_at(const SeriesPath& path,
                                        const ModelSpec& model,
                                        const LocalAlternative& alt,
                                        const NoiseSpec& noise,
                                        std::span<const double> params) {
    const std::size_t ell = model.rho.size();
    if (params.size() != ell + model.theta.size())
        throw ConfigError("log_likelihood_ratio: parameter length mismatch");
    auto rho = params.first(ell);
    auto theta = params.subspan(ell);

    LikelihoodRatio out;
    out.g_terms.resize(path.size());
    const double inv_root_n = 1.0 / std::sqrt(static_cast<double>(path.size()));
    double lambda = 0.0;
    for (std::size_t i = 0; i < path.size(); ++i) {
        auto z = path.z(i);
        double sigma = model.scale_fn(theta, z);
        if (!(sigma > 0.0))
            throw ScaleNotPositive("log_likelihood_ratio: sigma <= 0");
        double eps = (path.y[i] - model.mean_fn(rho, z)) / sigma;
        double alpha = alt.h * inv_root_n * alt.g(z) / sigma;
        double beta = 1.0 + alt.h_prime * inv_root_n * alt.s(z) / sigma;
        if (!(beta > 0.0))
            throw InvalidScaleShift("log_likelihood_ratio: scale shift <= 0");
        // log g as a difference of log densities; never ratio-then-log.
        double log_g =
            noise.log_location_scale_density(eps, alpha, beta) -
            noise.log_density(eps);
        lambda += log_g;
        out.g_terms[i] = std::exp(log_g);
    }
    out.lambda = lambda;
    return out;
}

ConditionChecks condition_checks(std::span<const double> g_terms, double v) {
    ConditionChecks c;
    double sum = 0.0, sum_sq = 0.0, max_abs = 0.0;
    for (double g : g_terms) {
        double d = g - 1.0;
        sum += d;
        sum_sq += d * d;
        max_abs = std::max(max_abs, std::abs(d));
    }
    c.c1 = max_abs;
    c.c2 = sum_sq;
    c.c3_gap = sum - v;
    return c;
}

TestDecision np_test(double v, double tau2, double alpha) {
    if (!(tau2 > 0.0)) throw NonpositiveTau2("np_test: tau^2 must be > 0");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("np_test: alpha must lie in (0, 1)");
    TestDecision d;
    d.statistic = v / std::sqrt(tau2);
    d.critical = upper_quantile(alpha);
    d.reject = d.statistic >= d.critical;
    return d;
}

double analytic_power(double tau2, double alpha, PowerConvention convention) {
    if (tau2 < 0.0) throw NegativeTau2("analytic_power: tau^2 must be >= 0");
    double z = upper_quantile(alpha);
    double shift =
        convention == PowerConvention::PaperTauSquared ? tau2 : std::sqrt(tau2);
    return 1.0 - normal_cdf(z - shift);
}

CentralSequenceReport evaluate_lan(const SeriesPath& path,
                                   const ModelSpec& model,
                                   const LocalAlternative& alt,
                                   const NoiseSpec& noise,
                                   std::span<const double> params, double tau2) {
    CentralSequenceReport rep = central_sequence(path, model, alt, noise, params);
    LikelihoodRatio lr = log_likelihood_ratio_at(path, model, alt, noise, params);
    ConditionChecks cc = condition_checks(lr.g_terms, rep.v);
    rep.tau2 = tau2;
    rep.lambda = lr.lambda;
    rep.lan_residual = lr.lambda - (rep.v - 0.5 * tau2);
    rep.c1 = cc.c1;
    rep.c2 = cc.c2;
    rep.c3_gap = cc.c3_gap;
    return rep;
}

} // namespace lantest
