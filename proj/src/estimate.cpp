#include "lantest/estimate.hpp"

#include <cmath>

#include "lantest/errors.hpp"

namespace lantest {

std::vector<double> lse_ar(const SeriesPath& path, int order) {
    const auto n = static_cast<int>(path.size());
    if (order < 1) throw ConfigError("lse_ar: order must be >= 1");
    if (n <= order) throw SingularDesign("lse_ar: not enough observations");

    // Normal equations accumulated in one pass over the usable rows.
    const auto p = static_cast<std::size_t>(order);
    std::vector<double> xtx(p * p, 0.0), xty(p, 0.0);
    const auto& y = path.y;
    for (int i = order; i < n; ++i) {
        for (std::size_t r = 0; r < p; ++r) {
            double xr = y[static_cast<std::size_t>(i) - 1 - r];
            xty[r] += xr * y[static_cast<std::size_t>(i)];
            for (std::size_t s = r; s < p; ++s)
                xtx[r * p + s] += xr * y[static_cast<std::size_t>(i) - 1 - s];
        }
    }
    for (std::size_t r = 0; r < p; ++r)
        for (std::size_t s = 0; s < r; ++s) xtx[r * p + s] = xtx[s * p + r];

    // Cholesky with a relative pivot floor as the singularity test.
    double max_diag = 0.0;
    for (std::size_t r = 0; r < p; ++r)
        max_diag = std::max(max_diag, xtx[r * p + r]);
    const double floor = 1e-12 * std::max(max_diag, 1e-300);
    std::vector<double> chol(p * p, 0.0);
    for (std::size_t r = 0; r < p; ++r) {
        for (std::size_t s = 0; s <= r; ++s) {
            double sum = xtx[r * p + s];
            for (std::size_t k = 0; k < s; ++k)
                sum -= chol[r * p + k] * chol[s * p + k];
            if (r == s) {
                if (!(sum > floor))
                    throw SingularDesign("lse_ar: design matrix numerically singular");
                chol[r * p + r] = std::sqrt(sum);
            } else {
                chol[r * p + s] = sum / chol[s * p + s];
            }
        }
    }
    std::vector<double> tmp(p), out(p);
    for (std::size_t r = 0; r < p; ++r) {
        double sum = xty[r];
        for (std::size_t k = 0; k < r; ++k) sum -= chol[r * p + k] * tmp[k];
        tmp[r] = sum / chol[r * p + r];
    }
    for (std::size_t r = p; r-- > 0;) {
        double sum = tmp[r];
        for (std::size_t k = r + 1; k < p; ++k) sum -= chol[k * p + r] * out[k];
        out[r] = sum / chol[r * p + r];
    }
    return out;
}

std::vector<double> discretize(std::span<const double> estimate, int n, double c) {
    if (n < 1 || !(c > 0.0))
        throw ConfigError("discretize: need n >= 1 and c > 0");
    const double step = c / std::sqrt(static_cast<double>(n));
    std::vector<double> out(estimate.size());
    for (std::size_t i = 0; i < estimate.size(); ++i) {
        double k = std::floor(estimate[i] / step + 0.5); // half-ties toward +inf
        out[i] = k * step;
    }
    return out;
}

namespace {

void accumulate_constants(const ModelSpec& model, const LocalAlternative& alt,
                          const NoiseSpec& noise, const SeriesPath& aux,
                          bool analytic, CorrectionConstants& out) {
    const std::size_t ell = model.rho.size();
    const std::size_t p = model.theta.size();
    out.k.assign(ell, 0.0);
    out.k_prime.assign(ell, 0.0);
    out.j.assign(p, 0.0);
    out.j_prime.assign(p, 0.0);

    // Analytic mode: eps is independent of the state, so the score factor
    // integrates out through the moment functionals:
    //   E[M'] = -I0,  E[eps M'] = E[N'] = -I1,  E[eps N'] = 1 - I2.
    // Only the ergodic state averages remain; built-in zeros (symmetric
    // noise has I1 = 0) come out exact rather than as Monte Carlo noise.
    NoiseMoments mom;
    if (analytic) mom = noise.moments();
    const double e_mdot = -mom.i0;
    const double e_ndot = -mom.i1;
    const double e_eps_mdot = -mom.i1;
    const double e_eps_ndot = 1.0 - mom.i2;

    const auto n = static_cast<double>(aux.size());
    for (std::size_t i = 0; i < aux.size(); ++i) {
        auto z = aux.z(i);
        double sigma = model.scale_fn(model.theta, z);
        double g = alt.g(z) / sigma;
        double s = alt.s(z) / sigma;
        auto mg = model.mean_grad(model.rho, z);
        ScoreValues sc{};
        if (!analytic) sc = noise.scores(aux.eps[i]);
        for (std::size_t jdx = 0; jdx < ell; ++jdx) {
            double state = mg[jdx] / sigma;
            if (analytic) {
                out.k[jdx] += state * g * e_mdot;
                out.k_prime[jdx] += state * s * e_ndot;
            } else {
                out.k[jdx] += state * g * sc.m_dot;
                out.k_prime[jdx] += state * s * sc.n_dot;
            }
        }
        if (p > 0) {
            auto sg = model.scale_grad(model.theta, z);
            for (std::size_t kdx = 0; kdx < p; ++kdx) {
                double state = sg[kdx] / sigma;
                if (analytic) {
                    out.j[kdx] += state * g * e_eps_mdot;
                    out.j_prime[kdx] += state * s * e_eps_ndot;
                } else {
                    out.j[kdx] += state * g * aux.eps[i] * sc.m_dot;
                    out.j_prime[kdx] += state * s * aux.eps[i] * sc.n_dot;
                }
            }
        }
    }
    for (auto* vec : {&out.k, &out.k_prime, &out.j, &out.j_prime})
        for (double& x : *vec) x /= n;
}

} // namespace

CorrectionConstants correction_constants_on_path(const ModelSpec& model,
                                                 const LocalAlternative& alt,
                                                 const NoiseSpec& noise,
                                                 ConstantsMode mode,
                                                 const SeriesPath& aux) {
    model.validate();
    CorrectionConstants out;
    out.mode = mode;
    accumulate_constants(model, alt, noise, aux,
                         mode.kind == ConstantsMode::Kind::Analytic, out);
    return out;
}

CorrectionConstants correction_constants(const ModelSpec& model,
                                         const LocalAlternative& alt,
                                         const NoiseSpec& noise,
                                         ConstantsMode mode,
                                         RandomStream& rng) {
    model.validate();
    SeriesPath aux = simulate_null(model, noise, static_cast<int>(mode.n_aux),
                                   500, rng);
    return correction_constants_on_path(model, alt, noise, mode, aux);
}

std::vector<double> central_gradient(const SeriesPath& path,
                                     const ModelSpec& model,
                                     const LocalAlternative& alt,
                                     const NoiseSpec& noise,
                                     std::span<const double> params) {
    const std::size_t ell = model.rho.size();
    const std::size_t p = model.theta.size();
    if (params.size() != ell + p)
        throw ConfigError("central_gradient: parameter length mismatch");
    auto rho = params.first(ell);
    auto theta = params.subspan(ell);

    const double scale = -1.0 / std::sqrt(static_cast<double>(path.size()));
    std::vector<double> grad(ell + p, 0.0);
    for (std::size_t i = 0; i < path.size(); ++i) {
        auto z = path.z(i);
        double sigma = model.scale_fn(theta, z);
        if (!(sigma > 0.0))
            throw ScaleNotPositive("central_gradient: sigma <= 0");
        double eps = (path.y[i] - model.mean_fn(rho, z)) / sigma;
        ScoreValues sc = noise.scores(eps);
        double g = alt.g(z) / sigma;
        double s = alt.s(z) / sigma;
        double weight = alt.h * sc.m_dot * g + alt.h_prime * sc.n_dot * s;

        auto mg = model.mean_grad(rho, z);
        for (std::size_t jdx = 0; jdx < ell; ++jdx)
            grad[jdx] += scale * (-mg[jdx] / sigma) * weight;

        if (p > 0) {
            // d eps/d theta_k = -eps sigma_k'/sigma and the explicit 1/sigma
            // factors contribute -(sigma_k'/sigma) M (resp. N) G/sigma.
            auto sg = model.scale_grad(theta, z);
            for (std::size_t kdx = 0; kdx < p; ++kdx) {
                double rel = sg[kdx] / sigma;
                double term =
                    alt.h * (eps * sc.m_dot + sc.m) * g +
                    alt.h_prime * (eps * sc.n_dot + sc.n) * s;
                grad[ell + kdx] += -scale * rel * term;
            }
        }
    }
    return grad;
}

double d_n(std::span<const double> discrete, std::span<const double> true_params,
           const CorrectionConstants& constants, const LocalAlternative& alt,
           int n) {
    const std::size_t ell = constants.k.size();
    const std::size_t p = constants.j.size();
    if (discrete.size() != ell + p || true_params.size() != ell + p)
        throw ConfigError("d_n: dimension mismatch");
    const double root_n = std::sqrt(static_cast<double>(n));
    double acc = 0.0;
    for (std::size_t jdx = 0; jdx < ell; ++jdx)
        acc += root_n * (discrete[jdx] - true_params[jdx]) *
               (alt.h * constants.k[jdx] + alt.h_prime * constants.k_prime[jdx]);
    for (std::size_t kdx = 0; kdx < p; ++kdx)
        acc += root_n * (discrete[ell + kdx] - true_params[ell + kdx]) *
               (alt.h * constants.j[kdx] + alt.h_prime * constants.j_prime[kdx]);
    return -acc;
}

std::vector<double> modified_estimator(std::span<const double> discrete,
                                       double dn,
                                       std::span<const double> gradient,
                                       int component) {
    if (component < 0 || static_cast<std::size_t>(component) >= discrete.size() ||
        gradient.size() != discrete.size())
        throw ConfigError("modified_estimator: bad component or sizes");
    const double floor = 1e-8 * std::max(1.0, std::abs(dn));
    double g = gradient[static_cast<std::size_t>(component)];
    if (!(std::abs(g) > floor))
        throw GradientTooSmall("modified_estimator: gradient below floor");
    std::vector<double> out(discrete.begin(), discrete.end());
    out[static_cast<std::size_t>(component)] += dn / g;
    return out;
}

EstimateSet estimate_pipeline(const SeriesPath& path, const ModelSpec& model,
                              const LocalAlternative& alt,
                              const NoiseSpec& noise,
                              const CorrectionConstants& constants, double c,
                              int corrected_component,
                              std::span<const double> true_params,
                              DnReference reference) {
    EstimateSet est;
    est.corrected_component = corrected_component;
    est.lse = lse_ar(path, static_cast<int>(model.rho.size()));
    const auto n = static_cast<int>(path.size());
    est.discrete = discretize(est.lse, n, c);
    est.gradient = central_gradient(path, model, alt, noise, est.discrete);
    std::vector<double> reference_params;
    if (reference == DnReference::TrueParam) {
        reference_params.assign(true_params.begin(), true_params.end());
    } else {
        reference_params = est.lse;
    }
    est.dn = d_n(est.discrete, reference_params, constants, alt, n);
    try {
        est.mde = modified_estimator(est.discrete, est.dn, est.gradient,
                                     corrected_component);
    } catch (const GradientTooSmall&) {
        est.mde = est.discrete;
        est.fallback = true;
    }
    return est;
}

} // namespace lantest
