#include "lantest/model.hpp"

#include <cmath>

#include "lantest/errors.hpp"

namespace lantest {

ModelSpec ModelSpec::ar(std::vector<double> rho) {
    ModelSpec m;
    m.builtin = Builtin::Ar;
    m.mean_lags = static_cast<int>(rho.size());
    m.rho = std::move(rho);
    m.mean_fn = [](std::span<const double> p, std::span<const double> z) {
        double s = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) s += p[j] * z[j];
        return s;
    };
    m.scale_fn = [](std::span<const double>, std::span<const double>) {
        return 1.0;
    };
    m.mean_grad = [](std::span<const double> p, std::span<const double> z) {
        return std::vector<double>(z.begin(), z.begin() + p.size());
    };
    m.scale_grad = [](std::span<const double>, std::span<const double>) {
        return std::vector<double>{};
    };
    m.mean_hess = [](std::span<const double> p, std::span<const double>) {
        return std::vector<double>(p.size() * p.size(), 0.0);
    };
    m.scale_hess = [](std::span<const double>, std::span<const double>) {
        return std::vector<double>{};
    };
    return m;
}

ModelSpec ModelSpec::ar1_arch(double rho, double beta, StateFn b) {
    ModelSpec m;
    m.builtin = Builtin::Ar1Arch;
    m.mean_lags = 1;
    m.rho = {rho};
    m.arch_beta = beta;
    m.arch_b = b ? std::move(b) : [](std::span<const double> z) {
        return z[0] * z[0] / (1.0 + z[0] * z[0]);
    };
    m.mean_fn = [](std::span<const double> p, std::span<const double> z) {
        return p[0] * z[0];
    };
    m.scale_fn = [beta, bfn = m.arch_b](std::span<const double>,
                                        std::span<const double> z) {
        return std::sqrt(1.0 + beta * bfn(z));
    };
    m.mean_grad = [](std::span<const double>, std::span<const double> z) {
        return std::vector<double>{z[0]};
    };
    m.scale_grad = [](std::span<const double>, std::span<const double>) {
        return std::vector<double>{};
    };
    m.mean_hess = [](std::span<const double>, std::span<const double>) {
        return std::vector<double>{0.0};
    };
    m.scale_hess = [](std::span<const double>, std::span<const double>) {
        return std::vector<double>{};
    };
    return m;
}

void ModelSpec::validate() const {
    if (builtin == Builtin::Ar) {
        double s = 0.0;
        for (double r : rho) s += std::abs(r);
        if (!(s < 1.0))
            throw NonstationaryModel("AR model needs sum |rho_j| < 1");
    } else if (builtin == Builtin::Ar1Arch) {
        if (!(std::abs(rho[0]) < 1.0))
            throw NonstationaryModel("AR(1)-ARCH model needs |rho| < 1");
        if (!(std::abs(arch_beta) < 1.0))
            throw NonstationaryModel(
                "AR(1)-ARCH model needs |beta| < 1 to keep the scale positive");
    }
    if (!mean_fn || !scale_fn || !mean_grad)
        throw ConfigError("ModelSpec: mean/scale callbacks not set");
}

LocalAlternative LocalAlternative::ex1(double a, double h, double h_prime) {
    LocalAlternative alt;
    alt.builtin = Builtin::Ex1;
    alt.a = a;
    alt.h = h;
    alt.h_prime = h_prime;
    alt.g_fn = [a](std::span<const double> z) {
        return 6.0 * a / (1.0 + z[0] * z[0]);
    };
    alt.s_fn = nullptr;
    return alt;
}

LocalAlternative LocalAlternative::ex2(double a, double h, double h_prime) {
    LocalAlternative alt;
    alt.builtin = Builtin::Ex2;
    alt.a = a;
    alt.h = h;
    alt.h_prime = h_prime;
    alt.g_fn = [a](std::span<const double> z) {
        return 5.0 * a / (1.0 + z[0] * z[0]);
    };
    alt.s_fn = [a](std::span<const double> z) {
        return 1.25 * a / (1.0 + z[0] * z[0]); // S = G / 4
    };
    return alt;
}

LocalAlternative LocalAlternative::ex3(double a, double h, double h_prime) {
    LocalAlternative alt;
    alt.builtin = Builtin::Ex3;
    alt.a = a;
    alt.h = h;
    alt.h_prime = h_prime;
    auto shared = [a](std::span<const double> z) {
        return 8.0 * a / (1.0 + z[0] * z[0] + z[1] * z[1]);
    };
    alt.g_fn = shared;
    alt.s_fn = shared;
    return alt;
}

namespace {

SeriesPath generate(const ModelSpec& model, const LocalAlternative* alt,
                    const NoiseSpec& noise, int n, int burnin,
                    RandomStream& rng) {
    if (n < 1) throw ConfigError("simulate: n must be >= 1");
    if (burnin < 0) throw ConfigError("simulate: burnin must be >= 0");
    model.validate();

    const int zdim = model.zdim();
    SeriesPath path;
    path.zdim = zdim;
    path.burnin = burnin;
    path.regime = alt ? SeriesPath::Regime::Alternative : SeriesPath::Regime::Null;
    path.alt_n = alt ? n : 0;
    path.y.reserve(n);
    path.eps.reserve(n);
    path.zflat.reserve(static_cast<std::size_t>(n) * zdim);

    const double drift = alt ? 1.0 / std::sqrt(static_cast<double>(n)) : 0.0;
    std::vector<double> window(zdim, 0.0); // (y_{i-1}, ..., y_{i-s}, exo...)

    for (int t = 0; t < burnin + n; ++t) {
        std::span<const double> z{window.data(), window.size()};
        double eps = noise.sample(rng);
        double mu = model.mean_fn(model.rho, z);
        double sigma = model.scale_fn(model.theta, z);
        if (!(sigma > 0.0))
            throw ScaleNotPositive("simulate: sigma(theta, z) <= 0 on the path");
        if (alt) {
            mu += alt->h * drift * alt->g(z);
            sigma += alt->h_prime * drift * alt->s(z);
            if (!(sigma > 0.0))
                throw ScaleNotPositive(
                    "simulate: perturbed scale <= 0 on the path");
        }
        double y = mu + sigma * eps;
        if (t >= burnin) {
            path.zflat.insert(path.zflat.end(), window.begin(), window.end());
            path.y.push_back(y);
            path.eps.push_back(eps);
        }
        for (int j = model.mean_lags - 1; j > 0; --j) window[j] = window[j - 1];
        if (model.mean_lags > 0) window[0] = y;
    }
    return path;
}

} // namespace

SeriesPath simulate_null(const ModelSpec& model, const NoiseSpec& noise, int n,
                         int burnin, RandomStream& rng) {
    return generate(model, nullptr, noise, n, burnin, rng);
}

SeriesPath simulate_alternative(const ModelSpec& model,
                                const LocalAlternative& alt,
                                const NoiseSpec& noise, int n, int burnin,
                                RandomStream& rng) {
    return generate(model, &alt, noise, n, burnin, rng);
}

std::vector<double> residuals(const ModelSpec& model, const SeriesPath& path,
                              std::span<const double> rho,
                              std::span<const double> theta) {
    if (rho.size() != model.rho.size() || theta.size() != model.theta.size())
        throw ConfigError("residuals: parameter lengths do not match the model");
    std::vector<double> out(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) {
        auto z = path.z(i);
        double sigma = model.scale_fn(theta, z);
        if (!(sigma > 0.0))
            throw ScaleNotPositive("residuals: sigma(theta, z) <= 0");
        out[i] = (path.y[i] - model.mean_fn(rho, z)) / sigma;
    }
    return out;
}

} // namespace lantest
