#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "lantest/errors.hpp"
#include "lantest/estimate.hpp"
#include "lantest/lan.hpp"
#include "lantest/stats.hpp"

#include "helpers.hpp"

using namespace lantest;

namespace {

SeriesPath noiseless_ar1(double rho, double y0, int n) {
    SeriesPath p;
    p.zdim = 1;
    double prev = y0;
    for (int i = 0; i < n; ++i) {
        p.zflat.push_back(prev);
        double y = rho * prev;
        p.y.push_back(y);
        p.eps.push_back(0.0);
        prev = y;
    }
    return p;
}

} // namespace

TEST_CASE("least squares is exact on a noiseless AR(1) path") {
    SeriesPath p = noiseless_ar1(0.5, 1.0, 30);
    std::vector<double> rho = lse_ar(p, 1);
    CHECK(rho[0] == 0.5);
}

TEST_CASE("AR(2) least squares equals the QR oracle") {
    ModelSpec m = ModelSpec::ar({0.2, 0.2});
    NoiseSpec g = NoiseSpec::gaussian();
    RandomStream rng(77);
    SeriesPath p = simulate_null(m, g, 400, 100, rng);
    std::vector<double> fitted = lse_ar(p, 2);

    std::vector<std::vector<double>> design;
    std::vector<double> target;
    for (std::size_t i = 2; i < p.size(); ++i) {
        design.push_back({p.y[i - 1], p.y[i - 2]});
        target.push_back(p.y[i]);
    }
    std::vector<double> viaqr = oracle::qr_least_squares(design, target);
    CHECK(std::abs(fitted[0] - viaqr[0]) < 1e-10);
    CHECK(std::abs(fitted[1] - viaqr[1]) < 1e-10);
}

TEST_CASE("least squares is unbiased for AR(1) at the Monte Carlo scale") {
    ModelSpec m = ModelSpec::ar({0.1});
    NoiseSpec g = NoiseSpec::gaussian();
    double sum = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        RandomStream rng(derive_seed(12345, {static_cast<std::uint64_t>(rep)}));
        SeriesPath p = simulate_null(m, g, 10'000, 200, rng);
        sum += lse_ar(p, 1)[0];
    }
    CHECK(std::abs(sum / 200.0 - 0.1) < 0.01);
}

TEST_CASE("degenerate designs are rejected") {
    SeriesPath p;
    p.zdim = 1;
    p.y = {0.0, 0.0, 0.0, 0.0};
    p.eps = p.y;
    p.zflat = {0, 0, 0, 0};
    CHECK_THROWS_AS(lse_ar(p, 1), SingularDesign);
    SeriesPath tiny = noiseless_ar1(0.5, 1.0, 2);
    CHECK_THROWS_AS(lse_ar(tiny, 2), SingularDesign);
}

TEST_CASE("discretize onto the c/sqrt(n) grid") {
    std::vector<double> est{0.234};
    CHECK(discretize(est, 100, 1.0)[0] == doctest::Approx(0.2).epsilon(1e-15));

    // Grid points (as produced by the grid itself) are fixed points.
    double step = 1.0 / std::sqrt(100.0);
    std::vector<double> grid_pt{3.0 * step, -17.0 * step};
    std::vector<double> again = discretize(grid_pt, 100, 1.0);
    CHECK(again[0] == grid_pt[0]);
    CHECK(again[1] == grid_pt[1]);

    // Exact half-steps round toward +inf.
    std::vector<double> half{0.25};
    CHECK(discretize(half, 100, 1.0)[0] == doctest::Approx(0.3));
    std::vector<double> neg_half{-0.25};
    CHECK(discretize(neg_half, 100, 1.0)[0] == doctest::Approx(-0.2));

    // Translation by one grid step moves the output by one grid step.
    RandomStream rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        double x = 2.0 * rng.uniform01() - 1.0;
        int n = 50 + static_cast<int>(rng.uniform01() * 1000);
        double step = 1.0 / std::sqrt(static_cast<double>(n));
        std::vector<double> a{x}, b{x + step};
        double delta = discretize(b, n, 1.0)[0] - discretize(a, n, 1.0)[0];
        CHECK(delta == doctest::Approx(step).epsilon(1e-9));
    }
    CHECK_THROWS_AS(discretize(est, 0, 1.0), ConfigError);
    CHECK_THROWS_AS(discretize(est, 100, 0.0), ConfigError);
}

TEST_CASE("correction constants: structural zeros and symmetry") {
    NoiseSpec g = NoiseSpec::gaussian();
    ConstantsMode analytic{ConstantsMode::Kind::Analytic, 200'000};

    // AR(1) with a symmetric stationary law: K is an odd-moment average.
    ModelSpec m0 = ModelSpec::ar({0.0});
    LocalAlternative ex1 = LocalAlternative::ex1(0.5);
    RandomStream r1(404);
    CorrectionConstants c0 = correction_constants(m0, ex1, g, analytic, r1);
    CHECK(std::abs(c0.k[0]) < 0.01);
    CHECK(c0.k_prime[0] == 0.0);
    CHECK(c0.j.empty());
    CHECK(c0.j_prime.empty());

    // Ergodic mode on the same setup: K' is a noisy zero, K agrees with
    // the analytic factorization within Monte Carlo error.
    ConstantsMode ergodic{ConstantsMode::Kind::ErgodicAverage, 200'000};
    ModelSpec m = ModelSpec::ar({0.1});
    RandomStream r2(405), r3(405);
    CorrectionConstants ca = correction_constants(m, ex1, g, analytic, r2);
    CorrectionConstants ce = correction_constants(m, ex1, g, ergodic, r3);
    CHECK(std::abs(ca.k[0] - ce.k[0]) < 0.02);
    CHECK(std::abs(ce.k_prime[0]) < 0.02);
}

TEST_CASE("analytic constants factorize the score moments for scale parameters") {
    // Constant-scale family sigma = theta: the eps-factor of J' is
    // E[eps N'(eps)] = 1 - I2 (= -2 for Gaussian), not zero.
    ModelSpec m = ModelSpec::ar({0.3});
    m.builtin = ModelSpec::Builtin::Custom;
    m.theta = {1.0};
    m.scale_fn = [](std::span<const double> th, std::span<const double>) {
        return th[0];
    };
    m.scale_grad = [](std::span<const double>, std::span<const double>) {
        return std::vector<double>{1.0};
    };
    NoiseSpec g = NoiseSpec::gaussian();
    LocalAlternative ex2 = LocalAlternative::ex2(0.8);

    RandomStream rng(406);
    SeriesPath aux = simulate_null(m, g, 400'000, 500, rng);
    ConstantsMode analytic{ConstantsMode::Kind::Analytic, 0};
    ConstantsMode ergodic{ConstantsMode::Kind::ErgodicAverage, 0};
    CorrectionConstants ca = correction_constants_on_path(m, ex2, g, analytic, aux);
    CorrectionConstants ce = correction_constants_on_path(m, ex2, g, ergodic, aux);

    double mean_s = 0.0;
    for (std::size_t i = 0; i < aux.size(); ++i) mean_s += ex2.s(aux.z(i));
    mean_s /= static_cast<double>(aux.size());
    CHECK(ca.j_prime[0] == doctest::Approx(-2.0 * mean_s).epsilon(1e-9));
    CHECK(ca.j[0] == 0.0);
    CHECK(std::abs(ce.j_prime[0] - ca.j_prime[0]) < 0.02);
    CHECK(std::abs(ce.j[0]) < 0.02);
    CHECK(std::abs(ce.k[0] - ca.k[0]) < 0.02);
}

TEST_CASE("correction constants: ex3 matches the direct state averages") {
    NoiseSpec g = NoiseSpec::gaussian();
    ModelSpec m = ModelSpec::ar({0.2, 0.2});
    double a = 0.7;
    LocalAlternative ex3 = LocalAlternative::ex3(a);
    ConstantsMode mode{ConstantsMode::Kind::Analytic, 1'000'000};

    RandomStream rng(500);
    SeriesPath aux = simulate_null(m, g, 1'000'000, 500, rng);
    CorrectionConstants c = correction_constants_on_path(m, ex3, g, mode, aux);

    // K_j = -8a E[Y_{-j} / (1 + Y_{-1}^2 + Y_{-2}^2)] under Gaussian noise.
    double e1 = 0.0, e2 = 0.0;
    for (std::size_t i = 0; i < aux.size(); ++i) {
        auto z = aux.z(i);
        double denom = 1.0 + z[0] * z[0] + z[1] * z[1];
        e1 += z[0] / denom;
        e2 += z[1] / denom;
    }
    e1 /= static_cast<double>(aux.size());
    e2 /= static_cast<double>(aux.size());
    CHECK(c.k[0] == doctest::Approx(-8.0 * a * e1).epsilon(1e-9));
    CHECK(c.k[1] == doctest::Approx(-8.0 * a * e2).epsilon(1e-9));
    CHECK(c.k_prime[0] == 0.0);
    CHECK(c.k_prime[1] == 0.0);

    // Two independent auxiliary runs agree within combined Monte Carlo error.
    RandomStream r2(501);
    CorrectionConstants c2 = correction_constants(m, ex3, g, mode, r2);
    CHECK(std::abs(c.k[0] - c2.k[0]) < 0.02);
    CHECK(std::abs(c.k[1] - c2.k[1]) < 0.02);
}

TEST_CASE("central gradient matches the worked AR(1) closed form") {
    ModelSpec m = ModelSpec::ar({0.1});
    NoiseSpec g = NoiseSpec::gaussian();
    double a = 0.5;
    LocalAlternative ex1 = LocalAlternative::ex1(a);
    RandomStream rng(600);
    SeriesPath p = simulate_null(m, g, 2000, 200, rng);

    double direct = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double prev = p.z(i)[0];
        direct += prev / (1.0 + prev * prev);
    }
    direct *= -6.0 * a / std::sqrt(static_cast<double>(p.size()));

    // The AR(1) gradient with Gaussian noise does not depend on the
    // evaluation point.
    for (double rho : {0.1, 0.3, -0.2}) {
        std::vector<double> params{rho};
        auto grad = central_gradient(p, m, ex1, g, params);
        CHECK(grad[0] == doctest::Approx(direct).epsilon(1e-10));
    }
}

TEST_CASE("central gradient agrees with finite differences of V") {
    NoiseSpec noises[] = {NoiseSpec::gaussian(), NoiseSpec::student_t(5)};
    ModelSpec m = ModelSpec::ar({0.2, 0.2});
    LocalAlternative ex3 = LocalAlternative::ex3(0.6);
    RandomStream rng(601);
    SeriesPath p = simulate_null(m, noises[0], 500, 100, rng);

    for (const NoiseSpec& noise : noises) {
        std::vector<double> at{0.15, 0.22};
        auto grad = central_gradient(p, m, ex3, noise, at);
        for (std::size_t j = 0; j < 2; ++j) {
            auto vfun = [&](double r) {
                std::vector<double> params = at;
                params[j] = r;
                return central_sequence(p, m, ex3, noise, params).v;
            };
            double fd = oracle::fd_derivative(vfun, at[j], 1e-6);
            CHECK(std::abs(fd - grad[j]) / std::max(1.0, std::abs(grad[j])) <
                  1e-5);
        }
    }
}

TEST_CASE("central gradient covers scale parameters") {
    // Custom location-scale family: m = rho z, sigma = theta (constant).
    ModelSpec m = ModelSpec::ar({0.3});
    m.builtin = ModelSpec::Builtin::Custom;
    m.theta = {1.2};
    m.scale_fn = [](std::span<const double> th, std::span<const double>) {
        return th[0];
    };
    m.scale_grad = [](std::span<const double>, std::span<const double>) {
        return std::vector<double>{1.0};
    };
    NoiseSpec g = NoiseSpec::gaussian();
    LocalAlternative alt = LocalAlternative::ex2(0.5);
    RandomStream rng(602);
    SeriesPath p = simulate_null(m, g, 400, 100, rng);

    std::vector<double> at{0.25, 1.1};
    auto grad = central_gradient(p, m, alt, g, at);
    REQUIRE(grad.size() == 2);
    for (std::size_t j = 0; j < 2; ++j) {
        auto vfun = [&](double r) {
            std::vector<double> params = at;
            params[j] = r;
            return central_sequence(p, m, alt, g, params).v;
        };
        double fd = oracle::fd_derivative(vfun, at[j], 1e-6);
        CHECK(std::abs(fd - grad[j]) / std::max(1.0, std::abs(grad[j])) < 1e-5);
    }
}

TEST_CASE("gradient vanishes when a = 0") {
    ModelSpec m = ModelSpec::ar({0.1});
    NoiseSpec g = NoiseSpec::gaussian();
    LocalAlternative alt = LocalAlternative::ex1(0.0);
    RandomStream rng(603);
    SeriesPath p = simulate_null(m, g, 100, 10, rng);
    std::vector<double> params{0.1};
    for (double v : central_gradient(p, m, alt, g, params)) CHECK(v == 0.0);
}

TEST_CASE("d_n arithmetic") {
    LocalAlternative alt = LocalAlternative::ex1(0.5); // h = h' = 1
    CorrectionConstants c;
    c.k = {0.3};
    c.k_prime = {0.0};

    int n = 400;
    std::vector<double> truth{0.1};
    std::vector<double> same{0.1};
    CHECK(d_n(same, truth, c, alt, n) == 0.0);

    std::vector<double> disc{0.1 + 2.0 / std::sqrt(400.0)};
    CHECK(d_n(disc, truth, c, alt, n) == doctest::Approx(-0.6));

    CorrectionConstants zeros;
    zeros.k = {0.0};
    zeros.k_prime = {0.0};
    CHECK(d_n(disc, truth, zeros, alt, n) == 0.0);
}

TEST_CASE("modified estimator arithmetic and the gradient floor") {
    std::vector<double> disc{0.2, 0.2};
    std::vector<double> grad{-0.5, 4.0};
    std::vector<double> out = modified_estimator(disc, 0.05, grad, 0);
    CHECK(out[0] == doctest::Approx(0.1));
    CHECK(out[1] == 0.2);

    std::vector<double> unchanged = modified_estimator(disc, 0.0, grad, 1);
    CHECK(unchanged[0] == disc[0]);
    CHECK(unchanged[1] == disc[1]);

    std::vector<double> zero_grad{0.0, 1.0};
    CHECK_THROWS_AS(modified_estimator(disc, 0.05, zero_grad, 0),
                    GradientTooSmall);
}

TEST_CASE("pipeline output satisfies the set invariants") {
    ModelSpec m = ModelSpec::ar({0.2, 0.2});
    NoiseSpec g = NoiseSpec::gaussian();
    LocalAlternative ex3 = LocalAlternative::ex3(0.7);
    ConstantsMode mode{ConstantsMode::Kind::Analytic, 200'000};
    RandomStream crng(700);
    CorrectionConstants c = correction_constants(m, ex3, g, mode, crng);

    std::vector<double> truth{0.2, 0.2};
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        RandomStream rng(seed);
        SeriesPath p = simulate_null(m, g, 500, 100, rng);
        EstimateSet est = estimate_pipeline(p, m, ex3, g, c, 1.0, 0, truth);

        double step = 1.0 / std::sqrt(500.0);
        for (std::size_t j = 0; j < 2; ++j) {
            double k = est.discrete[j] / step;
            CHECK(std::abs(k - std::round(k)) < 1e-9);
            CHECK(std::abs(est.discrete[j] - est.lse[j]) <= step / 2.0 + 1e-12);
        }
        CHECK(est.mde[1] == est.discrete[1]); // only component 0 corrected
        if (!est.fallback) CHECK(est.mde[0] != est.discrete[0]);
    }
}

TEST_CASE("mde equals the discrete estimate when all constants vanish") {
    ModelSpec m = ModelSpec::ar({0.1});
    NoiseSpec g = NoiseSpec::gaussian();
    LocalAlternative ex1 = LocalAlternative::ex1(0.5);
    CorrectionConstants zeros;
    zeros.k = {0.0};
    zeros.k_prime = {0.0};
    RandomStream rng(701);
    SeriesPath p = simulate_null(m, g, 300, 50, rng);
    std::vector<double> truth{0.1};
    EstimateSet est = estimate_pipeline(p, m, ex1, g, zeros, 1.0, 0, truth);
    CHECK(est.dn == 0.0);
    CHECK(est.mde == est.discrete);
    CHECK_FALSE(est.fallback);
}

TEST_CASE("the auxiliary-estimate reference measures the discretization shift") {
    ModelSpec m = ModelSpec::ar({0.1});
    NoiseSpec g = NoiseSpec::gaussian();
    LocalAlternative ex1 = LocalAlternative::ex1(0.5);
    CorrectionConstants c;
    c.k = {0.4};
    c.k_prime = {0.0};
    RandomStream rng(705);
    SeriesPath p = simulate_null(m, g, 300, 50, rng);
    std::vector<double> truth{0.1};
    EstimateSet est = estimate_pipeline(p, m, ex1, g, c, 1.0, 0, truth,
                                        DnReference::AuxiliaryEstimate);
    CHECK(est.dn == d_n(est.discrete, est.lse, c, ex1, 300));
    // The reference drops out when the estimate already sits on the grid.
    EstimateSet est2 = estimate_pipeline(p, m, ex1, g, c, 1.0, 0, truth);
    CHECK(est2.dn == d_n(est2.discrete, truth, c, ex1, 300));
}

TEST_CASE("sqrt(n)-consistency: scaled errors stay bounded in n") {
    ModelSpec m = ModelSpec::ar({0.1});
    NoiseSpec g = NoiseSpec::gaussian();
    LocalAlternative ex1 = LocalAlternative::ex1(0.5);
    ConstantsMode mode{ConstantsMode::Kind::Analytic, 200'000};
    RandomStream crng(702);
    CorrectionConstants c = correction_constants(m, ex1, g, mode, crng);
    std::vector<double> truth{0.1};

    auto p95 = [&](int n, bool mde) {
        std::vector<double> errs;
        for (int rep = 0; rep < 500; ++rep) {
            RandomStream rng(derive_seed(
                900, {static_cast<std::uint64_t>(n),
                      static_cast<std::uint64_t>(rep), mde ? 1ull : 0ull}));
            SeriesPath p = simulate_null(m, g, n, 200, rng);
            EstimateSet est = estimate_pipeline(p, m, ex1, g, c, 1.0, 0, truth);
            const auto& e = mde ? est.mde : est.lse;
            errs.push_back(std::sqrt(static_cast<double>(n)) *
                           std::abs(e[0] - 0.1));
        }
        return quantile(errs, 0.95);
    };
    for (bool mde : {false, true}) {
        double q100 = p95(100, mde);
        double q400 = p95(400, mde);
        double q1600 = p95(1600, mde);
        CHECK(q400 < 1.2 * q100);
        CHECK(q1600 < 1.2 * q100);
    }
}

TEST_CASE("gradient at the estimate converges to the gradient at the truth") {
    // AR(2) with a scale direction, where the gap is genuinely nonzero.
    ModelSpec m = ModelSpec::ar({0.2, 0.2});
    NoiseSpec g = NoiseSpec::gaussian();
    LocalAlternative ex3 = LocalAlternative::ex3(0.5);
    std::vector<double> truth{0.2, 0.2};

    auto median_gap = [&](int n) {
        std::vector<double> gaps;
        for (int rep = 0; rep < 200; ++rep) {
            RandomStream rng(derive_seed(
                901, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep)}));
            SeriesPath p = simulate_null(m, g, n, 200, rng);
            std::vector<double> hat = lse_ar(p, 2);
            auto ghat = central_gradient(p, m, ex3, g, hat);
            auto gtrue = central_gradient(p, m, ex3, g, truth);
            double inv = 1.0 / std::sqrt(static_cast<double>(n));
            gaps.push_back(std::abs(inv * (ghat[0] - gtrue[0])));
        }
        return median(gaps);
    };
    double g200 = median_gap(200);
    double g800 = median_gap(800);
    double g3200 = median_gap(3200);
    CHECK(g800 < 1.1 * g200);
    CHECK(g3200 < 1.1 * g800);
    CHECK(g3200 < 0.05);
}

TEST_CASE("long-run gradient agrees with the ergodic constants estimate") {
    // For the AR(1) mean direction, (1/sqrt n) dV/drho at the truth and the
    // K constant estimate the same expectation.
    ModelSpec m = ModelSpec::ar({0.1});
    NoiseSpec g = NoiseSpec::gaussian();
    LocalAlternative ex1 = LocalAlternative::ex1(0.5);
    RandomStream rng(703);
    SeriesPath p = simulate_null(m, g, 100'000, 500, rng);
    std::vector<double> truth{0.1};
    double grad = central_gradient(p, m, ex1, g, truth)[0] /
                  std::sqrt(static_cast<double>(p.size()));

    ConstantsMode mode{ConstantsMode::Kind::ErgodicAverage, 1'000'000};
    RandomStream crng(704);
    CorrectionConstants c = correction_constants(m, ex1, g, mode, crng);
    // Combined Monte Carlo error of the two averages is ~ 3e-3 here.
    CHECK(std::abs(grad - c.k[0]) < 0.01);
}
