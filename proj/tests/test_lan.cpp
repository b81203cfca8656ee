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

ModelSpec unit_scale_model() {
    // m == 0, sigma == 1, one lag slot: lets tests pick z and eps freely.
    ModelSpec m = ModelSpec::ar({0.0});
    return m;
}

LocalAlternative constant_directions(double g, double s, double h, double hp) {
    LocalAlternative alt;
    alt.h = h;
    alt.h_prime = hp;
    alt.a = 1.0;
    if (g != 0.0) alt.g_fn = [g](std::span<const double>) { return g; };
    if (s != 0.0) alt.s_fn = [s](std::span<const double>) { return s; };
    return alt;
}

} // namespace

TEST_CASE("u_term at the worked value") {
    ModelSpec m = unit_scale_model();
    NoiseSpec g = NoiseSpec::gaussian();
    std::vector<double> z{0.0};

    LocalAlternative zero = constant_directions(1.0, 1.0, 0.0, 0.0);
    CHECK(u_term(m, zero, g, z, 0.5, 1) == 0.0);

    LocalAlternative alt = constant_directions(1.0, 1.0, 1.0, 1.0);
    CHECK(u_term(m, alt, g, z, 0.5, 1) == doctest::Approx(-0.25).epsilon(1e-12));

    // S == 0 reduces U to the mean part.
    LocalAlternative mean_only = constant_directions(1.0, 0.0, 1.0, 1.0);
    CHECK(u_term(m, mean_only, g, z, 0.5, 4) ==
          doctest::Approx(-(1.0 * -0.5 * 1.0) / 2.0));
}

TEST_CASE("central sequence splits into mean and scale parts") {
    ModelSpec m = ModelSpec::ar({0.2, 0.2});
    NoiseSpec g = NoiseSpec::gaussian();
    RandomStream rng(42);
    SeriesPath p = simulate_null(m, g, 600, 100, rng);
    std::vector<double> truth{0.2, 0.2};

    LocalAlternative zero = LocalAlternative::ex3(0.5, 0.0, 0.0);
    CHECK(central_sequence(p, m, zero, g, truth).v == 0.0);

    LocalAlternative ex3 = LocalAlternative::ex3(0.5);
    CentralSequenceReport rep = central_sequence(p, m, ex3, g, truth);
    double usum = 0.0;
    for (double u : rep.u_terms) usum += u;
    CHECK(std::abs(rep.v - (rep.r_part + rep.q_part)) < 1e-12);
    CHECK(std::abs(rep.v - usum) < 1e-12);

    // Per-term agreement with u_term on the true innovations.
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(rep.u_terms[i] ==
              doctest::Approx(u_term(m, ex3, g, p.z(i), p.eps[i],
                                     static_cast<int>(p.size())))
                  .epsilon(1e-12));
}

TEST_CASE("the scale part vanishes when S == 0") {
    ModelSpec m = ModelSpec::ar({0.1});
    NoiseSpec g = NoiseSpec::gaussian();
    LocalAlternative ex1 = LocalAlternative::ex1(0.8);
    RandomStream rng(43);
    SeriesPath p = simulate_null(m, g, 300, 50, rng);
    std::vector<double> truth{0.1};
    CentralSequenceReport rep = central_sequence(p, m, ex1, g, truth);
    CHECK(rep.q_part == 0.0);
    CHECK(rep.v == rep.r_part);
}

TEST_CASE("tau^2 quadratic form") {
    NoiseMoments gm = NoiseSpec::gaussian().moments();

    LocalAlternative mean_only = constant_directions(1.0, 0.0, 1.0, 1.0);
    TauExpectations e1{0.37, 0.0, 0.0};
    CHECK(tau_squared(mean_only, gm, e1) == doctest::Approx(0.37));

    // Gaussian I1 = 0 kills the cross term for any directions.
    LocalAlternative both = constant_directions(1.0, 1.0, 1.0, 1.0);
    TauExpectations e2{0.4, 0.1, 0.5};
    CHECK(tau_squared(both, gm, e2) ==
          doctest::Approx(0.4 + (gm.i2 - 1.0) * 0.1));

    // G == S: tau^2 = E(G/sigma)^2 [h^2 I0 + h'^2 (I2-1) + 2hh' I1] = 3 E(G^2).
    TauExpectations e3{0.25, 0.25, 0.25};
    CHECK(tau_squared(both, gm, e3) == doctest::Approx(3.0 * 0.25));

    NoiseMoments bad = gm;
    bad.i2 = 0.0; // forces a negative scale term
    TauExpectations e4{0.0, 1.0, 0.0};
    CHECK_THROWS_AS(tau_squared(both, bad, e4), NegativeTau2);
}

TEST_CASE("tau expectations over a path match a direct average") {
    ModelSpec m = ModelSpec::ar({0.1});
    NoiseSpec g = NoiseSpec::gaussian();
    LocalAlternative ex1 = LocalAlternative::ex1(0.5);
    RandomStream rng(44);
    SeriesPath p = simulate_null(m, g, 1000, 100, rng);
    TauExpectations e = tau_expectations(p, m, ex1, m.theta);
    double direct = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double gi = 3.0 / (1.0 + p.z(i)[0] * p.z(i)[0]);
        direct += gi * gi;
    }
    CHECK(e.g_over_sigma_sq == doctest::Approx(direct / 1000.0).epsilon(1e-12));
    CHECK(e.s_over_sigma_sq == 0.0);
}

TEST_CASE("likelihood ratio: degenerate step gives Lambda = 0") {
    ModelSpec m = ModelSpec::ar({0.1});
    NoiseSpec g = NoiseSpec::gaussian();
    LocalAlternative zero = LocalAlternative::ex1(0.5, 0.0, 0.0);
    RandomStream rng(45);
    SeriesPath p = simulate_null(m, g, 200, 50, rng);
    LikelihoodRatio lr = log_likelihood_ratio(p, m, zero, g);
    CHECK(lr.lambda == 0.0);
    for (double gi : lr.g_terms) CHECK(gi == 1.0);
}

TEST_CASE("likelihood ratio equals the joint-density oracle") {
    struct Case {
        ModelSpec model;
        LocalAlternative alt;
        NoiseSpec noise;
    };
    std::vector<Case> cases;
    cases.push_back({ModelSpec::ar({0.1}), LocalAlternative::ex1(0.8),
                     NoiseSpec::gaussian()});
    cases.push_back({ModelSpec::ar1_arch(0.3, 0.4), LocalAlternative::ex2(-0.6),
                     NoiseSpec::student_t(5)});
    cases.push_back({ModelSpec::ar({0.2, 0.2}), LocalAlternative::ex3(1.1),
                     NoiseSpec::student_t(7)});
    int seed = 90;
    for (const auto& c : cases) {
        RandomStream rng(seed++);
        SeriesPath p = simulate_alternative(c.model, c.alt, c.noise, 150, 100, rng);
        LikelihoodRatio lr = log_likelihood_ratio(p, c.model, c.alt, c.noise);
        double want = oracle::joint_density_log_ratio(p, c.model, c.alt, c.noise);
        CHECK(std::abs(lr.lambda - want) < 1e-10);
    }
}

TEST_CASE("gaussian mean-only reduction of the likelihood ratio") {
    // With beta = 1 each log g_i is alpha_i eps_i - alpha_i^2 / 2.
    ModelSpec m = ModelSpec::ar({0.1});
    NoiseSpec g = NoiseSpec::gaussian();
    LocalAlternative ex1 = LocalAlternative::ex1(0.9);
    RandomStream rng(46);
    SeriesPath p = simulate_null(m, g, 400, 100, rng);
    LikelihoodRatio lr = log_likelihood_ratio(p, m, ex1, g);
    double closed = 0.0;
    double inv_root_n = 1.0 / std::sqrt(400.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        double alpha = inv_root_n * ex1.g(p.z(i));
        closed += alpha * p.eps[i] - 0.5 * alpha * alpha;
    }
    CHECK(lr.lambda == doctest::Approx(closed).epsilon(1e-10));
}

TEST_CASE("invalid scale shifts are rejected") {
    ModelSpec m = unit_scale_model();
    NoiseSpec g = NoiseSpec::gaussian();
    LocalAlternative alt = constant_directions(0.0, -3.0, 1.0, 1.0);
    RandomStream rng(47);
    SeriesPath p = simulate_null(m, g, 4, 0, rng); // beta = 1 - 3/2 < 0
    CHECK_THROWS_AS(log_likelihood_ratio(p, m, alt, g), InvalidScaleShift);
}

TEST_CASE("condition checks on hand-built terms") {
    std::vector<double> g_terms{1.0, 1.0, 1.0};
    ConditionChecks zero = condition_checks(g_terms, 0.0);
    CHECK(zero.c1 == 0.0);
    CHECK(zero.c2 == 0.0);
    CHECK(zero.c3_gap == 0.0);

    std::vector<double> g2{1.1, 0.8};
    ConditionChecks c = condition_checks(g2, 0.05);
    CHECK(c.c1 == doctest::Approx(0.2));
    CHECK(c.c2 == doctest::Approx(0.01 + 0.04));
    CHECK(c.c3_gap == doctest::Approx(0.1 - 0.2 - 0.05));
}

TEST_CASE("np test decision rule") {
    CHECK_THROWS_AS(np_test(1.0, 0.0, 0.05), NonpositiveTau2);
    CHECK_THROWS_AS(np_test(1.0, -1.0, 0.05), NonpositiveTau2);
    CHECK_THROWS_AS(np_test(1.0, 1.0, 0.0), ConfigError);

    TestDecision d = np_test(0.0, 4.0, 0.05);
    CHECK(d.critical == doctest::Approx(1.6448536269514722).epsilon(1e-10));
    CHECK_FALSE(d.reject);

    // The boundary itself rejects.
    TestDecision boundary = np_test(upper_quantile(0.05), 1.0, 0.05);
    CHECK(boundary.statistic == boundary.critical);
    CHECK(boundary.reject);
}

TEST_CASE("analytic power under both conventions") {
    CHECK(analytic_power(0.0, 0.05, PowerConvention::LeCamTau) ==
          doctest::Approx(0.05).epsilon(1e-10));
    CHECK(analytic_power(0.0, 0.05, PowerConvention::PaperTauSquared) ==
          doctest::Approx(0.05).epsilon(1e-10));

    // The conventions coincide at tau^2 = 1.
    double lecam = analytic_power(1.0, 0.05, PowerConvention::LeCamTau);
    double paper = analytic_power(1.0, 0.05, PowerConvention::PaperTauSquared);
    CHECK(lecam == doctest::Approx(paper).epsilon(1e-12));
    CHECK(lecam == doctest::Approx(0.2595).epsilon(1e-3));

    CHECK(analytic_power(4.0, 0.05, PowerConvention::LeCamTau) ==
          doctest::Approx(0.639).epsilon(2e-3));
    CHECK(analytic_power(4.0, 0.05, PowerConvention::PaperTauSquared) ==
          doctest::Approx(1.0 - normal_cdf(upper_quantile(0.05) - 4.0))
              .epsilon(1e-12));
}

TEST_CASE("normal quantile round trips through the cdf") {
    for (double p : {0.01, 0.05, 0.2, 0.5, 0.9, 0.975, 0.999})
        CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
}

TEST_CASE("modified estimate recenters the central sequence") {
    // The built-in directions have K = 0 under the symmetric AR(1)
    // stationary law, which makes the recentering invisible. An odd mean
    // direction G(z) = 6a z/(1+z^2) gives K = -6a E[Y^2/(1+Y^2)] != 0, so
    // the estimated central sequence shifts by an O_P(1) amount that the
    // corrected estimate must absorb.
    ModelSpec m = ModelSpec::ar({0.3});
    NoiseSpec g = NoiseSpec::gaussian();
    double a = 0.5;
    LocalAlternative alt;
    alt.a = a;
    alt.g_fn = [a](std::span<const double> z) {
        return 6.0 * a * z[0] / (1.0 + z[0] * z[0]);
    };

    ConstantsMode mode{ConstantsMode::Kind::ErgodicAverage, 500'000};
    RandomStream crng(808);
    CorrectionConstants c = correction_constants(m, alt, g, mode, crng);
    CHECK(std::abs(c.k[0]) > 0.5); // genuinely nonzero here

    std::vector<double> truth{0.3};
    const int n = 4000;
    std::vector<double> disc_shift, mde_shift;
    int fallbacks = 0;
    for (int rep = 0; rep < 200; ++rep) {
        RandomStream rng(derive_seed(809, {static_cast<std::uint64_t>(rep)}));
        SeriesPath p = simulate_null(m, g, n, 300, rng);
        EstimateSet est = estimate_pipeline(p, m, alt, g, c, 1.0, 0, truth);
        fallbacks += est.fallback;
        double v0 = central_sequence(p, m, alt, g, truth).v;
        double vd = central_sequence(p, m, alt, g, est.discrete).v;
        double vm = central_sequence(p, m, alt, g, est.mde).v;
        disc_shift.push_back(std::abs(vd - v0));
        mde_shift.push_back(std::abs(vm - v0));
    }
    CHECK(fallbacks == 0);
    CHECK(median(mde_shift) < median(disc_shift));
    CHECK(median(mde_shift) < 0.2 * median(disc_shift));
}

TEST_CASE("full lan report wires the pieces together") {
    ModelSpec m = ModelSpec::ar({0.1});
    NoiseSpec g = NoiseSpec::gaussian();
    LocalAlternative ex1 = LocalAlternative::ex1(0.5);
    RandomStream rng(48);
    SeriesPath p = simulate_null(m, g, 500, 100, rng);
    std::vector<double> truth{0.1};
    double tau2 = 1.7;
    CentralSequenceReport rep = evaluate_lan(p, m, ex1, g, truth, tau2);
    CHECK(rep.tau2 == tau2);
    CHECK(rep.lan_residual ==
          doctest::Approx(rep.lambda - rep.v + 0.5 * tau2).epsilon(1e-12));
    LikelihoodRatio lr = log_likelihood_ratio(p, m, ex1, g);
    ConditionChecks cc = condition_checks(lr.g_terms, rep.v);
    CHECK(rep.c1 == cc.c1);
    CHECK(rep.c2 == cc.c2);
    CHECK(rep.c3_gap == cc.c3_gap);
}
