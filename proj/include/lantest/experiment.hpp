#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lantest/estimate.hpp"
#include "lantest/lan.hpp"
#include "lantest/model.hpp"
#include "lantest/noise.hpp"

namespace lantest {

enum class Policy { TrueParam, Lse, DiscreteLse, Mde };

std::string policy_name(Policy p);
Policy policy_from_name(const std::string& name);

enum class TauMode { Aux, Plugin };

struct ModelConfig {
    std::string kind = "ar1"; // ar1 | ar2 | ar1-arch
    std::vector<double> rho = {0.1};
    std::vector<double> theta;
    double beta = 0.0; // ar1-arch only
};

struct AltConfig {
    std::string kind = "ex1"; // ex1 | ex2 | ex3
    double a = 0.5;
    double h = 1.0;
    double hprime = 1.0;
};

struct NoiseConfig {
    std::string family = "gaussian"; // gaussian | student
    int dof = 5;
};

ModelSpec make_model(const ModelConfig& cfg);
LocalAlternative make_alt(const AltConfig& cfg, double a);
NoiseSpec make_noise(const NoiseConfig& cfg);

struct ExperimentConfig {
    ModelConfig model;
    AltConfig alt;
    NoiseConfig noise;
    std::vector<int> n_list = {1000};
    int replicates = 1000;
    std::uint64_t seed = 1;
    std::vector<double> a_grid; // power grids; empty -> single alt.a cell
    std::vector<Policy> policies = {Policy::TrueParam};
    double alpha = 0.05;
    int burnin = 500;
    double c = 1.0;
    int corrected_component = 0;
    ConstantsMode constants;
    TauMode tau_mode = TauMode::Plugin;
    PowerConvention convention = PowerConvention::LeCamTau;
    int threads = 0; // 0 -> hardware concurrency
    std::string config_hash;

    void validate() const; // throws ConfigError
};

enum class ExperimentKind { Power, Size, LanCheck, EstimatorCheck };

std::string experiment_name(ExperimentKind k);

/// Everything one (n, a) cell shares across its replicates, all derived
/// deterministically from the master seed via a common auxiliary null path.
struct CellInfo {
    int n = 0;
    double a = 0.0;
    double a_test = 0.0; // direction used by the statistic; 1 when a == 0
    double tau2_aux = 0.0;
    double analytic_lecam = 0.0;
    double analytic_paper = 0.0;
    CorrectionConstants constants;
};

struct ReplicateRecord {
    int n = 0;
    double a = 0.0;
    Policy policy = Policy::TrueParam;
    int replicate = 0;
    std::uint64_t seed = 0;
    int status = 0; // 0 ok, 1 simulation failed, 2 estimation failed
    double v = 0.0;
    double tau2 = 0.0;
    double statistic = 0.0;
    int reject = 0;
    double est0 = 0.0, est1 = 0.0;
    double dn = 0.0;
    int fallback = 0;
    double lambda = 0.0, lan_residual = 0.0;
    double c1 = 0.0, c2 = 0.0, c3_gap = 0.0;
    double v_true = 0.0;   // V at the true parameters (diagnostics)
    double grad_gap = 0.0; // |(1/sqrt n) dV(rho_hat) - (1/sqrt n) dV(rho_0)|
};

struct ResultRow {
    std::string experiment;
    int n = 0;
    double a = 0.0;
    Policy policy = Policy::TrueParam;
    int replicates = 0;
    int failures = 0;
    double rejection_rate = 0.0;
    double analytic_power_lecam = 0.0;
    double analytic_power_paper = 0.0;
    double tau2_hat = 0.0;
    double mean_v = 0.0;
    double median_v = 0.0;
    double bias = 0.0;
    double sqrtn_rmse = 0.0;
    double p95_sqrtn_err = 0.0;
    double med_abs_lan_residual = 0.0;
    double med_c1 = 0.0;
    double med_abs_c2_err = 0.0;
    double med_abs_c3_gap = 0.0;
    double med_abs_shift_residual = 0.0;
    double med_abs_v_shift = 0.0;
    double med_grad_gap = 0.0;
    double fallback_rate = 0.0;
    std::uint64_t seed = 0;
    std::string config_hash;
};

struct ExperimentResult {
    ExperimentKind kind = ExperimentKind::Power;
    std::vector<CellInfo> cells;
    std::vector<ReplicateRecord> records;
    std::vector<ResultRow> rows;
};

/// Deterministic cell setup (auxiliary path, tau^2, correction constants).
std::vector<CellInfo> compute_cells(const ExperimentConfig& cfg,
                                    ExperimentKind kind);

/// Fold of per-replicate records into rows; sorts by (n, a, policy,
/// replicate) first, so any storage order of `records` yields bit-identical
/// aggregates.
std::vector<ResultRow> aggregate_records(const ExperimentConfig& cfg,
                                         ExperimentKind kind,
                                         const std::vector<CellInfo>& cells,
                                         std::vector<ReplicateRecord> records);

ExperimentResult run_power_experiment(const ExperimentConfig& cfg);
ExperimentResult run_size_experiment(const ExperimentConfig& cfg);
ExperimentResult run_lan_diagnostic(const ExperimentConfig& cfg);
ExperimentResult run_estimator_diagnostic(const ExperimentConfig& cfg);

} // namespace lantest
