#include "lantest/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "lantest/errors.hpp"
#include "lantest/stats.hpp"

namespace lantest {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kAuxTag = 0x61757860;
constexpr std::uint64_t kRepTag = 0x72657060;
} // namespace

std::string policy_name(Policy p) {
    switch (p) {
        case Policy::TrueParam: return "true";
        case Policy::Lse: return "lse";
        case Policy::DiscreteLse: return "discrete";
        case Policy::Mde: return "mde";
    }
    return "?";
}

Policy policy_from_name(const std::string& name) {
    if (name == "true") return Policy::TrueParam;
    if (name == "lse") return Policy::Lse;
    if (name == "discrete") return Policy::DiscreteLse;
    if (name == "mde") return Policy::Mde;
    throw ConfigError("unknown policy: " + name);
}

std::string experiment_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Power: return "power";
        case ExperimentKind::Size: return "size";
        case ExperimentKind::LanCheck: return "lan";
        case ExperimentKind::EstimatorCheck: return "estimator";
    }
    return "?";
}

ModelSpec make_model(const ModelConfig& cfg) {
    if (cfg.kind == "ar1") {
        if (cfg.rho.size() != 1) throw ConfigError("ar1 needs one rho value");
        return ModelSpec::ar(cfg.rho);
    }
    if (cfg.kind == "ar2") {
        if (cfg.rho.size() != 2) throw ConfigError("ar2 needs two rho values");
        return ModelSpec::ar(cfg.rho);
    }
    if (cfg.kind == "ar1-arch") {
        if (cfg.rho.size() != 1) throw ConfigError("ar1-arch needs one rho value");
        return ModelSpec::ar1_arch(cfg.rho[0], cfg.beta);
    }
    throw ConfigError("unknown model kind: " + cfg.kind);
}

LocalAlternative make_alt(const AltConfig& cfg, double a) {
    if (cfg.kind == "ex1") return LocalAlternative::ex1(a, cfg.h, cfg.hprime);
    if (cfg.kind == "ex2") return LocalAlternative::ex2(a, cfg.h, cfg.hprime);
    if (cfg.kind == "ex3") return LocalAlternative::ex3(a, cfg.h, cfg.hprime);
    throw ConfigError("unknown alternative kind: " + cfg.kind);
}

NoiseSpec make_noise(const NoiseConfig& cfg) {
    if (cfg.family == "gaussian") return NoiseSpec::gaussian();
    if (cfg.family == "student") return NoiseSpec::student_t(cfg.dof);
    throw ConfigError("unknown noise family: " + cfg.family);
}

void ExperimentConfig::validate() const {
    if (replicates < 1) throw ConfigError("replicates must be >= 1");
    if (n_list.empty()) throw ConfigError("n_list must be nonempty");
    for (int n : n_list)
        if (n < 2) throw ConfigError("every n must be >= 2");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
    if (burnin < 0) throw ConfigError("burnin must be >= 0");
    if (!(c > 0.0)) throw ConfigError("grid constant c must be > 0");
    if (policies.empty()) throw ConfigError("at least one policy required");
    bool has_mde = std::find(policies.begin(), policies.end(), Policy::Mde) !=
                   policies.end();
    if (has_mde) {
        for (double a : a_grid)
            if (a == 0.0)
                throw ConfigError(
                    "a = 0 in the a-grid is not allowed with the mde policy");
        if (a_grid.empty() && alt.a == 0.0)
            throw ConfigError("a = 0 is not allowed with the mde policy");
    }
    if (alt.kind == "ex3" && model.kind != "ar2")
        throw ConfigError("ex3 needs two lags in the state (use model ar2)");
    make_model(model).validate();
    (void)make_noise(noise);
}

std::vector<CellInfo> compute_cells(const ExperimentConfig& cfg,
                                    ExperimentKind kind) {
    ModelSpec model = make_model(cfg.model);
    NoiseSpec noise = make_noise(cfg.noise);
    NoiseMoments mom = noise.moments();

    RandomStream aux_rng(derive_seed(cfg.seed, {kAuxTag}));
    SeriesPath aux = simulate_null(model, noise,
                                   static_cast<int>(cfg.constants.n_aux), 500,
                                   aux_rng);

    std::vector<double> grid = cfg.a_grid;
    if (grid.empty() || kind == ExperimentKind::LanCheck ||
        kind == ExperimentKind::EstimatorCheck || kind == ExperimentKind::Size)
        grid = {cfg.alt.a};

    // The statistic keeps a fixed direction at a = 0 (where the drift
    // vanishes and the scaled statistic no longer depends on a), so size
    // rows remain well defined. Diagnostics evaluate the configured
    // alternative as-is.
    const bool fixed_direction =
        kind == ExperimentKind::Power || kind == ExperimentKind::Size;
    const bool need_constants =
        kind == ExperimentKind::EstimatorCheck ||
        std::any_of(cfg.policies.begin(), cfg.policies.end(),
                    [](Policy p) { return p != Policy::TrueParam; });

    std::vector<CellInfo> cells;
    for (int n : cfg.n_list) {
        for (double a : grid) {
            CellInfo cell;
            cell.n = n;
            cell.a = a;
            cell.a_test = (fixed_direction && a == 0.0) ? 1.0 : a;
            LocalAlternative alt_test = make_alt(cfg.alt, cell.a_test);
            TauExpectations exp =
                tau_expectations(aux, model, alt_test, model.theta);
            cell.tau2_aux = tau_squared(alt_test, mom, exp);
            cell.analytic_lecam =
                analytic_power(cell.tau2_aux, cfg.alpha, PowerConvention::LeCamTau);
            cell.analytic_paper = analytic_power(cell.tau2_aux, cfg.alpha,
                                                 PowerConvention::PaperTauSquared);
            if (need_constants)
                cell.constants = correction_constants_on_path(
                    model, alt_test, noise, cfg.constants, aux);
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

namespace {

struct Workspace {
    ModelSpec model;
    NoiseSpec noise;
    NoiseMoments moments;
    std::vector<double> true_params;
};

double plugin_tau2(const Workspace& ws, const SeriesPath& path,
                   const LocalAlternative& alt_test,
                   std::span<const double> params) {
    const std::size_t ell = ws.model.rho.size();
    auto theta = params.subspan(ell);
    TauExpectations exp = tau_expectations(path, ws.model, alt_test, theta);
    NoiseMoments mom = ws.moments;
    if (ws.noise.family() == NoiseFamily::Gaussian) {
        // Gaussian score: I_j is the (j+2)-th residual moment.
        std::vector<double> eps =
            residuals(ws.model, path, params.first(ell), theta);
        double m2 = 0.0, m3 = 0.0, m4 = 0.0;
        for (double e : eps) {
            double e2 = e * e;
            m2 += e2;
            m3 += e2 * e;
            m4 += e2 * e2;
        }
        const auto n = static_cast<double>(eps.size());
        mom.i0 = m2 / n;
        mom.i1 = m3 / n;
        mom.i2 = m4 / n;
    }
    return tau_squared(alt_test, mom, exp);
}

void fill_test_fields(ReplicateRecord& rec, double v, double tau2, double alpha) {
    TestDecision d = np_test(v, tau2, alpha);
    rec.v = v;
    rec.tau2 = tau2;
    rec.statistic = d.statistic;
    rec.reject = d.reject ? 1 : 0;
}

void run_one_replicate(const ExperimentConfig& cfg, ExperimentKind kind,
                       const Workspace& ws, const CellInfo& cell, int rep,
                       std::span<ReplicateRecord> out) {
    LocalAlternative alt_dgp = make_alt(cfg.alt, cell.a);
    LocalAlternative alt_test = make_alt(cfg.alt, cell.a_test);
    std::uint64_t seed = derive_seed(
        cfg.seed, {kRepTag, static_cast<std::uint64_t>(cell.n),
                   double_bits(cell.a), static_cast<std::uint64_t>(rep)});
    for (std::size_t p = 0; p < cfg.policies.size(); ++p) {
        out[p] = ReplicateRecord{};
        out[p].n = cell.n;
        out[p].a = cell.a;
        out[p].policy = cfg.policies[p];
        out[p].replicate = rep;
        out[p].seed = seed;
        out[p].est0 = kNaN;
        out[p].est1 = kNaN;
        out[p].dn = kNaN;
        out[p].lambda = kNaN;
        out[p].lan_residual = kNaN;
        out[p].c1 = kNaN;
        out[p].c2 = kNaN;
        out[p].c3_gap = kNaN;
        out[p].v_true = kNaN;
        out[p].grad_gap = kNaN;
    }

    RandomStream rng(seed);
    SeriesPath path;
    try {
        if (kind == ExperimentKind::Power)
            path = simulate_alternative(ws.model, alt_dgp, ws.noise, cell.n,
                                        cfg.burnin, rng);
        else
            path = simulate_null(ws.model, ws.noise, cell.n, cfg.burnin, rng);
    } catch (const Error&) {
        for (auto& r : out) r.status = 1;
        return;
    }

    const auto& truth = ws.true_params;

    if (kind == ExperimentKind::LanCheck) {
        ReplicateRecord& rec = out[0];
        try {
            CentralSequenceReport rep_lan = evaluate_lan(
                path, ws.model, alt_dgp, ws.noise, truth, cell.tau2_aux);
            rec.v = rep_lan.v;
            rec.tau2 = cell.tau2_aux;
            rec.lambda = rep_lan.lambda;
            rec.lan_residual = rep_lan.lan_residual;
            rec.c1 = rep_lan.c1;
            rec.c2 = rep_lan.c2;
            rec.c3_gap = rep_lan.c3_gap;
        } catch (const Error&) {
            rec.status = 2;
        }
        return;
    }

    for (std::size_t p = 0; p < cfg.policies.size(); ++p) {
        ReplicateRecord& rec = out[p];
        try {
            switch (cfg.policies[p]) {
                case Policy::TrueParam: {
                    double v =
                        central_sequence(path, ws.model, alt_test, ws.noise, truth).v;
                    fill_test_fields(rec, v, cell.tau2_aux, cfg.alpha);
                    rec.est0 = truth.empty() ? kNaN : truth[0];
                    rec.est1 = truth.size() > 1 ? truth[1] : kNaN;
                    break;
                }
                case Policy::Lse:
                case Policy::DiscreteLse:
                case Policy::Mde: {
                    EstimateSet est = estimate_pipeline(
                        path, ws.model, alt_test, ws.noise, cell.constants,
                        cfg.c, cfg.corrected_component, truth);
                    const std::vector<double>* params = &est.lse;
                    if (cfg.policies[p] == Policy::DiscreteLse)
                        params = &est.discrete;
                    else if (cfg.policies[p] == Policy::Mde)
                        params = &est.mde;
                    double v = central_sequence(path, ws.model, alt_test,
                                                ws.noise, *params)
                                   .v;
                    double tau2 =
                        cfg.tau_mode == TauMode::Aux
                            ? cell.tau2_aux
                            : plugin_tau2(ws, path, alt_test, *params);
                    fill_test_fields(rec, v, tau2, cfg.alpha);
                    rec.est0 = (*params)[0];
                    rec.est1 = params->size() > 1 ? (*params)[1] : kNaN;
                    rec.dn = est.dn;
                    rec.fallback = est.fallback ? 1 : 0;
                    if (kind == ExperimentKind::EstimatorCheck) {
                        rec.v_true = central_sequence(path, ws.model, alt_test,
                                                      ws.noise, truth)
                                         .v;
                        std::vector<double> g_hat = central_gradient(
                            path, ws.model, alt_test, ws.noise, est.lse);
                        std::vector<double> g_true = central_gradient(
                            path, ws.model, alt_test, ws.noise, truth);
                        std::size_t j =
                            static_cast<std::size_t>(cfg.corrected_component);
                        double inv_root_n =
                            1.0 / std::sqrt(static_cast<double>(cell.n));
                        rec.grad_gap =
                            std::abs(inv_root_n * (g_hat[j] - g_true[j]));
                    }
                    break;
                }
            }
        } catch (const Error&) {
            rec.status = 2;
        }
    }
}

} // namespace

std::vector<ResultRow> aggregate_records(const ExperimentConfig& cfg,
                                         ExperimentKind kind,
                                         const std::vector<CellInfo>& cells,
                                         std::vector<ReplicateRecord> records) {
    std::sort(records.begin(), records.end(),
              [](const ReplicateRecord& x, const ReplicateRecord& y) {
                  if (x.n != y.n) return x.n < y.n;
                  if (x.a != y.a) return x.a < y.a;
                  if (x.policy != y.policy)
                      return static_cast<int>(x.policy) < static_cast<int>(y.policy);
                  return x.replicate < y.replicate;
              });

    auto find_cell = [&](int n, double a) -> const CellInfo& {
        for (const auto& c : cells)
            if (c.n == n && c.a == a) return c;
        throw ConfigError("aggregate_records: record does not match any cell");
    };

    const std::vector<double>& truth_rho = cfg.model.rho;
    std::vector<ResultRow> rows;
    std::size_t i = 0;
    while (i < records.size()) {
        std::size_t j = i;
        while (j < records.size() && records[j].n == records[i].n &&
               records[j].a == records[i].a &&
               records[j].policy == records[i].policy)
            ++j;

        const CellInfo& cell = find_cell(records[i].n, records[i].a);
        ResultRow row;
        row.experiment = experiment_name(kind);
        row.n = records[i].n;
        row.a = records[i].a;
        row.policy = records[i].policy;
        row.seed = cfg.seed;
        row.config_hash = cfg.config_hash;
        row.tau2_hat = cell.tau2_aux;
        row.analytic_power_lecam = cell.analytic_lecam;
        row.analytic_power_paper = cell.analytic_paper;

        std::vector<double> vs, lan_res, c1s, c2_err, c3s, shift_res, v_shift,
            grad_gaps, sqrtn_errs, est0s;
        int rejects = 0, decided = 0, failures = 0, fallbacks = 0, with_est = 0;
        double sq_err_sum = 0.0;
        const double root_n = std::sqrt(static_cast<double>(row.n));
        for (std::size_t r = i; r < j; ++r) {
            const ReplicateRecord& rec = records[r];
            if (rec.status != 0) {
                ++failures;
                continue;
            }
            ++decided;
            rejects += rec.reject;
            vs.push_back(rec.v);
            fallbacks += rec.fallback;
            if (!std::isnan(rec.lan_residual)) {
                lan_res.push_back(std::abs(rec.lan_residual));
                c1s.push_back(rec.c1);
                c2_err.push_back(std::abs(rec.c2 - cell.tau2_aux));
                c3s.push_back(std::abs(rec.c3_gap));
            }
            if (row.policy != Policy::TrueParam && !std::isnan(rec.est0)) {
                ++with_est;
                est0s.push_back(rec.est0);
                double err2 = 0.0;
                double d0 = rec.est0 - truth_rho[0];
                err2 += d0 * d0;
                if (truth_rho.size() > 1 && !std::isnan(rec.est1)) {
                    double d1 = rec.est1 - truth_rho[1];
                    err2 += d1 * d1;
                }
                sq_err_sum += err2;
                sqrtn_errs.push_back(root_n * std::sqrt(err2));
            }
            if (!std::isnan(rec.v_true)) {
                v_shift.push_back(std::abs(rec.v - rec.v_true));
                if (!std::isnan(rec.dn))
                    shift_res.push_back(std::abs(rec.v - rec.v_true + rec.dn));
            }
            if (!std::isnan(rec.grad_gap)) grad_gaps.push_back(rec.grad_gap);
        }
        row.replicates = static_cast<int>(j - i);
        row.failures = failures;
        row.rejection_rate =
            decided > 0 ? static_cast<double>(rejects) / decided : kNaN;
        row.mean_v = vs.empty() ? kNaN : mean(vs);
        row.median_v = vs.empty() ? kNaN : median(vs);
        row.bias = est0s.empty() ? kNaN : mean(est0s) - truth_rho[0];
        row.sqrtn_rmse =
            with_est > 0 ? root_n * std::sqrt(sq_err_sum / with_est) : kNaN;
        row.p95_sqrtn_err =
            sqrtn_errs.empty() ? kNaN : quantile(sqrtn_errs, 0.95);
        row.med_abs_lan_residual = lan_res.empty() ? kNaN : median(lan_res);
        row.med_c1 = c1s.empty() ? kNaN : median(c1s);
        row.med_abs_c2_err = c2_err.empty() ? kNaN : median(c2_err);
        row.med_abs_c3_gap = c3s.empty() ? kNaN : median(c3s);
        row.med_abs_shift_residual = shift_res.empty() ? kNaN : median(shift_res);
        row.med_abs_v_shift = v_shift.empty() ? kNaN : median(v_shift);
        row.med_grad_gap = grad_gaps.empty() ? kNaN : median(grad_gaps);
        row.fallback_rate =
            decided > 0 ? static_cast<double>(fallbacks) / decided : kNaN;
        rows.push_back(std::move(row));
        i = j;
    }
    return rows;
}

namespace {

ExperimentResult run_experiment(const ExperimentConfig& cfg, ExperimentKind kind) {
    cfg.validate();
    Workspace ws{make_model(cfg.model), make_noise(cfg.noise), {}, {}};
    ws.moments = ws.noise.moments();
    ws.true_params = ws.model.rho;
    ws.true_params.insert(ws.true_params.end(), ws.model.theta.begin(),
                          ws.model.theta.end());

    ExperimentResult result;
    result.kind = kind;
    result.cells = compute_cells(cfg, kind);

    const std::size_t n_policies =
        kind == ExperimentKind::LanCheck ? 1 : cfg.policies.size();
    ExperimentConfig run_cfg = cfg;
    if (kind == ExperimentKind::LanCheck)
        run_cfg.policies = {Policy::TrueParam};

    const std::size_t m = static_cast<std::size_t>(cfg.replicates);
    const std::size_t tasks = result.cells.size() * m;
    result.records.resize(tasks * n_policies);

    unsigned hw = std::thread::hardware_concurrency();
    unsigned n_threads =
        cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::max(1u, hw);
    n_threads = std::min<unsigned>(n_threads, tasks);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t t = next.fetch_add(1);
            if (t >= tasks) break;
            std::size_t cell_idx = t / m;
            int rep = static_cast<int>(t % m);
            std::span<ReplicateRecord> slot{
                result.records.data() + t * n_policies, n_policies};
            run_one_replicate(run_cfg, kind, ws, result.cells[cell_idx], rep,
                              slot);
        }
    };
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    result.rows = aggregate_records(run_cfg, kind, result.cells, result.records);
    return result;
}

} // namespace

ExperimentResult run_power_experiment(const ExperimentConfig& cfg) {
    return run_experiment(cfg, ExperimentKind::Power);
}

ExperimentResult run_size_experiment(const ExperimentConfig& cfg) {
    return run_experiment(cfg, ExperimentKind::Size);
}

ExperimentResult run_lan_diagnostic(const ExperimentConfig& cfg) {
    return run_experiment(cfg, ExperimentKind::LanCheck);
}

ExperimentResult run_estimator_diagnostic(const ExperimentConfig& cfg) {
    return run_experiment(cfg, ExperimentKind::EstimatorCheck);
}

} // namespace lantest
