#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lantest/config.hpp"
#include "lantest/errors.hpp"
#include "lantest/experiment.hpp"
#include "lantest/report.hpp"
#include "lantest/version.hpp"

namespace fs = std::filesystem;
using namespace lantest;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitAssert = 4;

struct GlobalArgs {
    std::string config_file;
    std::string preset;
    std::string out_dir = "out";
    long seed = -1;
    int threads = -1;
    bool assert_mode = false;
};

/// preset < config file < command-line overrides.
KvConfig assemble_config(const GlobalArgs& g, const KvConfig& overrides) {
    KvConfig cfg;
    if (!g.preset.empty()) cfg = preset_config(g.preset);
    if (!g.config_file.empty()) cfg = merged(cfg, parse_config_file(g.config_file));
    cfg = merged(cfg, overrides);
    if (g.seed >= 0) cfg.set("run.seed", std::to_string(g.seed));
    if (g.threads >= 0) cfg.set("run.threads", std::to_string(g.threads));
    return cfg;
}

void write_outputs(const GlobalArgs& g, const KvConfig& cfg,
                   std::uint64_t seed,
                   const std::vector<std::pair<std::string, std::string>>& files) {
    fs::create_directories(g.out_dir);
    std::vector<ManifestEntry> entries;
    for (const auto& [name, text] : files) {
        std::string path = (fs::path(g.out_dir) / name).string();
        write_text_file(path, text);
        std::string kind = name.ends_with(".json") ? "json" : "csv";
        entries.push_back({path, kind});
    }
    std::string manifest = manifest_json(cfg, seed, entries);
    write_text_file((fs::path(g.out_dir) / "manifest.json").string(), manifest);
}

int cmd_simulate(const GlobalArgs& g, const KvConfig& cfg, bool under_alternative,
                 int n) {
    ExperimentConfig ec = experiment_config_from(cfg);
    ModelSpec model = make_model(ec.model);
    model.validate();
    NoiseSpec noise = make_noise(ec.noise);
    RandomStream rng(ec.seed);
    SeriesPath path;
    if (under_alternative) {
        LocalAlternative alt = make_alt(ec.alt, ec.alt.a);
        path = simulate_alternative(model, alt, noise, n, ec.burnin, rng);
    } else {
        path = simulate_null(model, noise, n, ec.burnin, rng);
    }
    write_outputs(g, cfg, ec.seed, {{"series.csv", series_csv(path)}});
    std::cout << "wrote " << path.size() << " observations to " << g.out_dir
              << "/series.csv\n";
    return kExitOk;
}

int run_and_write(const GlobalArgs& g, const KvConfig& cfg, ExperimentKind kind) {
    ExperimentConfig ec = experiment_config_from(cfg);
    if (kind == ExperimentKind::Power && ec.a_grid.empty())
        throw ConfigError("power needs a nonempty run.a_grid");
    ec.validate();

    ExperimentResult result;
    switch (kind) {
        case ExperimentKind::Power: result = run_power_experiment(ec); break;
        case ExperimentKind::Size: result = run_size_experiment(ec); break;
        case ExperimentKind::LanCheck: result = run_lan_diagnostic(ec); break;
        case ExperimentKind::EstimatorCheck:
            result = run_estimator_diagnostic(ec);
            break;
    }
    std::string stem = experiment_name(kind);
    write_outputs(g, cfg, ec.seed,
                  {{stem + ".csv", rows_csv(result.rows)},
                   {stem + "_records.csv",
                    records_csv(experiment_name(kind), result.records)}});

    for (const auto& row : result.rows) {
        if (kind == ExperimentKind::LanCheck)
            std::printf("%s n=%d a=%g med|lan_residual|=%.4f med_c1=%.4f "
                        "med|c2-tau2|=%.4f med|c3_gap|=%.4f failures=%d\n",
                        row.experiment.c_str(), row.n, row.a,
                        row.med_abs_lan_residual, row.med_c1,
                        row.med_abs_c2_err, row.med_abs_c3_gap, row.failures);
        else
            std::printf("%s n=%d a=%g policy=%-8s reject=%.4f "
                        "analytic(lecam)=%.4f failures=%d\n",
                        row.experiment.c_str(), row.n, row.a,
                        policy_name(row.policy).c_str(), row.rejection_rate,
                        row.analytic_power_lecam, row.failures);
    }

    if (g.assert_mode) {
        bool ok = true;
        for (const auto& row : result.rows) {
            if (row.failures * 2 > row.replicates) ok = false;
            if (kind == ExperimentKind::Size) {
                double m = std::max(1, row.replicates - row.failures);
                double band =
                    2.0 * std::sqrt(ec.alpha * (1 - ec.alpha) / m) + 0.01;
                if (std::abs(row.rejection_rate - ec.alpha) > band) ok = false;
            }
            if (!(row.rejection_rate >= 0.0 && row.rejection_rate <= 1.0))
                ok = false;
        }
        if (kind == ExperimentKind::LanCheck && ec.n_list.size() > 1) {
            for (std::size_t i = 1; i < result.rows.size(); ++i)
                if (result.rows[i].med_abs_lan_residual >
                    1.1 * result.rows[i - 1].med_abs_lan_residual)
                    ok = false;
        }
        if (!ok) {
            std::cerr << "assertion checks failed\n";
            return kExitAssert;
        }
    }
    return kExitOk;
}

int cmd_score_audit(const GlobalArgs& g, const KvConfig& cfg) {
    ExperimentConfig ec = experiment_config_from(cfg);
    NoiseSpec noise = make_noise(ec.noise);
    AuditReport report = noise.audit_regularity();
    NoiseMoments moments = noise.moments();

    std::string csv = "name,value,target,tolerance,pass\n";
    for (const auto& item : report.functionals)
        csv += item.name + "," + format_double(item.value) + "," +
               format_double(item.target) + "," + format_double(item.tolerance) +
               "," + (item.pass ? "1" : "0") + "\n";
    for (const auto& b : report.sup_norms)
        csv += b.name + "," + format_double(b.sup_value) + "," +
               format_double(b.bound) + ",," + (b.pass ? "1" : "0") + "\n";

    write_outputs(g, cfg, ec.seed,
                  {{"score_audit.json", audit_report_json(report, moments)},
                   {"score_audit.csv", csv}});

    for (const auto& item : report.functionals)
        std::printf("%-22s %+.8f (target %+g)  %s\n", item.name.c_str(),
                    item.value, item.target, item.pass ? "pass" : "FAIL");
    for (const auto& b : report.sup_norms)
        std::printf("%-22s %.6f (bound %.6f)  %s\n", b.name.c_str(), b.sup_value,
                    b.bound, b.pass ? "pass" : "FAIL");

    if (g.assert_mode && !(report.all_pass && moments.converged)) {
        std::cerr << "score audit failed\n";
        return kExitAssert;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"LAN-based tests for parametric time-series models against "
                 "local alternatives: simulation, power/size studies, and "
                 "score-function audits"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--config", g.config_file, "key-value config file");
    app.add_option("--preset", g.preset,
                   "named preset: paper-ex1 | paper-ex2 | paper-ex3");
    app.add_option("--out-dir", g.out_dir, "output directory");
    app.add_option("--seed", g.seed, "master seed (overrides config)");
    app.add_option("--threads", g.threads, "worker threads (0 = hardware)");
    app.add_flag("--assert", g.assert_mode,
                 "exit 4 when built-in result checks fail");

    KvConfig over;
    auto opt = [&](CLI::App* sub, const char* flag, const char* key,
                   const char* help) {
        sub->add_option_function<std::string>(
               flag, [&over, key](const std::string& v) { over.set(key, v); },
               help)
            ->expected(1);
    };

    auto add_common = [&](CLI::App* sub) {
        opt(sub, "--model", "model.kind", "ar1 | ar2 | ar1-arch");
        opt(sub, "--rho", "model.rho", "mean parameters, comma separated");
        opt(sub, "--theta", "model.theta", "scale parameters");
        opt(sub, "--beta", "model.beta", "ARCH beta (ar1-arch)");
        opt(sub, "--noise", "noise.family", "gaussian | student");
        opt(sub, "--dof", "noise.dof", "Student-t degrees of freedom (>= 4)");
        opt(sub, "--alt", "alt.kind", "ex1 | ex2 | ex3");
        opt(sub, "--a", "alt.a", "alternative amplitude a");
        opt(sub, "--h-step", "alt.h", "mean-direction step h");
        opt(sub, "--hprime-step", "alt.hprime", "scale-direction step h'");
        opt(sub, "--burnin", "run.burnin", "discarded start-up length");
    };
    auto add_experiment = [&](CLI::App* sub) {
        add_common(sub);
        opt(sub, "--n-list", "run.n_list", "sample sizes, comma separated");
        opt(sub, "--replicates", "run.replicates", "Monte Carlo replicates");
        opt(sub, "--a-grid", "run.a_grid", "power-curve a values");
        opt(sub, "--alpha", "run.alpha", "test level");
        opt(sub, "--policies", "run.policies", "true,lse,discrete,mde");
        opt(sub, "--c", "run.c", "discretization grid constant");
        opt(sub, "--corrected-component", "run.corrected_component",
            "index corrected by the modified estimator");
        opt(sub, "--constants-mode", "run.constants_mode", "analytic | ergodic");
        opt(sub, "--n-aux", "run.n_aux", "auxiliary path length");
        opt(sub, "--tau-mode", "run.tau_mode", "aux | plugin");
        opt(sub, "--power-convention", "run.power_convention", "lecam | paper");
    };

    auto* sim = app.add_subcommand("simulate", "write one simulated path as CSV");
    sim->fallthrough();
    int sim_n = 100;
    bool sim_alt = false;
    sim->add_option("--n", sim_n, "path length (after burn-in)");
    sim->add_flag("--alternative", sim_alt, "simulate under the local alternative");
    add_common(sim);

    auto* power = app.add_subcommand("power", "empirical power over an a-grid");
    power->fallthrough();
    add_experiment(power);
    auto* size = app.add_subcommand("size", "empirical size under the null");
    size->fallthrough();
    add_experiment(size);
    auto* lan = app.add_subcommand("lan-check",
                                   "LAN decomposition and condition diagnostics");
    lan->fallthrough();
    add_experiment(lan);
    auto* estc = app.add_subcommand("estimator-check",
                                    "estimator and central-sequence shift "
                                    "diagnostics");
    estc->fallthrough();
    add_experiment(estc);
    auto* audit = app.add_subcommand("score-audit",
                                     "score-function regularity audit");
    audit->fallthrough();
    add_common(audit);

    CLI11_PARSE(app, argc, argv);

    try {
        KvConfig cfg = assemble_config(g, over);
        if (app.count("--out-dir") == 0 && cfg.has("run.out_dir"))
            g.out_dir = cfg.get("run.out_dir", g.out_dir);
        if (sim->parsed()) return cmd_simulate(g, cfg, sim_alt, sim_n);
        if (power->parsed()) return run_and_write(g, cfg, ExperimentKind::Power);
        if (size->parsed()) return run_and_write(g, cfg, ExperimentKind::Size);
        if (lan->parsed()) return run_and_write(g, cfg, ExperimentKind::LanCheck);
        if (estc->parsed())
            return run_and_write(g, cfg, ExperimentKind::EstimatorCheck);
        if (audit->parsed()) return cmd_score_audit(g, cfg);
        std::cerr << "no subcommand\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NonstationaryModel& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
