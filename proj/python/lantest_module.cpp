#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lantest/config.hpp"
#include "lantest/errors.hpp"
#include "lantest/estimate.hpp"
#include "lantest/experiment.hpp"
#include "lantest/lan.hpp"
#include "lantest/model.hpp"
#include "lantest/noise.hpp"
#include "lantest/report.hpp"
#include "lantest/stats.hpp"
#include "lantest/version.hpp"

namespace py = pybind11;
using namespace lantest;

namespace {

KvConfig kv_from_dict(const py::dict& d) {
    KvConfig cfg;
    for (auto item : d) {
        std::string key = py::cast<std::string>(item.first);
        std::string value;
        if (py::isinstance<py::str>(item.second)) {
            value = py::cast<std::string>(item.second);
        } else if (py::isinstance<py::list>(item.second) ||
                   py::isinstance<py::tuple>(item.second)) {
            for (auto el : py::cast<py::sequence>(item.second)) {
                if (!value.empty()) value += ",";
                value += py::cast<std::string>(py::str(el));
            }
        } else {
            value = py::cast<std::string>(py::str(item.second));
        }
        cfg.set(key, value);
    }
    return cfg;
}

py::dict row_to_dict(const ResultRow& r) {
    py::dict d;
    d["experiment"] = r.experiment;
    d["n"] = r.n;
    d["a"] = r.a;
    d["policy"] = policy_name(r.policy);
    d["replicates"] = r.replicates;
    d["failures"] = r.failures;
    d["rejection_rate"] = r.rejection_rate;
    d["analytic_power_lecam"] = r.analytic_power_lecam;
    d["analytic_power_paper"] = r.analytic_power_paper;
    d["tau2_hat"] = r.tau2_hat;
    d["mean_v"] = r.mean_v;
    d["median_v"] = r.median_v;
    d["bias"] = r.bias;
    d["sqrtn_rmse"] = r.sqrtn_rmse;
    d["p95_sqrtn_err"] = r.p95_sqrtn_err;
    d["med_abs_lan_residual"] = r.med_abs_lan_residual;
    d["med_c1"] = r.med_c1;
    d["med_abs_c2_err"] = r.med_abs_c2_err;
    d["med_abs_c3_gap"] = r.med_abs_c3_gap;
    d["med_abs_shift_residual"] = r.med_abs_shift_residual;
    d["med_abs_v_shift"] = r.med_abs_v_shift;
    d["med_grad_gap"] = r.med_grad_gap;
    d["fallback_rate"] = r.fallback_rate;
    d["seed"] = r.seed;
    d["config_hash"] = r.config_hash;
    return d;
}

py::list run_experiment_dict(const std::string& kind, const py::dict& config) {
    KvConfig kv = kv_from_dict(config);
    ExperimentConfig cfg = experiment_config_from(kv);
    ExperimentResult res;
    if (kind == "power")
        res = run_power_experiment(cfg);
    else if (kind == "size")
        res = run_size_experiment(cfg);
    else if (kind == "lan-check")
        res = run_lan_diagnostic(cfg);
    else if (kind == "estimator-check")
        res = run_estimator_diagnostic(cfg);
    else
        throw ConfigError("unknown experiment kind: " + kind);
    py::list rows;
    for (const auto& row : res.rows) rows.append(row_to_dict(row));
    return rows;
}

PowerConvention convention_from(const std::string& name) {
    if (name == "lecam") return PowerConvention::LeCamTau;
    if (name == "paper") return PowerConvention::PaperTauSquared;
    throw ConfigError("power convention must be 'lecam' or 'paper'");
}

} // namespace

PYBIND11_MODULE(lantest, m) {
    m.doc() = "LAN-based tests for parametric time-series models against "
              "local alternatives";
    m.attr("__version__") = kVersion;

    // Translators run newest-first: keep the base registered before the
    // derived class so ConfigError surfaces as ValueError.
    py::register_exception<Error>(m, "LantestError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<RandomStream>(m, "RandomStream")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def("uniform01", &RandomStream::uniform01)
        .def("normal", &RandomStream::normal);

    py::class_<ScoreValues>(m, "ScoreValues")
        .def_readonly("m", &ScoreValues::m)
        .def_readonly("m_dot", &ScoreValues::m_dot)
        .def_readonly("m_ddot", &ScoreValues::m_ddot)
        .def_readonly("n", &ScoreValues::n)
        .def_readonly("n_dot", &ScoreValues::n_dot)
        .def_readonly("n_ddot", &ScoreValues::n_ddot);

    py::class_<NoiseSpec>(m, "NoiseSpec")
        .def_static("gaussian", []() { return NoiseSpec::gaussian(); })
        .def_static("student_t", [](int dof) { return NoiseSpec::student_t(dof); },
                    py::arg("dof"))
        .def("name", &NoiseSpec::name)
        .def("density", &NoiseSpec::density, py::arg("x"))
        .def("log_density", &NoiseSpec::log_density, py::arg("x"))
        .def("raw_density", &NoiseSpec::raw_density, py::arg("x"))
        .def("scores", &NoiseSpec::scores, py::arg("x"))
        .def("location_scale_density", &NoiseSpec::location_scale_density,
             py::arg("x"), py::arg("a"), py::arg("b"))
        .def("sample", &NoiseSpec::sample, py::arg("rng"))
        .def("moments",
             [](const NoiseSpec& n) {
                 NoiseMoments mom = n.moments();
                 py::dict d;
                 d["i0"] = mom.i0;
                 d["i1"] = mom.i1;
                 d["i2"] = mom.i2;
                 d["k0"] = mom.k0;
                 d["k1"] = mom.k1;
                 d["k2"] = mom.k2;
                 d["converged"] = mom.converged;
                 return d;
             })
        .def("audit", [](const NoiseSpec& n) {
            AuditReport rep = n.audit_regularity();
            py::dict d;
            d["family"] = rep.family;
            d["all_pass"] = rep.all_pass;
            py::list fn;
            for (const auto& f : rep.functionals) {
                py::dict fd;
                fd["name"] = f.name;
                fd["value"] = f.value;
                fd["target"] = f.target;
                fd["pass"] = f.pass;
                fn.append(fd);
            }
            d["functionals"] = fn;
            py::list sup;
            for (const auto& b : rep.sup_norms) {
                py::dict bd;
                bd["name"] = b.name;
                bd["sup"] = b.sup_value;
                bd["bound"] = b.bound;
                bd["pass"] = b.pass;
                sup.append(bd);
            }
            d["sup_norms"] = sup;
            return d;
        });

    py::class_<ModelSpec>(m, "ModelSpec")
        .def_readonly("rho", &ModelSpec::rho)
        .def_readonly("theta", &ModelSpec::theta)
        .def("validate", &ModelSpec::validate);

    py::class_<LocalAlternative>(m, "LocalAlternative")
        .def_readonly("h", &LocalAlternative::h)
        .def_readonly("h_prime", &LocalAlternative::h_prime)
        .def_readonly("a", &LocalAlternative::a);

    m.def(
        "model",
        [](const std::string& kind, std::vector<double> rho, double beta) {
            ModelConfig cfg;
            cfg.kind = kind;
            cfg.rho = std::move(rho);
            cfg.beta = beta;
            return make_model(cfg);
        },
        py::arg("kind"), py::arg("rho"), py::arg("beta") = 0.0,
        "Built-in model: 'ar1' | 'ar2' | 'ar1-arch'");

    m.def(
        "alternative",
        [](const std::string& kind, double a, double h, double hprime) {
            AltConfig cfg;
            cfg.kind = kind;
            cfg.h = h;
            cfg.hprime = hprime;
            return make_alt(cfg, a);
        },
        py::arg("kind"), py::arg("a"), py::arg("h") = 1.0,
        py::arg("hprime") = 1.0, "Built-in direction pair: 'ex1' | 'ex2' | 'ex3'");

    py::class_<SeriesPath>(m, "SeriesPath")
        .def_readonly("y", &SeriesPath::y)
        .def_readonly("eps", &SeriesPath::eps)
        .def_readonly("burnin", &SeriesPath::burnin)
        .def("__len__", [](const SeriesPath& p) { return p.size(); });

    m.def("simulate_null", &simulate_null, py::arg("model"), py::arg("noise"),
          py::arg("n"), py::arg("burnin"), py::arg("rng"));
    m.def("simulate_alternative", &simulate_alternative, py::arg("model"),
          py::arg("alt"), py::arg("noise"), py::arg("n"), py::arg("burnin"),
          py::arg("rng"));
    m.def(
        "residuals",
        [](const ModelSpec& model, const SeriesPath& path,
           std::vector<double> rho, std::vector<double> theta) {
            return residuals(model, path, rho, theta);
        },
        py::arg("model"), py::arg("path"), py::arg("rho"),
        py::arg("theta") = std::vector<double>{});

    m.def("lse_ar", &lse_ar, py::arg("path"), py::arg("order"));
    m.def(
        "discretize",
        [](std::vector<double> est, int n, double c) {
            return discretize(est, n, c);
        },
        py::arg("estimate"), py::arg("n"), py::arg("c") = 1.0);
    m.def(
        "modified_estimator",
        [](std::vector<double> disc, double dn, std::vector<double> grad,
           int component) {
            return modified_estimator(disc, dn, grad, component);
        },
        py::arg("discrete"), py::arg("dn"), py::arg("gradient"),
        py::arg("component"));
    m.def(
        "central_gradient",
        [](const SeriesPath& path, const ModelSpec& model,
           const LocalAlternative& alt, const NoiseSpec& noise,
           std::vector<double> params) {
            return central_gradient(path, model, alt, noise, params);
        },
        py::arg("path"), py::arg("model"), py::arg("alt"), py::arg("noise"),
        py::arg("params"));

    m.def(
        "central_sequence",
        [](const SeriesPath& path, const ModelSpec& model,
           const LocalAlternative& alt, const NoiseSpec& noise,
           std::vector<double> params) {
            CentralSequenceReport rep =
                central_sequence(path, model, alt, noise, params);
            py::dict d;
            d["v"] = rep.v;
            d["r_part"] = rep.r_part;
            d["q_part"] = rep.q_part;
            return d;
        },
        py::arg("path"), py::arg("model"), py::arg("alt"), py::arg("noise"),
        py::arg("params"));

    m.def(
        "log_likelihood_ratio",
        [](const SeriesPath& path, const ModelSpec& model,
           const LocalAlternative& alt, const NoiseSpec& noise) {
            LikelihoodRatio lr = log_likelihood_ratio(path, model, alt, noise);
            return py::make_tuple(lr.lambda, lr.g_terms);
        },
        py::arg("path"), py::arg("model"), py::arg("alt"), py::arg("noise"));

    m.def(
        "np_test",
        [](double v, double tau2, double alpha) {
            TestDecision d = np_test(v, tau2, alpha);
            py::dict out;
            out["reject"] = d.reject;
            out["statistic"] = d.statistic;
            out["critical"] = d.critical;
            return out;
        },
        py::arg("v"), py::arg("tau2"), py::arg("alpha") = 0.05);

    m.def(
        "analytic_power",
        [](double tau2, double alpha, const std::string& convention) {
            return analytic_power(tau2, alpha, convention_from(convention));
        },
        py::arg("tau2"), py::arg("alpha") = 0.05,
        py::arg("convention") = "lecam");

    m.def("normal_quantile", &normal_quantile, py::arg("p"));
    m.def("normal_cdf", &normal_cdf, py::arg("x"));

    m.def("run_experiment", &run_experiment_dict, py::arg("kind"),
          py::arg("config"),
          "kind: 'power' | 'size' | 'lan-check' | 'estimator-check'; config "
          "uses the flat section.key form, e.g. {'model.kind': 'ar1', "
          "'model.rho': '0.1', 'run.n_list': [200], ...}");
}
