#include "lantest/report.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lantest/errors.hpp"
#include "lantest/version.hpp"

namespace lantest {

namespace {

const char* kRecordHeader =
    "experiment,n,a,policy,replicate,seed,status,v,tau2,statistic,reject,"
    "est0,est1,dn,fallback,lambda,lan_residual,c1,c2,c3_gap,v_true,grad_gap";

std::string fmt(double x) { return format_double(x); }

} // namespace

std::string rows_csv(const std::vector<ResultRow>& rows) {
    std::string out =
        "n,a,policy,rejection_rate,analytic_power_lecam,analytic_power_paper,"
        "tau2_hat,failures,replicates,mean_v,median_v,"
        "bias,sqrtn_rmse,p95_sqrtn_err,med_abs_lan_residual,med_c1,"
        "med_abs_c2_err,med_abs_c3_gap,med_abs_shift_residual,med_abs_v_shift,"
        "med_grad_gap,fallback_rate,seed,config_hash,experiment\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n);
        out += "," + fmt(r.a);
        out += "," + policy_name(r.policy);
        out += "," + fmt(r.rejection_rate);
        out += "," + fmt(r.analytic_power_lecam);
        out += "," + fmt(r.analytic_power_paper);
        out += "," + fmt(r.tau2_hat);
        out += "," + std::to_string(r.failures);
        out += "," + std::to_string(r.replicates);
        out += "," + fmt(r.mean_v);
        out += "," + fmt(r.median_v);
        out += "," + fmt(r.bias);
        out += "," + fmt(r.sqrtn_rmse);
        out += "," + fmt(r.p95_sqrtn_err);
        out += "," + fmt(r.med_abs_lan_residual);
        out += "," + fmt(r.med_c1);
        out += "," + fmt(r.med_abs_c2_err);
        out += "," + fmt(r.med_abs_c3_gap);
        out += "," + fmt(r.med_abs_shift_residual);
        out += "," + fmt(r.med_abs_v_shift);
        out += "," + fmt(r.med_grad_gap);
        out += "," + fmt(r.fallback_rate);
        out += "," + std::to_string(r.seed);
        out += "," + r.config_hash;
        out += "," + r.experiment;
        out += "\n";
    }
    return out;
}

std::string records_csv(const std::string& experiment,
                        const std::vector<ReplicateRecord>& records) {
    std::string out = std::string(kRecordHeader) + "\n";
    for (const auto& r : records) {
        out += experiment;
        out += "," + std::to_string(r.n);
        out += "," + fmt(r.a);
        out += "," + policy_name(r.policy);
        out += "," + std::to_string(r.replicate);
        out += "," + std::to_string(r.seed);
        out += "," + std::to_string(r.status);
        out += "," + fmt(r.v);
        out += "," + fmt(r.tau2);
        out += "," + fmt(r.statistic);
        out += "," + std::to_string(r.reject);
        out += "," + fmt(r.est0);
        out += "," + fmt(r.est1);
        out += "," + fmt(r.dn);
        out += "," + std::to_string(r.fallback);
        out += "," + fmt(r.lambda);
        out += "," + fmt(r.lan_residual);
        out += "," + fmt(r.c1);
        out += "," + fmt(r.c2);
        out += "," + fmt(r.c3_gap);
        out += "," + fmt(r.v_true);
        out += "," + fmt(r.grad_gap);
        out += "\n";
    }
    return out;
}

std::string series_csv(const SeriesPath& path) {
    std::string out = "i,y,eps\n";
    for (std::size_t i = 0; i < path.size(); ++i) {
        out += std::to_string(i);
        out += "," + fmt(path.y[i]);
        out += "," + fmt(path.eps[i]);
        out += "\n";
    }
    return out;
}

std::vector<ReplicateRecord> parse_records_csv(const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    if (!std::getline(ss, line))
        throw ConfigError("records csv: empty file");
    if (line != kRecordHeader)
        throw ConfigError("records csv: unexpected header");
    std::vector<ReplicateRecord> records;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != 22) throw ConfigError("records csv: bad row");
        ReplicateRecord r;
        r.n = std::stoi(f[1]);
        r.a = std::stod(f[2]);
        r.policy = policy_from_name(f[3]);
        r.replicate = std::stoi(f[4]);
        r.seed = std::stoull(f[5]);
        r.status = std::stoi(f[6]);
        r.v = std::stod(f[7]);
        r.tau2 = std::stod(f[8]);
        r.statistic = std::stod(f[9]);
        r.reject = std::stoi(f[10]);
        r.est0 = std::stod(f[11]);
        r.est1 = std::stod(f[12]);
        r.dn = std::stod(f[13]);
        r.fallback = std::stoi(f[14]);
        r.lambda = std::stod(f[15]);
        r.lan_residual = std::stod(f[16]);
        r.c1 = std::stod(f[17]);
        r.c2 = std::stod(f[18]);
        r.c3_gap = std::stod(f[19]);
        r.v_true = std::stod(f[20]);
        r.grad_gap = std::stod(f[21]);
        records.push_back(r);
    }
    return records;
}

std::string audit_report_json(const AuditReport& report,
                              const NoiseMoments& moments) {
    nlohmann::json j;
    j["family"] = report.family;
    j["all_pass"] = report.all_pass;
    j["functionals"] = nlohmann::json::array();
    for (const auto& item : report.functionals)
        j["functionals"].push_back({{"name", item.name},
                                    {"value", item.value},
                                    {"target", item.target},
                                    {"tolerance", item.tolerance},
                                    {"pass", item.pass}});
    j["sup_norms"] = nlohmann::json::array();
    for (const auto& b : report.sup_norms)
        j["sup_norms"].push_back({{"name", b.name},
                                  {"sup", b.sup_value},
                                  {"bound", b.bound},
                                  {"pass", b.pass}});
    j["moments"] = {{"i0", moments.i0}, {"i1", moments.i1}, {"i2", moments.i2},
                    {"k0", moments.k0}, {"k1", moments.k1}, {"k2", moments.k2},
                    {"converged", moments.converged}};
    return j.dump(2) + "\n";
}

std::string manifest_json(const KvConfig& config, std::uint64_t seed,
                          const std::vector<ManifestEntry>& outputs) {
    nlohmann::json j;
    j["tool"] = "lantest";
    j["version"] = kVersion;
    j["config_hash"] = config_hash_hex(config);
    j["seed"] = seed;
    auto now = std::chrono::system_clock::now();
    std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&tt));
    j["created"] = buf;
    j["outputs"] = nlohmann::json::array();
    for (const auto& e : outputs)
        j["outputs"].push_back({{"path", e.path}, {"kind", e.kind}});
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& [k, v] : config.values) cfg[k] = v;
    j["config"] = cfg;
    return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out << text;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace lantest
