#include "lantest/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lantest/errors.hpp"

namespace lantest {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    std::stringstream ss(s);
    while (std::getline(ss, cur, ',')) {
        cur = trim(cur);
        if (!cur.empty()) parts.push_back(cur);
    }
    return parts;
}

double parse_double(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for " + key + ": '" + s + "'");
    }
}

} // namespace

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

void KvConfig::set(const std::string& key, std::string value) {
    values[key] = std::move(value);
}

std::string KvConfig::get(const std::string& key,
                          const std::string& fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
}

double KvConfig::get_double(const std::string& key, double fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : parse_double(it->second, key);
}

long KvConfig::get_long(const std::string& key, long fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    try {
        std::size_t pos = 0;
        long v = std::stol(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad integer value for " + key + ": '" + it->second +
                          "'");
    }
}

std::vector<double> KvConfig::get_doubles(const std::string& key) const {
    std::vector<double> out;
    auto it = values.find(key);
    if (it == values.end()) return out;
    for (const auto& part : split_commas(it->second))
        out.push_back(parse_double(part, key));
    return out;
}

std::vector<int> KvConfig::get_ints(const std::string& key) const {
    std::vector<int> out;
    for (double v : get_doubles(key)) {
        if (v != std::floor(v))
            throw ConfigError("expected integers for " + key);
        out.push_back(static_cast<int>(v));
    }
    return out;
}

KvConfig parse_config_text(const std::string& text) {
    KvConfig cfg;
    std::string section;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": empty key");
        cfg.set(section.empty() ? key : section + "." + key, value);
    }
    return cfg;
}

KvConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

KvConfig merged(KvConfig base, const KvConfig& over) {
    for (const auto& [k, v] : over.values) base.values[k] = v;
    return base;
}

std::string canonical_config(const KvConfig& cfg) {
    std::string out;
    for (const auto& [k, v] : cfg.values) { // std::map iterates sorted
        // Normalize list separators, and re-render numeric entries in
        // shortest round-trip form so 0.50 and 5e-1 hash identically.
        auto parts = split_commas(v);
        std::string value;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            std::string part = parts[i];
            std::size_t pos = 0;
            try {
                double num = std::stod(part, &pos);
                if (pos == part.size()) part = format_double(num);
            } catch (const std::exception&) {
            }
            if (i) value += ",";
            value += part;
        }
        out += k;
        out += "=";
        out += value;
        out += "\n";
    }
    return out;
}

std::uint64_t config_hash(const KvConfig& cfg) {
    // FNV-1a, 64-bit.
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canonical_config(cfg)) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string config_hash_hex(const KvConfig& cfg) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg)));
    return std::string(buf);
}

KvConfig preset_config(const std::string& name) {
    KvConfig cfg;
    auto common = [&]() {
        cfg.set("run.replicates", "1000");
        cfg.set("run.alpha", "0.05");
        cfg.set("run.burnin", "500");
        // The grid starts above zero because the presets include the
        // modified-estimator policy, whose correction needs a != 0.
        cfg.set("run.a_grid", "0.25,0.5,0.75,1,1.25,1.5");
        cfg.set("run.policies", "true,lse,mde");
        cfg.set("noise.family", "gaussian");
        cfg.set("alt.h", "1");
        cfg.set("alt.hprime", "1");
    };
    if (name == "paper-ex1") {
        common();
        cfg.set("model.kind", "ar1");
        cfg.set("model.rho", "0.1");
        cfg.set("alt.kind", "ex1");
        cfg.set("run.n_list", "30,40,60,80");
        return cfg;
    }
    if (name == "paper-ex2") {
        common();
        cfg.set("model.kind", "ar1-arch");
        cfg.set("model.rho", "0.1");
        cfg.set("model.beta", "0.3");
        cfg.set("alt.kind", "ex2");
        cfg.set("run.n_list", "30,40,50,80");
        return cfg;
    }
    if (name == "paper-ex3") {
        common();
        cfg.set("model.kind", "ar2");
        cfg.set("model.rho", "0.2,0.2");
        cfg.set("alt.kind", "ex3");
        cfg.set("run.n_list", "30,40,50,80");
        cfg.set("run.corrected_component", "0");
        return cfg;
    }
    throw ConfigError("unknown preset: " + name);
}

ExperimentConfig experiment_config_from(const KvConfig& cfg) {
    ExperimentConfig ec;
    ec.model.kind = cfg.get("model.kind", "ar1");
    if (cfg.has("model.rho")) ec.model.rho = cfg.get_doubles("model.rho");
    if (cfg.has("model.theta")) ec.model.theta = cfg.get_doubles("model.theta");
    ec.model.beta = cfg.get_double("model.beta", 0.0);

    ec.alt.kind = cfg.get("alt.kind", "ex1");
    ec.alt.a = cfg.get_double("alt.a", 0.5);
    ec.alt.h = cfg.get_double("alt.h", 1.0);
    ec.alt.hprime = cfg.get_double("alt.hprime", 1.0);

    ec.noise.family = cfg.get("noise.family", "gaussian");
    ec.noise.dof = static_cast<int>(cfg.get_long("noise.dof", 5));

    if (cfg.has("run.n_list")) ec.n_list = cfg.get_ints("run.n_list");
    ec.replicates = static_cast<int>(cfg.get_long("run.replicates", 1000));
    ec.seed = static_cast<std::uint64_t>(cfg.get_long("run.seed", 20260808));
    if (cfg.has("run.a_grid")) ec.a_grid = cfg.get_doubles("run.a_grid");
    if (cfg.has("run.policies")) {
        ec.policies.clear();
        std::stringstream ss(cfg.get("run.policies", ""));
        std::string p;
        while (std::getline(ss, p, ','))
            if (!trim(p).empty()) ec.policies.push_back(policy_from_name(trim(p)));
    }
    ec.alpha = cfg.get_double("run.alpha", 0.05);
    ec.burnin = static_cast<int>(cfg.get_long("run.burnin", 500));
    ec.c = cfg.get_double("run.c", 1.0);
    ec.corrected_component =
        static_cast<int>(cfg.get_long("run.corrected_component", 0));
    std::string cmode = cfg.get("run.constants_mode", "analytic");
    if (cmode == "analytic")
        ec.constants.kind = ConstantsMode::Kind::Analytic;
    else if (cmode == "ergodic")
        ec.constants.kind = ConstantsMode::Kind::ErgodicAverage;
    else
        throw ConfigError("run.constants_mode must be analytic or ergodic");
    ec.constants.n_aux = cfg.get_long("run.n_aux", 1'000'000);
    std::string tmode = cfg.get("run.tau_mode", "plugin");
    if (tmode == "aux")
        ec.tau_mode = TauMode::Aux;
    else if (tmode == "plugin")
        ec.tau_mode = TauMode::Plugin;
    else
        throw ConfigError("run.tau_mode must be aux or plugin");
    std::string conv = cfg.get("run.power_convention", "lecam");
    if (conv == "lecam")
        ec.convention = PowerConvention::LeCamTau;
    else if (conv == "paper")
        ec.convention = PowerConvention::PaperTauSquared;
    else
        throw ConfigError("run.power_convention must be lecam or paper");
    ec.threads = static_cast<int>(cfg.get_long("run.threads", 0));
    ec.config_hash = config_hash_hex(cfg);
    return ec;
}

} // namespace lantest
