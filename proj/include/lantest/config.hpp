#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lantest/experiment.hpp"

namespace lantest {

/// Flat key-value configuration. Keys are "section.key"; the file grammar
/// is INI-like:
///
///   # comment
///   [model]
///   kind = ar1
///   rho = 0.2,0.2        # vectors are comma separated
///
/// CLI flags override file keys, which override preset keys.
struct KvConfig {
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) > 0; }
    void set(const std::string& key, std::string value);
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key, long fallback) const;
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<int> get_ints(const std::string& key) const;
};

KvConfig parse_config_text(const std::string& text);
KvConfig parse_config_file(const std::string& path);

/// Merge: values of `over` win.
KvConfig merged(KvConfig base, const KvConfig& over);

/// Sorted "section.key=value" lines with numbers re-rendered in shortest
/// round-trip form, so the hash is stable across runs and platforms.
std::string canonical_config(const KvConfig& cfg);
std::uint64_t config_hash(const KvConfig& cfg);
std::string config_hash_hex(const KvConfig& cfg);

/// Named presets reproducing the worked simulation settings.
KvConfig preset_config(const std::string& name);

/// Translate key-value form into the typed experiment configuration
/// (attaches the config hash). Throws ConfigError on bad keys.
ExperimentConfig experiment_config_from(const KvConfig& cfg);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double x);

} // namespace lantest
