#pragma once

#include <string>
#include <vector>

#include "lantest/config.hpp"
#include "lantest/experiment.hpp"
#include "lantest/model.hpp"
#include "lantest/noise.hpp"

namespace lantest {

/// Fixed column order; numbers in shortest round-trip form so readers
/// recover the exact doubles.
std::string rows_csv(const std::vector<ResultRow>& rows);
std::string records_csv(const std::string& experiment,
                        const std::vector<ReplicateRecord>& records);
std::string series_csv(const SeriesPath& path);

std::vector<ReplicateRecord> parse_records_csv(const std::string& text);

std::string audit_report_json(const AuditReport& report,
                              const NoiseMoments& moments);

struct ManifestEntry {
    std::string path;
    std::string kind;
};

/// Run manifest: tool version, config hash/canonical form, master seed,
/// timestamp, and the emitted files. The timestamp is metadata; data files
/// themselves are bit-identical across reruns of the same config.
std::string manifest_json(const KvConfig& config, std::uint64_t seed,
                          const std::vector<ManifestEntry>& outputs);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

} // namespace lantest
