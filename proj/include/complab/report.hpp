#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace complab {

std::string sha256_hex(std::string_view data);

// Writes `content` to a temporary sibling and renames it into place.
void write_atomic(const std::filesystem::path& path, std::string_view content);

struct ManifestEntry {
    std::string name;
    std::uintmax_t size = 0;
    std::string sha256;
};

/*!
 * Output of one CLI run: the report document plus any named tables.
 *
 * `report` carries the config echo, version, timings, results and warnings;
 * `results` is written separately as results.json without the timings so
 * reruns compare byte for byte.
 */
struct RunReport {
    nlohmann::json report;
    nlohmann::json results;
    std::vector<std::pair<std::string, std::string>> files;
};

// Writes report.json, results.json, the tables and manifest.json into `dir`.
// Returns the manifest (which does not list itself).
std::vector<ManifestEntry> emit_report(const RunReport& report, const std::filesystem::path& dir);

}  // namespace complab
