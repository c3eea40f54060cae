#include "complab/report.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <system_error>

#include <openssl/evp.h>

#include "complab/errors.hpp"

namespace complab {

std::string sha256_hex(std::string_view data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw NumericalError("sha256: digest failed");
    }
    std::ostringstream out;
    out << std::hex << std::setfill('0');
    for (unsigned int i = 0; i < length; ++i) {
        out << std::setw(2) << static_cast<int>(digest[i]);
    }
    return out.str();
}

void write_atomic(const std::filesystem::path& path, std::string_view content)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw NumericalError("cannot write '" + tmp.string() + "'");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw NumericalError("write failed for '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw NumericalError("cannot move output into place: '" + path.string() + "'");
    }
}

std::vector<ManifestEntry> emit_report(const RunReport& report, const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw NumericalError("cannot create output directory '" + dir.string() + "'");
    }
    std::vector<std::pair<std::string, std::string>> files = report.files;
    files.emplace_back("results.json", report.results.dump(2) + "\n");
    files.emplace_back("report.json", report.report.dump(2) + "\n");

    std::vector<ManifestEntry> manifest;
    for (auto const& [name, content] : files) {
        write_atomic(dir / name, content);
        manifest.push_back({name, content.size(), sha256_hex(content)});
    }
    nlohmann::json doc = nlohmann::json::array();
    for (auto const& e : manifest) {
        doc.push_back({{"file", e.name}, {"size", e.size}, {"sha256", e.sha256}});
    }
    write_atomic(dir / "manifest.json", nlohmann::json{{"files", doc}}.dump(2) + "\n");
    return manifest;
}

}  // namespace complab
