#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "complab/config.hpp"
#include "complab/report.hpp"

namespace complab {

enum ExitCode : int {
    exit_ok = 0,
    exit_config_error = 2,
    exit_numerical_failure = 3,
    exit_inconclusive = 4,
};

struct CliOptions {
    // validate | simulate | price | completeness | witness | hedge | varswap
    std::string subcommand;
    std::filesystem::path config;
    std::filesystem::path out;
    std::optional<std::uint64_t> seed;
    bool strict = false;
    std::optional<std::filesystem::path> dump_paths;
    bool dump_increments = false;
    std::vector<std::size_t> sweep_steps;
};

const std::vector<std::string>& subcommands();

// Runs one subcommand on an already parsed config. Throws on failure.
RunReport execute(const std::string& subcommand, const AnalysisConfig& config,
                  const CliOptions& options);

// Full pipeline: load config, execute, emit outputs. Returns the exit code;
// errors are reported as one JSON object per line on `err`.
int run(const CliOptions& options, std::ostream& err);

// argv front end (CLI11).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace complab
