#pragma once

#include "config.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>

namespace hypofbi::app {

/// Files a command produces, keyed by name relative to the output directory,
/// plus the human-readable summary printed on success. Nothing touches the
/// disk until the command has finished, so a refused job leaves no files.
struct Output {
    std::map<std::string, std::string> files;
    std::string summary;
};

struct RunOptions {
    int threads = 0;
    std::uint64_t seed = 20240611;
    bool seed_given = false;  // --seed overrides the config's "seed"
};

Output cmd_transform(const Job& job, const RunOptions& opts);
Output cmd_invert(const Job& job, const RunOptions& opts);
Output cmd_classify(const Job& job, const RunOptions& opts);
Output cmd_propagate(const Job& job, const RunOptions& opts);

/// Runs the property suites of every module; returns the number of failed suites.
int cmd_selftest(std::uint64_t seed, std::ostream& log, int threads = 0);

void write_outputs(const Output& out, const std::filesystem::path& dir);

/// Exit code for a library error: 2 config, 3 numeric refusal, 4 not a solution, 5 empty fiber.
int exit_code(ErrorCode code);

/// Full command-line entry point; returns the process exit code.
int run_cli(int argc, char** argv);

} // namespace hypofbi::app
