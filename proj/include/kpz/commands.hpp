#pragma once

// Subcommands of the kpzlab tool. Each writes its outputs into the run
// directory, refreshes the manifest and returns its manifest section.

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "kpz/config.hpp"

namespace kpz {

struct CommandOptions {
    std::string out_dir = "out";
    unsigned workers = 1;
    bool csv = true;
    bool json = true;
    bool svg = true;
    std::ostream* log = nullptr;  // progress and summary lines
};

/// "csv,json,svg" (any subset); ConfigError on unknown names.
void parse_formats(const std::string& text, CommandOptions& o);

/// File-name tag for a beta value: sqrt 2 -> "b1p41421".
std::string beta_tag(double beta);
std::string ensemble_file(double beta);

nlohmann::json cmd_simulate(const RunConfig& c, const CommandOptions& o);
nlohmann::json cmd_estimate(const RunConfig& c, const CommandOptions& o);
nlohmann::json cmd_transport(const RunConfig& c, const CommandOptions& o);
nlohmann::json cmd_stein(const RunConfig& c, const CommandOptions& o);
nlohmann::json cmd_chernoff(const RunConfig& c, const CommandOptions& o);
nlohmann::json cmd_report(const RunConfig& c, const CommandOptions& o);

/// Full command line: parses arguments, runs one subcommand and maps
/// errors to exit codes (2 config, 3 domain, 4 statistics, 5 dependency, 6 io).
int kpzlab_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kpz
