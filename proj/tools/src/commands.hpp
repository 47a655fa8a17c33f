#pragma once

#include <map>
#include <string>
#include <vector>

#include "config.hpp"
#include "report.hpp"

namespace ltlab::cli {

struct RunResult {
    Report report;
    /// Extra output files by name (density.csv, tree.json, constants.json, ...).
    std::map<std::string, std::string> files;
};

const std::vector<std::string>& subcommandNames();

/// Runs one experiment. Throws ConfigError for configurations the experiment cannot use.
RunResult runSubcommand(const std::string& name, const ExperimentConfig& config);

}  // namespace ltlab::cli
