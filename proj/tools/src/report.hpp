#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "ltlab/verdict.hpp"

namespace ltlab::cli {

/// Two-sided version of checkGreaterEqual: Holds if |left - right| <= band, Violated otherwise.
InequalityCheck checkClose(std::string id, Estimate left, Estimate right, double delta, double threshold);

nlohmann::json toJson(const InequalityCheck& c, const char* kind = "inequality");

struct Report {
    std::string subcommand;
    std::vector<nlohmann::json> verdicts;
    nlohmann::json results = nlohmann::json::object();
    /// Set by subcommands that compute constants.
    nlohmann::json constants;
    /// Failed structural invariants (exit status 3).
    std::vector<std::string> structuralErrors;
    std::size_t counts[3] = {0, 0, 0};

    void add(const InequalityCheck& c, const char* kind = "inequality");
    std::size_t violated() const { return counts[static_cast<int>(Verdict::Violated)]; }
};

/// The deterministic part of report.json plus a "header" object holding the timestamp and runtime.
nlohmann::json reportJson(const Report& r, const ExperimentConfig& c, const std::string& timestamp,
                          double runtimeSeconds);

/// The report without its header, for reproducibility comparisons.
nlohmann::json withoutHeader(nlohmann::json report);

std::string utcTimestamp();

}  // namespace ltlab::cli
