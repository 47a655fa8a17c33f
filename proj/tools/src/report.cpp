#include "report.hpp"

#include <chrono>
#include <cmath>
#include <ctime>

namespace ltlab::cli {

using nlohmann::json;

InequalityCheck checkClose(std::string id, Estimate left, Estimate right, double delta, double threshold) {
    InequalityCheck c = checkGreaterEqual(std::move(id), left, right, delta, threshold);
    const double band = threshold * c.sigma + delta;
    c.verdict = std::abs(c.margin) <= band ? Verdict::Holds : Verdict::Violated;
    return c;
}

json toJson(const InequalityCheck& c, const char* kind) {
    return {{"id", c.id},
            {"kind", kind},
            {"left", {{"value", c.left.value}, {"sigma", c.left.error}}},
            {"right", {{"value", c.right.value}, {"sigma", c.right.error}}},
            {"margin", c.margin},
            {"sigma", c.sigma},
            {"delta", c.delta},
            {"threshold", c.threshold},
            {"band", c.threshold * c.sigma + c.delta},
            {"verdict", std::string(toString(c.verdict))}};
}

void Report::add(const InequalityCheck& c, const char* kind) {
    verdicts.push_back(toJson(c, kind));
    ++counts[static_cast<int>(c.verdict)];
}

json reportJson(const Report& r, const ExperimentConfig& c, const std::string& timestamp, double runtimeSeconds) {
    json j;
    j["header"] = {{"tool", "ltlab"}, {"timestamp", timestamp}, {"runtime_seconds", runtimeSeconds}};
    j["subcommand"] = r.subcommand;
    j["seed"] = c.sampling.seed;
    j["config"] = c.resolved;
    j["verdicts"] = r.verdicts;
    j["summary"] = {{"holds", r.counts[static_cast<int>(Verdict::Holds)]},
                    {"indeterminate", r.counts[static_cast<int>(Verdict::Indeterminate)]},
                    {"violated", r.counts[static_cast<int>(Verdict::Violated)]},
                    {"structural_errors", r.structuralErrors}};
    j["results"] = r.results;
    if (!r.constants.is_null()) j["constants"] = r.constants;
    return j;
}

json withoutHeader(json report) {
    report.erase("header");
    return report;
}

std::string utcTimestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace ltlab::cli
