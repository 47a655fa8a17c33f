#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "doctest.h"

using namespace ltlab;
using namespace ltlab::cli;
using nlohmann::json;

namespace {

std::string configErrorOf(const json& j) {
    try {
        parseConfig(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::filesystem::path scratch(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("ltlab-test-cli-" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int runTool(const std::string& args, const std::filesystem::path& log) {
    const std::string cmd = std::string(LTLAB_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("defaults resolve to a complete document") {
    const ExperimentConfig c = parseConfig(json::object());
    CHECK(c.resolved["trial"]["preset"] == "n3-q2-blocks");
    CHECK(c.resolved["trial"]["partition"] == json::parse("[[1,2],[3]]"));
    CHECK(c.trial.partition == std::vector<std::vector<std::size_t>>{{0, 1}, {2}});
    CHECK(c.resolved["sampling"]["uniform_fraction"].is_number());
    CHECK(c.resolved["sampling"]["lobe_width"].is_number());
    CHECK(c.buildTrial().particles() == 3);
    CHECK(c.thresholdFor("lt_main") == 3.0);
}

TEST_CASE("presets, explicit trials and overrides") {
    const ExperimentConfig a = parseConfig(json::parse(R"({"trial": {"preset": "n2-q1-slater"}, "lt_main": {"threshold": 2}})"));
    CHECK(a.trial.particles == 2);
    CHECK(a.thresholdFor("lt_main") == 2.0);
    const ExperimentConfig b = parseConfig(json::parse(R"({
        "trial": {"particles": 2, "form": "product", "orbitals": [{"center": [0, 0, 0], "width": 0.3}],
                  "partition": [[1], [2]]},
        "sampling": {"samples": 500}})"),
                                           {std::uint64_t{99}, std::nullopt, std::string("x")});
    CHECK((b.trial.form == CoreForm::PlainProduct));
    CHECK(b.sampling.samples == 500);
    CHECK(b.sampling.seed == 99);
    CHECK(b.resolved["sampling"]["seed"] == 99);
    CHECK(b.outDir == "x");
}

TEST_CASE("validation errors name the field") {
    CHECK(configErrorOf(json::parse(R"({"sampling": {"sampels": 10}})")).starts_with("sampling.sampels: unknown key"));
    CHECK(configErrorOf(json::parse(R"({"bogus": 1})")).starts_with("bogus: unknown key"));
    CHECK(configErrorOf(json::parse(R"({"sampling": {"samples": "many"}})")).starts_with("sampling.samples"));
    CHECK(configErrorOf(json::parse(R"({"trial": {"partition": [[1, 2]]}})")).starts_with("trial.partition"));
    CHECK(configErrorOf(json::parse(R"({"trial": {"partition": [[1, 2], [2, 3]]}})")).find("two blocks") !=
          std::string::npos);
    CHECK(configErrorOf(json::parse(R"({"trial": {"partition": [[1, 2], [4]]}})")).find("outside 1..3") !=
          std::string::npos);
    CHECK(configErrorOf(json::parse(R"({"trial": {"preset": "nope"}})")).starts_with("trial.preset"));
    CHECK(configErrorOf(json::parse(R"({"trial": {"orbitals": [{"center": [0, 0], "width": 1}]}})"))
              .starts_with("trial.orbitals[0].center"));
    CHECK(configErrorOf(json::parse(R"({"weight": {"type": "finite", "a": 1}})")).starts_with("weight.a"));
    CHECK(configErrorOf(json::parse(R"({"grid": {"resolution": 25}})")).starts_with("grid.resolution"));
    CHECK(configErrorOf(json::parse(R"({"sampling": {"shell_fraction": 1.0}})")).starts_with("sampling.shell_fraction"));
}

TEST_CASE("two-sided checks") {
    CHECK((checkClose("a", {1.0, 0.1}, {1.2, 0.0}, 0.0, 3.0).verdict == Verdict::Holds));
    CHECK((checkClose("a", {1.0, 0.01}, {1.2, 0.0}, 0.0, 3.0).verdict == Verdict::Violated));
    CHECK((checkClose("a", {1.0, 0.0}, {1.2, 0.0}, 0.25, 3.0).verdict == Verdict::Holds));
}

TEST_CASE("reports are reproducible apart from the header") {
    const ExperimentConfig c =
        parseConfig(json::parse(R"({"sampling": {"samples": 2000}, "harmonicity": {"configurations": 5}})"));
    for (const char* sub : {"harmonicity", "identity", "symmetrize"}) {
        const RunResult a = runSubcommand(sub, c), b = runSubcommand(sub, c);
        const json ja = reportJson(a.report, c, "t1", 1.0), jb = reportJson(b.report, c, "t2", 2.0);
        CHECK(ja.dump() != jb.dump());
        CHECK(withoutHeader(ja).dump() == withoutHeader(jb).dump());
        CHECK(ja["config"] == c.resolved);
        CHECK(ja["seed"] == c.sampling.seed);
        CHECK_FALSE(a.report.verdicts.empty());
    }
}

TEST_CASE("the tool rejects a partition that does not cover the particles") {
    const auto dir = scratch("partition");
    std::ofstream(dir / "bad.json") << R"({"trial": {"partition": [[1], [2]]}})";
    const int code = runTool("identity --config " + (dir / "bad.json").string() + " --out " + (dir / "out").string(),
                             dir / "log.txt");
    CHECK(code == 2);
    const std::string log = slurp(dir / "log.txt");
    CHECK(log.find("trial.partition") != std::string::npos);
    CHECK(log.find("particle 3 is not covered") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "out" / "report.json"));
}

TEST_CASE("the tool writes byte-identical reports for the same seed") {
    const auto dir = scratch("repro");
    std::ofstream(dir / "c.json") << R"({"sampling": {"samples": 3000}, "grid": {"resolution": 8}})";
    const std::string base = "ho-bound --config " + (dir / "c.json").string() + " --seed 5 --out ";
    REQUIRE(runTool(base + (dir / "a").string(), dir / "la.txt") == 0);
    REQUIRE(runTool(base + (dir / "b").string() + " --samples 3000", dir / "lb.txt") == 0);
    auto strip = [](const std::filesystem::path& p) {
        json j = json::parse(slurp(p));
        CHECK(j["header"].contains("timestamp"));
        CHECK(j["header"].contains("runtime_seconds"));
        j.erase("header");
        j["config"]["output"].erase("dir");
        return j.dump(2);
    };
    CHECK(strip(dir / "a" / "report.json") == strip(dir / "b" / "report.json"));
    CHECK(slurp(dir / "a" / "density.csv") == slurp(dir / "b" / "density.csv"));
    const json r = json::parse(slurp(dir / "a" / "report.json"));
    CHECK(r["seed"] == 5);
    CHECK(r["config"]["sampling"]["seed"] == 5);
    CHECK(r["subcommand"] == "ho-bound");
}

TEST_CASE("unknown subcommands and flags are usage errors") {
    const auto dir = scratch("usage");
    CHECK(runTool("frobnicate", dir / "l1.txt") == 2);
    CHECK(runTool("identity --no-such-flag", dir / "l2.txt") == 2);
}
