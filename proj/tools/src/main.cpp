#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

enum Exit { kOk = 0, kViolation = 1, kConfig = 2, kStructural = 3, kRuntime = 4 };

void writeFile(const std::filesystem::path& p, const std::string& contents) {
    std::ofstream out(p, std::ios::binary);
    out << contents;
    if (!out) throw ltlab::Error("cannot write " + p.string());
}

}  // namespace

int main(int argc, char** argv) {
    using namespace ltlab::cli;
    CLI::App app{"Numerical checks of kinetic energy inequalities for quotient trial functions"};
    std::string subcommand, configPath, outDir;
    std::uint64_t seed = 0, samples = 0;
    bool failOnViolation = false, dumpConfig = false;
    app.add_option("subcommand", subcommand, "Experiment to run")->required()->check(CLI::IsMember(subcommandNames()));
    app.add_option("--config", configPath, "JSON config file (defaults are used for missing keys)");
    auto* seedOpt = app.add_option("--seed", seed, "Sampling seed (overrides sampling.seed)");
    auto* samplesOpt = app.add_option("--samples", samples, "Monte Carlo samples (overrides sampling.samples)")
                           ->check(CLI::PositiveNumber);
    auto* outOpt = app.add_option("--out", outDir, "Output directory (overrides output.dir)");
    app.add_flag("--fail-on-violation", failOnViolation, "Exit with status 1 if any verdict is violated-3sigma");
    app.add_flag("--dump-config", dumpConfig, "Print the resolved config and exit");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfig;
    }

    Overrides ov;
    if (*seedOpt) ov.seed = seed;
    if (*samplesOpt) ov.samples = samples;
    if (*outOpt) ov.outDir = outDir;

    ExperimentConfig config;
    try {
        config = loadConfig(configPath, ov);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    }
    if (dumpConfig) {
        std::cout << config.resolved.dump(2) << '\n';
        return kOk;
    }

    const auto t0 = std::chrono::steady_clock::now();
    const std::string timestamp = utcTimestamp();
    RunResult result;
    try {
        result = runSubcommand(subcommand, config);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const ltlab::StructuralError& e) {
        std::cerr << "structural error: " << e.what() << '\n';
        return kStructural;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    try {
        const std::filesystem::path dir(config.outDir);
        std::filesystem::create_directories(dir);
        writeFile(dir / "report.json", reportJson(result.report, config, timestamp, runtime).dump(2) + "\n");
        for (const auto& [name, contents] : result.files) writeFile(dir / name, contents);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }

    const Report& r = result.report;
    std::cout << subcommand << ": " << r.verdicts.size() << " verdicts, "
              << r.counts[static_cast<int>(ltlab::Verdict::Holds)] << " hold, "
              << r.counts[static_cast<int>(ltlab::Verdict::Indeterminate)] << " indeterminate, " << r.violated()
              << " violated; report in " << (std::filesystem::path(config.outDir) / "report.json").string() << '\n';
    for (const auto& v : r.verdicts)
        if (v["verdict"] != "holds-3sigma")
            std::cout << "  " << v["verdict"].get<std::string>() << ": " << v["id"].get<std::string>() << '\n';
    for (const auto& s : r.structuralErrors) std::cerr << "structural error: " << s << '\n';
    if (!r.structuralErrors.empty()) return kStructural;
    if (failOnViolation && r.violated() > 0) return kViolation;
    return kOk;
}
