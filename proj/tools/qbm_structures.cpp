// Command-line runner: qbm_structures <config> [--set section.key=value]...

#include "qbm/config.hpp"
#include "qbm/runner.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
    CLI::App app{"Quantum Brownian motion structure experiments"};
    std::string config_path;
    std::vector<std::string> overrides;
    std::string output;
    std::string scenario;
    std::int64_t seed = -1;
    app.add_option("config", config_path, "scenario file")->required();
    app.add_option("--set", overrides, "override a config value, e.g. --set model.m1=2")->take_all();
    app.add_option("-o,--output", output, "CSV output path (overrides the file)");
    app.add_option("--scenario", scenario, "scenario name (overrides the file)");
    app.add_option("--seed", seed, "perturbation seed (overrides the file)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : qbm::runner::kDomainError;
    }

    if (!output.empty()) overrides.push_back("output=" + output);
    if (!scenario.empty()) overrides.push_back("scenario=" + scenario);
    if (seed >= 0) overrides.push_back("seed=" + std::to_string(seed));

    std::ifstream file(config_path, std::ios::binary);
    if (!file) {
        std::cerr << "error: cannot read \"" << config_path << "\"\n";
        return qbm::runner::kDomainError;
    }
    std::ostringstream text;
    text << file.rdbuf();

    qbm::config::RunConfig cfg;
    try {
        cfg = qbm::config::parse_config(text.str(), overrides);
    } catch (const qbm::DomainError& e) {
        std::cerr << "error: " << config_path << ": " << e.what() << "\n";
        return qbm::runner::kDomainError;
    }
    std::ostream& log = cfg.output_path.empty() ? std::cerr : std::cout;
    return qbm::runner::run(cfg, std::cout, log);
}
