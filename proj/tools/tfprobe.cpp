// tfprobe: command-line front end for resonator spectra of the transverse-field Ising chain

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tfprobe/cli/run.hpp"

namespace cli = tfprobe::cli;

int main(int argc, char** argv) {
    CLI::App app{"Resonator spectra of a transverse-field Ising chain"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", std::string(cli::kVersion));

    std::string config_path;
    std::vector<std::string> overrides;
    std::string output = "-";
    std::string format = "csv";
    int workers = 0;

    const std::vector<std::pair<std::string, std::string>> modes = {
        {"spectrum", "total resonator spectrum C(omega) and its peaks"},
        {"sweep", "spectra over a sweep of hx_over_2j, temperature_mk or lambda_mhz"},
        {"equal-time", "equal-time correlation C(t = 0)"},
        {"backaction", "backaction bounds and maximal array size"},
        {"certify", "compare closed forms with exact diagonalization (N <= 6)"},
    };
    for (const auto& [name, help] : modes) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "key=value configuration file, or a JSON result to reload");
        sub->add_option("--set", overrides, "override one key, key=value (repeatable)");
        sub->add_option("-o,--output", output, "output path, '-' for stdout");
        sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--workers", workers, "concurrent sweep points")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << cli::error_json(cli::kExitInvalidConfig, "invalid_arguments", e.what());
        return cli::kExitInvalidConfig;
    }

    cli::RunConfig config;
    try {
        if (!config_path.empty()) config = cli::load_config_file(config_path);
        for (const auto& o : overrides) cli::apply_override(config, o);
        config.mode = cli::parse_mode(app.get_subcommands().front()->get_name());
    } catch (const cli::ConfigError& e) {
        std::cerr << cli::error_json(cli::kExitInvalidConfig, "invalid_config", e.what());
        return cli::kExitInvalidConfig;
    }
    config.output = output;
    config.format = format == "json" ? cli::OutputFormat::Json : cli::OutputFormat::Csv;
    if (workers > 0) config.workers = workers;
    return cli::run(config);
}
