#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"
#include "config.hpp"
#include "qpspec/errors.hpp"

int main(int argc, char** argv) {
    using namespace qpspec::cli;
    CLI::App app{"qpspec: spectra of adiabatic quasi-periodic operators"};
    app.require_subcommand(1);
    std::string config_path;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"regions", "regime map over an (alpha, E) grid"},
        {"quantize", "quantized ladders and resonant pairs"},
        {"predict", "spectral prediction for each resonant pair"},
        {"cocycle", "energy scan of the model cocycle"},
        {"lambdan", "l_n, theta_n and Lambda_n for a two-gap potential"},
    };
    for (const auto& [name, help] : commands)
        app.add_subcommand(name, help)->add_option("config", config_path, "JSON config file")->required();
    CLI11_PARSE(app, argc, argv);

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        RunConfig cfg = load_config(config_path);
        return run_command(name, cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
}
