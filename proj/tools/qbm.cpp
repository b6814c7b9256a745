// qbm <command> --config <path> [--out <dir>]

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qbm/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Quantum Brownian motion scenario runner"};
    app.set_version_flag("--version", qbm::cli::version);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    for (const auto& name : qbm::cli::commands()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " scenario");
        sub->add_option("--config", config_path, "scenario config file")->required();
        sub->add_option("--out", out_dir, "output directory (default: current directory)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : qbm::cli::exit_config;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        std::cerr << "qbm: cannot read config " << config_path << "\n";
        return qbm::cli::exit_config;
    }
    std::ostringstream text;
    text << in.rdbuf();
    const std::string dir = std::filesystem::path(config_path).parent_path().string();
    return qbm::cli::run(command, text.str(), dir.empty() ? "." : dir, out_dir, std::cerr);
}
