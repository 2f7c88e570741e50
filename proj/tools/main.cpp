#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "parobs/config.hpp"
#include "parobs/io.hpp"
#include "parobs/kernels.hpp"
#include "parobs/presets.hpp"
#include "parobs/runner.hpp"

namespace {

// run/validate accept a file path or preset:NAME
parobs::config::Config load_config(const std::string& ref) {
    constexpr const char* kPrefix = "preset:";
    if (ref.rfind(kPrefix, 0) == 0)
        return parobs::config::Config::from_json(parobs::presets::config_json(ref.substr(7)));
    return parobs::config::Config::from_file(ref);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"parobs: fully nonlinear parabolic obstacle problems and their free boundaries"};
    app.require_subcommand(1);

    bool serial = false;
    app.add_flag("--serial", serial, "disable the OpenMP kernel paths");

    std::string run_config;
    auto* run_cmd = app.add_subcommand("run", "solve and analyze an experiment config");
    run_cmd->add_option("config", run_config, "config file path or preset:NAME")->required();

    std::string report_dir;
    auto* report_cmd = app.add_subcommand("report", "summarize a finished run directory");
    report_cmd->add_option("dir", report_dir, "run output directory")->required();

    std::string validate_config;
    auto* validate_cmd = app.add_subcommand("validate", "validate a config without running");
    validate_cmd->add_option("config", validate_config, "config file path or preset:NAME")->required();

    auto* presets_cmd = app.add_subcommand("presets", "list bundled exact-solution specs");
    std::string emit_name;
    presets_cmd->add_option("--emit", emit_name, "print the named preset config as JSON");

    CLI11_PARSE(app, argc, argv);
    if (serial) parobs::par::enabled() = false;

    try {
        if (run_cmd->parsed()) {
            parobs::config::Config cfg;
            try {
                cfg = load_config(run_config);
            } catch (const parobs::Error& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 2;
            }
            try {
                const auto result = parobs::runner::run(cfg, std::cout);
                std::cout << "outputs in " << result.out_dir.string() << "\n";
                return result.all_pass ? 0 : 1;
            } catch (const parobs::SolverDivergedError& e) {
                std::cerr << "solver failure: " << e.what() << "\n";
                return 3;
            } catch (const parobs::PolicyCycleError& e) {
                std::cerr << "solver failure: " << e.what() << "\n";
                return 3;
            }
        }
        if (report_cmd->parsed()) {
            try {
                const std::string md = parobs::runner::report(report_dir);
                std::cout << md;
                parobs::io::write_text(std::filesystem::path(report_dir) / "summary.md", md);
                return 0;
            } catch (const parobs::Error& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 4;
            }
        }
        if (validate_cmd->parsed()) {
            try {
                load_config(validate_config);
                std::cout << "config ok\n";
                return 0;
            } catch (const parobs::Error& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 2;
            }
        }
        if (presets_cmd->parsed()) {
            if (!emit_name.empty()) {
                std::cout << parobs::presets::config_json(emit_name).dump(2) << "\n";
                return 0;
            }
            for (const auto& name : parobs::presets::names())
                std::cout << name << "  -  " << parobs::presets::description(name) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
