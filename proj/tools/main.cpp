#include "slowfast/config.hpp"
#include "slowfast/runner.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"slow-fast SDE simulation and large-deviations toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    long seed = -1;
    int par = 0;

    const std::vector<std::string> commands = {"simulate", "frozen", "average", "skeleton",
                                               "rate",     "sweep",  "flow",    "check"};
    for (const auto& name : commands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment config file");
        sub->add_option("--seed", seed, "override [sim] seed");
        sub->add_option("--parallelism", par, "worker threads (does not change results)");
        sub->add_option("--out", out_dir, "output root directory");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        slowfast::Config cfg =
            config_path.empty() ? slowfast::Config{} : slowfast::Config::from_file(config_path);
        cfg.apply_env_overrides();
        if (seed >= 0) cfg.set("sim", "seed", std::to_string(seed));
        if (par > 0) cfg.set("run", "parallelism", std::to_string(par));
        if (!out_dir.empty()) cfg.set("run", "out", out_dir);

        const auto outcome = slowfast::run_command(command, cfg);
        if (outcome.exit_code != slowfast::kExitOk) {
            std::cerr << "error: " << outcome.message << "\n";
        } else {
            std::cout << "artifacts: " << outcome.out_dir << "\n";
        }
        return outcome.exit_code;
    } catch (const slowfast::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return slowfast::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return slowfast::kExitNumericError;
    }
}
