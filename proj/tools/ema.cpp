#include <CLI11.hpp>

#include <iostream>

#include "ema/commands.hpp"
#include "ema/csv.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Electromagnetic actuator: simulation, gain certificates and envelopes"};
    app.require_subcommand(1);

    ema::GlobalOptions opts;
    std::string out_dir = ".";
    app.add_option("-c,--config", opts.config,
                   "config file, or a name looked up in $EMA_CONFIG_PATH and the bundled configs")
        ->capture_default_str();
    app.add_option("-o,--out-dir", out_dir, "directory for written artifacts")
        ->capture_default_str();
    app.add_flag("--force", opts.force, "run even when the gains are not certified");
    app.add_flag("-q,--quiet", opts.quiet, "suppress the summary on stdout");
    app.add_option("--set", opts.overrides, "override a config value, e.g. --set gains.alpha1=12")
        ->take_all();

    auto* simulate = app.add_subcommand("simulate", "run one scenario, write trajectory and report");
    std::optional<double> duration;
    simulate->add_option("--duration", duration, "override scenario.duration (s)");

    auto* check = app.add_subcommand("check-gains", "print the gain certificate");
    std::optional<double> y_r_max;
    check->add_option("--y-r-max", y_r_max, "largest |y_r| (m); default: peak of the reference");

    auto* bounds = app.add_subcommand("bounds", "export rho, L and mu envelopes over an x1 grid");
    std::optional<double> x1_min;
    std::optional<double> x1_max;
    std::optional<std::size_t> points;
    bounds->add_option("--x1-min", x1_min, "grid start (m)");
    bounds->add_option("--x1-max", x1_max, "grid end (m)");
    bounds->add_option("--points", points, "number of grid points");

    auto* sweep = app.add_subcommand("sweep", "run gains x initial states x fringing realizations");
    bool fresh = false;
    sweep->add_flag("--fresh", fresh, "ignore completion markers of earlier runs");

    app.fallthrough();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Help and version requests exit 0; every other parse error is a usage error.
        const int code = app.exit(e);
        return code == 0 ? 0 : ema::kExitUsage;
    }
    opts.out_dir = out_dir;

    auto add = [&](const char* key, const auto& value) {
        if (value) {
            std::string text;
            if constexpr (std::is_same_v<std::decay_t<decltype(*value)>, double>) {
                text = ema::format_number(*value);
            } else {
                text = std::to_string(*value);
            }
            opts.overrides.push_back(std::string(key) + "=" + text);
        }
    };
    add("scenario.duration", duration);
    add("bounds.x1_min", x1_min);
    add("bounds.x1_max", x1_max);
    add("bounds.points", points);

    try {
        if (simulate->parsed()) {
            return ema::cmd_simulate(opts, std::cout, std::cerr);
        }
        if (check->parsed()) {
            return ema::cmd_check_gains(opts, y_r_max, std::cout, std::cerr);
        }
        if (bounds->parsed()) {
            return ema::cmd_bounds(opts, std::cout, std::cerr);
        }
        return ema::cmd_sweep(opts, fresh, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ema::kExitUsage;
    }
}
