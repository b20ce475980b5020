// Experiment configuration files.
//
// A configuration is one YAML document holding the plant, the controller,
// the scenario, the bounds grid, the sweep specification and the output file
// names. Every section is optional and falls back to the reference
// experiment. Unknown keys are rejected with their line number.
#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ema/controller.hpp"
#include "ema/sim.hpp"

namespace ema {

inline constexpr int kSchemaVersion = 1;

/// Environment variable holding a ':'-separated list of directories searched
/// for configs given by bare name.
inline constexpr const char* kConfigPathEnv = "EMA_CONFIG_PATH";

/// Name of the config used when none is given on the command line.
inline constexpr const char* kDefaultConfigName = "paper_sec4";

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BoundsGrid {
    double x1_min = 0.0;    // m
    double x1_max = 5e-3;   // m
    std::size_t points = 101;
};

/// Rows are the product gains × initial_positions × realizations. Both lists
/// empty means an empty sweep. A missing list defaults to the scenario's
/// gains or initial position.
struct SweepSpec {
    std::vector<ControllerGains> gains;
    std::vector<double> initial_positions;  // m
    std::size_t realizations = 0;           // 0: the configured plant only
    std::size_t threads = 0;                // 0: hardware concurrency

    [[nodiscard]] bool empty() const noexcept {
        return gains.empty() && initial_positions.empty();
    }
};

struct OutputPaths {
    std::string trajectory = "trajectory.csv";
    std::string report = "report.json";
    std::string bounds = "bounds.csv";
    std::string sweep = "sweep.csv";
};

struct Config {
    int schema_version = kSchemaVersion;
    Scenario scenario;
    BoundsGrid bounds;
    SweepSpec sweep;
    OutputPaths outputs;
    std::string source;  // file name or "<string>"
};

/// Parses YAML text. `overrides` are "dotted.key=value" strings applied to the
/// document before validation; the value is parsed as YAML. Throws
/// ConfigError with a line-numbered message.
[[nodiscard]] Config parse_config(std::string_view text,
                                  const std::vector<std::string>& overrides = {},
                                  std::string source = "<string>");

[[nodiscard]] Config load_config(const std::filesystem::path& path,
                                 const std::vector<std::string>& overrides = {});

/// Maps a --config argument to a file. Paths containing a directory part or
/// naming an existing file are used as given. Bare names are looked up, with
/// and without a ".yaml" suffix, in the directories of EMA_CONFIG_PATH and
/// then in the bundled config directory. Throws ConfigError when nothing
/// matches.
[[nodiscard]] std::filesystem::path resolve_config(std::string_view name);

/// Directory of the configs shipped with the sources.
[[nodiscard]] std::filesystem::path bundled_config_dir();

}  // namespace ema
