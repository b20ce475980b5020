// Subcommands of the `ema` executable.
//
// Each command resolves and loads the configuration, does its work, writes
// artifacts below out_dir and returns a process exit status. Messages go to
// the given streams so tests can drive the commands in-process.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ema/analysis.hpp"
#include "ema/config.hpp"

namespace ema {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,  // bad command line or I/O failure
    kExitConfig = 2,
    kExitUncertified = 3,
    kExitDivergence = 4,
};

struct GlobalOptions {
    std::string config = kDefaultConfigName;
    std::filesystem::path out_dir = ".";
    bool force = false;  // run uncertified gains anyway
    bool quiet = false;
    std::vector<std::string> overrides;  // "dotted.key=value"
};

int cmd_simulate(const GlobalOptions& opts, std::ostream& out, std::ostream& err);

/// Prints the certificate for the configured gains; y_r_max defaults to the
/// peak of the reference schedule. Exit 3 when not certified.
int cmd_check_gains(const GlobalOptions& opts, std::optional<double> y_r_max, std::ostream& out,
                    std::ostream& err);

int cmd_bounds(const GlobalOptions& opts, std::ostream& out, std::ostream& err);

/// Runs the sweep rows concurrently. Finished rows leave a marker under
/// <out_dir>/<sweep>.rows/ and are skipped on the next invocation unless
/// `fresh` is set.
int cmd_sweep(const GlobalOptions& opts, bool fresh, std::ostream& out, std::ostream& err);

/// Column order of the sweep CSV.
inline constexpr std::string_view kSweepHeader =
    "row,alpha1,alpha2,epsilon1,x1_0,realization,status,settling_time,overshoot,"
    "steady_state_error,max_abs_u,reaching_time,ultimate_bound_ok,literal_bound_ok,radius,"
    "lyapunov_violations,reaching_law_fraction";

/// JSON form of a run report and its certificate (written by simulate).
[[nodiscard]] nlohmann::json report_json(const RunReport& report, const GainCertificate& cert,
                                         const Scenario& scenario);

/// Writes `content` to `path` through a temporary file in the same directory
/// and a rename, so readers never see a partial file.
void write_atomically(const std::filesystem::path& path, const std::string& content);

}  // namespace ema
