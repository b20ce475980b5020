#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ema/commands.hpp"
#include "ema/csv.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using Catch::Matchers::ContainsSubstring;

namespace {

const std::string kBundled = std::string(EMA_CONFIG_DIR) + "/paper_sec4.yaml";

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) {
        out.push_back(l);
    }
    return out;
}

ema::GlobalOptions options_in(const fs::path& dir) {
    ema::GlobalOptions o;
    o.config = kBundled;
    o.out_dir = dir;
    o.quiet = true;
    return o;
}

int run_binary(const std::string& args) {
    const std::string cmd = std::string(EMA_BINARY) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("simulate writes the trajectory and report", "[cli]") {
    const auto dir = oracle::fresh_dir("cli_sim");
    auto opts = options_in(dir);
    opts.quiet = false;
    std::ostringstream out, err;
    REQUIRE(ema::cmd_simulate(opts, out, err) == ema::kExitOk);
    CHECK_THAT(out.str(), ContainsSubstring("settling_time = "));
    CHECK_THAT(out.str(), ContainsSubstring("runtime = "));

    std::ifstream csv(dir / "trajectory.csv");
    const auto traj = ema::read_trajectory_csv(csv);
    CHECK(traj.size() == 5001);
    CHECK(traj.front().x1 == 0.001);

    const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(report.at("settled").get<bool>());
    CHECK(report.at("ultimate_bound_ok").get<bool>());
    CHECK(report.at("overshoot").get<double>() == 0.0);
    CHECK(report.at("certificate").at("certified").get<bool>());
    fs::remove_all(dir);
}

TEST_CASE("zero duration gives an empty, unsettled run", "[cli]") {
    const auto dir = oracle::fresh_dir("cli_zero");
    auto opts = options_in(dir);
    opts.overrides = {"scenario.duration=0"};
    std::ostringstream out, err;
    REQUIRE(ema::cmd_simulate(opts, out, err) == ema::kExitOk);
    CHECK(lines_of(slurp(dir / "trajectory.csv")).size() == 1);
    const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK_FALSE(report.at("settled").get<bool>());
    CHECK(report.at("settling_time").is_null());
    fs::remove_all(dir);
}

TEST_CASE("configuration errors exit with 2 and name the line", "[cli]") {
    const auto dir = oracle::fresh_dir("cli_badcfg");
    std::string text = slurp(kBundled);
    text += "\nbogus_section: 1\n";
    std::ofstream(dir / "bad.yaml") << text;
    auto opts = options_in(dir);
    opts.config = (dir / "bad.yaml").string();
    std::ostringstream out, err;
    CHECK(ema::cmd_simulate(opts, out, err) == ema::kExitConfig);
    CHECK_THAT(err.str(), ContainsSubstring("line "));
    CHECK_THAT(err.str(), ContainsSubstring("bogus_section"));
    CHECK_FALSE(fs::exists(dir / "trajectory.csv"));

    opts = options_in(dir);
    opts.config = "definitely_not_a_config";
    CHECK(ema::cmd_simulate(opts, out, err) == ema::kExitConfig);
    fs::remove_all(dir);
}

TEST_CASE("uncertified gains exit with 3 unless forced", "[cli]") {
    const auto dir = oracle::fresh_dir("cli_uncert");
    auto opts = options_in(dir);
    opts.overrides = {"gains.alpha2=30", "scenario.duration=0.01"};
    std::ostringstream out, err;
    CHECK(ema::cmd_simulate(opts, out, err) == ema::kExitUncertified);
    CHECK_THAT(err.str(), ContainsSubstring("--force"));
    CHECK(ema::cmd_check_gains(opts, std::nullopt, out, err) == ema::kExitUncertified);
    opts.force = true;
    CHECK(ema::cmd_simulate(opts, out, err) == ema::kExitOk);
    CHECK(fs::exists(dir / "trajectory.csv"));
    fs::remove_all(dir);
}

TEST_CASE("a diverging run exits with 4", "[cli]") {
    const auto dir = oracle::fresh_dir("cli_div");
    auto opts = options_in(dir);
    // Explicit Euler with a step far beyond the electrical time constant.
    opts.overrides = {"scenario.integrator=euler", "scenario.dt=0.01", "scenario.duration=20",
                      "scenario.decimation=1"};
    std::ostringstream out, err;
    CHECK(ema::cmd_simulate(opts, out, err) == ema::kExitDivergence);
    CHECK_THAT(err.str(), ContainsSubstring("divergence"));
    fs::remove_all(dir);
}

TEST_CASE("check-gains prints the certificate", "[cli]") {
    auto opts = options_in(fs::temp_directory_path());
    opts.quiet = false;
    std::ostringstream out, err;
    REQUIRE(ema::cmd_check_gains(opts, std::nullopt, out, err) == ema::kExitOk);
    const std::string s = out.str();
    CHECK_THAT(s, ContainsSubstring("a = -799\n"));
    CHECK_THAT(s, ContainsSubstring("b = -40\n"));
    CHECK_THAT(s, ContainsSubstring("Q = [[-10, -399.5], [-399.5, -20040]]"));
    CHECK_THAT(s, ContainsSubstring("certified = true"));
    CHECK(ema::cmd_check_gains(opts, 0.004, out, err) == ema::kExitOk);
}

TEST_CASE("bounds table", "[cli]") {
    const auto dir = oracle::fresh_dir("cli_bounds");
    auto opts = options_in(dir);
    std::ostringstream out, err;
    REQUIRE(ema::cmd_bounds(opts, out, err) == ema::kExitOk);
    std::ifstream f(dir / "bounds.csv");
    const auto rows = ema::read_bounds_csv(f);
    REQUIRE(rows.size() == 101);
    CHECK(rows.front().x1 == 0.0);
    CHECK(rows.front().rho_lo == 630.0);
    CHECK(rows.front().rho_hi == 630.0);
    CHECK(rows.back().x1 == Catch::Approx(5e-3));
    const auto p = ema::reference_plant();
    for (const auto& r : rows) {
        CHECK(r.rho_lo <= r.rho_hi);
        CHECK(r.L_lo <= r.L_hi);
        CHECK(r.mu_lo <= r.mu_hi);
        const double rho = ema::reluctance(r.x1, p);
        CHECK(r.rho_lo <= rho);
        CHECK(rho <= r.rho_hi);
    }
    fs::remove_all(dir);
}

TEST_CASE("sweep over initial positions", "[cli][sweep]") {
    const auto dir = oracle::fresh_dir("cli_sweep");
    auto opts = options_in(dir);
    opts.quiet = false;
    std::ostringstream out, err;
    REQUIRE(ema::cmd_sweep(opts, false, out, err) == ema::kExitOk);
    CHECK_THAT(out.str(), ContainsSubstring("0 resumed"));
    const std::string first = slurp(dir / "sweep.csv");
    const auto lines = lines_of(first);
    REQUIRE(lines.size() == 6);
    CHECK(lines[0] == ema::kSweepHeader);
    const auto columns = ema::split_fields(lines[0]);
    const auto col = [&](std::string_view name) {
        return static_cast<std::size_t>(std::find(columns.begin(), columns.end(), name) -
                                        columns.begin());
    };
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = ema::split_fields(lines[i]);
        REQUIRE(f.size() == columns.size());
        CHECK(f[col("status")] == "ok");
        CHECK(f[col("ultimate_bound_ok")] == "true");
        CHECK(f[col("realization")] == "-1");
        CHECK_FALSE(f[col("settling_time")].empty());
    }

    SECTION("a rerun resumes every row and reproduces the file") {
        std::ostringstream again;
        REQUIRE(ema::cmd_sweep(opts, false, again, err) == ema::kExitOk);
        CHECK_THAT(again.str(), ContainsSubstring("5 resumed"));
        CHECK(slurp(dir / "sweep.csv") == first);
    }
    SECTION("fresh recomputes and still reproduces the file") {
        std::ostringstream again;
        REQUIRE(ema::cmd_sweep(opts, true, again, err) == ema::kExitOk);
        CHECK_THAT(again.str(), ContainsSubstring("0 resumed"));
        CHECK(slurp(dir / "sweep.csv") == first);
    }
    SECTION("changed inputs invalidate the markers") {
        opts.overrides = {"scenario.duration=0.1"};
        std::ostringstream again;
        REQUIRE(ema::cmd_sweep(opts, false, again, err) == ema::kExitOk);
        CHECK_THAT(again.str(), ContainsSubstring("0 resumed"));
    }
    SECTION("an interrupted row is recomputed") {
        fs::remove(dir / "sweep.csv.rows" / "row_000002.done");
        std::ostringstream again;
        REQUIRE(ema::cmd_sweep(opts, false, again, err) == ema::kExitOk);
        CHECK_THAT(again.str(), ContainsSubstring("4 resumed"));
        CHECK(slurp(dir / "sweep.csv") == first);
    }
    fs::remove_all(dir);
}

TEST_CASE("an empty sweep writes only the header", "[cli][sweep]") {
    const auto dir = oracle::fresh_dir("cli_sweep_empty");
    auto opts = options_in(dir);
    opts.overrides = {"sweep.initial_positions=[]"};
    std::ostringstream out, err;
    REQUIRE(ema::cmd_sweep(opts, false, out, err) == ema::kExitOk);
    CHECK(slurp(dir / "sweep.csv") == std::string(ema::kSweepHeader) + "\n");
    fs::remove_all(dir);
}

TEST_CASE("sweep over surface realizations", "[cli][sweep]") {
    const auto dir = oracle::fresh_dir("cli_sweep_real");
    auto opts = options_in(dir);
    opts.overrides = {"sweep.initial_positions=[0.001]", "sweep.realizations=3",
                      "scenario.duration=0.05"};
    std::ostringstream out, err;
    REQUIRE(ema::cmd_sweep(opts, false, out, err) == ema::kExitOk);
    const auto lines = lines_of(slurp(dir / "sweep.csv"));
    REQUIRE(lines.size() == 4);
    for (std::size_t i = 1; i < 4; ++i) {
        const auto f = ema::split_fields(lines[i]);
        CHECK(f[5] == std::to_string(i - 1));
        CHECK(f[6] == "ok");
    }
    fs::remove_all(dir);
}

TEST_CASE("executable exit codes", "[cli][process]") {
    const auto dir = oracle::fresh_dir("cli_exe");
    const std::string common = "-q -c " + kBundled + " -o " + dir.string();
    CHECK(run_binary("--help") == 0);
    CHECK(run_binary("") != 0);
    CHECK(run_binary("frobnicate") == ema::kExitUsage);
    CHECK(run_binary(common + " check-gains") == ema::kExitOk);
    CHECK(run_binary(common + " simulate --duration 0.01") == ema::kExitOk);
    CHECK(fs::exists(dir / "trajectory.csv"));
    CHECK(run_binary(common + " --set gains.alpha2=30 check-gains") == ema::kExitUncertified);
    CHECK(run_binary(common + " --set gains.alpha2=30 simulate --duration 0.01") ==
          ema::kExitUncertified);
    CHECK(run_binary(common + " --force --set gains.alpha2=30 simulate --duration 0.01") ==
          ema::kExitOk);
    CHECK(run_binary(common + " --set plant.colour=red simulate") == ema::kExitConfig);
    CHECK(run_binary(common + " bounds --points 11") == ema::kExitOk);
    CHECK(lines_of(slurp(dir / "bounds.csv")).size() == 12);
    fs::remove_all(dir);
}
