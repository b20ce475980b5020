#include "ema/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "ema/csv.hpp"

namespace ema {
namespace fs = std::filesystem;

namespace {

std::optional<Config> load(const GlobalOptions& opts, std::ostream& err) {
    try {
        return load_config(resolve_config(opts.config), opts.overrides);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return std::nullopt;
    }
}

std::string optional_number(const std::optional<double>& v) {
    return v ? format_number(*v) : std::string();
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// FNV-1a, only used to tag sweep row markers with the inputs that produced them.
std::uint64_t fingerprint(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void print_certificate(std::ostream& out, const GainCertificate& c) {
    out << "a = " << format_number(c.a) << '\n'
        << "b = " << format_number(c.b) << '\n'
        << "Q = [[" << format_number(c.q.xx) << ", " << format_number(c.q.xy) << "], ["
        << format_number(c.q.xy) << ", " << format_number(c.q.yy) << "]]\n"
        << "det Q = " << format_number(c.q.determinant()) << '\n'
        << "eigenvalues = " << format_number(c.eigenvalues[0]) << ", "
        << format_number(c.eigenvalues[1]) << '\n'
        << "negative_definite = " << std::boolalpha << c.negative_definite << '\n'
        << "alpha2_exceeds_b = " << c.alpha2_exceeds_b << '\n'
        << "certified = " << c.certified << '\n'
        << "alpha = " << format_number(c.alpha) << '\n'
        << "alpha_literal = " << format_number(c.alpha_literal) << '\n'
        << "delta = " << format_number(c.delta) << '\n'
        << "radius = " << format_number(c.radius) << '\n'
        << "radius_literal = " << format_number(c.radius_literal) << '\n';
}

void print_report(std::ostream& out, const RunReport& r, double seconds) {
    out << "settling_time = "
        << (r.settling_time ? format_number(*r.settling_time) + " s" : std::string("unsettled"))
        << '\n'
        << "overshoot = " << format_number(r.overshoot) << '\n'
        << "steady_state_error = " << format_number(r.steady_state_error) << '\n'
        << "max_abs_u = " << format_number(r.max_abs_u) << " V\n"
        << "reaching_time = "
        << (r.reaching_time ? format_number(*r.reaching_time) + " s" : std::string("not reached"))
        << '\n'
        << "ultimate_bound_ok = " << std::boolalpha << r.ultimate_bound_ok << '\n'
        << "lyapunov_violations = " << r.lyapunov_violations << " of " << r.lyapunov_checked
        << '\n'
        << "reaching_law = " << r.reaching_law_satisfied << " of " << r.reaching_law_samples
        << '\n'
        << "runtime = " << seconds << " s\n";
}

std::string to_string(Integrator i) {
    return i == Integrator::RK4 ? "rk4" : "euler";
}

}  // namespace

void write_atomically(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        f << content;
        f.flush();
        if (!f) {
            throw std::runtime_error("cannot write " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

nlohmann::json report_json(const RunReport& r, const GainCertificate& c, const Scenario& sc) {
    using nlohmann::json;
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    const ReachingLawCheck law{r.reaching_law_samples, r.reaching_law_satisfied};
    return {
        {"settled", r.settled()},
        {"settling_time", opt(r.settling_time)},
        {"overshoot", r.overshoot},
        {"steady_state_error", r.steady_state_error},
        {"max_abs_u", r.max_abs_u},
        {"reaching_time", opt(r.reaching_time)},
        {"ultimate_bound_ok", r.ultimate_bound_ok},
        {"literal_bound_ok", r.literal_bound_ok},
        {"radius", r.radius_used},
        {"radius_literal", r.radius_literal},
        {"lyapunov", {{"checked", r.lyapunov_checked}, {"violations", r.lyapunov_violations}}},
        {"reaching_law",
         {{"samples", law.samples}, {"satisfied", law.satisfied}, {"fraction", law.fraction()}}},
        {"duration", r.duration},
        {"certificate",
         {{"a", c.a},
          {"b", c.b},
          {"q", {{c.q.xx, c.q.xy}, {c.q.xy, c.q.yy}}},
          {"eigenvalues", {c.eigenvalues[0], c.eigenvalues[1]}},
          {"certified", c.certified},
          {"alpha", c.alpha},
          {"alpha_literal", c.alpha_literal},
          {"delta", c.delta}}},
        {"scenario",
         {{"dt", sc.dt},
          {"duration", sc.duration},
          {"integrator", to_string(sc.integrator)},
          {"decimation", sc.decimation},
          {"control_period", sc.control_period},
          {"alpha1", sc.gains.alpha1},
          {"alpha2", sc.gains.alpha2},
          {"epsilon1", sc.gains.epsilon1},
          {"theta", sc.gains.theta},
          {"mu_argument", sc.controller.mu_argument == MuArgument::Position
                              ? "position"
                              : "position_plus_reference"},
          {"derivative_mode",
           sc.controller.derivative_mode == DerivativeMode::Analytic ? "analytic" : "filtered"},
          {"fringing", std::string(sc.plant.fringing.variant_name())}}},
    };
}

int cmd_simulate(const GlobalOptions& opts, std::ostream& out, std::ostream& err) {
    const auto cfg = load(opts, err);
    if (!cfg) {
        return kExitConfig;
    }
    Scenario scenario = cfg->scenario;
    scenario.allow_uncertified = scenario.allow_uncertified || opts.force;

    const auto start = std::chrono::steady_clock::now();
    std::optional<Simulator> sim;
    try {
        sim.emplace(scenario);
    } catch (const UncertifiedGainsError& e) {
        err << "error: " << e.what() << " (use --force to run anyway)\n";
        print_certificate(err, certify_gains(scenario.gains, scenario.plant,
                                             reference_peak(scenario.reference)));
        return kExitUncertified;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    Trajectory traj;
    try {
        traj = sim->run();
    } catch (const DivergenceError& e) {
        err << "divergence: " << e.what() << '\n';
        return kExitDivergence;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const RunReport report = analyze(traj, scenario, sim->certificate());

    try {
        std::ostringstream csv;
        write_trajectory_csv(csv, traj);
        write_atomically(opts.out_dir / cfg->outputs.trajectory, csv.str());
        write_atomically(opts.out_dir / cfg->outputs.report,
                         report_json(report, sim->certificate(), scenario).dump(2) + "\n");
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    if (!opts.quiet) {
        out << "config = " << cfg->source << '\n';
        print_report(out, report, seconds);
        out << "trajectory = " << (opts.out_dir / cfg->outputs.trajectory).string() << '\n';
    }
    return kExitOk;
}

int cmd_check_gains(const GlobalOptions& opts, std::optional<double> y_r_max, std::ostream& out,
                    std::ostream& err) {
    const auto cfg = load(opts, err);
    if (!cfg) {
        return kExitConfig;
    }
    const Scenario& sc = cfg->scenario;
    const double peak = y_r_max.value_or(reference_peak(sc.reference));
    const GainCertificate cert = certify_gains(sc.gains, sc.plant, peak);
    if (!opts.quiet) {
        print_certificate(out, cert);
    }
    return cert.certified ? kExitOk : kExitUncertified;
}

int cmd_bounds(const GlobalOptions& opts, std::ostream& out, std::ostream& err) {
    const auto cfg = load(opts, err);
    if (!cfg) {
        return kExitConfig;
    }
    const BoundsGrid& g = cfg->bounds;
    const auto rows = envelope_table(cfg->scenario.plant, g.x1_min, g.x1_max, g.points);
    const fs::path path = opts.out_dir / cfg->outputs.bounds;
    try {
        std::ostringstream csv;
        write_bounds_csv(csv, rows);
        write_atomically(path, csv.str());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    if (!opts.quiet) {
        out << "bounds = " << path.string() << " (" << rows.size() << " rows)\n";
    }
    return kExitOk;
}

namespace {

struct SweepRow {
    std::size_t index = 0;
    ControllerGains gains;
    double x1_0 = 0.0;
    long realization = -1;  // -1: the configured plant
};

std::string run_row(const SweepRow& row, const Scenario& base,
                    const std::vector<FringingModel>& realizations, bool force) {
    Scenario sc = base;
    sc.gains = row.gains;
    sc.plant.x0.x1 = row.x1_0;
    sc.allow_uncertified = sc.allow_uncertified || force;
    if (row.realization >= 0) {
        sc.plant.fringing = realizations[static_cast<std::size_t>(row.realization)];
    }

    std::ostringstream line;
    line << row.index << ',' << format_number(row.gains.alpha1) << ','
         << format_number(row.gains.alpha2) << ',' << format_number(row.gains.epsilon1) << ','
         << format_number(row.x1_0) << ',' << row.realization << ',';
    const char* status = "ok";
    std::optional<RunReport> report;
    double radius = 0.0;
    try {
        Simulator sim(sc);
        radius = sim.certificate().radius;
        const Trajectory traj = sim.run();
        report = analyze(traj, sc, sim.certificate());
    } catch (const UncertifiedGainsError&) {
        status = "uncertified";
    } catch (const DivergenceError&) {
        status = "diverged";
    } catch (const std::invalid_argument&) {
        status = "invalid";
    }
    line << status << ',';
    if (report) {
        const RunReport& r = *report;
        const ReachingLawCheck law{r.reaching_law_samples, r.reaching_law_satisfied};
        line << optional_number(r.settling_time) << ',' << format_number(r.overshoot) << ','
             << format_number(r.steady_state_error) << ',' << format_number(r.max_abs_u) << ','
             << optional_number(r.reaching_time) << ','
             << (r.ultimate_bound_ok ? "true" : "false") << ','
             << (r.literal_bound_ok ? "true" : "false") << ',' << format_number(radius) << ','
             << r.lyapunov_violations << ',' << format_number(law.fraction());
    } else {
        line << ",,,,,,,,,";
    }
    return line.str();
}

}  // namespace

int cmd_sweep(const GlobalOptions& opts, bool fresh, std::ostream& out, std::ostream& err) {
    const auto cfg = load(opts, err);
    if (!cfg) {
        return kExitConfig;
    }
    const SweepSpec& spec = cfg->sweep;
    const Scenario& base = cfg->scenario;

    std::vector<FringingModel> realizations;
    if (spec.realizations > 0) {
        const FringingModel& f = base.plant.fringing;
        realizations = sample_fringing(base.sample_seed, f.bounds(Airgap::First),
                                       f.bounds(Airgap::Third), f.stroke(), spec.realizations);
    }

    std::vector<SweepRow> rows;
    for (const auto& g : spec.gains) {
        for (double x1 : spec.initial_positions) {
            if (spec.realizations == 0) {
                rows.push_back({rows.size(), g, x1, -1});
            }
            for (std::size_t r = 0; r < spec.realizations; ++r) {
                rows.push_back({rows.size(), g, x1, static_cast<long>(r)});
            }
        }
    }

    const fs::path sweep_path = opts.out_dir / cfg->outputs.sweep;
    fs::path row_dir = sweep_path;
    row_dir += ".rows";

    // Inputs that determine every row; a marker written under other inputs is stale.
    std::string inputs = slurp(cfg->source);
    for (const auto& o : opts.overrides) {
        inputs += '\n' + o;
    }
    inputs += opts.force ? "\nforce" : "\n";

    std::vector<std::string> lines(rows.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> resumed{0};
    std::mutex error_mutex;
    std::string io_error;

    auto worker = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) {
            const SweepRow& row = rows[i];
            char name[32];
            std::snprintf(name, sizeof name, "row_%06zu", row.index);
            const fs::path csv = row_dir / (std::string(name) + ".csv");
            const fs::path done = row_dir / (std::string(name) + ".done");
            const std::string tag =
                std::to_string(fingerprint(inputs + '\n' + std::to_string(row.index))) + '\n';
            try {
                if (!fresh && fs::exists(done) && fs::exists(csv) && slurp(done) == tag) {
                    std::string cached = slurp(csv);
                    if (!cached.empty() && cached.back() == '\n') {
                        cached.pop_back();
                    }
                    lines[i] = cached;
                    ++resumed;
                    continue;
                }
                lines[i] = run_row(row, base, realizations, opts.force);
                write_atomically(csv, lines[i] + '\n');
                write_atomically(done, tag);
            } catch (const std::exception& e) {
                std::lock_guard lock(error_mutex);
                io_error = e.what();
            }
        }
    };

    std::size_t threads = spec.threads ? spec.threads : std::thread::hardware_concurrency();
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(rows.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    for (auto& t : pool) {
        t.join();
    }
    if (!io_error.empty()) {
        err << "error: " << io_error << '\n';
        return kExitUsage;
    }

    std::string content(kSweepHeader);
    content += '\n';
    for (const auto& l : lines) {
        content += l;
        content += '\n';
    }
    try {
        write_atomically(sweep_path, content);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    if (!opts.quiet) {
        out << "sweep = " << sweep_path.string() << " (" << rows.size() << " rows, "
            << resumed.load() << " resumed)\n";
    }
    return kExitOk;
}

}  // namespace ema
