#include "ema/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#ifndef EMA_BUNDLED_CONFIG_DIR
#define EMA_BUNDLED_CONFIG_DIR "configs"
#endif

namespace ema {
namespace {

std::string location(const YAML::Node& n) {
    const YAML::Mark m = n.Mark();
    if (m.line < 0) {
        return "override";
    }
    return "line " + std::to_string(m.line + 1);
}

// Typed access to one YAML mapping. Remembers which keys were read so that
// finish() can reject the rest.
class Section {
public:
    Section(std::string source, YAML::Node node, std::string path)
        : source_(std::move(source)), node_(std::move(node)), path_(std::move(path)) {
        if (node_ && !node_.IsNull() && !node_.IsMap()) {
            fail(node_, "'" + path_ + "' must be a mapping");
        }
    }

    [[nodiscard]] bool has(const std::string& key) {
        allowed_.insert(key);
        return node_ && node_.IsMap() && node_[key] && !node_[key].IsNull();
    }

    YAML::Node get(const std::string& key) {
        allowed_.insert(key);
        return node_[key];
    }

    Section child(const std::string& key) {
        allowed_.insert(key);
        YAML::Node n = (node_ && node_.IsMap()) ? node_[key] : YAML::Node();
        return {source_, n, qualified(key)};
    }

    double number(const std::string& key, double fallback) {
        return has(key) ? to_number(node_[key], qualified(key)) : fallback;
    }

    long long integer(const std::string& key, long long fallback) {
        if (!has(key)) {
            return fallback;
        }
        const YAML::Node n = node_[key];
        try {
            return n.as<long long>();
        } catch (const YAML::Exception&) {
            fail(n, "'" + qualified(key) + "' must be an integer");
        }
    }

    std::size_t count(const std::string& key, std::size_t fallback) {
        const long long v = integer(key, static_cast<long long>(fallback));
        if (v < 0) {
            fail(node_[key], "'" + qualified(key) + "' must be non-negative");
        }
        return static_cast<std::size_t>(v);
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) {
            return fallback;
        }
        const YAML::Node n = node_[key];
        try {
            return n.as<bool>();
        } catch (const YAML::Exception&) {
            fail(n, "'" + qualified(key) + "' must be true or false");
        }
    }

    std::string text(const std::string& key, const std::string& fallback) {
        if (!has(key)) {
            return fallback;
        }
        const YAML::Node n = node_[key];
        if (!n.IsScalar()) {
            fail(n, "'" + qualified(key) + "' must be a string");
        }
        return n.Scalar();
    }

    std::vector<double> numbers(const std::string& key) {
        allowed_.insert(key);
        const YAML::Node n = node_[key];
        if (!n.IsSequence()) {
            fail(n, "'" + qualified(key) + "' must be a list of numbers");
        }
        std::vector<double> out;
        for (std::size_t i = 0; i < n.size(); ++i) {
            out.push_back(to_number(n[i], qualified(key) + "[" + std::to_string(i) + "]"));
        }
        return out;
    }

    // Rejects keys that were never asked for.
    void finish() const {
        if (!node_ || !node_.IsMap()) {
            return;
        }
        for (const auto& kv : node_) {
            const std::string key = kv.first.Scalar();
            if (!allowed_.count(key)) {
                fail(kv.first, "unknown key '" + qualified(key) + "'");
            }
        }
    }

    [[noreturn]] void fail(const YAML::Node& n, const std::string& what) const {
        throw ConfigError(source_ + ":" + location(n) + ": " + what);
    }

    [[nodiscard]] const YAML::Node& node() const noexcept { return node_; }
    [[nodiscard]] const std::string& source() const noexcept { return source_; }
    [[nodiscard]] const std::string& path() const noexcept { return path_; }
    [[nodiscard]] std::string qualified(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    double to_number(const YAML::Node& n, const std::string& name) const {
        double v = 0.0;
        try {
            v = n.as<double>();
        } catch (const YAML::Exception&) {
            fail(n, "'" + name + "' must be a number");
        }
        if (!std::isfinite(v)) {
            fail(n, "'" + name + "' must be finite");
        }
        return v;
    }

    std::string source_;
    YAML::Node node_;
    std::string path_;
    std::set<std::string> allowed_;
};

SurfaceBounds read_pair(Section& s, const std::string& key) {
    const std::vector<double> v = s.numbers(key);
    if (v.size() != 2) {
        s.fail(s.get(key), "'" + s.qualified(key) + "' must be [lower, upper]");
    }
    return {v[0], v[1]};
}

FringingModel read_fringing(Section f, double rho_x, double mu0) {
    const std::string variant = f.text("variant", "constant");
    const double stroke = f.number("stroke", FringingModel::kDefaultStroke);
    const double spread = f.number("spread", 0.2);
    if (!(spread >= 0.0 && spread < 1.0)) {
        f.fail(f.get("spread"), "'" + f.qualified("spread") + "' must lie in [0, 1)");
    }

    FringingModel::Surfaces surfaces;
    double nominal1 = 0.0;
    double nominal3 = 0.0;
    if (variant == "constant") {
        const double even = 2.0 / (mu0 * rho_x);
        ConstantSurfaces c{f.number("s1", even), f.number("s3", even)};
        nominal1 = c.s1;
        nominal3 = c.s3;
        surfaces = c;
    } else if (variant == "weighted") {
        WeightedSurfaces w{f.number("alpha1", 1.0), f.number("alpha3", 1.0),
                           f.number("s_cm1", 2.0 / (mu0 * rho_x)),
                           f.number("s_cm3", 2.0 / (mu0 * rho_x))};
        nominal1 = w.alpha1 * w.s_cm1;
        nominal3 = w.alpha3 * w.s_cm3;
        surfaces = w;
    } else if (variant == "geometric") {
        GeometricSurfaces g{f.number("a1", 0.0), f.number("b1", 0.0), f.number("a3", 0.0),
                            f.number("b3", 0.0)};
        nominal1 = g.a1 * g.b1;
        nominal3 = g.a3 * g.b3;
        surfaces = g;
    } else {
        f.fail(f.get("variant"), "'" + f.qualified("variant") +
                                     "' must be constant, weighted or geometric");
    }

    SurfaceBounds gap1{(1.0 - spread) * nominal1, (1.0 + spread) * nominal1};
    SurfaceBounds gap3{(1.0 - spread) * nominal3, (1.0 + spread) * nominal3};
    if (f.has("gap1")) {
        gap1 = read_pair(f, "gap1");
    }
    if (f.has("gap3")) {
        gap3 = read_pair(f, "gap3");
    }
    f.finish();
    try {
        return FringingModel(std::move(surfaces), gap1, gap3, stroke);
    } catch (const std::invalid_argument& e) {
        f.fail(f.node(), "'" + f.path() + "': " + e.what());
    }
}

PlantParams read_plant(Section s) {
    PlantParams p;
    p.rho_x = s.number("rho_x", p.rho_x);
    p.rho_0 = s.number("rho_0", p.rho_0);
    const long long turns = s.integer("turns", p.turns);
    if (turns < 1 || turns > 1'000'000) {
        s.fail(s.get("turns"), "'" + s.qualified("turns") + "' must be a positive integer");
    }
    p.turns = static_cast<int>(turns);
    p.friction = s.number("friction", p.friction);
    p.stiffness = s.number("stiffness", p.stiffness);
    p.mass = s.number("mass", p.mass);
    p.resistance = s.number("resistance", p.resistance);
    p.hard_stop = s.boolean("hard_stop", p.hard_stop);
    if (s.has("x0")) {
        const std::vector<double> x0 = s.numbers("x0");
        if (x0.size() != 3) {
            s.fail(s.get("x0"), "'" + s.qualified("x0") + "' must be [x1, x2, x3]");
        }
        p.x0 = {x0[0], x0[1], x0[2]};
    }
    if (!(p.rho_x > 0.0)) {
        s.fail(s.get("rho_x"), "'" + s.qualified("rho_x") + "' must be positive");
    }
    p.fringing = read_fringing(s.child("fringing"), p.rho_x, p.mu_0);
    s.finish();
    return p;
}

ControllerGains read_gain_values(Section& s, const ControllerGains& base) {
    ControllerGains g = base;
    g.alpha1 = s.number("alpha1", g.alpha1);
    g.alpha2 = s.number("alpha2", g.alpha2);
    g.epsilon1 = s.number("epsilon1", g.epsilon1);
    g.theta = s.number("theta", g.theta);
    return g;
}

void read_gains(Section s, ControllerGains& g, ControllerOptions& o) {
    g = read_gain_values(s, g);
    const std::string arg = s.text("mu_argument", "position");
    if (arg == "position") {
        o.mu_argument = MuArgument::Position;
    } else if (arg == "position_plus_reference") {
        o.mu_argument = MuArgument::PositionPlusReference;
    } else {
        s.fail(s.get("mu_argument"),
               "'" + s.qualified("mu_argument") + "' must be position or position_plus_reference");
    }
    const std::string mode = s.text("derivative_mode", "analytic");
    if (mode == "analytic") {
        o.derivative_mode = DerivativeMode::Analytic;
    } else if (mode == "filtered") {
        o.derivative_mode = DerivativeMode::Filtered;
    } else {
        s.fail(s.get("derivative_mode"),
               "'" + s.qualified("derivative_mode") + "' must be analytic or filtered");
    }
    o.filter_time_constant = s.number("filter_time_constant", o.filter_time_constant);
    o.boundary_layer = s.number("boundary_layer", o.boundary_layer);
    s.finish();
}

std::vector<ReferencePoint> read_reference(Section& s) {
    const YAML::Node n = s.get("reference");
    if (n.IsScalar()) {
        return {{0.0, s.number("reference", 0.0)}};
    }
    if (!n.IsSequence()) {
        s.fail(n, "'" + s.qualified("reference") + "' must be a number or a list of {time, value}");
    }
    std::vector<ReferencePoint> out;
    for (std::size_t i = 0; i < n.size(); ++i) {
        Section point(s.source(), n[i], s.qualified("reference") + "[" + std::to_string(i) + "]");
        out.push_back({point.number("time", 0.0), point.number("value", 0.0)});
        point.finish();
    }
    return out;
}

void read_scenario(Section s, Scenario& sc) {
    if (s.has("reference")) {
        sc.reference = read_reference(s);
    }
    sc.dt = s.number("dt", sc.dt);
    sc.duration = s.number("duration", sc.duration);
    const std::string integ = s.text("integrator", "rk4");
    if (integ == "rk4") {
        sc.integrator = Integrator::RK4;
    } else if (integ == "euler") {
        sc.integrator = Integrator::Euler;
    } else {
        s.fail(s.get("integrator"), "'" + s.qualified("integrator") + "' must be rk4 or euler");
    }
    sc.decimation = s.count("decimation", sc.decimation);
    sc.control_period = s.count("control_period", sc.control_period);
    sc.sample_seed = static_cast<std::uint64_t>(s.count("seed", sc.sample_seed));
    sc.allow_uncertified = s.boolean("allow_uncertified", sc.allow_uncertified);
    s.finish();
}

void read_bounds(Section s, BoundsGrid& b) {
    b.x1_min = s.number("x1_min", b.x1_min);
    b.x1_max = s.number("x1_max", b.x1_max);
    b.points = s.count("points", b.points);
    if (b.points == 0 || b.x1_max < b.x1_min) {
        s.fail(s.node(), "'bounds' needs points >= 1 and x1_max >= x1_min");
    }
    s.finish();
}

void read_sweep(const std::string& source, Section s, SweepSpec& sw, const Scenario& sc) {
    const bool has_gains = s.has("gains");
    const bool has_positions = s.has("initial_positions");
    if (has_gains) {
        const YAML::Node n = s.get("gains");
        if (!n.IsSequence()) {
            s.fail(n, "'sweep.gains' must be a list of gain mappings");
        }
        for (std::size_t i = 0; i < n.size(); ++i) {
            Section g(source, n[i], "sweep.gains[" + std::to_string(i) + "]");
            sw.gains.push_back(read_gain_values(g, sc.gains));
            g.finish();
        }
    }
    if (has_positions) {
        sw.initial_positions = s.numbers("initial_positions");
    }
    if (has_gains != has_positions) {
        // One list given: the other axis is the scenario's own value.
        if (!has_gains) {
            sw.gains = {sc.gains};
        } else {
            sw.initial_positions = {sc.plant.x0.x1};
        }
    }
    sw.realizations = s.count("realizations", sw.realizations);
    sw.threads = s.count("threads", sw.threads);
    s.finish();
}

void read_outputs(Section s, OutputPaths& o) {
    o.trajectory = s.text("trajectory", o.trajectory);
    o.report = s.text("report", o.report);
    o.bounds = s.text("bounds", o.bounds);
    o.sweep = s.text("sweep", o.sweep);
    s.finish();
}

void set_path(YAML::Node node, const std::vector<std::string>& parts, std::size_t i,
              const YAML::Node& value, const std::string& spec) {
    if (i + 1 == parts.size()) {
        node[parts[i]] = value;
        return;
    }
    YAML::Node child = node[parts[i]];
    if (!child || child.IsNull()) {
        child = YAML::Node(YAML::NodeType::Map);
    } else if (!child.IsMap()) {
        throw ConfigError("override '" + spec + "': '" + parts[i] + "' is not a section");
    }
    set_path(child, parts, i + 1, value, spec);
}

void apply_override(YAML::Node& root, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + spec + "' must have the form key=value");
    }
    std::vector<std::string> parts;
    std::stringstream keys(spec.substr(0, eq));
    for (std::string part; std::getline(keys, part, '.');) {
        if (part.empty()) {
            throw ConfigError("override '" + spec + "' has an empty key component");
        }
        parts.push_back(part);
    }
    YAML::Node value;
    try {
        value = YAML::Load(spec.substr(eq + 1));
    } catch (const YAML::Exception& e) {
        throw ConfigError("override '" + spec + "': " + e.msg);
    }
    set_path(root, parts, 0, value, spec);
}

}  // namespace

Config parse_config(std::string_view text, const std::vector<std::string>& overrides,
                    std::string source) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ConfigError(source + ":line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (!root || root.IsNull()) {
        root = YAML::Node(YAML::NodeType::Map);
    }
    if (!root.IsMap()) {
        throw ConfigError(source + ":" + location(root) + ": top level must be a mapping");
    }
    for (const auto& o : overrides) {
        apply_override(root, o);
    }

    Config cfg;
    cfg.source = source;
    Section top(source, root, "");
    const long long version = top.integer("schema_version", -1);
    if (version != kSchemaVersion) {
        const YAML::Node at = top.has("schema_version") ? top.get("schema_version") : root;
        top.fail(at, "schema_version must be " + std::to_string(kSchemaVersion));
    }
    cfg.schema_version = static_cast<int>(version);

    Scenario& sc = cfg.scenario;
    sc.plant = read_plant(top.child("plant"));
    read_gains(top.child("gains"), sc.gains, sc.controller);
    read_scenario(top.child("scenario"), sc);
    read_bounds(top.child("bounds"), cfg.bounds);
    read_sweep(source, top.child("sweep"), cfg.sweep, sc);
    read_outputs(top.child("outputs"), cfg.outputs);
    top.finish();

    try {
        sc.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return cfg;
}

Config load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), overrides, path.string());
}

std::filesystem::path bundled_config_dir() {
    return EMA_BUNDLED_CONFIG_DIR;
}

std::filesystem::path resolve_config(std::string_view name) {
    namespace fs = std::filesystem;
    const fs::path given(name);
    if (given.has_parent_path() || fs::is_regular_file(given)) {
        if (!fs::is_regular_file(given)) {
            throw ConfigError("config not found: " + given.string());
        }
        return given;
    }
    std::vector<fs::path> dirs;
    if (const char* env = std::getenv(kConfigPathEnv)) {
        std::stringstream list(env);
        for (std::string dir; std::getline(list, dir, ':');) {
            if (!dir.empty()) {
                dirs.emplace_back(dir);
            }
        }
    }
    dirs.push_back(bundled_config_dir());
    for (const auto& dir : dirs) {
        for (const fs::path& candidate : {dir / given, dir / (std::string(name) + ".yaml")}) {
            if (fs::is_regular_file(candidate)) {
                return candidate;
            }
        }
    }
    throw ConfigError("config '" + std::string(name) + "' not found in " + kConfigPathEnv +
                      " or " + bundled_config_dir().string());
}

}  // namespace ema
