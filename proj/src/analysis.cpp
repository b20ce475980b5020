#include "ema/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "ema/bounds.hpp"

namespace ema {
namespace {

int sign_of(double v) {
    return (v > 0.0) - (v < 0.0);
}

std::size_t records_per(double window, const Trajectory& traj) {
    const double interval = traj.record_interval();
    if (!(interval > 0.0)) {
        return 1;
    }
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(window / interval)));
}

std::size_t first_index_at(const Trajectory& traj, double t) {
    const auto& r = traj.records;
    auto it = std::lower_bound(r.begin(), r.end(), t,
                               [](const TrajectoryRecord& rec, double v) { return rec.t < v; });
    return static_cast<std::size_t>(std::distance(r.begin(), it));
}

// Sign changes between consecutive non-zero entries.
std::size_t sign_changes(const std::vector<double>& v) {
    std::size_t changes = 0;
    int previous = 0;
    for (double d : v) {
        const int s = sign_of(d);
        if (s == 0) {
            continue;
        }
        if (previous != 0 && s != previous) {
            ++changes;
        }
        previous = s;
    }
    return changes;
}

}  // namespace

std::optional<double> settling_time(const Trajectory& traj, double band) {
    const auto& r = traj.records;
    if (r.empty()) {
        return std::nullopt;
    }
    const double target = r.back().y_r;
    double scale = std::abs(target);
    if (scale == 0.0) {
        scale = std::abs(target - r.front().x1);
    }
    const double half_width = band * scale;
    auto error = [&](std::size_t i) { return std::abs(r[i].x1 - target); };

    std::size_t last_outside = r.size();
    for (std::size_t i = r.size(); i-- > 0;) {
        if (error(i) > half_width) {
            last_outside = i;
            break;
        }
    }
    if (last_outside == r.size()) {
        return r.front().t;
    }
    if (last_outside + 1 == r.size()) {
        return std::nullopt;
    }
    const std::size_t i = last_outside;
    const double e0 = error(i);
    const double e1 = error(i + 1);
    const double w = e0 == e1 ? 1.0 : (e0 - half_width) / (e0 - e1);
    return r[i].t + std::clamp(w, 0.0, 1.0) * (r[i + 1].t - r[i].t);
}

double overshoot(const Trajectory& traj) {
    const auto& r = traj.records;
    if (r.empty()) {
        return 0.0;
    }
    const double target = r.back().y_r;
    const double step = target - r.front().x1;
    if (step == 0.0) {
        return 0.0;
    }
    const double direction = step > 0.0 ? 1.0 : -1.0;
    double peak = 0.0;
    for (const auto& rec : r) {
        peak = std::max(peak, direction * (rec.x1 - target));
    }
    return peak / std::abs(step);
}

double steady_state_error(const Trajectory& traj) {
    if (traj.records.empty()) {
        return 0.0;
    }
    const auto& last = traj.records.back();
    const double scale = std::abs(last.y_r);
    const double err = std::abs(last.x1 - last.y_r);
    return scale > 0.0 ? err / scale : err;
}

double max_abs_control(const Trajectory& traj) {
    double m = 0.0;
    for (const auto& r : traj.records) {
        m = std::max(m, std::abs(r.u));
    }
    return m;
}

std::vector<double> sliding_thresholds(const Trajectory& traj, const PlantParams& p,
                                       double fraction) {
    double peak = 0.0;
    for (const auto& r : traj.records) {
        peak = std::max(peak, std::abs(r.x3d));
    }
    const double floor = fraction * peak;
    const double h = traj.dt * static_cast<double>(traj.control_period);
    std::vector<double> out;
    out.reserve(traj.records.size());
    for (const auto& r : traj.records) {
        const double band = 2.0 * r.alpha3 * h / inductance_bounds(r.x1, p).lower;
        out.push_back(std::max(floor, band));
    }
    return out;
}

std::optional<double> reaching_time(const Trajectory& traj, const std::vector<double>& thresholds,
                                    double hold) {
    const auto& r = traj.records;
    std::size_t run_start = r.size();
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (std::abs(r[i].S) < thresholds[i]) {
            if (run_start == r.size()) {
                run_start = i;
            }
            if (r[i].t - r[run_start].t >= hold - 1e-12) {
                return r[run_start].t;
            }
        } else {
            run_start = r.size();
        }
    }
    return std::nullopt;
}

double sliding_energy_rate(const TrajectoryRecord& r, const Scenario& scenario) {
    const PlantParams& p = scenario.plant;
    const State s{r.x1, r.x2, r.x3};
    const StateRate f = plant_derivative(s, r.u, p);
    auto x3d_at = [&](double x1, double x2) {
        const double z2 = x2 + scenario.gains.alpha1 * (x1 - r.y_r);
        return virtual_current(z2, x1, r.y_r, scenario.gains, p, scenario.controller.mu_argument);
    };
    constexpr double h = 1e-9;  // s
    const double x3d_rate = (x3d_at(r.x1 + h * f.dx1, r.x2 + h * f.dx2) -
                             x3d_at(r.x1 - h * f.dx1, r.x2 - h * f.dx2)) /
                            (2.0 * h);
    return r.S * (f.dx3 - x3d_rate);
}

ReachingLawCheck check_reaching_law(const Trajectory& traj, const Scenario& scenario,
                                    const std::vector<double>& thresholds, double tolerance) {
    ReachingLawCheck check;
    for (std::size_t i = 0; i < traj.records.size(); ++i) {
        const auto& r = traj.records[i];
        if (!(std::abs(r.S) > thresholds[i])) {
            continue;
        }
        ++check.samples;
        const double limit = -(1.0 - tolerance) * scenario.gains.epsilon1 * std::abs(r.S);
        if (sliding_energy_rate(r, scenario) <= limit) {
            ++check.satisfied;
        }
    }
    return check;
}

BoundCheck verify_theorem_bounds(const Trajectory& traj, const GainCertificate& cert, double theta,
                                 std::optional<double> from_time, double tolerance) {
    BoundCheck out;
    const auto& r = traj.records;
    auto norm = [&](std::size_t i) { return std::hypot(r[i].z1, r[i].z2); };

    if (from_time && !r.empty()) {
        out.contained = true;
        out.literal_contained = true;
        for (std::size_t i = first_index_at(traj, *from_time); i < r.size(); ++i) {
            const double n = norm(i);
            out.contained = out.contained && n <= cert.radius;
            out.literal_contained = out.literal_contained && n <= cert.radius_literal;
        }
    }

    if (!cert.negative_definite) {
        return out;
    }
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
        const double n = norm(i);
        if (!(n > cert.radius)) {
            continue;
        }
        ++out.lyapunov_checked;
        const double v1_rate = (r[i + 1].V1 - r[i - 1].V1) / (r[i + 1].t - r[i - 1].t);
        const double bound = -(1.0 - theta) * cert.alpha * n * n;
        if (v1_rate > (1.0 - tolerance) * bound) {
            ++out.lyapunov_violations;
        }
    }
    return out;
}

ChatteringStats chattering_stats(const Trajectory& traj, double switch_from, double smooth_from,
                                 const AnalysisOptions& opts) {
    ChatteringStats st;
    const auto& r = traj.records;

    const std::size_t per_switch = records_per(opts.chattering_window, traj);
    bool first = true;
    // u_sign_changes of record i counts switches in (t[i-1], t[i]].
    for (std::size_t start = first_index_at(traj, switch_from) + 1; start + per_switch <= r.size();
         start += per_switch) {
        std::size_t count = 0;
        for (std::size_t i = start; i < start + per_switch; ++i) {
            count += r[i].u_sign_changes;
        }
        st.min_switches_per_window = first ? count : std::min(st.min_switches_per_window, count);
        first = false;
        ++st.windows;
    }

    const std::size_t per_trend = records_per(opts.smoothness_window, traj);
    const std::size_t begin = first_index_at(traj, smooth_from);
    std::vector<double> d1;
    std::vector<double> d2;
    for (std::size_t i = begin; i + per_trend < r.size(); i += per_trend) {
        d1.push_back(r[i + per_trend].x1 - r[i].x1);
        d2.push_back(r[i + per_trend].x2 - r[i].x2);
    }
    st.trend_windows = d1.size();
    st.x1_trend_changes = sign_changes(d1);
    st.x2_trend_changes = sign_changes(d2);

    std::vector<double> s1;
    std::vector<double> s2;
    for (std::size_t i = begin + 1; i < r.size(); ++i) {
        s1.push_back(r[i].x1 - r[i - 1].x1);
        s2.push_back(r[i].x2 - r[i - 1].x2);
    }
    st.x1_sample_alternations = sign_changes(s1);
    st.x2_sample_alternations = sign_changes(s2);
    return st;
}

RunReport analyze(const Trajectory& traj, const Scenario& scenario, const GainCertificate& cert,
                  const AnalysisOptions& opts) {
    RunReport rep;
    rep.duration = traj.records.empty() ? 0.0 : traj.records.back().t;
    rep.settling_time = settling_time(traj, opts.settling_band);
    rep.overshoot = overshoot(traj);
    rep.steady_state_error = steady_state_error(traj);
    rep.max_abs_u = max_abs_control(traj);

    const auto thresholds = sliding_thresholds(traj, scenario.plant, opts.sliding_fraction);
    rep.reaching_time = reaching_time(traj, thresholds, opts.reaching_hold);
    const ReachingLawCheck law = check_reaching_law(traj, scenario, thresholds, opts.tolerance);
    rep.reaching_law_samples = law.samples;
    rep.reaching_law_satisfied = law.satisfied;

    const BoundCheck bc =
        verify_theorem_bounds(traj, cert, scenario.gains.theta, rep.settling_time, opts.tolerance);
    rep.ultimate_bound_ok = bc.contained;
    rep.literal_bound_ok = bc.literal_contained;
    rep.radius_used = cert.radius;
    rep.radius_literal = cert.radius_literal;
    rep.lyapunov_violations = bc.lyapunov_violations;
    rep.lyapunov_checked = bc.lyapunov_checked;
    return rep;
}

}  // namespace ema
