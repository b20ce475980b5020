#include "ema/sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ema {
namespace {

StateRate rate(const State& s, double u, const PlantParams& p, double t) {
    if (!is_finite(s)) {
        throw DivergenceError(t, "state became non-finite at t = " + std::to_string(t));
    }
    return plant_derivative(s, u, p);
}

int sign_of(double v) {
    return (v > 0.0) - (v < 0.0);
}

std::size_t step_count(const Scenario& s) {
    return static_cast<std::size_t>(std::llround(s.duration / s.dt));
}

}  // namespace

void Scenario::validate() const {
    plant.validate();
    ema::validate(gains);
    ema::validate(controller);
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument("dt must be positive");
    }
    if (!(duration >= 0.0) || !std::isfinite(duration)) {
        throw std::invalid_argument("duration must be non-negative");
    }
    if (duration > 0.0 && duration < dt) {
        throw std::invalid_argument("duration must be at least one step");
    }
    if (decimation == 0 || control_period == 0) {
        throw std::invalid_argument("decimation and control period must be >= 1");
    }
    if (reference.empty() || reference.front().time != 0.0) {
        throw std::invalid_argument("reference schedule must start at t = 0");
    }
    for (std::size_t i = 0; i < reference.size(); ++i) {
        if (!std::isfinite(reference[i].value) || !std::isfinite(reference[i].time)) {
            throw std::invalid_argument("reference schedule must be finite");
        }
        if (i > 0 && !(reference[i].time > reference[i - 1].time)) {
            throw std::invalid_argument("reference times must be strictly increasing");
        }
    }
}

double reference_at(const std::vector<ReferencePoint>& ref, double t) {
    auto it = std::upper_bound(ref.begin(), ref.end(), t,
                               [](double v, const ReferencePoint& r) { return v < r.time; });
    if (it == ref.begin()) {
        return ref.empty() ? 0.0 : ref.front().value;
    }
    return std::prev(it)->value;
}

double reference_peak(const std::vector<ReferencePoint>& ref) {
    double peak = 0.0;
    for (const auto& r : ref) {
        peak = std::max(peak, std::abs(r.value));
    }
    return peak;
}

State integrate_step(const State& s, double u, const PlantParams& p, double dt,
                     Integrator integrator, double t) {
    State next;
    if (integrator == Integrator::Euler) {
        next = advance(s, rate(s, u, p, t), dt);
    } else {
        const StateRate k1 = rate(s, u, p, t);
        const StateRate k2 = rate(advance(s, k1, 0.5 * dt), u, p, t);
        const StateRate k3 = rate(advance(s, k2, 0.5 * dt), u, p, t);
        const StateRate k4 = rate(advance(s, k3, dt), u, p, t);
        next = {
            s.x1 + dt / 6.0 * (k1.dx1 + 2.0 * k2.dx1 + 2.0 * k3.dx1 + k4.dx1),
            s.x2 + dt / 6.0 * (k1.dx2 + 2.0 * k2.dx2 + 2.0 * k3.dx2 + k4.dx2),
            s.x3 + dt / 6.0 * (k1.dx3 + 2.0 * k2.dx3 + 2.0 * k3.dx3 + k4.dx3),
        };
    }
    if (!is_finite(next)) {
        throw DivergenceError(t + dt, "state became non-finite at t = " + std::to_string(t + dt));
    }
    if (p.hard_stop && next.x1 < 0.0) {
        next.x1 = 0.0;
        next.x2 = std::max(0.0, next.x2);
    }
    return next;
}

Simulator::Simulator(Scenario scenario)
    : scenario_(std::move(scenario)),
      certificate_(),
      controller_(scenario_.gains, scenario_.controller, scenario_.plant) {
    scenario_.validate();
    certificate_ = certify_gains(scenario_.gains, scenario_.plant, reference_peak(scenario_.reference));
    if (!certificate_.certified && !scenario_.allow_uncertified) {
        throw UncertifiedGainsError(
            "gains are not certified: Q must be negative definite and alpha2 > |b|");
    }
}

State Simulator::step(const State& s, double t) {
    const double y_r = reference_at(scenario_.reference, t);
    const ControlOutput c = controller_.update(s, y_r, 0.0, scenario_.dt);
    return integrate_step(s, c.u, scenario_.plant, scenario_.dt, scenario_.integrator, t);
}

Trajectory Simulator::run() {
    const Scenario& sc = scenario_;
    Trajectory traj;
    traj.dt = sc.dt;
    traj.decimation = sc.decimation;
    traj.control_period = sc.control_period;
    const std::size_t n = step_count(sc);
    if (n == 0) {
        return traj;
    }
    traj.records.reserve(n / sc.decimation + 1);
    controller_.reset();

    State s = sc.plant.x0;
    ControlOutput held;
    int previous_sign = 0;
    std::uint32_t sign_changes = 0;
    const double control_dt = sc.dt * static_cast<double>(sc.control_period);

    for (std::size_t k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) * sc.dt;
        const double y_r = reference_at(sc.reference, t);
        // y_r is piecewise constant, so its derivative is zero between switches.
        if (k % sc.control_period == 0) {
            held = controller_.update(s, y_r, 0.0, control_dt);
        }
        const int sign = sign_of(held.u);
        if (sign != 0) {
            if (previous_sign != 0 && sign != previous_sign) {
                ++sign_changes;
            }
            previous_sign = sign;
        }

        if (k % sc.decimation == 0) {
            TrajectoryRecord r;
            ErrorCoords z = error_coords(s, y_r, sc.gains);
            z.x3d = virtual_current(z.z2, s.x1, y_r, sc.gains, sc.plant, sc.controller.mu_argument);
            z.S = s.x3 - z.x3d;
            r.t = t;
            r.x1 = s.x1;
            r.x2 = s.x2;
            r.x3 = s.x3;
            r.u = held.u;
            r.x3d = z.x3d;
            r.S = z.S;
            r.z1 = z.z1;
            r.z2 = z.z2;
            r.V1 = 0.5 * (z.z1 * z.z1 + z.z2 * z.z2);
            r.V2 = 0.5 * z.S * z.S;
            r.V = r.V1 + r.V2;
            r.alpha3 = held.alpha3;
            r.y_r = y_r;
            r.x3d_dot = held.coords.x3d_dot;
            r.u_sign_changes = sign_changes;
            sign_changes = 0;
            traj.records.push_back(r);
        }
        if (k < n) {
            s = integrate_step(s, held.u, sc.plant, sc.dt, sc.integrator, t);
        }
    }
    return traj;
}

Trajectory run(const Scenario& scenario) {
    Simulator sim(scenario);
    return sim.run();
}

}  // namespace ema
