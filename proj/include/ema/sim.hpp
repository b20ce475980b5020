// Fixed-step closed-loop simulation.
//
// The control voltage is evaluated at the start of every control period and
// held across it (zero-order hold). The plant is advanced with RK4 or
// explicit Euler at a fixed step; there is no event location on S = 0.
#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ema/controller.hpp"
#include "ema/fringing.hpp"
#include "ema/model.hpp"

namespace ema {

enum class Integrator { RK4, Euler };

/// y_r switches to `value` at `time` and holds until the next point.
struct ReferencePoint {
    double time = 0.0;   // s
    double value = 0.0;  // m
};

struct Scenario {
    PlantParams plant;  // true plant; its fringing bounds are the controller's envelope
    ControllerGains gains;
    ControllerOptions controller;
    std::vector<ReferencePoint> reference{{0.0, 0.003}};
    double dt = 1e-6;        // s
    double duration = 0.5;   // s; 0 gives an empty trajectory
    Integrator integrator = Integrator::RK4;
    std::size_t decimation = 100;     // integration steps per record
    std::size_t control_period = 1;   // integration steps per control update
    std::uint64_t sample_seed = 0;    // fringing realizations in sweeps
    bool allow_uncertified = false;

    /// Throws std::invalid_argument on an inconsistent scenario.
    void validate() const;
};

/// Piecewise-constant reference value at time t.
[[nodiscard]] double reference_at(const std::vector<ReferencePoint>& ref, double t);

/// max |y_r| over the schedule; the delta of the gain certificate.
[[nodiscard]] double reference_peak(const std::vector<ReferencePoint>& ref);

struct TrajectoryRecord {
    double t = 0.0;
    double x1 = 0.0;
    double x2 = 0.0;
    double x3 = 0.0;
    double u = 0.0;
    double x3d = 0.0;
    double S = 0.0;
    double z1 = 0.0;
    double z2 = 0.0;
    double V1 = 0.0;
    double V2 = 0.0;
    double V = 0.0;
    double alpha3 = 0.0;
    // Not exported to CSV.
    double y_r = 0.0;
    double x3d_dot = 0.0;
    std::uint32_t u_sign_changes = 0;  // since the previous record, at full rate
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    double dt = 0.0;               // integration step
    std::size_t decimation = 1;
    std::size_t control_period = 1;

    [[nodiscard]] double record_interval() const noexcept {
        return dt * static_cast<double>(decimation);
    }
    [[nodiscard]] bool empty() const noexcept { return records.empty(); }
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(double time, const std::string& what)
        : std::runtime_error(what), time_(time) {}
    [[nodiscard]] double time() const noexcept { return time_; }

private:
    double time_;
};

class UncertifiedGainsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Advances the plant by one step of length dt under constant input u.
/// Applies the hard stop when enabled. Throws DivergenceError (time t) when
/// the result is not finite.
[[nodiscard]] State integrate_step(const State& s, double u, const PlantParams& p, double dt,
                                   Integrator integrator, double t = 0.0);

class Simulator {
public:
    /// Validates the scenario and, unless allow_uncertified is set, the gain
    /// certificate (UncertifiedGainsError).
    explicit Simulator(Scenario scenario);

    /// One closed-loop step from (s, t): evaluates the controller at s and
    /// integrates over [t, t + dt] with that voltage held.
    State step(const State& s, double t);

    /// Full run from the plant's initial state.
    Trajectory run();

    [[nodiscard]] const Scenario& scenario() const noexcept { return scenario_; }
    [[nodiscard]] const GainCertificate& certificate() const noexcept { return certificate_; }

private:
    Scenario scenario_;
    GainCertificate certificate_;
    CompositeController controller_;
};

[[nodiscard]] Trajectory run(const Scenario& scenario);

}  // namespace ema
