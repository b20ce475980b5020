// Post-hoc metrics and Lyapunov checks over simulated trajectories.
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ema/controller.hpp"
#include "ema/model.hpp"
#include "ema/sim.hpp"

namespace ema {

struct AnalysisOptions {
    double settling_band = 0.02;        // fraction of the final reference
    double sliding_fraction = 0.01;     // S_tol floor as a fraction of peak |x3d|
    double reaching_hold = 1e-3;        // s, |S| must stay below S_tol this long
    double tolerance = 0.05;            // relative slack of the Lyapunov inequalities
    double chattering_window = 1e-3;    // s, window for counting switches of u
    double smoothness_window = 5e-3;    // s, trend windows for x1 and x2
};

struct RunReport {
    std::optional<double> settling_time;  // nullopt: unsettled
    double overshoot = 0.0;
    double steady_state_error = 0.0;
    double max_abs_u = 0.0;
    std::optional<double> reaching_time;  // nullopt: never reached
    bool ultimate_bound_ok = false;
    double radius_used = 0.0;
    bool literal_bound_ok = false;        // same check with delta/(|lambda_min| theta)
    double radius_literal = 0.0;
    std::size_t lyapunov_violations = 0;
    std::size_t lyapunov_checked = 0;
    std::size_t reaching_law_samples = 0;    // samples with |S| > S_tol
    std::size_t reaching_law_satisfied = 0;
    double duration = 0.0;

    [[nodiscard]] bool settled() const noexcept { return settling_time.has_value(); }
};

/// First time after which |x1 - y_final| <= band |y_final| for the rest of
/// the run, linearly interpolated between samples. nullopt when the final
/// sample is outside the band or the trajectory is empty.
[[nodiscard]] std::optional<double> settling_time(const Trajectory& traj, double band = 0.02);

/// max(0, (peak - y_final) / |step|) in the direction of the step; 0 for a
/// zero step or an empty trajectory.
[[nodiscard]] double overshoot(const Trajectory& traj);

/// |x1 - y_r| / |y_r| at the last sample.
[[nodiscard]] double steady_state_error(const Trajectory& traj);

[[nodiscard]] double max_abs_control(const Trajectory& traj);

/// Per-sample sliding threshold: max(fraction * peak |x3d|, 2 alpha3 h / L_lower(x1))
/// with h the control period. The second term is the largest change of S
/// over one held control interval.
[[nodiscard]] std::vector<double> sliding_thresholds(const Trajectory& traj, const PlantParams& p,
                                                     double fraction = 0.01);

/// Start of the first window of length `hold` in which |S| stays below its
/// threshold at every sample.
[[nodiscard]] std::optional<double> reaching_time(const Trajectory& traj,
                                                  const std::vector<double>& thresholds,
                                                  double hold = 1e-3);

/// d(½S²)/dt of the true plant at a sample: S (dx3 - dx3d) with dx3 from the
/// plant equations under the logged voltage and dx3d the directional
/// derivative of the virtual current along the true vector field.
[[nodiscard]] double sliding_energy_rate(const TrajectoryRecord& r, const Scenario& scenario);

struct ReachingLawCheck {
    std::size_t samples = 0;
    std::size_t satisfied = 0;
    [[nodiscard]] double fraction() const noexcept {
        return samples == 0 ? 1.0 : static_cast<double>(satisfied) / static_cast<double>(samples);
    }
};

/// Counts samples with |S| above threshold where
/// d(½S²)/dt <= -(1 - tolerance) epsilon1 |S|.
[[nodiscard]] ReachingLawCheck check_reaching_law(const Trajectory& traj, const Scenario& scenario,
                                                  const std::vector<double>& thresholds,
                                                  double tolerance = 0.05);

struct BoundCheck {
    bool contained = false;
    bool literal_contained = false;
    std::size_t lyapunov_violations = 0;
    std::size_t lyapunov_checked = 0;
};

/// Containment of ||(z1, z2)|| in the certified disc from `from_time` on,
/// for both radius readings, and the decrease condition
/// dV1/dt <= -(1 - theta) alpha ||z||² (central differences, relative slack
/// `tolerance`) wherever ||z|| exceeds the radius.
[[nodiscard]] BoundCheck verify_theorem_bounds(const Trajectory& traj, const GainCertificate& cert,
                                               double theta, std::optional<double> from_time,
                                               double tolerance = 0.05);

struct ChatteringStats {
    std::size_t min_switches_per_window = 0;  // over windows after `from`
    std::size_t windows = 0;
    std::size_t x1_trend_changes = 0;
    std::size_t x2_trend_changes = 0;
    std::size_t trend_windows = 0;
    std::size_t x1_sample_alternations = 0;   // diagnostic
    std::size_t x2_sample_alternations = 0;   // diagnostic
};

/// Switching of u per `chattering_window` after `switch_from`, and sign
/// changes of the net increments of x1 and x2 between consecutive
/// `smoothness_window`s after `smooth_from`.
[[nodiscard]] ChatteringStats chattering_stats(const Trajectory& traj, double switch_from,
                                               double smooth_from,
                                               const AnalysisOptions& opts = {});

/// Everything above for one run.
[[nodiscard]] RunReport analyze(const Trajectory& traj, const Scenario& scenario,
                                const GainCertificate& cert, const AnalysisOptions& opts = {});

}  // namespace ema
