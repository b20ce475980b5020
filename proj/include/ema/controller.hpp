// Backstepping + sliding-mode position controller.
//
// The outer loop is a backstepping law on (z1, z2) that requests a squared
// coil current x3d². The inner loop is a first-order sliding mode on
// S = x3 - x3d driven by the switching voltage u = -alpha3 sign(S).
// Only the interval envelopes of the bounds module enter the control law.
#pragma once

#include <array>

#include "ema/bounds.hpp"
#include "ema/model.hpp"

namespace ema {

struct ControllerGains {
    double alpha1 = 10.0;     // 1/s
    double alpha2 = 20000.0;  // 1/s
    double epsilon1 = 10.0;   // V
    double theta = 0.9;       // in (0, 1)
};

/// Where the lower force envelope is evaluated in the virtual control.
enum class MuArgument {
    Position,               // mu_lower(x1)
    PositionPlusReference,  // mu_lower(x1 + y_r)
};

/// How dx3d/dt is obtained for the sliding gain.
enum class DerivativeMode {
    Analytic,  // chain rule through the nominal outer-loop dynamics
    Filtered,  // backward difference through a first-order low-pass
};

struct ControllerOptions {
    MuArgument mu_argument = MuArgument::Position;
    DerivativeMode derivative_mode = DerivativeMode::Analytic;
    double filter_time_constant = 1e-4;  // s, Filtered mode
    double boundary_layer = 0.0;         // A; 0 keeps the pure sign function
};

/// Throws std::invalid_argument unless alpha1, alpha2, epsilon1 > 0 and
/// 0 < theta < 1.
void validate(const ControllerGains& g);
void validate(const ControllerOptions& o);

struct SymmetricMatrix2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    [[nodiscard]] double determinant() const noexcept { return xx * yy - xy * xy; }
};

/// Stability certificate of the outer loop and its ultimate bound.
struct GainCertificate {
    double a = 0.0;  // 1 - alpha1² + (lambda/m) alpha1 - K/m
    double b = 0.0;  // alpha1 - lambda/m
    SymmetricMatrix2 q;
    std::array<double, 2> eigenvalues{};  // ascending
    bool negative_definite = false;
    bool alpha2_exceeds_b = false;  // alpha2 > |b|
    bool certified = false;         // both of the above
    double alpha = 0.0;             // |eigenvalue closest to zero|
    double alpha_literal = 0.0;     // |lambda_min(Q)|, the most negative eigenvalue
    double delta = 0.0;             // (K/m) |y_r|max
    double radius = 0.0;            // delta / (alpha theta); +inf when not negative definite
    double radius_literal = 0.0;    // delta / (alpha_literal theta)
};

/// Never throws for finite gains; an unstable choice yields certified == false.
[[nodiscard]] GainCertificate certify_gains(const ControllerGains& g, const PlantParams& p,
                                            double y_r_max);

struct ErrorCoords {
    double z1 = 0.0;       // m, x1 - y_r
    double z2 = 0.0;       // m/s, x2 + alpha1 z1
    double S = 0.0;        // A, x3 - x3d
    double x3d = 0.0;      // A
    double x3d_dot = 0.0;  // A/s
};

/// Fills z1 and z2 only.
[[nodiscard]] ErrorCoords error_coords(const State& s, double y_r, const ControllerGains& g);

/// Point at which mu_lower is evaluated for the chosen MuArgument.
[[nodiscard]] double mu_lower_argument(double x1, double y_r, MuArgument arg);

/// x3d = sqrt(max(0, -(2m / mu_lower) alpha2 z2)). The demand is clamped at
/// zero because the magnetic force cannot change sign.
[[nodiscard]] double virtual_current(double z2, double x1, double y_r, const ControllerGains& g,
                                     const PlantParams& p,
                                     MuArgument arg = MuArgument::Position);

/// Analytic dx3d/dt. Differentiates x3d² = -(2m/mu_lower) alpha2 z2 by the
/// chain rule along the outer-loop model with mu replaced by mu_lower and x3
/// by x3d. Zero inside the clamped region and wherever x3d == 0.
///
/// The result is sensitive to model mismatch: an acceleration error e shows
/// up as (m alpha2 / mu_lower) e / x3d. Off-nominal plants therefore see a
/// persistent offset relative to the measured rate of x3d.
[[nodiscard]] double virtual_current_derivative(const State& s, const ErrorCoords& z, double y_r,
                                                double y_r_dot, const ControllerGains& g,
                                                const PlantParams& p,
                                                MuArgument arg = MuArgument::Position);

/// alpha3 = R|x3d| + |(z2 - alpha1 z1)(S + x3d)| mu_upper + |dx3d| L_upper + eps,
/// eps = (2/m)|x3 + x3d| mu_upper + epsilon1. Envelopes at the current x1.
[[nodiscard]] double sliding_gain(const State& s, const ErrorCoords& z, const ControllerGains& g,
                                  const PlantParams& p);

/// -alpha3 sign(S) with sign(0) = 0, or the saturated variant when
/// boundary_layer > 0.
[[nodiscard]] double control_voltage(double S, double alpha3, double boundary_layer = 0.0);

struct ControlOutput {
    double u = 0.0;
    double alpha3 = 0.0;
    ErrorCoords coords;
};

/// Stateful wrapper evaluating the full control law. Holds the low-pass state
/// of the Filtered derivative mode, so one instance belongs to one simulation.
class CompositeController {
public:
    CompositeController(ControllerGains gains, ControllerOptions options, PlantParams model);

    /// dt is the time since the previous call (used by Filtered mode only).
    ControlOutput update(const State& s, double y_r, double y_r_dot, double dt);

    void reset() noexcept { filter_primed_ = false; }

    [[nodiscard]] const ControllerGains& gains() const noexcept { return gains_; }
    [[nodiscard]] const ControllerOptions& options() const noexcept { return options_; }

private:
    ControllerGains gains_;
    ControllerOptions options_;
    PlantParams model_;
    bool filter_primed_ = false;
    double previous_x3d_ = 0.0;
    double filtered_rate_ = 0.0;
};

}  // namespace ema
