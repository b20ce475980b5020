// Reluctance-network model of the electromagnetic actuator.
//
// State x = (x1 airgap position, x2 velocity, x3 coil current), input u is
// the coil voltage. Reluctance, inductance and the force coefficient mu are
// analytic in x1 for every fringing model.
#pragma once

#include <numbers>

#include "ema/fringing.hpp"

namespace ema {

inline constexpr double kVacuumPermeability = 4.0e-7 * std::numbers::pi;  // H/m

struct State {
    double x1 = 0.0;  // m
    double x2 = 0.0;  // m/s
    double x3 = 0.0;  // A

    friend bool operator==(const State&, const State&) = default;
};

/// Time derivative of a State.
struct StateRate {
    double dx1 = 0.0;  // m/s
    double dx2 = 0.0;  // m/s²
    double dx3 = 0.0;  // A/s
};

[[nodiscard]] inline State advance(const State& s, const StateRate& r, double h) {
    return {s.x1 + h * r.dx1, s.x2 + h * r.dx2, s.x3 + h * r.dx3};
}

[[nodiscard]] bool is_finite(const State& s);

struct PlantParams {
    double rho_x = 2.8e10;      // H⁻¹·m⁻¹, airgap reluctance slope
    double rho_0 = 630.0;       // H⁻¹, magnetic circuit reluctance
    int turns = 70;             // N
    double friction = 5.0;      // N·s·m⁻¹ (lambda)
    double stiffness = 120.0;   // N·m⁻¹ (K)
    double mass = 0.1;          // kg
    double resistance = 0.4;    // Ω
    double mu_0 = kVacuumPermeability;
    State x0{0.001, 0.0, 0.0};
    FringingModel fringing = constant_fringing_from_slope(2.8e10, kVacuumPermeability, 0.2);
    // Perfectly inelastic stop at x1 = 0.
    bool hard_stop = false;

    /// Throws std::invalid_argument when a constant is out of range or when a
    /// constant-surface model disagrees with rho_x.
    void validate() const;

    [[nodiscard]] double turns_squared() const noexcept {
        return static_cast<double>(turns) * static_cast<double>(turns);
    }
};

/// Actuator of the reference experiment: the physical constants listed with
/// the 3 mm step scenario and constant surfaces bounded by ±20 %.
[[nodiscard]] PlantParams reference_plant();

[[nodiscard]] double airgap_surface(double x1, const FringingModel& model, Airgap gap);

/// rho(x1) = x1/(mu0 S1(x1)) + x1/(mu0 S3(x1)) + rho_0.
[[nodiscard]] double reluctance(double x1, const PlantParams& p);

/// d rho / d x1 of the active surface model.
[[nodiscard]] double reluctance_slope(double x1, const PlantParams& p);

/// L(x1) = N² / rho(x1).
[[nodiscard]] double inductance(double x1, const PlantParams& p);

/// mu(x1) = -dL/dx1. For constant surfaces this is N² rho_x / rho(x1)²; other
/// models go through the chain rule on their own surface functions.
[[nodiscard]] double mu_coefficient(double x1, const PlantParams& p);

/// W = ½ L(x1) x3².
[[nodiscard]] double magnetic_energy(double x1, double x3, const PlantParams& p);

/// F_mag = -½ x3² mu(x1). Note that plant_derivative uses the opposite sign
/// on this term, which fixes the orientation of the x1 axis; see README.
[[nodiscard]] double magnetic_force(double x1, double x3, const PlantParams& p);

/// Friction plus spring, -lambda x2 - K x1.
[[nodiscard]] double external_force(double x1, double x2, const PlantParams& p);

/// State equations:
///   dx1 = x2
///   dx2 = (½ x3² mu(x1) + F_ext(x1, x2)) / m
///   dx3 = (u - R x3 + x2 x3 mu(x1)) / L(x1)
/// Throws std::invalid_argument for non-finite state or input.
[[nodiscard]] StateRate plant_derivative(const State& s, double u, const PlantParams& p);

}  // namespace ema
