#include "ema/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>

namespace ema {

bool is_finite(const State& s) {
    return std::isfinite(s.x1) && std::isfinite(s.x2) && std::isfinite(s.x3);
}

void PlantParams::validate() const {
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument(std::string(what) + " must be positive");
        }
    };
    positive(rho_x, "rho_x");
    positive(rho_0, "rho_0");
    positive(mass, "mass");
    positive(resistance, "resistance");
    positive(mu_0, "mu_0");
    if (turns < 1) {
        throw std::invalid_argument("turns must be >= 1");
    }
    if (!(friction >= 0.0) || !(stiffness >= 0.0)) {
        throw std::invalid_argument("friction and stiffness must be non-negative");
    }
    if (!is_finite(x0)) {
        throw std::invalid_argument("initial state must be finite");
    }
    if (hard_stop && x0.x1 < 0.0) {
        throw std::invalid_argument("initial position is behind the hard stop");
    }
    if (const auto* c = std::get_if<ConstantSurfaces>(&fringing.surfaces())) {
        const double implied = 1.0 / (mu_0 * c->s1) + 1.0 / (mu_0 * c->s3);
        if (std::abs(implied - rho_x) > 1e-9 * rho_x) {
            throw std::invalid_argument("constant surfaces imply rho_x = " + std::to_string(implied) +
                                        ", configured rho_x = " + std::to_string(rho_x));
        }
    }
}

PlantParams reference_plant() {
    return PlantParams{};
}

double airgap_surface(double x1, const FringingModel& model, Airgap gap) {
    return model.surface(x1, gap);
}

double reluctance(double x1, const PlantParams& p) {
    const double s1 = p.fringing.surface(x1, Airgap::First);
    const double s3 = p.fringing.surface(x1, Airgap::Third);
    return x1 / (p.mu_0 * s1) + x1 / (p.mu_0 * s3) + p.rho_0;
}

double reluctance_slope(double x1, const PlantParams& p) {
    // d/dx [x / (mu0 S(x))] = (1 - x S'(x) / S(x)) / (mu0 S(x))
    double slope = 0.0;
    for (Airgap gap : {Airgap::First, Airgap::Third}) {
        const double s = p.fringing.surface(x1, gap);
        const double ds = p.fringing.surface_slope(x1, gap);
        slope += (1.0 - x1 * ds / s) / (p.mu_0 * s);
    }
    return slope;
}

double inductance(double x1, const PlantParams& p) {
    return p.turns_squared() / reluctance(x1, p);
}

double mu_coefficient(double x1, const PlantParams& p) {
    const double rho = reluctance(x1, p);
    if (std::holds_alternative<ConstantSurfaces>(p.fringing.surfaces())) {
        return p.turns_squared() * p.rho_x / (rho * rho);
    }
    return p.turns_squared() * reluctance_slope(x1, p) / (rho * rho);
}

double magnetic_energy(double x1, double x3, const PlantParams& p) {
    return 0.5 * inductance(x1, p) * x3 * x3;
}

double magnetic_force(double x1, double x3, const PlantParams& p) {
    return -0.5 * x3 * x3 * mu_coefficient(x1, p);
}

double external_force(double x1, double x2, const PlantParams& p) {
    return -p.friction * x2 - p.stiffness * x1;
}

StateRate plant_derivative(const State& s, double u, const PlantParams& p) {
    if (!is_finite(s) || !std::isfinite(u)) {
        throw std::invalid_argument("plant_derivative: non-finite state or input");
    }
    const double mu = mu_coefficient(s.x1, p);
    const double l = inductance(s.x1, p);
    return {
        s.x2,
        (0.5 * s.x3 * s.x3 * mu + external_force(s.x1, s.x2, p)) / p.mass,
        (u - p.resistance * s.x3 + s.x2 * s.x3 * mu) / l,
    };
}

}  // namespace ema
