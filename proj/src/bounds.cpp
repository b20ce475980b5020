#include "ema/bounds.hpp"

namespace ema {
namespace {

// Slope of the affine reluctance bound built from the given surfaces.
double bound_slope(const PlantParams& p, double s1, double s3) {
    return 1.0 / (p.mu_0 * s1) + 1.0 / (p.mu_0 * s3);
}

double rho_from_lower_surfaces(double x1, const PlantParams& p) {
    const auto& f = p.fringing;
    return bound_slope(p, f.bounds(Airgap::First).lower, f.bounds(Airgap::Third).lower) * x1 +
           p.rho_0;
}

double rho_from_upper_surfaces(double x1, const PlantParams& p) {
    const auto& f = p.fringing;
    return bound_slope(p, f.bounds(Airgap::First).upper, f.bounds(Airgap::Third).upper) * x1 +
           p.rho_0;
}

}  // namespace

EnvelopeTriple rho_bounds(double x1, const PlantParams& p) {
    return {rho_from_upper_surfaces(x1, p), reluctance(x1, p), rho_from_lower_surfaces(x1, p)};
}

EnvelopeTriple inductance_bounds(double x1, const PlantParams& p) {
    const double n2 = p.turns_squared();
    return {n2 / rho_from_lower_surfaces(x1, p), inductance(x1, p),
            n2 / rho_from_upper_surfaces(x1, p)};
}

EnvelopeTriple mu_bounds(double x1, const PlantParams& p) {
    const double k = p.turns_squared() * p.rho_x;
    const double rho_hi = rho_from_lower_surfaces(x1, p);
    const double rho_lo = rho_from_upper_surfaces(x1, p);
    return {k / (rho_hi * rho_hi), mu_coefficient(x1, p), k / (rho_lo * rho_lo)};
}

double mu_lower_slope(double x1, const PlantParams& p) {
    const auto& f = p.fringing;
    const double slope =
        bound_slope(p, f.bounds(Airgap::First).lower, f.bounds(Airgap::Third).lower);
    const double rho_hi = slope * x1 + p.rho_0;
    return -2.0 * p.turns_squared() * p.rho_x * slope / (rho_hi * rho_hi * rho_hi);
}

double fixed_slope_mu(double x1, const PlantParams& p) {
    const double rho = reluctance(x1, p);
    return p.turns_squared() * p.rho_x / (rho * rho);
}

}  // namespace ema
