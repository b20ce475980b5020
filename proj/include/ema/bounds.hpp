// Interval envelopes of rho, L and mu over the admissible airgap surfaces.
//
// These are the only plant quantities the controller evaluates. The lower
// reluctance comes from the upper surfaces and vice versa; L and mu flip the
// order again through the reciprocal.
#pragma once

#include "ema/model.hpp"

namespace ema {

struct EnvelopeTriple {
    double lower = 0.0;
    double nominal = 0.0;
    double upper = 0.0;

    [[nodiscard]] bool contains(double v) const noexcept { return lower <= v && v <= upper; }
};

/// (rho_lower, rho_upper): rho_lower uses S_upper on both gaps, rho_upper uses
/// S_lower. Nominal is model::reluctance.
[[nodiscard]] EnvelopeTriple rho_bounds(double x1, const PlantParams& p);

/// (N²/rho_upper, N²/rho_lower).
[[nodiscard]] EnvelopeTriple inductance_bounds(double x1, const PlantParams& p);

/// (N² rho_x/rho_upper², N² rho_x/rho_lower²) with the nominal rho_x of the
/// plant held fixed. Nominal is model::mu_coefficient.
[[nodiscard]] EnvelopeTriple mu_bounds(double x1, const PlantParams& p);

/// d(mu_lower)/dx1. Used by the analytic virtual-current derivative.
[[nodiscard]] double mu_lower_slope(double x1, const PlantParams& p);

/// The envelope's own reading of mu for the realized surfaces,
/// N² rho_x / rho(x1)², i.e. the fixed-slope force coefficient that mu_bounds
/// brackets. Coincides with mu_coefficient for constant surfaces.
[[nodiscard]] double fixed_slope_mu(double x1, const PlantParams& p);

}  // namespace ema
