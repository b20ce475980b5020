// Airgap surface models for flux fringing.
//
// The effective cross-section through which flux crosses an airgap grows
// with the gap length. Each model below maps the airgap position x1 to the
// surfaces S1(x1) and S3(x1) of the two airgaps of the reluctance network,
// and carries the interval [S_lower, S_upper] that the controller assumes
// for each of them.
#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

namespace ema {

/// The two airgaps of the reluctance network (numbered as in the network).
enum class Airgap { First = 1, Third = 3 };

/// Surfaces independent of x1.
struct ConstantSurfaces {
    double s1 = 0.0;  // m²
    double s3 = 0.0;  // m²
};

/// Core section scaled by a fringing weight, S_i = alpha_i * S_CMi.
struct WeightedSurfaces {
    double alpha1 = 1.0;
    double alpha3 = 1.0;
    double s_cm1 = 0.0;  // m²
    double s_cm3 = 0.0;  // m²
};

/// Rectangular core a×b whose airgap section expands to (a + x1)(b + x1).
struct GeometricSurfaces {
    double a1 = 0.0;  // m
    double b1 = 0.0;  // m
    double a3 = 0.0;  // m
    double b3 = 0.0;  // m
};

/// Tabulated surfaces, linear between knots and held constant outside them.
/// Produced by the Monte-Carlo sampler.
struct PiecewiseLinearSurfaces {
    std::vector<double> knots;  // m, strictly increasing, front() == 0
    std::vector<double> s1;     // m², one value per knot
    std::vector<double> s3;     // m²
};

/// Closed interval assumed by the controller for one airgap surface.
struct SurfaceBounds {
    double lower = 0.0;  // m²
    double upper = 0.0;  // m²
};

class FringingModel {
public:
    using Surfaces = std::variant<ConstantSurfaces, WeightedSurfaces, GeometricSurfaces,
                                  PiecewiseLinearSurfaces>;

    /// Validates positivity, bound ordering and containment of the realized
    /// surfaces in their bounds on a grid over [0, stroke]. Throws
    /// std::invalid_argument on violation.
    FringingModel(Surfaces surfaces, SurfaceBounds gap1, SurfaceBounds gap3,
                  double stroke = kDefaultStroke);

    /// S_i(x1), m². Throws std::invalid_argument for non-finite x1.
    [[nodiscard]] double surface(double x1, Airgap gap) const;

    /// dS_i/dx1, m. Right derivative at piecewise-linear knots.
    [[nodiscard]] double surface_slope(double x1, Airgap gap) const;

    [[nodiscard]] const SurfaceBounds& bounds(Airgap gap) const noexcept {
        return gap == Airgap::First ? gap1_ : gap3_;
    }
    [[nodiscard]] double stroke() const noexcept { return stroke_; }
    [[nodiscard]] const Surfaces& surfaces() const noexcept { return surfaces_; }
    [[nodiscard]] std::string_view variant_name() const noexcept;

    /// Surfaces that vary with x1 (Geometric, PiecewiseLinear).
    [[nodiscard]] bool depends_on_position() const noexcept;

    static constexpr double kDefaultStroke = 5e-3;
    static constexpr std::size_t kContainmentGridPoints = 201;

private:
    Surfaces surfaces_;
    SurfaceBounds gap1_;
    SurfaceBounds gap3_;
    double stroke_;
};

/// Builds a constant-surface model with S1 = S3 chosen so that
/// 1/(mu0 S1) + 1/(mu0 S3) = rho_x, with symmetric relative bounds
/// [(1 - spread) S, (1 + spread) S] on both gaps.
FringingModel constant_fringing_from_slope(double rho_x, double mu0, double spread,
                                           double stroke = FringingModel::kDefaultStroke);

/// Draws n piecewise-linear surface realizations inside the given bounds.
///
/// Knots sit at 0 and at stroke / 3^k (k = 3, 2, 1, 0); knot values are
/// independent uniforms in [lower, upper]. The geometric knot spacing limits
/// the elasticity x1 S'/S of each segment to 1.5 (upper/lower - 1), which keeps
/// the airgap reluctance increasing in x1 whenever upper/lower < 5/3.
/// Deterministic for a given seed on every platform.
std::vector<FringingModel> sample_fringing(std::uint64_t seed, SurfaceBounds gap1,
                                           SurfaceBounds gap3, double stroke,
                                           std::size_t n);

}  // namespace ema
