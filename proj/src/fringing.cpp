#include "ema/fringing.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace ema {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_finite(double x1) {
    if (!std::isfinite(x1)) {
        throw std::invalid_argument("airgap position must be finite");
    }
}

// Index of the segment [knots[i], knots[i+1]) holding x, clamped to the table.
std::size_t segment_of(const std::vector<double>& knots, double x) {
    auto it = std::upper_bound(knots.begin(), knots.end(), x);
    if (it == knots.begin()) {
        return 0;
    }
    return static_cast<std::size_t>(std::distance(knots.begin(), it)) - 1;
}

double interpolate(const std::vector<double>& knots, const std::vector<double>& values,
                   double x) {
    if (x <= knots.front()) {
        return values.front();
    }
    if (x >= knots.back()) {
        return values.back();
    }
    const std::size_t i = segment_of(knots, x);
    const double w = (x - knots[i]) / (knots[i + 1] - knots[i]);
    return values[i] + w * (values[i + 1] - values[i]);
}

double interpolation_slope(const std::vector<double>& knots, const std::vector<double>& values,
                           double x) {
    if (x < knots.front() || x >= knots.back()) {
        return 0.0;
    }
    const std::size_t i = segment_of(knots, x);
    return (values[i + 1] - values[i]) / (knots[i + 1] - knots[i]);
}

void validate_table(const PiecewiseLinearSurfaces& t) {
    if (t.knots.size() < 2 || t.s1.size() != t.knots.size() || t.s3.size() != t.knots.size()) {
        throw std::invalid_argument("piecewise-linear surfaces need >= 2 knots and one value per knot");
    }
    for (std::size_t i = 1; i < t.knots.size(); ++i) {
        if (!(t.knots[i] > t.knots[i - 1])) {
            throw std::invalid_argument("piecewise-linear knots must be strictly increasing");
        }
    }
}

// Uniform double in [0, 1) from the top 53 bits; avoids the
// implementation-defined std::uniform_real_distribution.
double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

FringingModel::FringingModel(Surfaces surfaces, SurfaceBounds gap1, SurfaceBounds gap3,
                             double stroke)
    : surfaces_(std::move(surfaces)), gap1_(gap1), gap3_(gap3), stroke_(stroke) {
    if (!(stroke_ > 0.0) || !std::isfinite(stroke_)) {
        throw std::invalid_argument("fringing stroke must be positive");
    }
    for (const auto& b : {gap1_, gap3_}) {
        if (!(b.lower > 0.0) || !std::isfinite(b.upper) || b.upper < b.lower) {
            throw std::invalid_argument("surface bounds must satisfy 0 < lower <= upper");
        }
    }
    std::visit(Overloaded{
                   [](const ConstantSurfaces& c) {
                       if (!(c.s1 > 0.0) || !(c.s3 > 0.0)) {
                           throw std::invalid_argument("constant surfaces must be positive");
                       }
                   },
                   [](const WeightedSurfaces& w) {
                       if (!(w.alpha1 > 0.0) || !(w.alpha3 > 0.0) || !(w.s_cm1 > 0.0) ||
                           !(w.s_cm3 > 0.0)) {
                           throw std::invalid_argument("weighted surfaces need positive weights and sections");
                       }
                   },
                   [](const GeometricSurfaces& g) {
                       if (!(g.a1 > 0.0) || !(g.b1 > 0.0) || !(g.a3 > 0.0) || !(g.b3 > 0.0)) {
                           throw std::invalid_argument("geometric core dimensions must be positive");
                       }
                   },
                   [](const PiecewiseLinearSurfaces& t) { validate_table(t); },
               },
               surfaces_);

    // Containment in the bounds, with a relative slack for rounding so that
    // bounds equal to a constant surface are accepted.
    constexpr double kSlack = 1e-12;
    for (std::size_t i = 0; i < kContainmentGridPoints; ++i) {
        const double x1 = stroke_ * static_cast<double>(i) /
                          static_cast<double>(kContainmentGridPoints - 1);
        for (Airgap gap : {Airgap::First, Airgap::Third}) {
            const double s = surface(x1, gap);
            const SurfaceBounds& b = bounds(gap);
            if (!(s > 0.0) || s < b.lower * (1.0 - kSlack) || s > b.upper * (1.0 + kSlack)) {
                throw std::invalid_argument(
                    "airgap surface S" + std::to_string(static_cast<int>(gap)) + "(" +
                    std::to_string(x1) + ") = " + std::to_string(s) +
                    " lies outside its bounds [" + std::to_string(b.lower) + ", " +
                    std::to_string(b.upper) + "]");
            }
        }
    }
}

double FringingModel::surface(double x1, Airgap gap) const {
    require_finite(x1);
    const bool first = gap == Airgap::First;
    return std::visit(
        Overloaded{
            [&](const ConstantSurfaces& c) { return first ? c.s1 : c.s3; },
            [&](const WeightedSurfaces& w) {
                return first ? w.alpha1 * w.s_cm1 : w.alpha3 * w.s_cm3;
            },
            [&](const GeometricSurfaces& g) {
                return first ? (g.a1 + x1) * (g.b1 + x1) : (g.a3 + x1) * (g.b3 + x1);
            },
            [&](const PiecewiseLinearSurfaces& t) {
                return interpolate(t.knots, first ? t.s1 : t.s3, x1);
            },
        },
        surfaces_);
}

double FringingModel::surface_slope(double x1, Airgap gap) const {
    require_finite(x1);
    const bool first = gap == Airgap::First;
    return std::visit(
        Overloaded{
            [](const ConstantSurfaces&) { return 0.0; },
            [](const WeightedSurfaces&) { return 0.0; },
            [&](const GeometricSurfaces& g) {
                return first ? g.a1 + g.b1 + 2.0 * x1 : g.a3 + g.b3 + 2.0 * x1;
            },
            [&](const PiecewiseLinearSurfaces& t) {
                return interpolation_slope(t.knots, first ? t.s1 : t.s3, x1);
            },
        },
        surfaces_);
}

std::string_view FringingModel::variant_name() const noexcept {
    switch (surfaces_.index()) {
        case 0: return "constant";
        case 1: return "weighted";
        case 2: return "geometric";
        default: return "piecewise_linear";
    }
}

bool FringingModel::depends_on_position() const noexcept {
    return std::holds_alternative<GeometricSurfaces>(surfaces_) ||
           std::holds_alternative<PiecewiseLinearSurfaces>(surfaces_);
}

FringingModel constant_fringing_from_slope(double rho_x, double mu0, double spread,
                                           double stroke) {
    if (!(rho_x > 0.0) || !(mu0 > 0.0)) {
        throw std::invalid_argument("rho_x and mu0 must be positive");
    }
    if (!(spread >= 0.0) || !(spread < 1.0)) {
        throw std::invalid_argument("relative surface spread must lie in [0, 1)");
    }
    // Two equal series airgaps: 2 / (mu0 S) = rho_x.
    const double s = 2.0 / (mu0 * rho_x);
    const SurfaceBounds b{(1.0 - spread) * s, (1.0 + spread) * s};
    return FringingModel(ConstantSurfaces{s, s}, b, b, stroke);
}

std::vector<FringingModel> sample_fringing(std::uint64_t seed, SurfaceBounds gap1,
                                           SurfaceBounds gap3, double stroke,
                                           std::size_t n) {
    std::vector<FringingModel> out;
    out.reserve(n);
    std::mt19937_64 rng(seed);
    const std::vector<double> knots{0.0, stroke / 27.0, stroke / 9.0, stroke / 3.0, stroke};
    auto draw = [&](const SurfaceBounds& b) {
        return b.lower + (b.upper - b.lower) * unit_uniform(rng);
    };
    for (std::size_t r = 0; r < n; ++r) {
        PiecewiseLinearSurfaces t;
        t.knots = knots;
        t.s1.reserve(knots.size());
        t.s3.reserve(knots.size());
        for (std::size_t k = 0; k < knots.size(); ++k) {
            t.s1.push_back(draw(gap1));
            t.s3.push_back(draw(gap3));
        }
        out.emplace_back(std::move(t), gap1, gap3, stroke);
    }
    return out;
}

}  // namespace ema
