#include <catch_amalgamated.hpp>

#include <limits>
#include <vector>

#include "ema/model.hpp"
#include "oracles.hpp"

using Catch::Approx;
using ema::PlantParams;
using ema::State;

namespace {

// One plant per surface model, all admissible on the default stroke.
std::vector<PlantParams> plants_of_every_variant() {
    std::vector<PlantParams> out;
    out.push_back(ema::reference_plant());

    PlantParams weighted = ema::reference_plant();
    const double s = 2.0 / (ema::kVacuumPermeability * weighted.rho_x);
    weighted.fringing = ema::FringingModel(ema::WeightedSurfaces{1.1, 0.9, s, s},
                                           {0.8 * s, 1.2 * s}, {0.8 * s, 1.2 * s});
    out.push_back(weighted);

    PlantParams geometric = ema::reference_plant();
    const ema::SurfaceBounds gb{1.0e-4, 2.3e-4};
    geometric.fringing =
        ema::FringingModel(ema::GeometricSurfaces{0.01, 0.01, 0.01, 0.01}, gb, gb);
    out.push_back(geometric);

    PlantParams sampled = ema::reference_plant();
    const auto& f = sampled.fringing;
    sampled.fringing = ema::sample_fringing(11, f.bounds(ema::Airgap::First),
                                            f.bounds(ema::Airgap::Third), f.stroke(), 1)
                           .front();
    out.push_back(sampled);
    return out;
}

}  // namespace

TEST_CASE("reference plant carries the table values", "[model]") {
    const PlantParams p = ema::reference_plant();
    CHECK(p.rho_x == oracle::kRhoX);
    CHECK(p.rho_0 == oracle::kRho0);
    CHECK(p.turns == 70);
    CHECK(p.friction == oracle::kFriction);
    CHECK(p.stiffness == oracle::kStiffness);
    CHECK(p.mass == oracle::kMass);
    CHECK(p.resistance == oracle::kResistance);
    CHECK(p.x0 == State{0.001, 0.0, 0.0});
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("parameter validation", "[model]") {
    auto broken = [](auto mutate) {
        PlantParams p = ema::reference_plant();
        mutate(p);
        return p;
    };
    CHECK_THROWS_AS(broken([](PlantParams& p) { p.mass = 0.0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(broken([](PlantParams& p) { p.turns = 0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(broken([](PlantParams& p) { p.resistance = -1.0; }).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS(broken([](PlantParams& p) { p.friction = -1.0; }).validate(),
                    std::invalid_argument);
    // Constant surfaces inconsistent with rho_x.
    CHECK_THROWS_AS(broken([](PlantParams& p) { p.rho_x = 3e10; }).validate(),
                    std::invalid_argument);
    CHECK_NOTHROW(broken([](PlantParams& p) { p.friction = 0.0; p.stiffness = 0.0; }).validate());
}

TEST_CASE("reluctance", "[model]") {
    const PlantParams p = ema::reference_plant();
    CHECK(ema::reluctance(0.0, p) == 630.0);
    CHECK(ema::reluctance(0.001, p) == Approx(2.800063e7).epsilon(1e-12));
    CHECK(ema::reluctance(0.003, p) == Approx(8.400063e7).epsilon(1e-12));

    // Constant surfaces: rho(x1) - rho(0) is linear in x1.
    double worst = 0.0;
    for (int i = 1; i <= 100; ++i) {
        const double x1 = 5e-3 * i / 100.0;
        const double residual = ema::reluctance(x1, p) - oracle::affine_reluctance(x1);
        worst = std::max(worst, std::abs(residual) / oracle::affine_reluctance(x1));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("inductance", "[model]") {
    const PlantParams p = ema::reference_plant();
    CHECK(ema::inductance(0.0, p) == Approx(4900.0 / 630.0).epsilon(1e-14));
    CHECK(ema::inductance(0.0, p) == Approx(7.7778).epsilon(1e-5));
    CHECK(ema::inductance(0.001, p) == Approx(1.74996e-4).epsilon(1e-5));
    CHECK(ema::inductance(0.001, p) == Approx(4900.0 / oracle::affine_reluctance(0.001)).epsilon(1e-12));
}

TEST_CASE("force coefficient", "[model]") {
    const PlantParams p = ema::reference_plant();
    CHECK(ema::mu_coefficient(0.0, p) == Approx(4900.0 * 2.8e10 / (630.0 * 630.0)).epsilon(1e-12));
    CHECK(ema::mu_coefficient(0.0, p) == Approx(3.4568e8).epsilon(1e-4));
    CHECK(ema::mu_coefficient(0.001, p) == Approx(0.17500).epsilon(1e-4));

    const double h = 1e-9;
    const double fd = -oracle::central_difference(
        [&](double x) { return ema::inductance(x, p); }, 0.002, h);
    CHECK(oracle::rel_err(fd, ema::mu_coefficient(0.002, p)) < 1e-6);
}

TEST_CASE("-dL/dx1 equals mu for every surface model", "[model][calculus]") {
    for (const PlantParams& p : plants_of_every_variant()) {
        INFO("variant " << p.fringing.variant_name());
        double worst = 0.0;
        for (int i = 1; i <= 100; ++i) {
            const double x1 = p.fringing.stroke() * i / 101.0;
            const double fd = -oracle::central_difference(
                [&](double x) { return ema::inductance(x, p); }, x1, 1e-9);
            worst = std::max(worst, oracle::rel_err(fd, ema::mu_coefficient(x1, p)));
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("monotonicity along the stroke", "[model]") {
    for (const PlantParams& p : plants_of_every_variant()) {
        INFO("variant " << p.fringing.variant_name());
        for (int i = 0; i < 200; ++i) {
            const double a = 5e-3 * i / 200.0;
            const double b = 5e-3 * (i + 1) / 200.0;
            CHECK(ema::reluctance(a, p) < ema::reluctance(b, p));
            CHECK(ema::inductance(a, p) > ema::inductance(b, p));
        }
    }
    const PlantParams p = ema::reference_plant();
    for (int i = 0; i < 200; ++i) {
        CHECK(ema::mu_coefficient(5e-3 * i / 200.0, p) > ema::mu_coefficient(5e-3 * (i + 1) / 200.0, p));
    }
}

TEST_CASE("magnetic energy and force", "[model]") {
    const PlantParams p = ema::reference_plant();
    CHECK(ema::magnetic_energy(0.001, 0.0, p) == 0.0);
    CHECK(ema::magnetic_energy(0.001, 1.0, p) == Approx(8.7498e-5).epsilon(1e-4));
    CHECK(ema::magnetic_energy(0.001, 2.0, p) ==
          Approx(4.0 * ema::magnetic_energy(0.001, 1.0, p)).epsilon(1e-15));

    CHECK(ema::magnetic_force(0.001, 0.0, p) == 0.0);
    CHECK(ema::magnetic_force(0.001, 1.0, p) == Approx(-0.0875).epsilon(1e-4));
    CHECK(ema::magnetic_force(0.001, 3.0, p) ==
          Approx(9.0 * ema::magnetic_force(0.001, 1.0, p)).epsilon(1e-15));
    for (int i = 0; i <= 50; ++i) {
        const double x1 = 5e-3 * i / 50.0;
        CHECK(ema::magnetic_force(x1, 0.1 * i - 2.0, p) <= 0.0);
        CHECK(ema::magnetic_energy(x1, 0.1 * i - 2.0, p) >= 0.0);
    }
}

TEST_CASE("external force", "[model]") {
    const PlantParams p = ema::reference_plant();
    CHECK(ema::external_force(0.0, 0.0, p) == 0.0);
    CHECK(ema::external_force(0.001, 0.0, p) == Approx(-0.12).epsilon(1e-14));
    CHECK(ema::external_force(0.0, 0.1, p) == Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("state equations", "[model]") {
    const PlantParams p = ema::reference_plant();

    const auto rest = ema::plant_derivative({0.001, 0.0, 0.0}, 0.0, p);
    CHECK(rest.dx1 == 0.0);
    CHECK(rest.dx2 == Approx(-1.2).epsilon(1e-14));
    CHECK(rest.dx3 == 0.0);

    const auto driven = ema::plant_derivative({0.001, 0.0, 0.0}, 1.0, p);
    CHECK(driven.dx3 == Approx(5714.4).epsilon(1e-4));
    CHECK(driven.dx3 == Approx(oracle::affine_reluctance(0.001) / 4900.0).epsilon(1e-12));

    const auto origin = ema::plant_derivative({0.0, 0.0, 0.0}, 0.0, p);
    CHECK(origin.dx1 == 0.0);
    CHECK(origin.dx2 == 0.0);
    CHECK(origin.dx3 == 0.0);

    // Independent evaluation of the full vector field at a generic point.
    const State s{0.002, 0.05, 3.0};
    const double rho = oracle::affine_reluctance(s.x1);
    const double L = oracle::kTurns * oracle::kTurns / rho;
    const double mu = oracle::kTurns * oracle::kTurns * oracle::kRhoX / (rho * rho);
    const auto d = ema::plant_derivative(s, 12.0, p);
    CHECK(d.dx1 == s.x2);
    CHECK(d.dx2 == Approx((0.5 * s.x3 * s.x3 * mu - oracle::kFriction * s.x2 -
                           oracle::kStiffness * s.x1) / oracle::kMass).epsilon(1e-12));
    CHECK(d.dx3 == Approx((12.0 - oracle::kResistance * s.x3 + s.x2 * s.x3 * mu) / L).epsilon(1e-12));
}

TEST_CASE("the input enters the current equation only", "[model]") {
    const PlantParams p = ema::reference_plant();
    for (const State s : {State{0.001, 0.0, 0.0}, State{0.003, -0.02, 5.0}, State{0.0, 0.1, -1.0}}) {
        const auto a = ema::plant_derivative(s, -7.0, p);
        const auto b = ema::plant_derivative(s, 13.0, p);
        CHECK(a.dx1 == b.dx1);
        CHECK(a.dx2 == b.dx2);
        CHECK(b.dx3 - a.dx3 == Approx(20.0 / ema::inductance(s.x1, p)).epsilon(1e-9));
    }
}

TEST_CASE("non-finite inputs are rejected", "[model]") {
    const PlantParams p = ema::reference_plant();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(ema::plant_derivative({nan, 0.0, 0.0}, 0.0, p), std::invalid_argument);
    CHECK_THROWS_AS(ema::plant_derivative({0.0, 0.0, 0.0}, nan, p), std::invalid_argument);
}
