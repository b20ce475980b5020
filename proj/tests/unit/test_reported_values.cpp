// Figures quoted for the reference experiment, checked against the simulation.
// The settling time and residual error are not reproduced (the outer loop's
// slow pole sits near -alpha1), so several of these cases fail by design.
#include <catch_amalgamated.hpp>

#include "ema/analysis.hpp"

namespace {

struct ReferenceOutcome {
    ema::RunReport report;
    ema::GainCertificate cert;
};

const ReferenceOutcome& outcome() {
    static const ReferenceOutcome o = [] {
        ema::Scenario sc;
        sc.plant = ema::reference_plant();
        ema::Simulator sim(sc);
        const auto traj = sim.run();
        return ReferenceOutcome{ema::analyze(traj, sc, sim.certificate()), sim.certificate()};
    }();
    return o;
}

}  // namespace

TEST_CASE("reported: settling time of about 0.2 s", "[reported]") {
    const auto& r = outcome().report;
    REQUIRE(r.settled());
    INFO("settling time " << *r.settling_time << " s");
    CHECK(*r.settling_time >= 0.1);
    CHECK(*r.settling_time <= 0.3);
}

TEST_CASE("reported: no overshoot", "[reported]") {
    CHECK(outcome().report.overshoot == 0.0);
}

TEST_CASE("reported: less than 0.1% tracking error", "[reported]") {
    const auto& r = outcome().report;
    INFO("steady-state error " << r.steady_state_error);
    CHECK(r.steady_state_error < 1e-3);
}

TEST_CASE("reported: a 150 V supply is enough", "[reported]") {
    const auto& r = outcome().report;
    INFO("peak |u| " << r.max_abs_u << " V");
    CHECK(r.max_abs_u <= 150.0);
}

TEST_CASE("reported gains are admissible", "[reported]") {
    const auto& c = outcome().cert;
    CHECK(c.certified);
    CHECK(c.a == -799.0);
    CHECK(c.b == -40.0);
    CHECK(c.q.determinant() == Catch::Approx(40799.75).epsilon(1e-12));
}
