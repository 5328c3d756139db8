#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "hetlab/classify.hpp"

using namespace hetlab;

namespace {

Classification classify_at(double nu, double mu, double omega,
                           const State4& s0 = {0.1, 0.1, 0.5, 0}) {
    SystemParams p;
    p.nu = nu;
    p.mu = mu;
    p.omega = omega;
    return classify_attractor(p, s0);
}

}  // namespace

TEST_CASE("rotation numbers along the quasiperiodic branch", "[attractors]") {
    // mu = 0, omega = 1; drift slows as the circles close on the saddles
    struct Row {
        double nu, rho;
    };
    for (const Row row : {Row{0.1, 0.67319410}, Row{0.05, 0.50519992}, Row{0.02, 0.36451500},
                          Row{0.01, 0.29949200}}) {
        SystemParams p;
        p.nu = row.nu;
        p.omega = 1.0;
        StrobeMap S(p);
        Eigen::Vector3d x(0.1, 0.1, 0.5);
        for (int k = 0; k < 600; ++k) x = S.apply(x);
        std::vector<Eigen::Vector3d> orbit(1000);
        for (auto& pt : orbit) {
            pt = x;
            x = S.apply(x);
        }
        const RotationNumber rn = rotation_number(orbit);
        INFO("nu = " << row.nu);
        CHECK(rn.value == Catch::Approx(row.rho).margin(2e-5));
        CHECK(rn.error < 5e-5);
        // the signed short-way rate is the same angle measured mod 1
        const double wrapped = rn.winding_rate - std::floor(rn.winding_rate);
        CHECK(wrapped == Catch::Approx(rn.value).margin(2 * rn.error + 1e-12));
    }
}

TEST_CASE("weak symmetric forcing leaves a mirror pair of circles", "[attractors]") {
    const Classification A = classify_at(0.1, 0.0, 1.0);
    REQUIRE(A.type == AttractorClass::quasiperiodic_torus);
    REQUIRE(A.circle.ok);
    CHECK(A.circle.n_modes == 32);
    CHECK(A.circle.max_residual < 1e-4);
    // neutral direction along the circle: lambda_1 indistinguishable from 0
    CHECK_FALSE(A.lyap.chaotic);
    CHECK(A.lyap.exponents[0] < 3 * A.lyap.std_errors[0] + 1e-12);

    // the mirror image is far from the original ...
    const CircleFit mirror = kappa_image(A.circle);
    CHECK(circle_distance(A.circle, mirror) > 1.0);

    // ... yet itself invariant: an orbit seeded on it stays on it
    const Eigen::Vector3d b0 = circle_eval(mirror, 1.7);
    const Classification B = classify_at(0.1, 0.0, 1.0, {b0[0], b0[1], b0[2], 0});
    REQUIRE(B.type == AttractorClass::quasiperiodic_torus);
    REQUIRE(B.circle.ok);
    CHECK(circle_distance(B.circle, mirror) < 1e-3);
    CHECK(B.rotation.value == Catch::Approx(A.rotation.value).margin(1e-6));
}

TEST_CASE("asymmetric forcing locks the drift", "[attractors]") {
    SECTION("1:1 window") {
        const Classification c = classify_at(0.02, 0.009, 0.3);
        REQUIRE(c.type == AttractorClass::fixed_point);
        CHECK(c.q == 1);
        CHECK(c.orbit.residual < 1e-10);
        CHECK(c.orbit.stable);
        for (const auto& m : c.orbit.multipliers) CHECK(std::abs(m) < 1.0);
    }
    SECTION("period-3 tongue") {
        const Classification c = classify_at(0.02, 0.024, 0.3);
        REQUIRE(c.type == AttractorClass::periodic);
        CHECK(c.q == 3);
        CHECK(c.orbit.residual < 1e-10);
        CHECK(c.orbit.stable);
    }
}

TEST_CASE("Lyapunov spectrum of a locked orbit matches its Floquet rates", "[attractors]") {
    const Classification c = classify_at(0.02, 0.009, 0.3);
    REQUIRE(c.type == AttractorClass::fixed_point);
    const LyapunovResult ly = lyapunov_spectrum({.nu = 0.02, .mu = 0.009, .omega = 0.3},
                                                c.orbit.point, 200.0, 1500.0);
    CHECK_FALSE(ly.chaotic);
    for (int i = 0; i < 3; ++i) {
        const double floquet = std::log(std::abs(c.orbit.multipliers[i])) / c.orbit.period;
        INFO("exponent " << i);
        CHECK(ly.exponents[i] == Catch::Approx(floquet).margin(5e-3));
    }
}

TEST_CASE("pole is a strobe fixed point with the saddle rates", "[attractors]") {
    // unforced field: multipliers over one strobe period pi are exp(pi * rate)
    const SystemParams p;
    const PeriodicOrbit pole = find_periodic_orbit(p, {0.0, 0.0, 1.0, 0.0}, 1, 0.0);
    const double T = std::numbers::pi;
    CHECK(std::abs(pole.multipliers[0]) == Catch::Approx(std::exp(0.9 * T)).epsilon(1e-9));
    CHECK(std::abs(pole.multipliers[1]) == Catch::Approx(std::exp(-1.1 * T)).epsilon(1e-9));
    CHECK(std::abs(pole.multipliers[2]) == Catch::Approx(std::exp(-2.0 * T)).epsilon(1e-9));
    CHECK_FALSE(pole.stable);
}

TEST_CASE("mixed forcing at unit frequency is chaotic", "[attractors]") {
    const Classification c = classify_at(0.05, 0.05, 1.0);
    REQUIRE(c.type == AttractorClass::chaotic);
    CHECK(c.lyap.chaotic);
    CHECK(c.lyap.exponents[0] > 0.05);
    CHECK(c.lyap.exponents[0] < 0.2);
    CHECK(c.lyap.exponents[0] > 3 * c.lyap.std_errors[0]);
    // volume contraction: the spectrum sums negative
    CHECK(c.lyap.exponents[0] + c.lyap.exponents[1] + c.lyap.exponents[2] < 0);
}

TEST_CASE("classification flags a blown-up seed as escaped", "[attractors]") {
    SystemParams p;
    p.nu = 0.1;
    p.omega = 1.0;
    // far outside the trapping region the cubic terms are stiff enough to
    // sink the integrator; that counts as escape, not as an exception
    const Classification c = classify_attractor(p, {1e8, 0.0, 0.0, 0.0});
    CHECK(c.type == AttractorClass::escaped);
}

TEST_CASE("unforced system is reported as degenerate", "[attractors]") {
    const Classification c = classify_at(0.0, 0.0, 1.0);
    CHECK(c.type == AttractorClass::degenerate);
}
