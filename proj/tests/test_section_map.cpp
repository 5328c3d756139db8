#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hetlab/equilibria.hpp"
#include "hetlab/section_map.hpp"

using namespace hetlab;

TEST_CASE("strobe map agrees with direct endpoint integration", "[section_map]") {
    SystemParams p;
    p.nu = 0.05;
    p.mu = 0.5;
    p.omega = 2.0;
    StrobeMap S(p, 0.3);
    const Eigen::Vector3d x(0.4, 0.3, 0.5);
    const Eigen::Vector3d y = S.apply(x);
    const State4 end = integrate_to(p, {0.4, 0.3, 0.5, 0.3}, S.period());
    CHECK(y[0] == Catch::Approx(end.x1).margin(1e-10));
    CHECK(y[1] == Catch::Approx(end.x2).margin(1e-10));
    CHECK(y[2] == Catch::Approx(end.x3).margin(1e-10));

    // q applications compose
    const Eigen::Vector3d three = S.apply(x, 3);
    Eigen::Vector3d step = x;
    for (int i = 0; i < 3; ++i) step = S.apply(step);
    CHECK((three - step).norm() < 1e-9);
}

TEST_CASE("variational monodromy matches finite differences", "[section_map]") {
    SystemParams p;
    p.nu = 0.05;
    p.mu = 0.5;
    p.omega = 2.0;
    StrobeMap S(p);
    const Eigen::Vector3d x(0.4, 0.3, 0.5);
    const auto [fx, M] = S.apply_with_jacobian(x);
    CHECK((fx - S.apply(x)).norm() < 1e-9);

    const double h = 1e-6;
    for (int j = 0; j < 3; ++j) {
        Eigen::Vector3d e = Eigen::Vector3d::Zero();
        e[j] = h;
        const Eigen::Vector3d col = (S.apply(x + e) - S.apply(x - e)) / (2 * h);
        for (int i = 0; i < 3; ++i) CHECK(M(i, j) == Catch::Approx(col[i]).margin(2e-5));
    }
}

TEST_CASE("pole fixed point carries Floquet multipliers exp(lambda pi/omega)", "[section_map]") {
    SystemParams p;  // autonomous: equilibrium eigenvalues exponentiate exactly
    const PeriodicOrbit orb = find_periodic_orbit(p, {0.02, 0.01, 0.97, 0}, 1);
    CHECK(std::fabs(orb.point.x1) < 1e-10);
    CHECK(std::fabs(orb.point.x2) < 1e-10);
    CHECK(orb.point.x3 == Catch::Approx(1.0).margin(1e-10));
    CHECK(orb.residual < 1e-12);

    const double T = std::numbers::pi;  // omega = 1
    CHECK(orb.period == Catch::Approx(T));
    CHECK(orb.multipliers[0].real() == Catch::Approx(std::exp(0.9 * T)).epsilon(1e-7));
    CHECK(orb.multipliers[1].real() == Catch::Approx(std::exp(-1.1 * T)).epsilon(1e-7));
    CHECK(orb.multipliers[2].real() == Catch::Approx(std::exp(-2.0 * T)).epsilon(1e-7));
    for (const auto& m : orb.multipliers) CHECK(std::fabs(m.imag()) < 1e-8);
    CHECK_FALSE(orb.stable);

    // over q periods the multipliers are the q-th powers
    const PeriodicOrbit orb3 = find_periodic_orbit(p, orb.point, 3);
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(orb3.multipliers[i]) ==
              Catch::Approx(std::pow(std::abs(orb.multipliers[i]), 3.0)).epsilon(1e-6));
}

TEST_CASE("driven continuation of the in-plane saddle", "[section_map]") {
    SystemParams p;
    p.nu = 0.05;
    p.mu = 0.3;
    p.omega = 2.0;

    // seed from the autonomous (mu = 0) saddle near the north pole
    SystemParams p0 = p;
    p0.mu = 0.0;
    const auto eqs = find_equilibria(p0);
    State4 seed;
    for (const auto& e : eqs)
        if (e.x3 > 0.9) seed = {e.x1, e.x2, e.x3, 0};

    const PeriodicOrbit orb = find_periodic_orbit(p, seed, 1);
    CHECK(orb.residual < 1e-10);
    CHECK(std::fabs(orb.point.x2) < 1e-9);  // stays in the invariant plane

    StrobeMap S(p);
    const Eigen::Vector3d x(orb.point.x1, orb.point.x2, orb.point.x3);
    CHECK((S.apply(x) - x).norm() < 1e-9);

    int outside = 0;
    for (const auto& m : orb.multipliers)
        if (std::abs(m) > 1.0) ++outside;
    CHECK(outside == 1);  // still saddle-type
    CHECK_FALSE(orb.stable);
}

TEST_CASE("autonomous cycle: period grows like |log nu|", "[section_map]") {
    auto cycle_for = [](double nu) {
        SystemParams p;
        p.nu = nu;
        const Trajectory traj = integrate(p, {0.05, 0.05, 0.3, 0}, 300.0);
        const double t0 = 260.0;
        const auto [T_guess, d_min] = nearest_return(traj, t0, 3.0, 40.0);
        INFO("nu = " << nu << ": recurrence at " << T_guess << " (dist " << d_min << ")");
        CHECK(d_min < 1e-2);
        return find_limit_cycle(p, traj.at(t0), T_guess);
    };

    const PeriodicOrbit c1 = cycle_for(0.01);
    const PeriodicOrbit c2 = cycle_for(0.02);
    const PeriodicOrbit c5 = cycle_for(0.05);

    for (const auto& c : {c1, c2, c5}) {
        CHECK(c.q == 0);
        CHECK(c.residual < 1e-11);
        CHECK(c.stable);
        // trivial multiplier along the flow
        double best = 1e300;
        for (const auto& m : c.multipliers) best = std::min(best, std::abs(m - 1.0));
        CHECK(best < 1e-5);
    }

    CHECK(c1.period > c2.period);
    CHECK(c2.period > c5.period);
    // T(nu) ~ A + B log(1/nu):  (T1-T2)/(T2-T5) should approach log2/log2.5
    const double ratio = (c1.period - c2.period) / (c2.period - c5.period);
    CHECK(ratio == Catch::Approx(std::log(2.0) / std::log(2.5)).epsilon(0.25));
}
