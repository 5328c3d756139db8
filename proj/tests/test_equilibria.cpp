#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hetlab/equilibria.hpp"

using namespace hetlab;

namespace {
bool near(const Equilibrium& e, double x1, double x2, double x3, double tol = 1e-9) {
    return std::fabs(e.x1 - x1) < tol && std::fabs(e.x2 - x2) < tol && std::fabs(e.x3 - x3) < tol;
}
}

TEST_CASE("unperturbed inventory: two pole saddles, source, four foci", "[equilibria]") {
    SystemParams p;  // nu = mu = 0
    const auto eqs = find_equilibria(p);
    REQUIRE(eqs.size() == 7);

    const double h = std::sqrt(0.5);
    int saddles = 0, sources = 0, foci = 0;
    for (const auto& e : eqs) {
        CHECK(e.residual < 1e-12);
        switch (e.stability) {
            case StabilityClass::saddle: ++saddles; break;
            case StabilityClass::source: ++sources; break;
            case StabilityClass::focus: ++foci; break;
            default: break;
        }
    }
    CHECK(saddles == 2);
    CHECK(sources == 1);
    CHECK(foci == 4);

    auto find = [&](double a, double b, double c) {
        for (const auto& e : eqs)
            if (near(e, a, b, c)) return true;
        return false;
    };
    CHECK(find(0, 0, 1));
    CHECK(find(0, 0, -1));
    CHECK(find(0, 0, 0));
    CHECK(find(h, h, 0));
    CHECK(find(h, -h, 0));
    CHECK(find(-h, h, 0));
    CHECK(find(-h, -h, 0));
}

TEST_CASE("pole eigenvalues are -2, beta-alpha, alpha+beta", "[equilibria]") {
    SystemParams p;
    const auto eqs = find_equilibria(p);
    for (const auto& e : eqs) {
        if (std::fabs(e.x3) < 0.5) continue;  // only the poles
        // sorted by real part: -2 < beta-alpha < alpha+beta for the defaults
        CHECK(e.eigenvalues[0].real() == Catch::Approx(-2.0).margin(1e-9));
        CHECK(e.eigenvalues[1].real() == Catch::Approx(p.beta - p.alpha).margin(1e-9));
        CHECK(e.eigenvalues[2].real() == Catch::Approx(p.alpha + p.beta).margin(1e-9));
        for (const auto& ev : e.eigenvalues) CHECK(std::fabs(ev.imag()) < 1e-9);
    }
}

TEST_CASE("foci have radial rate -2 and a complex pair with Re = -beta/2", "[equilibria]") {
    SystemParams p;
    const auto eqs = find_equilibria(p);
    int checked = 0;
    for (const auto& e : eqs) {
        if (e.stability != StabilityClass::focus) continue;
        ++checked;
        CHECK(e.eigenvalues[0].real() == Catch::Approx(-2.0).margin(1e-9));
        CHECK(std::fabs(e.eigenvalues[0].imag()) < 1e-9);
        // the tangential pair spirals outward: the cycle attracts only on average
        CHECK(e.eigenvalues[1].real() == Catch::Approx(-p.beta / 2.0).margin(1e-9));
        CHECK(e.eigenvalues[2].real() == Catch::Approx(-p.beta / 2.0).margin(1e-9));
        CHECK(e.eigenvalues[1].imag() != 0.0);
    }
    CHECK(checked == 4);
}

TEST_CASE("saddle rates at the poles are c = alpha-beta, e = alpha+beta", "[equilibria]") {
    SystemParams p;
    const NetworkRates nr = network_node_rates(p);
    CHECK(nr.v.c == Catch::Approx(1.1).margin(1e-9));
    CHECK(nr.v.e == Catch::Approx(0.9).margin(1e-9));
    CHECK(nr.w.c == Catch::Approx(1.1).margin(1e-9));
    CHECK(nr.w.e == Catch::Approx(0.9).margin(1e-9));
}

TEST_CASE("node_rates rejects non-saddles", "[equilibria]") {
    SystemParams p;
    Equilibrium origin;  // the source at 0
    CHECK_THROWS_AS(node_rates(p, origin), NotASaddle);
}

TEST_CASE("pole saddles persist in the plane under nu > 0", "[equilibria]") {
    SystemParams p;
    p.nu = 0.05;
    const auto eqs = find_equilibria(p);
    int pole_like = 0;
    for (const auto& e : eqs) {
        if (std::fabs(e.x3) < 0.9) continue;
        ++pole_like;
        CHECK(std::fabs(e.x2) < 1e-9);  // stay inside the invariant plane
        CHECK(e.stability == StabilityClass::saddle);
        CHECK(e.residual < 1e-12);
    }
    CHECK(pole_like == 2);

    // rates move continuously off the unperturbed values
    const NetworkRates nr = network_node_rates(p);
    CHECK(std::fabs(nr.v.c - 1.1) < 0.2);
    CHECK(std::fabs(nr.v.e - 0.9) < 0.2);
    CHECK(std::fabs(nr.w.c - 1.1) < 0.2);
    CHECK(std::fabs(nr.w.e - 0.9) < 0.2);
}
