#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "hetlab/system.hpp"

using namespace hetlab;

namespace {
SystemParams base_params() {
    SystemParams p;  // alpha = 1, beta = -0.1, nu = mu = 0, omega = 1, cos forcing
    return p;
}

double comp(const State4& s, int i) {
    switch (i) {
        case 0: return s.x1;
        case 1: return s.x2;
        case 2: return s.x3;
        default: return s.theta;
    }
}
}

TEST_CASE("vector field at the poles and the unforced axis", "[system]") {
    SystemParams p = base_params();

    // both poles are rest points of the spatial part; theta always advances at 2*omega
    for (double z : {1.0, -1.0}) {
        const State4 f = eval_rhs(p, {0, 0, z, 0.7});
        CHECK(f.x1 == 0.0);
        CHECK(f.x2 == 0.0);
        CHECK(f.x3 == 0.0);
        CHECK(f.theta == 2.0 * p.omega);
    }

    // switching on nu injects exactly nu into x1 at the poles (theta = 0 so f - 1 = 0)
    p.nu = 0.3;
    const State4 f = eval_rhs(p, {0, 0, 1, 0});
    CHECK(f.x1 == Catch::Approx(0.3).margin(1e-15));
    CHECK(f.x2 == 0.0);
    CHECK(f.x3 == 0.0);
}

TEST_CASE("the four unit-circle foci are rest points", "[system]") {
    const SystemParams p = base_params();
    const double h = std::sqrt(0.5);
    for (double s1 : {1.0, -1.0})
        for (double s2 : {1.0, -1.0}) {
            const State4 f = eval_rhs(p, {s1 * h, s2 * h, 0, 1.3});
            CHECK(std::abs(f.x1) < 1e-15);
            CHECK(std::abs(f.x2) < 1e-15);
            CHECK(std::abs(f.x3) < 1e-15);
        }
}

TEST_CASE("radial identity d(r^2)/dt = 2 r^2 (1 - r^2) without forcing", "[system]") {
    const SystemParams p = base_params();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    for (int i = 0; i < 200; ++i) {
        const State4 s{u(rng), u(rng), u(rng), u(rng)};
        const State4 f = eval_rhs(p, s);
        const double lhs = 2.0 * (s.x1 * f.x1 + s.x2 * f.x2 + s.x3 * f.x3);
        const double rr = s.r2();
        CHECK(lhs == Catch::Approx(2.0 * rr * (1.0 - rr)).margin(1e-13));
    }
}

TEST_CASE("x2 = 0 plane is invariant for every nu, mu", "[system]") {
    SystemParams p = base_params();
    p.nu = 0.31;
    p.mu = 0.8;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int i = 0; i < 100; ++i) {
        const State4 f = eval_rhs(p, {u(rng), 0.0, u(rng), u(rng)});
        CHECK(f.x2 == 0.0);
    }
}

TEST_CASE("planar restriction matches the full field on the invariant plane", "[system]") {
    SystemParams p = base_params();
    p.nu = 0.27;  // planar form absorbs the nu term; forcing enters only via mu
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-1.4, 1.4);
    for (int i = 0; i < 100; ++i) {
        const double x1 = u(rng), x3 = u(rng);
        const State4 full = eval_rhs(p, {x1, 0.0, x3, 0.9});
        const auto plane = eval_planar_rhs(p, x1, x3);
        CHECK(plane[0] == Catch::Approx(full.x1).margin(1e-14));
        CHECK(plane[1] == Catch::Approx(full.x3).margin(1e-14));
    }
}

TEST_CASE("reflection kappa is an equivariance for the forced system", "[system]") {
    SystemParams p = base_params();
    p.nu = 0.05;
    p.mu = 0.5;
    p.omega = 5.0;
    const auto rep = check_kappa_equivariance(p);
    INFO("max residual " << rep.max_residual);
    CHECK(rep.pass);
    CHECK(rep.max_residual < 1e-12);

    const State4 s{0.4, -0.7, 0.2, 1.1};
    CHECK(kappa(kappa(s)).x2 == s.x2);
}

TEST_CASE("analytic Jacobian agrees with central differences", "[system]") {
    SystemParams p = base_params();
    p.nu = 0.07;
    p.mu = 0.6;
    p.omega = 3.0;
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-1.1, 1.1);

    const double h = 1e-5;
    for (int trial = 0; trial < 20; ++trial) {
        double vals[4] = {u(rng), u(rng), u(rng), u(rng)};
        const Jacobian4 J = eval_jacobian(p, {vals[0], vals[1], vals[2], vals[3]});
        for (int j = 0; j < 4; ++j) {
            const double keep = vals[j];
            vals[j] = keep + h;
            const State4 fp = eval_rhs(p, {vals[0], vals[1], vals[2], vals[3]});
            vals[j] = keep - h;
            const State4 fm = eval_rhs(p, {vals[0], vals[1], vals[2], vals[3]});
            vals[j] = keep;
            for (int i = 0; i < 4; ++i) {
                const double fd = (comp(fp, i) - comp(fm, i)) / (2.0 * h);
                CHECK(J[i][j] == Catch::Approx(fd).margin(5e-8));
            }
        }
    }
}

TEST_CASE("Jacobian at the north pole is diagonal with rates b-a, a+b, -2", "[system]") {
    const SystemParams p = base_params();
    const Jacobian4 J = eval_jacobian(p, {0, 0, 1, 0});
    CHECK(J[0][0] == Catch::Approx(p.beta - p.alpha).margin(1e-15));   // -1.1
    CHECK(J[1][1] == Catch::Approx(p.alpha + p.beta).margin(1e-15));   // 0.9
    CHECK(J[2][2] == Catch::Approx(-2.0).margin(1e-15));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) CHECK(std::abs(J[i][j]) < 1e-15);
}

TEST_CASE("parameter validation", "[system]") {
    SystemParams p = base_params();
    p.beta = 0.1;  // must be negative
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.beta = -1.5;  // |beta| must stay below alpha
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = base_params();
    p.mu = 0.5;
    p.forcing.cos_coeffs.clear();  // constant forcing with mu != 0 is meaningless
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("config round trip preserves parameters", "[system]") {
    SystemParams p = base_params();
    p.nu = 0.05;
    p.mu = 0.5;
    p.omega = 55.0;
    p.forcing.cos_coeffs = {1.0, 0.25};
    p.forcing.sin_coeffs = {0.0, -0.125};

    Config cfg;
    p.to_config(cfg);
    const Config reparsed = Config::parse(cfg.canonical_text());
    const SystemParams q = SystemParams::from_config(reparsed);

    CHECK(q.alpha == p.alpha);
    CHECK(q.beta == p.beta);
    CHECK(q.nu == p.nu);
    CHECK(q.mu == p.mu);
    CHECK(q.omega == p.omega);
    CHECK(q.forcing.cos_coeffs == p.forcing.cos_coeffs);
    CHECK(q.forcing.sin_coeffs == p.forcing.sin_coeffs);
}
