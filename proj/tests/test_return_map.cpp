#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "hetlab/return_map.hpp"

using namespace hetlab;

namespace {

// rates 1.1 / 0.9, walls 0.04 / 0.1, cosine offset profile
ReturnMapModel flagship(double nu = 0.05, double mu = 0.5, double omega = 1.0) {
    ReturnMapModel m;
    m.omega = omega;
    m.xi.nu = nu;
    m.xi.mu = mu;
    m.validate();
    return m;
}

} // namespace

TEST_CASE("derived constants of the default model", "[return_map]") {
    const ReturnMapModel m = flagship();
    CHECK(m.delta_v() == Catch::Approx(11.0 / 9.0).epsilon(1e-15));
    CHECK(m.delta_w() == Catch::Approx(11.0 / 9.0).epsilon(1e-15));
    CHECK(m.delta() == Catch::Approx(121.0 / 81.0).epsilon(1e-15));
    CHECK(m.K() == Catch::Approx(400.0 / 81.0).epsilon(1e-15));
    // frozen reference values (50-digit arithmetic)
    CHECK(m.k_eps() == Catch::Approx(11.370790582686645).epsilon(1e-14));
    CHECK(m.radial_coeff() == Catch::Approx(1.2470594330579423).epsilon(1e-14));
}

TEST_CASE("wall-height inputs exit exactly at the inner annulus edge", "[return_map]") {
    // dyadic wall widths make r - 1 = eps_w exact in floating point, so the
    // boundary identity s = eps_w |-> (phi, 1 + eps_v) holds to the last bit
    ReturnMapModel m = flagship(0.0, 0.0);  // xi identically zero
    m.eps_v = 0.0625;
    m.eps_w = 0.125;
    const auto out = return_map(m, AnnulusPoint<double>{0.3, 1.0 + m.eps_w});
    CHECK(out.phi == 0.3);             // log(s/eps_w) vanishes identically
    CHECK(out.r == 1.0 + m.eps_v);     // s = eps_w lands on r = 1 + eps_v

    // non-dyadic default widths: same identity up to rounding
    const ReturnMapModel d = flagship(0.0, 0.0);
    const auto out2 = return_map(d, AnnulusPoint<double>{0.3, 1.0 + d.eps_w});
    CHECK(out2.phi == Catch::Approx(0.3).margin(1e-11));
    CHECK(out2.r == Catch::Approx(1.0 + d.eps_v).margin(1e-13));
}

TEST_CASE("closed form equals the composition of the factor maps", "[return_map]") {
    const ReturnMapModel m = flagship();
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uphi(0.0, two_pi);
    std::uniform_real_distribution<double> ur(1.0 + 1e-6, 1.03);  // keeps s under the wall
    for (int i = 0; i < 500; ++i) {
        const AnnulusPoint<double> p{uphi(rng), ur(rng)};
        const auto a = return_map(m, p);
        const auto b = return_map_composed(m, p);
        CHECK(a.phi == Catch::Approx(b.phi).margin(1e-11));
        CHECK(a.r == Catch::Approx(b.r).margin(1e-13));
    }
}

TEST_CASE("frozen evaluation at phi = 1, r = 1.02", "[return_map]") {
    const ReturnMapModel m = flagship();
    const AnnulusPoint<double> p{1.0, 1.02};

    const WallPoint<double> in_w = transition_vw(m, p);
    CHECK(in_w.z == Catch::Approx(0.079005038431135662).epsilon(1e-14));

    const auto out = return_map(m, p);
    CHECK(out.phi == Catch::Approx(2.1637459651627800).epsilon(1e-13));
    CHECK(out.r == Catch::Approx(1.0281302722195587).epsilon(1e-14));

    const Mat2 J = d_return_map(m, p.phi, p.r);
    CHECK(J.a11 == Catch::Approx(1.8766133471091473).epsilon(1e-12));
    CHECK(J.a12 == Catch::Approx(-62.505780681857282).epsilon(1e-12));
    CHECK(J.a21 == Catch::Approx(-0.0074594600558573534).epsilon(1e-11));
    CHECK(J.a22 == Catch::Approx(0.53188714932769617).epsilon(1e-12));
}

TEST_CASE("quad evaluation agrees with double", "[return_map]") {
    const ReturnMapModel m = flagship();
    const AnnulusPoint<__float128> p{__float128(1.0), __float128(1.02)};
    const auto out = return_map(m, p);
    CHECK(double(out.phi) == Catch::Approx(2.1637459651627800).epsilon(1e-13));
    CHECK(double(out.r) == Catch::Approx(1.0281302722195587).epsilon(1e-13));
}

TEST_CASE("Jacobian matches finite differences of the map", "[return_map]") {
    const ReturnMapModel m = flagship();
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> uphi(0.0, two_pi);
    std::uniform_real_distribution<double> ur(1.005, 1.03);
    const double h = 1e-7;
    for (int i = 0; i < 50; ++i) {
        const double phi = uphi(rng), r = ur(rng);
        const Mat2 J = d_return_map(m, phi, r);
        const auto fp = return_map(m, AnnulusPoint<double>{phi + h, r});
        const auto fm = return_map(m, AnnulusPoint<double>{phi - h, r});
        const auto gp = return_map(m, AnnulusPoint<double>{phi, r + h});
        const auto gm = return_map(m, AnnulusPoint<double>{phi, r - h});
        CHECK(J.a11 == Catch::Approx((fp.phi - fm.phi) / (2 * h)).epsilon(1e-5));
        CHECK(J.a12 == Catch::Approx((gp.phi - gm.phi) / (2 * h)).epsilon(1e-5));
        CHECK(J.a21 == Catch::Approx((fp.r - fm.r) / (2 * h)).margin(1e-6));
        CHECK(J.a22 == Catch::Approx((gp.r - gm.r) / (2 * h)).epsilon(1e-5));
    }
}

TEST_CASE("radial contraction bound at the wall is delta eps_v / eps_w", "[return_map]") {
    const ReturnMapModel m = flagship();
    CHECK(radial_contraction_bound(m, m.eps_w) ==
          Catch::Approx(m.delta() * m.eps_v / m.eps_w).epsilon(1e-14));
    CHECK(radial_contraction_bound(m, m.eps_w) == Catch::Approx(242.0 / 405.0).epsilon(1e-14));
    CHECK(radial_contraction_bound(m, m.eps_w) < 1.0);  // contraction wherever defined
}

TEST_CASE("threshold drive rate, frozen formula example", "[return_map]") {
    CHECK(omega0_formula(400.0 / 81.0, 0.05, 0.01) ==
          Catch::Approx(32.758766350603268).epsilon(1e-13));
    CHECK_THROWS_AS(omega0_formula(400.0 / 81.0, 0.01, 0.05), NotMonotone);
}

TEST_CASE("threshold drive rate on a model window", "[return_map]") {
    const ReturnMapModel m = flagship();
    CHECK(m.xi.eval(0.5) == Catch::Approx(0.064626376031506212).epsilon(1e-14));
    CHECK(omega0(m, {0.5, 2.8}) == Catch::Approx(44.021772697093884).epsilon(1e-12));
    CHECK_THROWS_AS(omega0(m, {3.5, 5.5}), NotMonotone);   // xi increases there
    CHECK_THROWS_AS(omega0(m, {0.5, 5.5}), NotMonotone);   // not monotone throughout
}

TEST_CASE("phase stretch of a horizontal segment, frozen example", "[return_map]") {
    const ReturnMapModel m = flagship();
    CHECK(stretch_measure(m, 1.03, {0.5, 2.8}) ==
          Catch::Approx(4.2083173090556965).epsilon(1e-13));
}

TEST_CASE("offset profile extremes and decreasing arc", "[return_map]") {
    const ReturnMapModel m = flagship();
    CHECK(m.xi.max_value() == Catch::Approx(0.066666666666666667).epsilon(1e-12));
    CHECK(m.xi.min_value() == Catch::Approx(0.1 / 3.0).epsilon(1e-12));

    const AngleWindow arc = m.xi.decreasing_arc();
    CHECK(arc.phi_left == Catch::Approx(0.0).margin(1e-6));
    CHECK(arc.phi_right == Catch::Approx(std::numbers::pi).margin(1e-6));

    XiProfile flat;
    flat.nu = 0.05;
    flat.mu = 0.0;
    CHECK(flat.is_constant());
    CHECK_THROWS_AS(flat.decreasing_arc(), NoWindow);
}

TEST_CASE("well-definedness of the full annulus", "[return_map]") {
    CHECK_FALSE(flagship(0.05, 0.5).globally_well_defined());  // 0.04 + 1/15 > 0.1
    CHECK(flagship(0.03, 0.5).globally_well_defined());        // 0.04 + 0.04 <= 0.1
}

TEST_CASE("domain violations throw typed errors", "[return_map]") {
    const ReturnMapModel m = flagship();
    CHECK_THROWS_AS(return_map(m, AnnulusPoint<double>{0.0, 1.2}), BlockOverflow);
    const ReturnMapModel m0 = flagship(0.0, 0.0);
    CHECK_THROWS_AS(return_map(m0, AnnulusPoint<double>{0.0, 1.0}), OnStableManifold);
    CHECK_THROWS_AS((local_map(m, Node::v, WallPoint<double>{0.0, 0.0})), OnStableManifold);
    CHECK_THROWS_AS((local_map(m, Node::v, WallPoint<double>{0.0, 0.2})), BlockOverflow);
}

TEST_CASE("model validation rejects non-dissipative rates and bad walls", "[return_map]") {
    ReturnMapModel m;
    m.c_v = m.c_w = 0.9;
    m.e_v = m.e_w = 1.1;  // delta < 1
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    m = ReturnMapModel{};
    m.eps_v = 0.2;  // must stay below eps_w
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("unwrapped phase exposes the winding", "[return_map]") {
    ReturnMapModel m = flagship(0.05, 0.5, 55.0);  // strong drive: many turns
    const AnnulusPoint<double> p{1.2, 1.01};
    const auto lifted = return_map(m, p, true);
    const auto wrapped = return_map(m, p, false);
    CHECK(lifted.phi > two_pi);  // omega K |log s| is large
    CHECK(wrapped.phi >= 0.0);
    CHECK(wrapped.phi < two_pi);
    CHECK(std::fabs(wrap_angle(lifted.phi) - wrapped.phi) < 1e-9);
}

TEST_CASE("model construction from system parameters", "[return_map]") {
    SystemParams p;
    p.omega = 3.0;
    const ReturnMapModel m = ReturnMapModel::from_system(p);
    CHECK(m.c_v == Catch::Approx(1.1).margin(1e-8));
    CHECK(m.e_v == Catch::Approx(0.9).margin(1e-8));
    CHECK(m.c_w == Catch::Approx(1.1).margin(1e-8));
    CHECK(m.e_w == Catch::Approx(0.9).margin(1e-8));
    CHECK(m.K() == Catch::Approx(400.0 / 81.0).margin(1e-7));
    CHECK(m.omega == 3.0);
    CHECK(m.xi.nu == 0.0);

    SystemParams q;
    q.nu = 0.05;
    q.mu = 0.5;
    q.omega = 55.0;
    const ReturnMapModel mq = ReturnMapModel::from_system(q);
    CHECK(std::fabs(mq.c_v - 1.1) < 0.2);  // saddles shift with nu
    CHECK(std::fabs(mq.e_w - 0.9) < 0.2);
    CHECK(mq.xi.nu == 0.05);
    CHECK(mq.xi.mu == 0.5);
    REQUIRE(mq.xi.shape_cos.size() == 1);
    CHECK(mq.xi.shape_cos[0] == 1.0);
}

TEST_CASE("model config round trip", "[return_map]") {
    const ReturnMapModel m = flagship(0.04, 0.3, 7.0);
    Config cfg;
    m.to_config(cfg);
    const Config reparsed = Config::parse(cfg.canonical_text());
    const ReturnMapModel q = ReturnMapModel::from_config(reparsed);
    CHECK(q.c_v == m.c_v);
    CHECK(q.e_w == m.e_w);
    CHECK(q.eps_v == m.eps_v);
    CHECK(q.omega == 7.0);
    CHECK(q.xi.nu == 0.04);
    CHECK(q.xi.mu == 0.3);
}
