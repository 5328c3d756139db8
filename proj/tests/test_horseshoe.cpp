#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>

#include "hetlab/horseshoe.hpp"

using namespace hetlab;

namespace {

// strong-drive model: rates 1.1 / 0.9, walls 0.04 / 0.1, nu = 0.05,
// mu = 0.5, omega = 55 (the smallest integer above the stretch threshold)
ReturnMapModel strong() {
    ReturnMapModel m;
    m.omega = 55.0;
    m.xi.nu = 0.05;
    m.xi.mu = 0.5;
    m.validate();
    return m;
}

const ConleyMoserReport& strong_report() {
    static const ConleyMoserReport rep = [] {
        const ReturnMapModel m = strong();
        return verify_conley_moser(m, build_domain(m));
    }();
    return rep;
}

} // namespace

TEST_CASE("window selection on the decreasing arc", "[horseshoe]") {
    const HorseshoeDomain dom = build_domain(strong());
    // frozen references (40-digit arithmetic): left edge from the wall rule
    // eps_v + xi = 0.98 eps_w, i.e. cos(phi_L) = 0.48; right edge 0.95 pi
    CHECK(dom.window.phi_left == Catch::Approx(1.0701416143903085).epsilon(1e-13));
    CHECK(dom.window.phi_right == Catch::Approx(2.9845130209103036).epsilon(1e-13));
    CHECK(dom.I1.phi_left == Catch::Approx(1.0701416143903085).epsilon(1e-13));
    CHECK(dom.I1.phi_right == Catch::Approx(1.7082654165636402).epsilon(1e-13));
    CHECK(dom.I2.phi_left == Catch::Approx(2.3463892187369719).epsilon(1e-13));
    CHECK(dom.I2.phi_right == Catch::Approx(2.9845130209103036).epsilon(1e-13));
    CHECK(dom.xi_left == Catch::Approx(0.058).epsilon(1e-13));
    CHECK(dom.xi_right == Catch::Approx(0.033538527656747705).epsilon(1e-13));
    CHECK(dom.omega_min == Catch::Approx(54.392418897554451).epsilon(1e-12));
    CHECK(std::ceil(dom.omega_min) == 55.0);   // the drive used throughout
}

TEST_CASE("window selection fails without a usable arc", "[horseshoe]") {
    ReturnMapModel flat = strong();
    flat.xi.mu = 0.0;                        // constant profile: no arc at all
    CHECK_THROWS_AS(build_domain(flat), NoWindow);

    ReturnMapModel high = strong();
    high.xi.nu = 0.1;                        // min xi = 0.077 > 0.98 eps_w - eps_v
    high.xi.mu = 0.3;
    CHECK_THROWS_AS(build_domain(high), NoWindow);
}

TEST_CASE("strong drive passes the crossing and hyperbolicity checks", "[horseshoe]") {
    const ConleyMoserReport& rep = strong_report();
    CHECK(rep.p1_ok);
    CHECK(rep.p2_ok);
    CHECK(rep.p3_ok);
    CHECK(rep.stable);
    CHECK(rep.pass());
    CHECK(rep.first_violation.empty());
    CHECK(rep.fiber_min_copies == 2);   // every fiber spans two full copies
}

TEST_CASE("image ladders: rung counts and winding ranges", "[horseshoe]") {
    const ConleyMoserReport& rep = strong_report();
    REQUIRE(rep.H1.size() == 18);
    REQUIRE(rep.H2.size() == 28);
    CHECK(rep.H1.front().winding == 6);
    CHECK(rep.H1.back().winding == 23);
    CHECK(rep.H2.front().winding == 14);
    CHECK(rep.H2.back().winding == 41);
    CHECK(rep.partial1 == 14);   // grazing rungs at the ladder ends
    CHECK(rep.partial2 == 9);
}

TEST_CASE("rungs are thin, flat, disjoint graphs inside the annulus", "[horseshoe]") {
    const ConleyMoserReport& rep = strong_report();
    const ReturnMapModel m = strong();
    for (const auto* ladder : {&rep.H1, &rep.H2}) {
        for (const StripSpec& sp : *ladder) {
            REQUIRE(sp.lower.size() == 512);
            REQUIRE(sp.upper.size() == 512);
            for (std::size_t i = 0; i < 512; ++i) {
                CHECK(sp.upper[i] > sp.lower[i]);
                CHECK(sp.lower[i] > 1.0);
                CHECK(sp.upper[i] < 1.0 + m.eps_v);
            }
            CHECK(sp.width > 3.3e-5);            // frozen: widths in [3.40e-5, 1.15e-4]
            CHECK(sp.width < 1.2e-4);
            CHECK(sp.lipschitz < 4e-4);          // frozen max slope 1.8e-4, doubled
            CHECK(sp.kind == StripSpec::Kind::horizontal);
        }
    }
    // frozen smallest separation between rungs: 6.31e-5 (sampled)
    CHECK(rep.min_gap > 5.5e-5);
    CHECK(rep.min_gap < 7.0e-5);
}

TEST_CASE("derivative extremes over the domain grid", "[horseshoe]") {
    const ConleyMoserReport& rep = strong_report();
    const ReturnMapModel m = strong();
    // frozen grid extremes; interior extremes move slightly with the grid
    CHECK(rep.expansion_min == Catch::Approx(10.62950410137944).epsilon(5e-3));
    CHECK(rep.expansion_min > 10.0);
    CHECK(rep.lambda_v == Catch::Approx(1.0 / rep.expansion_min).epsilon(1e-14));
    // sup dR2/dr is attained at the grid corner (phi_L, 1 + eps_v), so it is
    // exact, and equals the closed-form bound at s = xi_L + eps_v
    CHECK(rep.lambda_h == Catch::Approx(0.59159914904716003).epsilon(1e-12));
    const double bound = radial_contraction_bound(m, rep.domain.xi_left + m.eps_v);
    CHECK(rep.lambda_h <= bound * (1.0 + 1e-12));
    CHECK(rep.lambda_h > 0.999 * bound);
    CHECK(rep.cross_dr1_dr == Catch::Approx(8098.2964145404286).epsilon(1e-12));
    CHECK(rep.cross_dr2_dphi == Catch::Approx(0.0094927454250302563).epsilon(5e-3));
}

TEST_CASE("winding vectors and in-strip fixed points", "[horseshoe]") {
    const ConleyMoserReport& rep = strong_report();
    const ReturnMapModel m = strong();
    CHECK(rep.v1 == 8);
    CHECK(rep.v2 == 30);
    CHECK(rep.fix1_phi == Catch::Approx(1.4040531568182692617).epsilon(1e-13));
    CHECK(rep.fix1_r == Catch::Approx(1.0303385536258768535).epsilon(1e-13));
    CHECK(rep.fix2_phi == Catch::Approx(2.5937495827455967589).epsilon(1e-13));
    CHECK(rep.fix2_r == Catch::Approx(1.0141845575791395806).epsilon(1e-13));
    // both fixed points are genuine period-1 orbits of the lifted map
    const auto i1 = return_map(m, AnnulusPoint<double>{rep.fix1_phi, rep.fix1_r}, true);
    CHECK(i1.phi - rep.fix1_phi == Catch::Approx(two_pi * 8).epsilon(1e-12));
    CHECK(i1.r == Catch::Approx(rep.fix1_r).epsilon(1e-12));
    const auto i2 = return_map(m, AnnulusPoint<double>{rep.fix2_phi, rep.fix2_r}, true);
    CHECK(i2.phi - rep.fix2_phi == Catch::Approx(two_pi * 30).epsilon(1e-12));
    CHECK(i2.r == Catch::Approx(rep.fix2_r).epsilon(1e-12));
    // frozen saddle multipliers
    CHECK(rep.fix1_mult_u == Catch::Approx(55.250399178611159).epsilon(1e-12));
    CHECK(rep.fix1_mult_s == Catch::Approx(0.0098703823018832837).epsilon(1e-11));
    CHECK(rep.fix2_mult_u == Catch::Approx(48.610845810600376).epsilon(1e-12));
    CHECK(rep.fix2_mult_s == Catch::Approx(0.0087254153245466209).epsilon(1e-11));
}

TEST_CASE("verification is stable under grid refinement", "[horseshoe]") {
    const ReturnMapModel m = strong();
    const HorseshoeDomain dom = build_domain(m);
    const ConleyMoserReport a = verify_conley_moser(m, dom, 200);
    const ConleyMoserReport& b = strong_report();   // grid 400
    CHECK(a.pass() == b.pass());
    CHECK(a.H1.size() == b.H1.size());
    CHECK(a.H2.size() == b.H2.size());
    CHECK(a.partial1 == b.partial1);
    CHECK(a.partial2 == b.partial2);
    CHECK(a.v1 == b.v1);
    CHECK(a.v2 == b.v2);
    CHECK(a.fiber_min_copies == b.fiber_min_copies);
}

TEST_CASE("slow drive fails the crossing check", "[horseshoe]") {
    ReturnMapModel m = strong();
    const HorseshoeDomain dom0 = build_domain(m);
    m.omega = dom0.omega_min / 10.0;     // far below the stretch threshold
    const HorseshoeDomain dom = build_domain(m);
    const ConleyMoserReport rep = verify_conley_moser(m, dom, 200);
    CHECK_FALSE(rep.p1_ok);
    CHECK_FALSE(rep.pass());
    CHECK(rep.first_violation.find("P1") != std::string::npos);
    CHECK_THROWS_AS(itinerary_shadow(m, rep, "12"), VerificationFailed);
    CHECK_THROWS_AS(measured_word_growth(m, rep), VerificationFailed);
    CHECK(entropy_lower_bound(rep) == 0.0);
}

TEST_CASE("constant word shadows onto the branch fixed point", "[horseshoe]") {
    const ReturnMapModel m = strong();
    const ConleyMoserReport& rep = strong_report();
    const ItineraryResult r = itinerary_shadow(m, rep, "1111111111");
    CHECK(r.phi0 == Catch::Approx(rep.fix1_phi).margin(1e-13));
    CHECK(r.r0 == Catch::Approx(rep.fix1_r).epsilon(1e-15));
    REQUIRE(r.windings.size() == 9);
    for (long n : r.windings) CHECK(n == 8);
    CHECK(r.deviation == 0);
    CHECK(r.pin_width < 1e-15);          // true pinned interval ~1.3e-16
    CHECK(r.pin_width > 1e-17);
    CHECK(r.residual < 1e-12);
}

TEST_CASE("frozen shadows of mixed words", "[horseshoe]") {
    const ReturnMapModel m = strong();
    const ConleyMoserReport& rep = strong_report();

    const ItineraryResult a = itinerary_shadow(m, rep, "1212121212");
    CHECK(a.phi0 == Catch::Approx(1.4251219343652305079).margin(1e-12));
    CHECK(a.windings == std::vector<long>{8, 18, 13, 22, 15, 23, 15, 23, 15});
    CHECK(a.deviation == -8);            // vs 5 visits of v1=8 and 4 of v2=30
    CHECK(a.residual < 1e-12);

    const ItineraryResult b = itinerary_shadow(m, rep, "2121212121");
    CHECK(b.phi0 == Catch::Approx(2.5815774468841504263).margin(1e-12));
    CHECK(b.windings == std::vector<long>{18, 13, 22, 15, 23, 15, 23, 15, 23});

    const ItineraryResult c = itinerary_shadow(m, rep, "1122112211");
    CHECK(c.phi0 == Catch::Approx(1.4044452885419905361).margin(1e-12));
    CHECK(c.windings == std::vector<long>{8, 8, 18, 25, 16, 12, 21, 26, 16});

    const ItineraryResult d = itinerary_shadow(m, rep, "2222222222");
    CHECK(d.phi0 == Catch::Approx(2.6126802264241105706).margin(1e-12));
    CHECK(d.windings.back() == 30);      // converges onto branch v2
    CHECK(d.phi0 - rep.fix2_phi != 0.0); // transient still visible at step 0
}

TEST_CASE("distinct two-symbol words get distinct shadows and windings", "[horseshoe]") {
    const ReturnMapModel m = strong();
    const ConleyMoserReport& rep = strong_report();
    const ItineraryResult a = itinerary_shadow(m, rep, "12");
    const ItineraryResult b = itinerary_shadow(m, rep, "21");
    CHECK(a.phi0 >= rep.domain.I1.phi_left);
    CHECK(a.phi0 <= rep.domain.I1.phi_right);
    CHECK(b.phi0 >= rep.domain.I2.phi_left);
    CHECK(b.phi0 <= rep.domain.I2.phi_right);
    CHECK(a.windings == std::vector<long>{8});
    CHECK(b.windings == std::vector<long>{18});
}

TEST_CASE("shadow start moves less than 1e-8 under word extension", "[horseshoe]") {
    const ReturnMapModel m = strong();
    const ConleyMoserReport& rep = strong_report();
    for (const std::string base : {"1212121212", "1122112211", "2111111111"}) {
        const ItineraryResult short_w = itinerary_shadow(m, rep, base);
        const ItineraryResult long_w = itinerary_shadow(m, rep, base + "21212");
        CHECK(std::fabs(short_w.phi0 - long_w.phi0) < 1e-8);
        // the extension only refines: the realized prefix windings agree
        for (std::size_t k = 0; k < short_w.windings.size(); ++k)
            CHECK(short_w.windings[k] == long_w.windings[k]);
    }
}

TEST_CASE("all 1024 ten-symbol words are realized with bounded deviation", "[horseshoe][slow]") {
    const ReturnMapModel m = strong();
    const ConleyMoserReport& rep = strong_report();
    long max_dev = 0;
    for (long msk = 0; msk < 1024; ++msk) {
        std::string w(10, '1');
        for (int i = 0; i < 10; ++i)
            if ((msk >> i) & 1) w[std::size_t(i)] = '2';
        const ItineraryResult r = itinerary_shadow(m, rep, w);
        CHECK(r.residual < 1e-10);
        CHECK(r.pin_width > 0.0);
        const AngleWindow& first = w[0] == '1' ? rep.domain.I1 : rep.domain.I2;
        CHECK(r.phi0 >= first.phi_left);
        CHECK(r.phi0 <= first.phi_right);
        max_dev = std::max(max_dev, std::labs(r.deviation));
    }
    CHECK(max_dev == 23);                 // frozen: rotational deviation bound
}

TEST_CASE("entropy bound and empirical word growth", "[horseshoe]") {
    const ReturnMapModel m = strong();
    const ConleyMoserReport& rep = strong_report();
    CHECK(entropy_lower_bound(rep) == Catch::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(measured_word_growth(m, rep, 6) == Catch::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("shadow input validation", "[horseshoe]") {
    const ReturnMapModel m = strong();
    const ConleyMoserReport& rep = strong_report();
    CHECK_THROWS_AS(itinerary_shadow(m, rep, ""), std::invalid_argument);
    CHECK_THROWS_AS(itinerary_shadow(m, rep, "1021"), std::invalid_argument);
    CHECK_THROWS_AS(itinerary_shadow(m, rep, "12", 1.2), std::invalid_argument);
    CHECK_THROWS_AS(measured_word_growth(m, rep, 0), std::invalid_argument);
}

TEST_CASE("vertical strips cover the annulus height over disjoint angles", "[horseshoe]") {
    const ConleyMoserReport& rep = strong_report();
    CHECK(rep.V1.kind == StripSpec::Kind::vertical);
    CHECK(rep.V1.param_lo == 1.0);
    CHECK(rep.V1.param_hi == Catch::Approx(1.04).epsilon(1e-15));
    CHECK(rep.V1.lipschitz == 0.0);
    CHECK(rep.V1.width == Catch::Approx(rep.domain.I1.width()).epsilon(1e-15));
    CHECK(rep.V1.upper.front() < rep.V2.lower.front());   // I1 left of I2
}
