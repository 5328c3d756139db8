#pragma once

// Conley-Moser verification of the rotational horseshoe in the annulus
// return map, plus itinerary shadowing on the verified strips.
//
// Construction.  Restrict to a window [phi_L, phi_R] on which xi decreases
// and the map stays under the entry wall.  The two source strips are the
// outer thirds,
//
//   V_1 = I_1 x [1, 1+eps_v],   V_2 = I_2 x [1, 1+eps_v],
//
// vertical rectangles over disjoint angle intervals.  Because the phase
// image R_1 stretches each radial fiber across many full turns, the image
// R(V_i) intersected with the window domain D decomposes into a ladder of
// thin near-horizontal strips ("rungs"), one per winding number n: the set
// of points of V_i whose lifted image phase lands in [phi_L, phi_R] + 2 pi n.
// A rung is *full* when it is a graph over the whole window; grazing rungs
// at the ladder ends are counted but excluded.  The hyperbolicity conditions
// are checked on a parameter grid:
//
//   (P1)  every radial fiber of each V_i stretches over at least one full
//         window copy, and every full rung round-trips through the closed
//         form inverse back into its source strip (crossing evidence);
//   (P2)  inf dR1/dphi > 1 on D (phase expansion, factor 1/lambda_v);
//   (P3)  sup dR2/dr < 1 on D (radial contraction, factor lambda_h), and
//         the full rungs of both ladders are pairwise disjoint.
//
// A 5% safety factor is applied to the grid extremes before the P2/P3
// comparisons, and the whole check is repeated on a doubled grid; "stable"
// records that no boolean or count changed.
//
// Winding bookkeeping.  Each symbol carries the winding vector v_i of its
// in-strip fixed point (the branch the constant word 'iii...' shadows onto).
// The winding realized on a single step depends on the radial level the
// orbit arrived with, so it is not constant across words; it stays within a
// bounded deviation of sum v_{s_k}, which itinerary_shadow records.  The
// shadow itself never needs a preselected branch: at every step the image
// of the current parameter interval covers at least one full copy of the
// next strip (that is exactly P1), and the centre-most covered copy is
// chosen.  The nested bisection runs in __float128 so that words of length
// 15 still pin down an interval wider than the arithmetic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"
#include "math_util.hpp"
#include "return_map.hpp"
#include "xi_profile.hpp"

namespace hetlab {

struct HorseshoeDomain {
    AngleWindow window;      // trimmed decreasing arc [phi_L, phi_R]
    AngleWindow I1, I2;      // outer thirds: source strip angles
    double xi_left = 0, xi_right = 0;   // xi at the window ends
    double omega_min = 0;    // stretch threshold omega_0 on the window
};

// Window selection: largest decreasing arc of xi, trimmed by 2% of its width
// on the left and 5% on the right, with the left edge pushed further right
// until the annulus image clears the entry wall with 2% slack:
// eps_v + xi(phi_L) <= 0.98 eps_w.
inline HorseshoeDomain build_domain(const ReturnMapModel& m) {
    const AngleWindow arc = m.xi.decreasing_arc();   // throws NoWindow if none
    double lo = arc.phi_left + 0.02 * arc.width();
    const double hi = arc.phi_right - 0.05 * arc.width();
    const double cap = 0.98 * m.eps_w - m.eps_v;
    if (m.xi.eval(hi) > cap)
        throw NoWindow("build_domain: xi exceeds the wall margin on the whole arc");
    if (m.xi.eval(lo) > cap) {
        double a = lo, b = hi;          // xi decreasing: bisect for the wall foot
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (a + b);
            (m.xi.eval(mid) > cap ? a : b) = mid;
        }
        lo = b;
    }
    if (!(lo < hi))
        throw NoWindow("build_domain: wall margin leaves an empty window");
    HorseshoeDomain dom;
    dom.window = {lo, hi};
    const double w3 = (hi - lo) / 3.0;
    dom.I1 = {lo, lo + w3};
    dom.I2 = {hi - w3, hi};
    dom.xi_left = m.xi.eval(lo);
    dom.xi_right = m.xi.eval(hi);
    dom.omega_min = omega0(m, dom.window);
    return dom;
}

struct StripSpec {
    enum class Kind { vertical, horizontal };
    Kind kind = Kind::vertical;
    int symbol = 0;          // 1 or 2
    long winding = 0;        // horizontal only: window copy index of the rung
    double param_lo = 0, param_hi = 0;   // graph parameter range
    std::vector<double> lower, upper;    // sampled boundary graphs
    double lipschitz = 0;    // 2x the worst sampled divided difference
    double width = 0;        // max gap between the boundaries
};

struct ConleyMoserReport {
    HorseshoeDomain domain;
    int grid_n = 0;
    StripSpec V1, V2;
    std::vector<StripSpec> H1, H2;      // full rungs, ascending winding
    int partial1 = 0, partial2 = 0;     // grazing rungs excluded from H1/H2
    bool p1_ok = false, p2_ok = false, p3_ok = false, stable = false;
    double expansion_min = 0;   // inf dR1/dphi over the grid
    double lambda_v = 0;        // 1 / expansion_min
    double lambda_h = 0;        // sup dR2/dr over the grid
    double cross_dr1_dr = 0;    // sup |dR1/dr|
    double cross_dr2_dphi = 0;  // sup |dR2/dphi|
    double min_gap = 0;         // smallest radial separation between full rungs
    int fiber_min_copies = 0;   // weakest full-copy coverage over source fibers
    long v1 = 0, v2 = 0;        // per-symbol winding vectors (fixed-point branches)
    double fix1_phi = 0, fix1_r = 0;    // in-strip fixed point of branch v1
    double fix2_phi = 0, fix2_r = 0;    // same for branch v2
    double fix1_mult_u = 0, fix1_mult_s = 0;   // its multipliers
    double fix2_mult_u = 0, fix2_mult_s = 0;
    std::string first_violation;        // empty when everything held
    bool pass() const { return p1_ok && p2_ok && p3_ok && stable; }
};

namespace hdetail {

// source height s that the lifted image phase psi requires from source angle
// phi: inverting R_1 = phi - omega K ln(s/eps_w)
inline double s_from_lift(const ReturnMapModel& m, double phi, double psi) {
    return m.eps_w * std::exp((phi - psi) / (m.omega * m.K()));
}

template <class T>
T lift_phase(const ReturnMapModel& m, T phi, T r) {
    const T s = (r - T(1)) + m.xi.eval(phi);
    return phi - T(m.omega) * T(m.K()) * m_log(s / T(m.eps_w));
}

template <class T>
T radial_image(const ReturnMapModel& m, T phi, T r) {
    const T s = (r - T(1)) + m.xi.eval(phi);
    return T(1) + T(m.eps_v) * m_exp(T(m.delta()) * m_log(s / T(m.eps_w)));
}

enum class RungClass { full, partial, empty };

// A rung is full when for every source angle the whole lifted window copy
// [phi_L, phi_R] + 2 pi n is reachable from heights inside [xi, xi + eps_v].
inline RungClass classify_rung(const ReturnMapModel& m, const AngleWindow& win,
                               const AngleWindow& I, long n, int samples) {
    bool all = true, any = false;
    for (int i = 0; i <= samples; ++i) {
        const double phi = I.phi_left + I.width() * i / samples;
        const double s_hi = s_from_lift(m, phi, win.phi_left + two_pi * double(n));
        const double s_lo = s_from_lift(m, phi, win.phi_right + two_pi * double(n));
        const double x = m.xi.eval(phi);
        all = all && s_hi <= x + m.eps_v && s_lo >= x;
        any = any || (s_lo <= x + m.eps_v && s_hi >= x);
    }
    if (all) return RungClass::full;
    return any ? RungClass::partial : RungClass::empty;
}

// Rung boundary graphs over the image angle: the faces of V_i at
// phi = I.lo / I.hi map to the lower / upper curves.
inline void rung_curves(const ReturnMapModel& m, const AngleWindow& win,
                        const AngleWindow& I, long n, int samples,
                        std::vector<double>& lower, std::vector<double>& upper) {
    lower.resize(samples);
    upper.resize(samples);
    for (int i = 0; i < samples; ++i) {
        const double psi = win.phi_left + win.width() * i / (samples - 1) + two_pi * double(n);
        const double s_lo = s_from_lift(m, I.phi_left, psi);
        const double s_hi = s_from_lift(m, I.phi_right, psi);
        lower[i] = 1.0 + m.eps_v * std::pow(s_lo / m.eps_w, m.delta());
        upper[i] = 1.0 + m.eps_v * std::pow(s_hi / m.eps_w, m.delta());
    }
}

inline StripSpec make_rung_spec(const ReturnMapModel& m, const AngleWindow& win,
                                const AngleWindow& I, int symbol, long n) {
    StripSpec sp;
    sp.kind = StripSpec::Kind::horizontal;
    sp.symbol = symbol;
    sp.winding = n;
    sp.param_lo = win.phi_left;
    sp.param_hi = win.phi_right;
    const int ns = 512;
    rung_curves(m, win, I, n, ns, sp.lower, sp.upper);
    const double h = win.width() / (ns - 1);
    double lip = 0, wd = 0;
    for (int i = 0; i < ns; ++i) {
        wd = std::max(wd, sp.upper[i] - sp.lower[i]);
        if (i) {
            lip = std::max(lip, std::fabs(sp.lower[i] - sp.lower[i - 1]) / h);
            lip = std::max(lip, std::fabs(sp.upper[i] - sp.upper[i - 1]) / h);
        }
    }
    sp.lipschitz = 2.0 * lip;
    sp.width = wd;
    return sp;
}

// Fixed point of the lifted branch psi = phi + 2 pi n: the winding pins s,
// s pins the radial level, and the remainder must be met by xi on the
// (decreasing) window.  Returns false when no such angle exists.
inline bool branch_fixed_point(const ReturnMapModel& m, const AngleWindow& win,
                               long n, double& phi, double& r) {
    const double s = m.eps_w * std::exp(-two_pi * double(n) / (m.omega * m.K()));
    const double rm1 = m.eps_v * std::pow(s / m.eps_w, m.delta());
    const double target = s - rm1;      // xi(phi) must equal this
    const double xl = m.xi.eval(win.phi_left), xr = m.xi.eval(win.phi_right);
    if (!(target <= xl && target >= xr)) return false;
    double a = win.phi_left, b = win.phi_right;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (a + b);
        (m.xi.eval(mid) > target ? a : b) = mid;
    }
    phi = 0.5 * (a + b);
    r = 1.0 + rm1;
    return true;
}

struct LadderScan {
    std::vector<long> full;
    int partial = 0;
};

inline LadderScan scan_ladder(const ReturnMapModel& m, const AngleWindow& win,
                              const AngleWindow& I, int samples) {
    // winding range bracket from the extreme reachable heights
    const double wK = m.omega * m.K();
    const double s_max = m.xi.eval(I.phi_left) + m.eps_v;
    const double s_min = std::max(m.xi.eval(I.phi_right), 1e-300) * 0.5;
    const double psi_lo = I.phi_left - wK * std::log(s_max / m.eps_w);
    const double psi_hi = I.phi_right - wK * std::log(s_min / m.eps_w);
    const long n_lo = long(std::floor((psi_lo - win.phi_right) / two_pi)) - 2;
    const long n_hi = long(std::ceil((psi_hi - win.phi_left) / two_pi)) + 2;
    LadderScan out;
    for (long n = n_lo; n <= n_hi; ++n) {
        switch (classify_rung(m, win, I, n, samples)) {
        case RungClass::full: out.full.push_back(n); break;
        case RungClass::partial: ++out.partial; break;
        case RungClass::empty: break;
        }
    }
    std::sort(out.full.begin(), out.full.end());
    return out;
}

struct GridExtremes {
    double expansion_min = 1e300;
    double lambda_h = 0;
    double cross_dr1_dr = 0, cross_dr2_dphi = 0;
};

inline GridExtremes grid_extremes(const ReturnMapModel& m, const AngleWindow& win,
                                  int grid_n) {
    GridExtremes g;
    const int rows = 8;
    for (int i = 0; i <= grid_n; ++i) {
        const double phi = win.phi_left + win.width() * i / grid_n;
        for (int j = 0; j <= rows; ++j) {
            const double r = 1.0 + m.eps_v * j / rows;
            const Mat2 J = d_return_map(m, phi, r);
            g.expansion_min = std::min(g.expansion_min, J.a11);
            g.lambda_h = std::max(g.lambda_h, J.a22);
            g.cross_dr1_dr = std::max(g.cross_dr1_dr, std::fabs(J.a12));
            g.cross_dr2_dphi = std::max(g.cross_dr2_dphi, std::fabs(J.a21));
        }
    }
    return g;
}

// Fewest full window copies covered by the lifted image of any radial fiber
// of the two source strips.  dR1/dphi > 0 makes span endpoints sufficient.
inline int fiber_min_copies(const ReturnMapModel& m, const AngleWindow& win,
                            const AngleWindow& I1, const AngleWindow& I2, int grid_n) {
    int worst = 1 << 30;
    for (const AngleWindow* I : {&I1, &I2}) {
        for (int j = 0; j <= grid_n; ++j) {
            const double r = 1.0 + m.eps_v * j / grid_n;
            const double fa = lift_phase(m, I->phi_left, r);
            const double fb = lift_phase(m, I->phi_right, r);
            const long n0 = long(std::ceil((fa - win.phi_left) / two_pi));
            const long n1 = long(std::floor((fb - win.phi_right) / two_pi));
            worst = std::min(worst, int(std::max(n1 - n0 + 1, long(0))));
        }
    }
    return worst;
}

// Crossing evidence for one full rung: walk three interior lines of the
// strip, invert the closed form back to the source, and demand the source
// sits inside V_i and round-trips onto the rung point.
inline bool rung_roundtrip_ok(const ReturnMapModel& m, const AngleWindow& win,
                              const AngleWindow& I, long n, int grid_n) {
    const double wK = m.omega * m.K();
    for (int i = 0; i <= grid_n; ++i) {
        const double psi = win.phi_left + win.width() * i / grid_n + two_pi * double(n);
        const double s_lo = s_from_lift(m, I.phi_left, psi);
        const double s_hi = s_from_lift(m, I.phi_right, psi);
        for (double t : {0.25, 0.5, 0.75}) {
            const double s = s_lo + t * (s_hi - s_lo);
            const double phi_src = psi + wK * std::log(s / m.eps_w);
            const double r_src = 1.0 + s - m.xi.eval(phi_src);
            if (!(phi_src >= I.phi_left - 1e-9 && phi_src <= I.phi_right + 1e-9))
                return false;
            if (!(r_src >= 1.0 - 1e-9 && r_src <= 1.0 + m.eps_v + 1e-9)) return false;
            const AnnulusPoint<double> img =
                return_map(m, AnnulusPoint<double>{phi_src, r_src}, true);
            const double rh = 1.0 + m.eps_v * std::pow(s / m.eps_w, m.delta());
            if (std::fabs(img.phi - psi) > 1e-7 * std::max(1.0, std::fabs(psi)))
                return false;
            if (std::fabs(img.r - rh) > 1e-10) return false;
        }
    }
    return true;
}

// Smallest radial separation between full rungs of both ladders, sampled
// along the window.  Negative would mean overlapping strips.
inline double rung_min_gap(const ReturnMapModel& m, const AngleWindow& win,
                           const AngleWindow& I1, const AngleWindow& I2,
                           const std::vector<long>& full1, const std::vector<long>& full2,
                           int psi_samples) {
    double min_gap = 1e300;
    std::vector<std::pair<double, double>> bands;
    for (int i = 0; i <= psi_samples; ++i) {
        const double psi = win.phi_left + win.width() * i / psi_samples;
        bands.clear();
        for (long n : full1) {
            const double a = 1.0 + m.eps_v * std::pow(s_from_lift(m, I1.phi_left, psi + two_pi * double(n)) / m.eps_w, m.delta());
            const double b = 1.0 + m.eps_v * std::pow(s_from_lift(m, I1.phi_right, psi + two_pi * double(n)) / m.eps_w, m.delta());
            bands.emplace_back(a, b);
        }
        for (long n : full2) {
            const double a = 1.0 + m.eps_v * std::pow(s_from_lift(m, I2.phi_left, psi + two_pi * double(n)) / m.eps_w, m.delta());
            const double b = 1.0 + m.eps_v * std::pow(s_from_lift(m, I2.phi_right, psi + two_pi * double(n)) / m.eps_w, m.delta());
            bands.emplace_back(a, b);
        }
        std::sort(bands.begin(), bands.end());
        for (std::size_t k = 1; k < bands.size(); ++k)
            min_gap = std::min(min_gap, bands[k].first - bands[k - 1].second);
    }
    return min_gap;
}

struct CheckSnapshot {
    bool p1 = false, p2 = false, p3 = false;
    std::size_t full1 = 0, full2 = 0;
    int partial1 = 0, partial2 = 0, copies = 0;
};

} // namespace hdetail

// Shadow core used both by the public itinerary_shadow and by the winding
// vector computation inside verify_conley_moser.  Finds, by nested
// bisection over the starting angle on the line r = r0, a point whose
// iterates visit the prescribed strips; at each step the centre-most fully
// covered copy of the next strip is targeted, restricted to the full-rung
// range of the symbol being left.
struct ItineraryResult {
    std::string word;
    double phi0 = 0, r0 = 0;
    std::vector<long> windings;   // realized per-step winding increments
    long deviation = 0;           // sum windings - sum v_{s_k}
    double pin_width = 0;         // final parameter interval width
    double residual = 0;          // worst re-iterated distance outside a target,
                                  // measured at the interval midpoint in the
                                  // working precision (phi0 is its rounding)
};

namespace hdetail {

template <class T>
ItineraryResult shadow_core(const ReturnMapModel& m, const HorseshoeDomain& dom,
                            const std::string& word, double r0,
                            long full_lo1, long full_hi1, long full_lo2, long full_hi2,
                            long v1, long v2) {
    if (word.empty()) throw std::invalid_argument("itinerary_shadow: empty word");
    for (char c : word)
        if (c != '1' && c != '2')
            throw std::invalid_argument("itinerary_shadow: word must use symbols 1 and 2");
    if (!(r0 >= 1.0 && r0 <= 1.0 + m.eps_v))
        throw std::invalid_argument("itinerary_shadow: r0 outside [1, 1+eps_v]");

    const AngleWindow* I[3] = {nullptr, &dom.I1, &dom.I2};
    const int L = int(word.size());
    auto sym = [&](int k) { return word[std::size_t(k)] - '0'; };

    const T r0q = T(r0);
    auto F = [&](T phi0, int upto) {
        T p = phi0, r = r0q;
        for (int k = 0; k < upto; ++k) {
            const T pn = lift_phase(m, p, r);
            r = radial_image(m, p, r);
            p = pn;
        }
        return p;
    };

    ItineraryResult out;
    out.word = word;
    out.r0 = r0;
    T a = T(I[sym(0)]->phi_left), b = T(I[sym(0)]->phi_right);
    long prev_n = 0;
    const int iters = sizeof(T) > 8 ? 150 : 90;
    for (int k = 0; k + 1 < L; ++k) {
        const T fa = F(a, k + 1), fb = F(b, k + 1);
        const AngleWindow& In = *I[sym(k + 1)];
        long nlo = long(std::ceil(double((fa - T(In.phi_left)) / T(two_pi))));
        long nhi = long(std::floor(double((fb - T(In.phi_right)) / T(two_pi))));
        // stay on full rungs of the symbol being left
        const long flo = sym(k) == 1 ? full_lo1 : full_lo2;
        const long fhi = sym(k) == 1 ? full_hi1 : full_hi2;
        nlo = std::max(nlo, prev_n + flo);
        nhi = std::min(nhi, prev_n + fhi);
        if (nlo > nhi)
            throw NotFound("itinerary_shadow: no fully covered strip copy at step " +
                           std::to_string(k) + " of '" + word + "' (coverage bug)");
        const long t = nlo + nhi;
        const long n = (t % 2 == 0) ? t / 2 : (t + 1) / 2;   // centre, ties up
        out.windings.push_back(n - prev_n);
        prev_n = n;
        const T Tlo = T(In.phi_left) + T(two_pi) * T(double(n));
        const T Thi = T(In.phi_right) + T(two_pi) * T(double(n));
        T lo = a, hi = b;
        for (int it = 0; it < iters; ++it) {
            const T mid = (lo + hi) / T(2);
            if (!(lo < mid && mid < hi)) break;   // arithmetic resolution floor
            (F(mid, k + 1) <= Tlo ? lo : hi) = mid;
        }
        const T a2 = lo;
        lo = a, hi = b;
        for (int it = 0; it < iters; ++it) {
            const T mid = (lo + hi) / T(2);
            if (!(lo < mid && mid < hi)) break;
            (F(mid, k + 1) >= Thi ? hi : lo) = mid;
        }
        a = a2, b = hi;
        if (!(a < b))
            throw NotFound("itinerary_shadow: parameter interval collapsed in '" + word + "'");
    }
    out.phi0 = double((a + b) / T(2));
    out.pin_width = double(b - a);
    for (int k = 0; k + 1 < L; ++k)
        out.deviation += out.windings[std::size_t(k)] - (sym(k) == 1 ? v1 : v2);

    // re-iterate the representative and measure how far any step strays
    {
        T p = (a + b) / T(2), r = r0q;
        long acc = 0;
        double res = 0;
        for (int k = 0; k + 1 < L; ++k) {
            const T pn = lift_phase(m, p, r);
            r = radial_image(m, p, r);
            p = pn;
            acc += out.windings[std::size_t(k)];
            const AngleWindow& In = *I[sym(k + 1)];
            const double lo_t = In.phi_left + two_pi * double(acc);
            const double hi_t = In.phi_right + two_pi * double(acc);
            res = std::max(res, std::max(lo_t - double(p), double(p) - hi_t));
        }
        out.residual = std::max(res, 0.0);
    }
    return out;
}

} // namespace hdetail

inline ConleyMoserReport verify_conley_moser(const ReturnMapModel& m,
                                             const HorseshoeDomain& dom,
                                             int grid_n = 400) {
    m.validate();
    if (grid_n < 16) throw std::invalid_argument("verify_conley_moser: grid_n < 16");

    ConleyMoserReport rep;
    rep.domain = dom;
    rep.grid_n = grid_n;

    auto snapshot = [&](int gn, ConleyMoserReport* fill) {
        hdetail::CheckSnapshot s;
        const hdetail::LadderScan l1 = hdetail::scan_ladder(m, dom.window, dom.I1, gn);
        const hdetail::LadderScan l2 = hdetail::scan_ladder(m, dom.window, dom.I2, gn);
        const hdetail::GridExtremes g = hdetail::grid_extremes(m, dom.window, gn);
        const int copies = hdetail::fiber_min_copies(m, dom.window, dom.I1, dom.I2, gn);
        bool roundtrips = true;
        for (long n : l1.full)
            roundtrips = roundtrips && hdetail::rung_roundtrip_ok(m, dom.window, dom.I1, n, gn / 8);
        for (long n : l2.full)
            roundtrips = roundtrips && hdetail::rung_roundtrip_ok(m, dom.window, dom.I2, n, gn / 8);
        const double gap = hdetail::rung_min_gap(m, dom.window, dom.I1, dom.I2,
                                                 l1.full, l2.full, 128);
        // 5% safety factor on the grid extremes before comparing with 1
        s.p1 = copies >= 1 && roundtrips && !l1.full.empty() && !l2.full.empty();
        s.p2 = g.expansion_min / 1.05 > 1.0;
        s.p3 = g.lambda_h * 1.05 < 1.0 && gap > 0.0;
        s.full1 = l1.full.size();
        s.full2 = l2.full.size();
        s.partial1 = l1.partial;
        s.partial2 = l2.partial;
        s.copies = copies;
        if (fill) {
            fill->expansion_min = g.expansion_min;
            fill->lambda_v = 1.0 / g.expansion_min;
            fill->lambda_h = g.lambda_h;
            fill->cross_dr1_dr = g.cross_dr1_dr;
            fill->cross_dr2_dphi = g.cross_dr2_dphi;
            fill->min_gap = gap;
            fill->fiber_min_copies = copies;
            fill->partial1 = l1.partial;
            fill->partial2 = l2.partial;
            for (long n : l1.full)
                fill->H1.push_back(hdetail::make_rung_spec(m, dom.window, dom.I1, 1, n));
            for (long n : l2.full)
                fill->H2.push_back(hdetail::make_rung_spec(m, dom.window, dom.I2, 2, n));
        }
        return s;
    };

    const hdetail::CheckSnapshot base = snapshot(grid_n, &rep);
    rep.p1_ok = base.p1;
    rep.p2_ok = base.p2;
    rep.p3_ok = base.p3;

    // vertical strip specs (boundaries are constant-angle graphs over r)
    auto vstrip = [&](const AngleWindow& I, int symbol) {
        StripSpec sp;
        sp.kind = StripSpec::Kind::vertical;
        sp.symbol = symbol;
        sp.param_lo = 1.0;
        sp.param_hi = 1.0 + m.eps_v;
        sp.lower.assign(512, I.phi_left);
        sp.upper.assign(512, I.phi_right);
        sp.lipschitz = 0.0;
        sp.width = I.width();
        return sp;
    };
    rep.V1 = vstrip(dom.I1, 1);
    rep.V2 = vstrip(dom.I2, 2);

    // grid-refinement stability: all booleans and counts must survive 2x
    const hdetail::CheckSnapshot fine = snapshot(2 * grid_n, nullptr);
    rep.stable = fine.p1 == base.p1 && fine.p2 == base.p2 && fine.p3 == base.p3 &&
                 fine.full1 == base.full1 && fine.full2 == base.full2 &&
                 fine.partial1 == base.partial1 && fine.partial2 == base.partial2 &&
                 fine.copies == base.copies;

    if (!rep.p1_ok) rep.first_violation = "P1: image strips fail to cross the domain";
    else if (!rep.p2_ok) rep.first_violation = "P2: phase expansion at most 1";
    else if (!rep.p3_ok) rep.first_violation = "P3: radial contraction or strip disjointness";
    else if (!rep.stable) rep.first_violation = "grid refinement changed an outcome";

    // winding vectors and in-strip fixed points (only meaningful on a pass)
    if (rep.p1_ok && !rep.H1.empty() && !rep.H2.empty()) {
        const long flo1 = rep.H1.front().winding, fhi1 = rep.H1.back().winding;
        const long flo2 = rep.H2.front().winding, fhi2 = rep.H2.back().winding;
        // anchor level: the in-strip fixed point nearest the centre of I1
        double best = 1e300, ar = 0;
        const double mid1 = 0.5 * (dom.I1.phi_left + dom.I1.phi_right);
        for (long n = flo1; n <= fhi1; ++n) {
            double p, r;
            if (!hdetail::branch_fixed_point(m, dom.window, n, p, r)) continue;
            if (p < dom.I1.phi_left || p > dom.I1.phi_right) continue;
            if (std::fabs(p - mid1) < best) best = std::fabs(p - mid1), ar = r;
        }
        if (best < 1e300) {
            // constant words converge onto their branch fixed point within a
            // few steps (radial contraction ~0.5); 12 symbols is safely past
            const std::string w1(12, '1'), w2(12, '2');
            const ItineraryResult s1 = hdetail::shadow_core<__float128>(
                m, dom, w1, ar, flo1, fhi1, flo2, fhi2, 0, 0);
            const ItineraryResult s2 = hdetail::shadow_core<__float128>(
                m, dom, w2, ar, flo1, fhi1, flo2, fhi2, 0, 0);
            rep.v1 = s1.windings.back();
            rep.v2 = s2.windings.back();
            double p, r;
            if (hdetail::branch_fixed_point(m, dom.window, rep.v1, p, r))
                rep.fix1_phi = p, rep.fix1_r = r;
            if (hdetail::branch_fixed_point(m, dom.window, rep.v2, p, r))
                rep.fix2_phi = p, rep.fix2_r = r;
            auto mults = [&](double phi, double r_, double& mu, double& ms) {
                const Mat2 J = d_return_map(m, phi, r_);
                const double tr = J.a11 + J.a22, det = J.a11 * J.a22 - J.a12 * J.a21;
                const double disc = std::sqrt(std::max(tr * tr - 4.0 * det, 0.0));
                mu = 0.5 * (tr + disc), ms = 0.5 * (tr - disc);
            };
            mults(rep.fix1_phi, rep.fix1_r, rep.fix1_mult_u, rep.fix1_mult_s);
            mults(rep.fix2_phi, rep.fix2_r, rep.fix2_mult_u, rep.fix2_mult_s);
        }
    }
    return rep;
}

// Shadow a symbol word on the verified strips.  r0 <= 0 selects the default
// line through the symbol-1 fixed point.  Runs in __float128: phase errors
// grow like the expansion (up to ~55 per step here), and double precision
// would exhaust its 16 digits before 15 symbols pin down.
inline ItineraryResult itinerary_shadow(const ReturnMapModel& m,
                                        const ConleyMoserReport& rep,
                                        const std::string& word, double r0 = 0.0) {
    if (!rep.pass())
        throw VerificationFailed("itinerary_shadow: report did not pass (P1-P3 + stability)");
    if (r0 <= 0.0) r0 = rep.fix1_r;
    return hdetail::shadow_core<__float128>(
        m, rep.domain, word, r0, rep.H1.front().winding, rep.H1.back().winding,
        rep.H2.front().winding, rep.H2.back().winding, rep.v1, rep.v2);
}

// Topological entropy bound from the verified full crossing: log of the
// number of symbols.
inline double entropy_lower_bound(const ConleyMoserReport& rep) {
    return rep.pass() ? std::log(2.0) : 0.0;
}

// Empirical word growth: fraction of all 2^depth words realizable by a
// shadow, reported as log(count)/depth.
inline double measured_word_growth(const ReturnMapModel& m, const ConleyMoserReport& rep,
                                   int depth = 8) {
    if (!rep.pass())
        throw VerificationFailed("measured_word_growth: report did not pass");
    if (depth < 1 || depth > 14)
        throw std::invalid_argument("measured_word_growth: depth out of range");
    long count = 0;
    for (long msk = 0; msk < (1L << depth); ++msk) {
        std::string w(std::size_t(depth), '1');
        for (int i = 0; i < depth; ++i)
            if ((msk >> i) & 1) w[std::size_t(i)] = '2';
        try {
            hdetail::shadow_core<__float128>(m, rep.domain, w, rep.fix1_r,
                                             rep.H1.front().winding, rep.H1.back().winding,
                                             rep.H2.front().winding, rep.H2.back().winding,
                                             rep.v1, rep.v2);
            ++count;
        } catch (const NotFound&) {
        }
    }
    return std::log(double(count)) / double(depth);
}

} // namespace hetlab
