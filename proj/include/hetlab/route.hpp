#pragma once

// Reconstruction of the breakdown route of the attracting invariant curve
// along a drive-frequency sweep at fixed (nu, mu).  For each omega the
// attractor is classified; the representative closed curve is the fitted
// invariant circle when the fit converges, otherwise the angular-median
// loop of the strobe samples.  The curve's image under a multi-strobe
// horizon map is refined adaptively and its folds counted as prominence-
// filtered reversals of the image angle: an attracting curve maps to a
// graph over the angle (zero reversals), a post-breakdown neighbourhood is
// folded over itself (two or more).  The first omega with a positive fold
// count is bracketed by bisection to a relative width target.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <list>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "classify.hpp"
#include "csv.hpp"
#include "svg.hpp"

namespace hetlab {

struct RouteOptions {
    ClassifyOptions cls{};           // per-sweep-point classification budget
    int curve_bins = 512;            // angular bins for the median loop
    double fold_horizon = 12.0;      // image horizon in time units
    double fold_prominence = 1e-2;   // reversal depth that counts as a fold
    double fold_gap_tol = 0.3;       // refine until image angles step <= this
    int fold_max_pts = 20000;        // polyline refinement budget
    double bracket_rel = 0.01;       // relative width of the onset bracket
    int bracket_max_iter = 24;
    std::uint64_t seed = 1;          // scrambles the initial condition
};

struct FoldAnalysis {
    int folds = 0;
    int strobes = 1;                        // horizon in strobe periods
    bool escaped = false;                   // image iteration left the basin
    std::vector<Eigen::Vector3d> src, img;  // refined closed polyline + image
};

struct RoutePoint {
    double omega = 0;
    AttractorClass type = AttractorClass::unclassified;
    int q = 0;
    double lambda1 = 0, lambda1_err = 0;
    bool chaotic = false;
    double rho = 0;
    bool has_curve = false;
    bool curve_fitted = false;              // fitted circle vs median loop
    std::vector<Eigen::Vector3d> markers;   // locked orbit points, if any
    FoldAnalysis fold;
};

struct RouteReport {
    double nu = 0, mu = 0;
    std::uint64_t seed = 0;
    std::vector<RoutePoint> points;
    bool transition_found = false;
    double bracket_lo = 0, bracket_hi = 0;  // folds 0 at lo, >= 1 at hi
};

namespace rdetail {

inline std::uint64_t splitmix64(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// base point off the invariant plane, jittered by ~1e-4 so distinct seeds
// give distinct (but deterministic) trajectories
inline State4 seeded_ic(std::uint64_t seed, int index) {
    std::uint64_t s = seed * 0x9e3779b97f4a7c15ULL + std::uint64_t(index) + 1;
    State4 ic{0.05, 0.05, 0.3, 0.0};
    auto u = [&] { return (double(splitmix64(s) >> 11) / 9007199254740992.0) - 0.5; };
    ic.x1 += 1e-4 * u();
    ic.x2 += 1e-4 * u();
    ic.x3 += 1e-4 * u();
    return ic;
}

// closed loop through the per-bin medians of the (x1, x3) angular histogram
inline std::vector<Eigen::Vector3d> bin_median_loop(const std::vector<Eigen::Vector3d>& xs,
                                                    int nbins) {
    if (xs.empty() || nbins < 8) return {};
    Eigen::Vector2d c(0, 0);
    for (const auto& x : xs) c += Eigen::Vector2d(x[0], x[2]);
    c /= double(xs.size());
    std::vector<std::vector<Eigen::Vector3d>> bins(static_cast<std::size_t>(nbins));
    for (const auto& x : xs) {
        const double a = wrap_angle(std::atan2(x[2] - c[1], x[0] - c[0]));
        bins[std::size_t(int(std::floor(a / two_pi * nbins)) % nbins)].push_back(x);
    }
    std::vector<Eigen::Vector3d> loop;
    for (auto& bin : bins) {
        if (bin.empty()) continue;
        Eigen::Vector3d m;
        for (int comp = 0; comp < 3; ++comp) {
            std::vector<double> v;
            v.reserve(bin.size());
            for (const auto& x : bin) v.push_back(x[comp]);
            std::nth_element(v.begin(), v.begin() + long(v.size() / 2), v.end());
            m[comp] = v[v.size() / 2];
        }
        loop.push_back(m);
    }
    return loop;
}

// Direction reversals of a closed angular sequence, with hysteresis: a turn
// only counts once the angle has retraced more than `prom`.  The walk runs
// around the loop twice and counts in the second lap, so the arbitrary
// starting position cannot split or hide a fold.
inline int reversal_count(const std::vector<double>& psi, double prom) {
    const int n = int(psi.size());
    if (n < 3) return 0;
    std::vector<double> lift(std::size_t(2 * n + 1));
    lift[0] = psi[0];
    double prev = psi[0];
    for (int j = 1; j <= 2 * n; ++j) {
        const double cur = psi[std::size_t(j % n)];
        double d = cur - prev;
        d -= two_pi * std::round(d / two_pi);
        lift[std::size_t(j)] = lift[std::size_t(j - 1)] + d;
        prev = cur;
    }
    int folds = 0, dir = +1;
    double ext = lift[0];
    for (int j = 1; j <= 2 * n; ++j) {
        const double v = lift[std::size_t(j)];
        if (dir > 0) {
            if (v > ext) ext = v;
            if (ext - v > prom) {
                if (j > n) ++folds;
                dir = -1, ext = v;
            }
        } else {
            if (v < ext) ext = v;
            if (v - ext > prom) {
                if (j > n) ++folds;
                dir = +1, ext = v;
            }
        }
    }
    return folds;
}

} // namespace rdetail

// Fold analysis of a closed curve: map every vertex forward by
// round(horizon * omega / pi) strobes, insert midpoints until adjacent
// image angles differ by at most fold_gap_tol (or the budget is spent),
// then count angular reversals of the image.
inline FoldAnalysis analyze_folds(const SystemParams& p, const std::vector<Eigen::Vector3d>& loop,
                                  const RouteOptions& opt = {}) {
    FoldAnalysis out;
    out.strobes = std::max(1, int(std::lround(opt.fold_horizon * p.omega / std::numbers::pi)));
    if (loop.size() < 8) return out;   // locked / degenerate source: nothing to fold

    StrobeMap S(p, 0.0, opt.cls.integ);
    auto F = [&](const Eigen::Vector3d& x) { return S.apply(x, out.strobes); };

    struct Node {
        Eigen::Vector3d src, img;
        double psi = 0;
    };
    std::list<Node> nodes;
    try {
        for (const auto& x : loop) nodes.push_back({x, F(x), 0});
    } catch (const NumericalError&) {
        out.escaped = true;
        return out;
    }
    Eigen::Vector2d c(0, 0);
    for (const auto& nd : nodes) c += Eigen::Vector2d(nd.img[0], nd.img[2]);
    c /= double(nodes.size());
    auto angle = [&](const Eigen::Vector3d& y) { return std::atan2(y[2] - c[1], y[0] - c[0]); };
    for (auto& nd : nodes) nd.psi = angle(nd.img);

    int pts = int(nodes.size());
    bool grew = true;
    while (grew && pts < opt.fold_max_pts) {
        grew = false;
        for (auto it = nodes.begin(); it != nodes.end() && pts < opt.fold_max_pts; ++it) {
            auto nx = std::next(it);
            const Node& a = *it;
            const Node& b = (nx == nodes.end()) ? nodes.front() : *nx;
            double d = b.psi - a.psi;
            d -= two_pi * std::round(d / two_pi);
            if (std::fabs(d) <= opt.fold_gap_tol) continue;
            if ((b.src - a.src).norm() < 1e-9) continue;   // genuine jump, stop splitting
            Node mid;
            mid.src = 0.5 * (a.src + b.src);
            try {
                mid.img = F(mid.src);
            } catch (const NumericalError&) {
                out.escaped = true;
                return out;
            }
            mid.psi = angle(mid.img);
            nodes.insert(nx == nodes.end() ? nodes.end() : nx, mid);
            ++pts;
            grew = true;
        }
    }

    std::vector<double> psi;
    psi.reserve(std::size_t(pts));
    out.src.reserve(std::size_t(pts));
    out.img.reserve(std::size_t(pts));
    for (const auto& nd : nodes) {
        psi.push_back(nd.psi);
        out.src.push_back(nd.src);
        out.img.push_back(nd.img);
    }
    out.folds = rdetail::reversal_count(psi, opt.fold_prominence);
    return out;
}

namespace rdetail {

// representative closed curve of the attractor behind a classification
inline std::vector<Eigen::Vector3d> curve_of(const Classification& c, int bins, bool* fitted) {
    *fitted = false;
    switch (c.type) {
        case AttractorClass::quasiperiodic_torus:
            if (c.circle.ok) {
                std::vector<Eigen::Vector3d> curve(static_cast<std::size_t>(bins));
                for (int j = 0; j < bins; ++j)
                    curve[std::size_t(j)] = circle_eval(c.circle, two_pi * j / bins);
                *fitted = true;
                return curve;
            }
            return bin_median_loop(c.samples, bins);
        case AttractorClass::chaotic:
        case AttractorClass::unclassified:
            return bin_median_loop(c.samples, bins);
        default:
            return {};   // locked, escaped or degenerate: no invariant curve
    }
}

// fold count alone, on a fresh (cheap) strobe orbit: used by the bisection,
// which does not need Lyapunov exponents or rotation numbers
inline int folds_only(const SystemParams& p, const RouteOptions& opt, int ic_index) {
    StrobeMap S(p, 0.0, opt.cls.integ);
    const State4 ic = seeded_ic(opt.seed, ic_index);
    Eigen::Vector3d x(ic.x1, ic.x2, ic.x3);
    try {
        for (int i = 0; i < opt.cls.n_transient; ++i) x = S.apply(x);
        std::vector<Eigen::Vector3d> xs(std::size_t(opt.cls.n_samples));
        for (auto& v : xs) {
            x = S.apply(x);
            if (!(x.norm() < opt.cls.escape_radius)) return 0;
            v = x;
        }
        bool fitted = false;
        std::vector<Eigen::Vector3d> curve;
        const CircleFit fit = fit_invariant_circle(xs);
        if (fit.ok) {
            curve.resize(std::size_t(opt.curve_bins));
            for (int j = 0; j < opt.curve_bins; ++j)
                curve[std::size_t(j)] = circle_eval(fit, two_pi * j / opt.curve_bins);
            fitted = true;
        } else {
            curve = bin_median_loop(xs, opt.curve_bins);
        }
        (void)fitted;
        const FoldAnalysis fa = analyze_folds(p, curve, opt);
        return fa.escaped ? 0 : fa.folds;
    } catch (const NumericalError&) {
        return 0;
    }
}

} // namespace rdetail

inline RouteReport route_report(const SystemParams& base, const std::vector<double>& omegas,
                                const RouteOptions& opt = {}) {
    base.validate();
    if (omegas.size() < 2)
        throw std::invalid_argument("route_report: need at least two omega values");
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        if (!(omegas[i] > 0))
            throw std::invalid_argument("route_report: omega values must be positive");
        if (i && !(omegas[i] > omegas[i - 1]))
            throw std::invalid_argument("route_report: omega values must be ascending");
    }

    RouteReport rep;
    rep.nu = base.nu;
    rep.mu = base.mu;
    rep.seed = opt.seed;

    for (std::size_t i = 0; i < omegas.size(); ++i) {
        SystemParams p = base;
        p.omega = omegas[i];
        const State4 ic = rdetail::seeded_ic(opt.seed, int(i));
        const Classification c = classify_attractor(p, ic, 0.0, opt.cls);

        RoutePoint pt;
        pt.omega = omegas[i];
        pt.type = c.type;
        pt.q = c.q;
        pt.lambda1 = c.lyap.exponents[0];
        pt.lambda1_err = c.lyap.std_errors[0];
        pt.chaotic = c.lyap.chaotic;
        if ((c.type == AttractorClass::fixed_point || c.type == AttractorClass::periodic) &&
            c.orbit.period > 0) {
            // locked orbits skip the Lyapunov run; the leading Floquet
            // multiplier gives the exponent exactly
            pt.lambda1 = std::log(std::abs(c.orbit.multipliers[0])) / c.orbit.period;
            pt.lambda1_err = 0;
        }
        pt.rho = c.rotation.value;
        std::vector<Eigen::Vector3d> curve = rdetail::curve_of(c, opt.curve_bins, &pt.curve_fitted);
        pt.has_curve = curve.size() >= 8;
        if (pt.has_curve) {
            pt.fold = analyze_folds(p, curve, opt);
        } else if (c.type == AttractorClass::fixed_point || c.type == AttractorClass::periodic) {
            // locked: keep the periodic points as plot markers
            const std::size_t nq = std::size_t(std::max(1, c.q));
            const std::size_t from = c.samples.size() > nq ? c.samples.size() - nq : 0;
            pt.markers.assign(c.samples.begin() + long(from), c.samples.end());
        }
        rep.points.push_back(std::move(pt));
    }

    // first omega with folds, bracketed against the last fold-free omega
    std::size_t hi_idx = rep.points.size();
    for (std::size_t i = 0; i < rep.points.size(); ++i)
        if (rep.points[i].has_curve && rep.points[i].fold.folds >= 1) {
            hi_idx = i;
            break;
        }
    if (hi_idx != rep.points.size() && hi_idx > 0) {
        double lo = rep.points[hi_idx - 1].omega, hi = rep.points[hi_idx].omega;
        for (int it = 0; it < opt.bracket_max_iter && (hi - lo) > opt.bracket_rel * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            SystemParams p = base;
            p.omega = mid;
            (rdetail::folds_only(p, opt, int(hi_idx)) >= 1 ? hi : lo) = mid;
        }
        rep.transition_found = (hi - lo) <= opt.bracket_rel * hi;
        rep.bracket_lo = lo;
        rep.bracket_hi = hi;
    }
    return rep;
}

inline CsvTable route_csv(const RouteReport& rep) {
    CsvTable t({"nu", "mu", "omega", "seed", "class", "q", "lambda1", "lambda1_err", "chaotic",
                "rho", "curve", "curve_points", "strobes", "folds"});
    for (const RoutePoint& pt : rep.points) {
        const char* curve = !pt.has_curve ? "none" : (pt.curve_fitted ? "fit" : "median");
        t.add_row({rep.nu, rep.mu, pt.omega, rep.seed, to_string(pt.type), pt.q, pt.lambda1,
                   pt.lambda1_err, pt.chaotic ? 1 : 0, pt.rho, curve, long(pt.fold.src.size()),
                   pt.fold.strobes, pt.fold.folds});
    }
    return t;
}

// One panel per sweep point: source curve, its image, fold count; locked
// points show their periodic orbit instead, with the poles marked.
inline std::string route_panel_svg(const RouteReport& rep, std::size_t idx) {
    if (idx >= rep.points.size()) throw std::invalid_argument("route_panel_svg: bad index");
    const RoutePoint& pt = rep.points[idx];

    double x0 = -1.2, x1 = 1.2, y0 = -1.2, y1 = 1.2;
    for (const auto* curve : {&pt.fold.src, &pt.fold.img})
        for (const auto& v : *curve) {
            x0 = std::min(x0, v[0] - 0.1), x1 = std::max(x1, v[0] + 0.1);
            y0 = std::min(y0, v[2] - 0.1), y1 = std::max(y1, v[2] + 0.1);
        }
    char title[96];
    std::snprintf(title, sizeof title, "omega = %.6g   %s", pt.omega, to_string(pt.type));
    SvgCanvas svg(520, 520, x0, x1, y0, y1, title);
    svg.frame_axes("x1", "x3");
    svg.marker(0.0, 1.0, 3.0, "#000000");    // the two polar saddles
    svg.marker(0.0, -1.0, 3.0, "#000000");

    if (pt.has_curve) {
        auto flat = [](const std::vector<Eigen::Vector3d>& c) {
            std::vector<std::array<double, 2>> p(c.size());
            for (std::size_t k = 0; k < c.size(); ++k) p[k] = {c[k][0], c[k][2]};
            return p;
        };
        svg.polyline(flat(pt.fold.src), "#2166ac", 1.2, true);
        svg.polyline(flat(pt.fold.img), "#b2182b", 0.8, true);
        char note[64];
        std::snprintf(note, sizeof note, "folds = %d  (%s curve)", pt.fold.folds,
                      pt.curve_fitted ? "fitted" : "median");
        svg.annotate(0.14, 0.095, note);
    } else {
        svg.annotate(0.14, 0.095, "no invariant curve", 12, "#b2182b");
        for (const auto& v : pt.markers) svg.marker(v[0], v[2], 3.0, "#1b7837");
    }
    if (pt.fold.escaped) svg.annotate(0.14, 0.13, "image iteration escaped", 12, "#b2182b");
    return svg.str();
}

} // namespace hetlab
