#pragma once

// Attractor classification through the strobe map.  Order of tests:
//
//   degenerate    - nu = mu = 0 exactly: the attracting set is the original
//                   connection network, time averages never settle, so no
//                   finite-orbit statistic is meaningful.
//   escaped       - the transient leaves the trapping region.
//   fixed/periodic- strobe recurrence within q_max periods, then a Newton
//                   polish pins the orbit and its multipliers.
//   chaotic       - leading Lyapunov exponent significantly positive.
//   quasiperiodic - an invariant-circle fit accepts the strobe samples.
//   unclassified  - none of the above; reported honestly.

#include <vector>

#include "circle_fit.hpp"
#include "lyapunov.hpp"
#include "rotation.hpp"
#include "section_map.hpp"

namespace hetlab {

enum class AttractorClass {
    degenerate,
    escaped,
    fixed_point,
    periodic,
    quasiperiodic_torus,
    chaotic,
    unclassified
};

inline const char* to_string(AttractorClass c) {
    switch (c) {
        case AttractorClass::degenerate: return "degenerate";
        case AttractorClass::escaped: return "escaped";
        case AttractorClass::fixed_point: return "fixed_point";
        case AttractorClass::periodic: return "periodic";
        case AttractorClass::quasiperiodic_torus: return "quasiperiodic_torus";
        case AttractorClass::chaotic: return "chaotic";
        case AttractorClass::unclassified: return "unclassified";
    }
    return "?";
}

struct ClassifyOptions {
    int n_transient = 1000;    // strobe iterates discarded before sampling
    int n_samples = 2000;      // strobe samples for recurrence/circle analysis
    double t_lyapunov = 2000.0;
    int q_max = 12;
    double recurrence_tol = 1e-6;
    double escape_radius = 5.0;
    IntegratorConfig integ{};
};

struct Classification {
    AttractorClass type = AttractorClass::unclassified;
    int q = 0;  // strobe periods for fixed_point (1) / periodic (>1)
    PeriodicOrbit orbit{};
    LyapunovResult lyap{};
    RotationNumber rotation{};
    CircleFit circle{};
    State4 representative{};
    std::vector<Eigen::Vector3d> samples;  // the strobe orbit used
};

inline Classification classify_attractor(const SystemParams& p, const State4& s0,
                                         double theta_star = 0.0,
                                         const ClassifyOptions& opt = {}) {
    p.validate();
    Classification out;

    if (p.nu == 0.0 && p.mu == 0.0) {
        out.type = AttractorClass::degenerate;
        out.representative = s0;
        return out;
    }

    // transient, with escape detection; integrator blow-ups count as escape
    State4 s;
    StrobeMap S(p, theta_star, opt.integ);
    std::vector<Eigen::Vector3d> xs(opt.n_samples);
    try {
        const double t_transient = opt.n_transient * (0.5 * two_pi) / p.omega;
        s = integrate_to(p, s0, t_transient, opt.integ);
        if (s.norm() > opt.escape_radius) {
            out.type = AttractorClass::escaped;
            return out;
        }
        // land on the section theta = theta_star, then strobe
        const double align = wrap_angle(theta_star - s.theta) / (2.0 * p.omega);
        if (align > 1e-15) s = integrate_to(p, s, align, opt.integ);
        xs[0] = Eigen::Vector3d(s.x1, s.x2, s.x3);
        for (int k = 1; k < opt.n_samples; ++k) xs[k] = S.apply(xs[k - 1]);
    } catch (const NumericalError&) {
        out.type = AttractorClass::escaped;
        return out;
    }
    out.representative = {s.x1, s.x2, s.x3, theta_star};
    out.samples = xs;

    // recurrence: smallest q whose shift is tiny at several base points
    auto detect_periodic = [&]() {
        const int base0 = opt.n_samples / 2;
        for (int q = 1; q <= opt.q_max; ++q) {
            double worst = 0;
            for (int base : {base0, base0 + 7, base0 + 13})
                worst = std::max(worst, (xs[base + q] - xs[base]).norm());
            if (worst < opt.recurrence_tol) {
                const State4 guess{xs[base0][0], xs[base0][1], xs[base0][2], theta_star};
                try {
                    out.orbit = find_periodic_orbit(p, guess, q, theta_star, opt.integ);
                } catch (const NonConvergence&) {
                    continue;  // near-rational drift, not a true q-cycle
                }
                out.q = q;
                out.type = q == 1 ? AttractorClass::fixed_point : AttractorClass::periodic;
                return true;
            }
        }
        return false;
    };
    if (detect_periodic()) return out;

    try {
        out.lyap = lyapunov_spectrum(p, out.representative, 0.0, opt.t_lyapunov, opt.integ);
    } catch (const NumericalError&) {
        out.type = AttractorClass::escaped;
        return out;
    }
    if (out.lyap.chaotic) {
        out.type = AttractorClass::chaotic;
        return out;
    }

    out.circle = fit_invariant_circle(xs);
    // Slow Floquet contraction (multiplier per strobe approaches 1 near the
    // bifurcations) or sharp near-saddle corners can defeat the first fit:
    // push further along the orbit and retry with a richer basis before
    // giving up.
    for (int round = 1; !out.circle.ok && round <= 2; ++round) {
        const int skip = int(std::pow(3.0, round)) * opt.n_transient;
        Eigen::Vector3d x = xs[opt.n_samples - 1];
        try {
            for (int k = 0; k < skip; ++k) x = S.apply(x);
            if (x.norm() > opt.escape_radius) {
                out.type = AttractorClass::escaped;
                return out;
            }
            xs[0] = x;
            for (int k = 1; k < opt.n_samples; ++k) xs[k] = S.apply(xs[k - 1]);
        } catch (const NumericalError&) {
            out.type = AttractorClass::escaped;
            return out;
        }
        out.samples = xs;
        out.representative = {xs[0][0], xs[0][1], xs[0][2], theta_star};
        if (detect_periodic()) return out;
        out.circle = fit_invariant_circle(xs, 32 << round);
    }
    if (out.circle.ok) {
        out.rotation = rotation_number(xs);
        out.type = AttractorClass::quasiperiodic_torus;
        return out;
    }

    out.type = AttractorClass::unclassified;
    return out;
}

} // namespace hetlab
