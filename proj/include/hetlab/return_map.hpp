#pragma once

// Idealized return map of the forced two-saddle cycle, built from local
// passage maps near the two saddles and the transitions between them.
//
// Geometry and normalization.  Each saddle a in {v, w} has contraction rate
// c_a > 0 and expansion rate e_a > 0 along the cycle.  Cross-sections:
//
//   In(a)  - entry wall, coordinates (phi, z), z in (0, eps_w]: distance from
//            the local stable manifold.  Both entry walls use the height
//            scale eps_w, so the walls are placed where the unstable
//            coordinate of the *other* saddle has grown to order one.
//   Out(a) - exit wall, coordinates (phi, r), r in (1, 1 + eps_a]: radial
//            annulus coordinate, r = 1 is the outgoing connection.
//
// Local passage (linearized flow, time of flight -ln(z/eps_w)/e_a scaled by
// the drive rate 2*omega):
//
//   Phi_a(phi, z) = ( phi - (2 omega / e_a) ln(z/eps_w),
//                     1 + eps_a (z/eps_w)^{delta_a} ),   delta_a = c_a / e_a.
//
// Transitions between blocks are rigid in phi.  The v->w connection is the
// broken one: the flight adds the phase-dependent offset xi(phi), so
//
//   Psi_{v->w}(phi, r) = (phi, (r - 1) + xi(phi)),
//   Psi_{w->v}(phi, r) = (phi,  r - 1).
//
// Full return map on Out(v), R = Phi_v o Psi_{w->v} o Phi_w o Psi_{v->w}:
//
//   s(phi, r) = (r - 1) + xi(phi)
//   R_1 = phi - omega K ln s - omega k_eps,   K = 2 (e_v + c_w)/(e_v e_w),
//                                             k_eps = -K ln eps_w,
//   R_2 = 1 + C s^delta,                      delta = delta_v delta_w,
//                                             C = eps_v / eps_w^delta.
//
// With this normalization s = eps_w maps to exactly r = 1 + eps_v, and
// eps_v + max xi <= eps_w keeps the whole annulus inside the walls.
// delta > 1 makes the radial direction contracting for small s; the phase
// direction expands like omega K / s.

#include <cmath>
#include <string>

#include "config.hpp"
#include "equilibria.hpp"
#include "errors.hpp"
#include "math_util.hpp"
#include "system.hpp"
#include "xi_profile.hpp"

namespace hetlab {

enum class Node { v, w };

template <class T>
struct WallPoint {      // entry-wall coordinates
    T phi, z;
};

template <class T>
struct AnnulusPoint {   // exit-wall coordinates
    T phi, r;
};

struct ReturnMapModel {
    double c_v = 1.1, e_v = 0.9;    // saddle rates at v
    double c_w = 1.1, e_w = 0.9;    // saddle rates at w
    double eps_v = 0.04;            // Out(v) annulus width
    double eps_w = 0.1;             // Out(w) width and shared entry-wall height
    double omega = 1.0;             // drive rate (phase advances at 2*omega)
    XiProfile xi;

    double delta_v() const { return c_v / e_v; }
    double delta_w() const { return c_w / e_w; }
    double delta() const { return delta_v() * delta_w(); }
    double K() const { return 2.0 * (e_v + c_w) / (e_v * e_w); }
    double k_eps() const { return -K() * std::log(eps_w); }
    double radial_coeff() const { return eps_v / std::pow(eps_w, delta()); }

    void validate() const {
        if (!(c_v > 0 && e_v > 0 && c_w > 0 && e_w > 0))
            throw std::invalid_argument("saddle rates must be positive");
        if (!(delta() > 1.0))
            throw std::invalid_argument("need delta = (c_v c_w)/(e_v e_w) > 1 (dissipative cycle)");
        if (!(eps_v > 0 && eps_w > 0 && eps_v < eps_w && eps_w < 1))
            throw std::invalid_argument("need 0 < eps_v < eps_w < 1");
        if (!(omega > 0)) throw std::invalid_argument("omega must be positive");
        if (!(xi.nu >= 0 && xi.mu >= 0))
            throw std::invalid_argument("xi profile needs nu, mu >= 0");
    }

    // True when the map sends the full annulus wall into itself:
    // sup s = eps_v + max xi must not exceed the wall height.
    bool globally_well_defined() const {
        return eps_v + xi.max_value() <= eps_w;
    }

    // Model with rates read off the linearization of the flow at the two
    // saddles, the drive rate, and the forcing shape (zero-mean part) as the
    // xi shape.  Wall widths are choices, not system data.
    static ReturnMapModel from_system(const SystemParams& p, double eps_v_ = 0.04,
                                      double eps_w_ = 0.1) {
        const NetworkRates nr = network_node_rates(p);
        ReturnMapModel m;
        m.c_v = nr.v.c, m.e_v = nr.v.e;
        m.c_w = nr.w.c, m.e_w = nr.w.e;
        m.eps_v = eps_v_, m.eps_w = eps_w_;
        m.omega = p.omega;
        m.xi.nu = p.nu, m.xi.mu = p.mu;
        m.xi.shape_cos = p.forcing.cos_coeffs;
        m.xi.shape_sin = p.forcing.sin_coeffs;
        m.validate();
        return m;
    }

    void to_config(Config& cfg) const {
        cfg.set("return_map", "c_v", c_v);
        cfg.set("return_map", "e_v", e_v);
        cfg.set("return_map", "c_w", c_w);
        cfg.set("return_map", "e_w", e_w);
        cfg.set("return_map", "eps_v", eps_v);
        cfg.set("return_map", "eps_w", eps_w);
        cfg.set("return_map", "omega", omega);
        cfg.set("return_map", "xi_nu", xi.nu);
        cfg.set("return_map", "xi_mu", xi.mu);
    }

    static ReturnMapModel from_config(const Config& cfg) {
        ReturnMapModel m;
        const std::string sec = "return_map";
        m.c_v = cfg.get_double(sec, "c_v", m.c_v);
        m.e_v = cfg.get_double(sec, "e_v", m.e_v);
        m.c_w = cfg.get_double(sec, "c_w", m.c_w);
        m.e_w = cfg.get_double(sec, "e_w", m.e_w);
        m.eps_v = cfg.get_double(sec, "eps_v", m.eps_v);
        m.eps_w = cfg.get_double(sec, "eps_w", m.eps_w);
        m.omega = cfg.get_double(sec, "omega", m.omega);
        m.xi.nu = cfg.get_double(sec, "xi_nu", m.xi.nu);
        m.xi.mu = cfg.get_double(sec, "xi_mu", m.xi.mu);
        m.validate();
        return m;
    }
};

namespace detail {
template <class T>
void check_entry_height(const ReturnMapModel& m, T z, const char* where) {
    if (!(z > T(0)))
        throw OnStableManifold(std::string(where) + ": point lands on the stable manifold (z <= 0)");
    if (z > T(m.eps_w) * (T(1) + T(1e-12)))
        throw BlockOverflow(std::string(where) + ": entry height exceeds the wall (z > eps_w)");
}
} // namespace detail

// Local passage map Phi_a.  Throws OnStableManifold for z <= 0 and
// BlockOverflow when the point enters above the wall.
template <class T>
AnnulusPoint<T> local_map(const ReturnMapModel& m, Node a, const WallPoint<T>& p) {
    detail::check_entry_height(m, p.z, a == Node::v ? "local_map(v)" : "local_map(w)");
    const double e = (a == Node::v) ? m.e_v : m.e_w;
    const double da = (a == Node::v) ? m.delta_v() : m.delta_w();
    const double ea = (a == Node::v) ? m.eps_v : m.eps_w;
    const T lg = m_log(p.z / T(m.eps_w));
    return {p.phi - T(2.0 * m.omega / e) * lg, T(1) + T(ea) * m_exp(T(da) * lg)};
}

// Transition along the broken connection: adds the phase-dependent offset.
template <class T>
WallPoint<T> transition_vw(const ReturnMapModel& m, const AnnulusPoint<T>& p) {
    return {p.phi, (p.r - T(1)) + m.xi.eval(p.phi)};
}

// Transition along the intact connection.
template <class T>
WallPoint<T> transition_wv(const ReturnMapModel&, const AnnulusPoint<T>& p) {
    return {p.phi, p.r - T(1)};
}

// Closed-form return map on Out(v).  With lifted = true the phase is not
// wrapped, which exposes the winding; otherwise it is reduced to [0, 2 pi).
template <class T>
AnnulusPoint<T> return_map(const ReturnMapModel& m, const AnnulusPoint<T>& p,
                           bool lifted = true) {
    const T s = (p.r - T(1)) + m.xi.eval(p.phi);
    detail::check_entry_height(m, s, "return_map");
    const T lg = m_log(s / T(m.eps_w));
    T phi = p.phi - T(m.omega) * T(m.K()) * lg;
    if (!lifted) phi = wrap_angle(phi);
    return {phi, T(1) + T(m.eps_v) * m_exp(T(m.delta()) * lg)};
}

// The same map as the literal composition of the four factor maps.
template <class T>
AnnulusPoint<T> return_map_composed(const ReturnMapModel& m, const AnnulusPoint<T>& p) {
    const WallPoint<T> in_w = transition_vw(m, p);
    const AnnulusPoint<T> out_w = local_map(m, Node::w, in_w);
    const WallPoint<T> in_v = transition_wv(m, out_w);
    return local_map(m, Node::v, in_v);
}

struct Mat2 {
    double a11 = 0, a12 = 0, a21 = 0, a22 = 0;
};

// Jacobian of the closed form at (phi, r):
//   dR1/dphi = 1 - omega K xi'/s      dR1/dr = -omega K / s
//   dR2/dphi = delta C s^(delta-1) xi'  dR2/dr = delta C s^(delta-1)
inline Mat2 d_return_map(const ReturnMapModel& m, double phi, double r) {
    const double s = (r - 1.0) + m.xi.eval(phi);
    detail::check_entry_height(m, s, "d_return_map");
    const double xp = m.xi.deriv(phi);
    const double wK = m.omega * m.K();
    const double dr = m.delta() * m.radial_coeff() * std::pow(s, m.delta() - 1.0);
    return {1.0 - wK * xp / s, -wK / s, dr * xp, dr};
}

// Upper bound for |dR2/dr| given an upper bound on s (delta > 1 makes the
// bound monotone in s).
inline double radial_contraction_bound(const ReturnMapModel& m, double s_sup) {
    return m.delta() * m.radial_coeff() * std::pow(s_sup, m.delta() - 1.0);
}

// Phase stretch of the horizontal segment {r = r_star} over a window with
// xi decreasing: image phase interval has length
//   Delta = (phi_R - phi_L) + omega K ln( ((r*-1)+xi_L) / ((r*-1)+xi_R) ).
inline double stretch_measure(const ReturnMapModel& m, double r_star, const AngleWindow& win) {
    const double xl = m.xi.eval(win.phi_left), xr = m.xi.eval(win.phi_right);
    if (!(xl > xr)) throw NotMonotone("stretch_measure: xi(phi_L) must exceed xi(phi_R)");
    return win.width() + m.omega * m.K() * std::log(((r_star - 1.0) + xl) / ((r_star - 1.0) + xr));
}

// Threshold drive rate: for omega >= omega_0 the outermost segment r = 2
// stretches by a full extra turn across the window, the onset of folding.
// Pure formula version, usable without a model instance.
inline double omega0_formula(double K, double xi_left, double xi_right) {
    if (!(xi_left > xi_right))
        throw NotMonotone("omega0: need xi_left > xi_right over the window");
    return two_pi / (K * std::log1p((xi_left - xi_right) / (1.0 + xi_right)));
}

inline double omega0(const ReturnMapModel& m, const AngleWindow& win) {
    // the window must actually be a decreasing arc of xi
    const int n = 512;
    for (int i = 0; i <= n; ++i) {
        const double phi = win.phi_left + win.width() * i / n;
        if (m.xi.deriv(phi) > 1e-12)
            throw NotMonotone("omega0: xi is not decreasing on the window");
    }
    return omega0_formula(m.K(), m.xi.eval(win.phi_left), m.xi.eval(win.phi_right));
}

} // namespace hetlab
