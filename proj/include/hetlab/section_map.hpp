#pragma once

// Stroboscopic dynamics.  The drive phase advances at 2*omega, so the phase
// returns to itself after pi/omega: that time-shift map on the spatial
// coordinates is the strobe map S.  Fixed points of S^q are periodic orbits
// of period q*pi/omega; their Floquet multipliers are the eigenvalues of the
// spatial monodromy matrix, propagated here with the exact variational flow
// (12 coupled equations: state + 3x3 tangent matrix).
//
// Two periodic-orbit finders:
//   find_periodic_orbit  - Newton on S^q(x) - x for the driven system,
//   find_limit_cycle     - shooting with unknown period for the autonomous
//                          case (mu = 0), with a phase condition row.

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <utility>

#include "errors.hpp"
#include "integrator.hpp"
#include "system.hpp"

namespace hetlab {

// state + column-major tangent matrix, driven at phase theta0 + 2 omega t
struct VariationalRHS {
    const SystemParams* p;
    double theta0;

    Vec<12> operator()(double t, const Vec<12>& y) const {
        const State4 s{y[0], y[1], y[2], theta0 + 2.0 * p->omega * t};
        const State4 d = eval_rhs(*p, s);
        const Jacobian4 J = eval_jacobian(*p, s);
        Vec<12> out;
        out[0] = d.x1, out[1] = d.x2, out[2] = d.x3;
        for (int col = 0; col < 3; ++col)
            for (int row = 0; row < 3; ++row) {
                double v = 0;
                for (int k = 0; k < 3; ++k) v += J[row][k] * y[3 + 3 * col + k];
                out[3 + 3 * col + row] = v;
            }
        return out;
    }
};

class StrobeMap {
  public:
    explicit StrobeMap(const SystemParams& p, double theta_star = 0.0,
                       IntegratorConfig cfg = {})
        : p_(p), theta_star_(theta_star), cfg_(cfg), h_(cfg.h_init) {
        p_.validate();
    }

    const SystemParams& params() const { return p_; }
    double theta_star() const { return theta_star_; }
    double period() const { return std::numbers::pi / p_.omega; }

    // q strobe periods.  The adaptive step is carried between calls so long
    // iterations do not re-learn the step scale every period.
    Eigen::Vector3d apply(const Eigen::Vector3d& x, int q = 1) {
        Vec<3> y{x[0], x[1], x[2]};
        for (int i = 0; i < q; ++i) {
            SpatialRHS rhs{&p_, theta_star_};
            Dopri5<3, SpatialRHS> st(rhs, cfg_, 0.0, y);
            st.set_initial_step(h_);
            st.run(period());
            y = st.y();
            h_ = st.suggested_step();
        }
        return {y[0], y[1], y[2]};
    }

    // strobe image and spatial monodromy over q periods
    std::pair<Eigen::Vector3d, Eigen::Matrix3d> apply_with_jacobian(const Eigen::Vector3d& x,
                                                                    int q = 1) {
        Vec<12> y{};
        y[0] = x[0], y[1] = x[1], y[2] = x[2];
        y[3] = y[7] = y[11] = 1.0;  // tangent starts at the identity
        VariationalRHS rhs{&p_, theta_star_};
        Dopri5<12, VariationalRHS> st(rhs, cfg_, 0.0, y);
        st.set_initial_step(h_);
        st.run(q * period());
        h_ = st.suggested_step();
        const Vec<12>& z = st.y();
        Eigen::Matrix3d M;
        for (int col = 0; col < 3; ++col)
            for (int row = 0; row < 3; ++row) M(row, col) = z[3 + 3 * col + row];
        return {Eigen::Vector3d(z[0], z[1], z[2]), M};
    }

  private:
    SystemParams p_;
    double theta_star_;
    IntegratorConfig cfg_;
    double h_;
};

struct PeriodicOrbit {
    State4 point;    // on the section theta = theta_star (autonomous: anchor)
    int q = 1;       // strobe periods; 0 marks an autonomous orbit
    double period = 0;
    std::array<std::complex<double>, 3> multipliers{};  // |.| descending
    double residual = 0;
    bool stable = false;  // every non-trivial multiplier inside the unit circle
};

namespace detail {

inline std::array<std::complex<double>, 3> sorted_eigenvalues(const Eigen::Matrix3d& M) {
    const Eigen::EigenSolver<Eigen::Matrix3d> es(M);
    std::array<std::complex<double>, 3> ev;
    for (int i = 0; i < 3; ++i) ev[i] = es.eigenvalues()[i];
    std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
        const double ma = std::abs(a), mb = std::abs(b);
        return ma != mb ? ma > mb : a.real() > b.real();
    });
    return ev;
}

} // namespace detail

// Newton for a fixed point of S^q.  The guess's theta component is ignored;
// the orbit lives on the section theta = theta_star.
inline PeriodicOrbit find_periodic_orbit(const SystemParams& p, const State4& guess, int q,
                                         double theta_star = 0.0, IntegratorConfig cfg = {},
                                         double tol = 1e-12, int max_iter = 30) {
    if (q < 1) throw std::invalid_argument("find_periodic_orbit: q must be >= 1");
    StrobeMap S(p, theta_star, cfg);
    Eigen::Vector3d x(guess.x1, guess.x2, guess.x3);

    for (int it = 0; it < max_iter; ++it) {
        const auto [fx, M] = S.apply_with_jacobian(x, q);
        const Eigen::Vector3d g = fx - x;
        if (g.norm() < tol) {
            PeriodicOrbit orb;
            orb.point = {x[0], x[1], x[2], theta_star};
            orb.q = q;
            orb.period = q * S.period();
            orb.multipliers = detail::sorted_eigenvalues(M);
            orb.residual = g.norm();
            orb.stable = std::abs(orb.multipliers[0]) < 1.0;
            return orb;
        }
        const Eigen::Matrix3d A = M - Eigen::Matrix3d::Identity();
        Eigen::Vector3d dx = A.fullPivLu().solve(g);
        if (!dx.allFinite())
            throw NonConvergence("find_periodic_orbit: singular Newton system");
        if (dx.norm() > 0.5) dx *= 0.5 / dx.norm();  // trust region for poor guesses

        // backtrack until the residual actually drops
        double lam = 1.0;
        Eigen::Vector3d xn = x - dx;
        for (int bt = 0; bt < 8; ++bt) {
            if ((S.apply(xn, q) - xn).norm() < g.norm() || lam < 0.02) break;
            lam *= 0.5;
            xn = x - lam * dx;
        }
        x = xn;
        if (x.norm() > 3.0)
            throw NonConvergence("find_periodic_orbit: iterate left the relevant ball");
    }
    throw NonConvergence("find_periodic_orbit: no convergence after " +
                         std::to_string(max_iter) + " iterations");
}

// Shooting for an autonomous periodic orbit (mu = 0): unknowns (x, T) with
// the phase condition f(x_k) . (x - x_k) = 0 closing the system.
inline PeriodicOrbit find_limit_cycle(const SystemParams& p, const State4& guess,
                                      double period_guess, IntegratorConfig cfg = {},
                                      double tol = 1e-11, int max_iter = 40) {
    if (p.mu != 0.0)
        throw std::invalid_argument("find_limit_cycle: autonomous shooting needs mu = 0");
    if (!(period_guess > 0))
        throw std::invalid_argument("find_limit_cycle: period guess must be positive");

    p.validate();
    Eigen::Vector3d x(guess.x1, guess.x2, guess.x3);
    double T = period_guess;

    auto flow = [&](const Eigen::Vector3d& x0, double t) {
        Vec<12> y{};
        y[0] = x0[0], y[1] = x0[1], y[2] = x0[2];
        y[3] = y[7] = y[11] = 1.0;
        VariationalRHS rhs{&p, 0.0};
        Dopri5<12, VariationalRHS> st(rhs, cfg, 0.0, y);
        st.run(t);
        Eigen::Matrix3d M;
        for (int col = 0; col < 3; ++col)
            for (int row = 0; row < 3; ++row) M(row, col) = st.y()[3 + 3 * col + row];
        return std::make_pair(Eigen::Vector3d(st.y()[0], st.y()[1], st.y()[2]), M);
    };
    auto field = [&](const Eigen::Vector3d& v) {
        const State4 d = eval_rhs(p, {v[0], v[1], v[2], 0.0});
        return Eigen::Vector3d(d.x1, d.x2, d.x3);
    };

    auto newton = [&](Eigen::Vector3d& xk, double& Tk) -> Eigen::Matrix3d {
        for (int it = 0; it < max_iter; ++it) {
            const auto [fx, M] = flow(xk, Tk);
            const Eigen::Vector3d g = fx - xk;
            if (g.norm() < tol) return M;

            Eigen::Matrix4d J;
            J.topLeftCorner<3, 3>() = M - Eigen::Matrix3d::Identity();
            J.topRightCorner<3, 1>() = field(fx);
            J.bottomLeftCorner<1, 3>() = field(xk).transpose();
            J(3, 3) = 0.0;
            Eigen::Vector4d rhs4;
            rhs4 << g[0], g[1], g[2], 0.0;
            Eigen::Vector4d d = J.fullPivLu().solve(rhs4);
            if (!d.allFinite())
                throw NonConvergence("find_limit_cycle: singular shooting system");
            double scale = 1.0;
            if (d.head<3>().norm() > 0.2) scale = 0.2 / d.head<3>().norm();
            if (std::fabs(d[3]) > 0.3 * Tk) scale = std::min(scale, 0.3 * Tk / std::fabs(d[3]));
            xk -= scale * d.head<3>();
            Tk -= scale * d[3];
            if (!(Tk > 0) || xk.norm() > 3.0)
                throw NonConvergence("find_limit_cycle: iterate left the relevant region");
        }
        throw NonConvergence("find_limit_cycle: no convergence after " +
                             std::to_string(max_iter) + " iterations");
    };

    Eigen::Matrix3d M = newton(x, T);

    // A recurrence-based period guess can land on a multiple cover of the
    // orbit; divide down to the primitive period.
    for (int round = 0; round < 4; ++round) {
        int reduce = 0;
        for (int k = 8; k >= 2; --k) {
            if (T / k < 1e-3) continue;
            if ((flow(x, T / k).first - x).norm() < 1e-7) { reduce = k; break; }
        }
        if (!reduce) break;
        T /= reduce;
        M = newton(x, T);
    }

    PeriodicOrbit orb;
    orb.point = {x[0], x[1], x[2], 0.0};
    orb.q = 0;
    orb.period = T;
    orb.multipliers = detail::sorted_eigenvalues(M);
    orb.residual = (flow(x, T).first - x).norm();
    // ignore the trivial multiplier (the one nearest 1)
    int trivial = 0;
    double best = 1e300;
    for (int i = 0; i < 3; ++i) {
        const double d = std::abs(orb.multipliers[i] - 1.0);
        if (d < best) { best = d, trivial = i; }
    }
    orb.stable = true;
    for (int i = 0; i < 3; ++i)
        if (i != trivial && std::abs(orb.multipliers[i]) >= 1.0) orb.stable = false;
    return orb;
}

// Crude recurrence detector used to seed period guesses: first local minimum
// of |x(t) - x(t0)| for t in [t0 + t_min, t0 + t_max], refined by golden
// section.  Returns (return time, distance).
inline std::pair<double, double> nearest_return(const Trajectory& traj, double t0,
                                                double t_min, double t_max) {
    const State4 ref = traj.at(t0);
    auto dist = [&](double t) {
        const State4 s = traj.at(t);
        const double dx = s.x1 - ref.x1, dy = s.x2 - ref.x2, dz = s.x3 - ref.x3;
        return std::sqrt(dx * dx + dy * dy + dz * dz);
    };
    const double lo = t0 + t_min, hi = std::min(t0 + t_max, traj.t_end());
    if (!(hi > lo)) throw std::invalid_argument("nearest_return: empty search window");
    const int n = 2000;
    double best_t = lo, best_d = 1e300;
    for (int i = 0; i <= n; ++i) {
        const double t = lo + (hi - lo) * i / n;
        const double d = dist(t);
        if (d < best_d) { best_d = d, best_t = t; }
    }
    double a = std::max(lo, best_t - (hi - lo) / n), b = std::min(hi, best_t + (hi - lo) / n);
    const double gr = 0.6180339887498949;
    double c = b - gr * (b - a), e = a + gr * (b - a);
    for (int it = 0; it < 60; ++it) {
        if (dist(c) < dist(e)) b = e;
        else a = c;
        c = b - gr * (b - a);
        e = a + gr * (b - a);
    }
    const double t = 0.5 * (a + b);
    return {t - t0, dist(t)};
}

} // namespace hetlab
