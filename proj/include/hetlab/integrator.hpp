#pragma once

// Embedded Dormand-Prince 5(4) with the classic 4th-order continuous
// extension.  The stepper is generic over the state dimension and the
// right-hand side; the system-level wrappers integrate the spatial part
// (x1,x2,x3) numerically while advancing theta(t) = theta0 + 2 omega t
// analytically, so stroboscopic times are exact.

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "errors.hpp"
#include "math_util.hpp"
#include "system.hpp"

namespace hetlab {

struct IntegratorConfig {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 1e-3;
    double h_min = 1e-14;       // below this: StepUnderflow
    double h_max = 1.0;
    double divergence_norm = 1e6;  // above this: Divergence
    std::size_t max_steps = 50'000'000;
};

template <std::size_t N>
using Vec = std::array<double, N>;

namespace detail {

template <std::size_t N>
inline double err_norm(const Vec<N>& e, const Vec<N>& y0, const Vec<N>& y1,
                       double atol, double rtol) {
    double s = 0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sc = atol + rtol * std::max(std::fabs(y0[i]), std::fabs(y1[i]));
        const double q = e[i] / sc;
        s += q * q;
    }
    return std::sqrt(s / double(N));
}

} // namespace detail

// One accepted step together with its interpolation coefficients.
template <std::size_t N>
struct DenseStep {
    double t0 = 0, h = 0;
    std::array<Vec<N>, 5> rcont{};  // Hairer's contd5 layout

    Vec<N> eval(double t) const {
        const double th = (t - t0) / h, th1 = 1.0 - th;
        Vec<N> y;
        for (std::size_t i = 0; i < N; ++i)
            y[i] = rcont[0][i] +
                   th * (rcont[1][i] +
                         th1 * (rcont[2][i] + th * (rcont[3][i] + th1 * rcont[4][i])));
        return y;
    }
};

// Adaptive stepper; RHS is any callable f(t, y) -> Vec<N>.
template <std::size_t N, class RHS>
class Dopri5 {
  public:
    Dopri5(RHS rhs, IntegratorConfig cfg, double t0, const Vec<N>& y0)
        : f_(std::move(rhs)), cfg_(cfg), t_(t0), y_(y0), h_(cfg.h_init) {
        k1_ = f_(t_, y_);  // FSAL seed
    }

    double t() const { return t_; }
    const Vec<N>& y() const { return y_; }

    // Advance by exactly one accepted step, not crossing t_limit.
    // Returns the dense interpolant of the accepted step.
    DenseStep<N> step(double t_limit) {
        std::size_t rejected = 0;
        for (;;) {
            const double h_work = std::min(h_, cfg_.h_max);
            double h = h_work;
            const bool clipped = t_ + h >= t_limit;
            if (clipped) h = t_limit - t_;
            // a clipped closing fragment may be arbitrarily small; only
            // error-control-driven shrinkage counts as underflow
            if (h < cfg_.h_min && !clipped)
                throw StepUnderflow("dopri5: step size underflow at t = " +
                                    format_double(t_));

            Vec<N> k2, k3, k4, k5, k6, k7, y1, err;
            stage(h, k2, k3, k4, k5, k6, k7, y1, err);

            const double en = detail::err_norm<N>(err, y_, y1, cfg_.atol, cfg_.rtol);
            if (en <= 1.0) {
                DenseStep<N> d = make_dense(h, k2, k3, k4, k5, k6, k7, y1);
                t_ += h;
                y_ = y1;
                k1_ = k7;  // FSAL
                if (clipped) {
                    h_ = h_work;  // the clip was artificial; keep the working step
                } else {
                    const double fac = 0.9 * std::pow(std::max(en, 1e-10), -0.2);
                    h_ = h * std::clamp(fac, 0.2, 5.0);
                }
                double ynorm = 0;
                for (double v : y_) ynorm = std::max(ynorm, std::fabs(v));
                if (ynorm > cfg_.divergence_norm)
                    throw Divergence("dopri5: solution norm exceeded " +
                                     format_double(cfg_.divergence_norm) + " at t = " +
                                     format_double(t_));
                return d;
            }
            h_ = h * std::clamp(0.9 * std::pow(en, -0.2), 0.1, 1.0);
            if (++rejected > 1000)
                throw NonConvergence("dopri5: 1000 consecutive step rejections");
        }
    }

    // Integrate to t_end; optionally collect dense steps.
    void run(double t_end, std::vector<DenseStep<N>>* dense = nullptr) {
        std::size_t steps = 0;
        while (t_end - t_ > 1e-15 * std::max(1.0, std::fabs(t_end))) {
            DenseStep<N> d = step(t_end);
            if (dense) dense->push_back(d);
            if (++steps > cfg_.max_steps)
                throw NonConvergence("dopri5: exceeded max step count");
        }
        t_ = t_end;
    }

    // Seed the initial step size (used by drivers that carry it across runs).
    void set_initial_step(double h) { h_ = std::clamp(h, cfg_.h_min * 10, cfg_.h_max); }

    // Current controller suggestion, for carrying across repeated runs.
    double suggested_step() const { return h_; }

    // Replace the state in place (e.g. tangent renormalization) and refresh
    // the FSAL stage.
    void reset_state(double t, const Vec<N>& y) {
        t_ = t;
        y_ = y;
        k1_ = f_(t_, y_);
    }

  private:
    void stage(double h, Vec<N>& k2, Vec<N>& k3, Vec<N>& k4, Vec<N>& k5, Vec<N>& k6,
               Vec<N>& k7, Vec<N>& y1, Vec<N>& err) const {
        // Dormand-Prince coefficients
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                                a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                                a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                                a65 = -5103.0 / 18656;
        static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                                b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                                e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

        Vec<N> tmp;
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * a21 * k1_[i];
        k2 = f_(t_ + h / 5, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2[i]);
        k3 = f_(t_ + 3 * h / 10, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = f_(t_ + 4 * h / 5, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = f_(t_ + 8 * h / 9, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y_[i] +
                     h * (a61 * k1_[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        k6 = f_(t_ + h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            y1[i] = y_[i] +
                    h * (b1 * k1_[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        k7 = f_(t_ + h, y1);
        for (std::size_t i = 0; i < N; ++i)
            err[i] = h * (e1 * k1_[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                          e7 * k7[i]);
    }

    DenseStep<N> make_dense(double h, const Vec<N>& k2, const Vec<N>& k3, const Vec<N>& k4,
                            const Vec<N>& k5, const Vec<N>& k6, const Vec<N>& k7,
                            const Vec<N>& y1) const {
        (void)k2;
        // continuous-extension weights (order 4)
        static constexpr double d1 = -12715105075.0 / 11282082432.0,
                                d3 = 87487479700.0 / 32700410799.0,
                                d4 = -10690763975.0 / 1880347072.0,
                                d5 = 701980252875.0 / 199316789632.0,
                                d6 = -1453857185.0 / 822651844.0,
                                d7 = 69997945.0 / 29380423.0;
        DenseStep<N> d;
        d.t0 = t_;
        d.h = h;
        for (std::size_t i = 0; i < N; ++i) {
            const double dy = y1[i] - y_[i];
            const double bspl = h * k1_[i] - dy;
            d.rcont[0][i] = y_[i];
            d.rcont[1][i] = dy;
            d.rcont[2][i] = bspl;
            d.rcont[3][i] = dy - h * k7[i] - bspl;
            d.rcont[4][i] = h * (d1 * k1_[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                 d6 * k6[i] + d7 * k7[i]);
        }
        return d;
    }

    RHS f_;
    IntegratorConfig cfg_;
    double t_;
    Vec<N> y_;
    double h_;
    Vec<N> k1_;
};

// --- system-level drivers -------------------------------------------------

// Spatial right-hand side with theta supplied analytically.
struct SpatialRHS {
    const SystemParams* p;
    double theta0;

    Vec<3> operator()(double t, const Vec<3>& y) const {
        State4 s{y[0], y[1], y[2], theta0 + 2.0 * p->omega * t};
        const State4 d = eval_rhs(*p, s);
        return {d.x1, d.x2, d.x3};
    }
};

struct TrajectorySample {
    double t;
    State4 state;
};

// Stored trajectory with dense evaluation between samples.
class Trajectory {
  public:
    Trajectory(const SystemParams& p, const State4& s0) : theta0_(s0.theta), omega_(p.omega) {
        samples_.push_back({0.0, s0});
    }

    void append(const DenseStep<3>& step) {
        dense_.push_back(step);
        const Vec<3> y = step.eval(step.t0 + step.h);
        samples_.push_back({step.t0 + step.h, state_at_raw(step.t0 + step.h, y)});
    }

    const std::vector<TrajectorySample>& samples() const { return samples_; }

    double t_end() const { return samples_.back().t; }

    // Dense evaluation at any time in [0, t_end].
    State4 at(double t) const {
        if (t <= 0.0) return samples_.front().state;
        if (t >= t_end()) return samples_.back().state;
        // binary search for the covering step
        std::size_t lo = 0, hi = dense_.size();
        while (lo + 1 < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (dense_[mid].t0 <= t) lo = mid;
            else hi = mid;
        }
        return state_at_raw(t, dense_[lo].eval(t));
    }

  private:
    State4 state_at_raw(double t, const Vec<3>& y) const {
        return {y[0], y[1], y[2], wrap_angle(theta0_ + 2.0 * omega_ * t)};
    }

    double theta0_, omega_;
    std::vector<TrajectorySample> samples_;
    std::vector<DenseStep<3>> dense_;
};

// Integrate for t in [0, t_end], storing the full dense trajectory.
inline Trajectory integrate(const SystemParams& p, const State4& s0, double t_end,
                            const IntegratorConfig& cfg = {}) {
    if (!(t_end > 0)) throw std::invalid_argument("integrate: t_end must be > 0");
    p.validate();
    Trajectory traj(p, s0);
    SpatialRHS rhs{&p, s0.theta};
    Dopri5<3, SpatialRHS> stepper(rhs, cfg, 0.0, {s0.x1, s0.x2, s0.x3});
    std::size_t steps = 0;
    while (t_end - stepper.t() > 1e-15 * std::max(1.0, t_end)) {
        traj.append(stepper.step(t_end));
        if (++steps > cfg.max_steps) throw NonConvergence("integrate: exceeded max steps");
    }
    return traj;
}

// Low-memory endpoint integration (no trajectory storage).
inline State4 integrate_to(const SystemParams& p, const State4& s0, double t_end,
                           const IntegratorConfig& cfg = {}) {
    if (!(t_end > 0)) throw std::invalid_argument("integrate_to: t_end must be > 0");
    SpatialRHS rhs{&p, s0.theta};
    Dopri5<3, SpatialRHS> stepper(rhs, cfg, 0.0, {s0.x1, s0.x2, s0.x3});
    stepper.run(t_end);
    const Vec<3>& y = stepper.y();
    return {y[0], y[1], y[2], wrap_angle(s0.theta + 2.0 * p.omega * t_end)};
}

// Times at which theta(t) crosses theta_star (exact, since theta is linear
// in t), and the dense-output states there.
inline std::vector<TrajectorySample> cross_section_events(const Trajectory& traj,
                                                          const SystemParams& p,
                                                          double theta0, double theta_star) {
    std::vector<TrajectorySample> events;
    const double period = std::numbers::pi / p.omega;
    double t = wrap_angle(theta_star - theta0) / (2.0 * p.omega);
    if (t < 1e-15) t = 0.0;  // crossing at the initial instant counts
    for (; t <= traj.t_end() * (1 + 1e-15); t += period)
        events.push_back({t, traj.at(t)});
    return events;
}

} // namespace hetlab
