#pragma once

// The vector field under study: a rotationally forced flow on R^3 x S^1,
//
//   x1' = x1 (1-r^2) - a x1 x3 + b x1 x3^2 + (1-x1) (mu (f(theta)-1) + nu)
//   x2' = x2 (1-r^2) + a x2 x3 + b x2 x3^2
//   x3' = x3 (1-r^2) - a (x2^2 - x1^2) - b x3 (x1^2 + x2^2)
//   theta' = 2 omega                                 r^2 = x1^2+x2^2+x3^2
//
// with b < 0 < a and |b| < a.  At nu = mu = 0 the unit sphere is invariant
// and carries a heteroclinic network between the poles (0,0,+-1); nu tilts
// the connections, mu adds the time-periodic forcing through f.
//
// The plane {x2 = 0} is invariant for all parameter values, and the field
// commutes with the reflection kappa:(x1,x2,x3) -> (x1,-x2,x3).

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "config.hpp"
#include "forcing.hpp"

namespace hetlab {

struct State4 {
    double x1 = 0, x2 = 0, x3 = 0, theta = 0;

    double r2() const { return x1 * x1 + x2 * x2 + x3 * x3; }
    double norm() const { return std::sqrt(r2()); }
};

inline State4 kappa(const State4& s) { return {s.x1, -s.x2, s.x3, s.theta}; }

struct SystemParams {
    double alpha = 1.0;
    double beta = -0.1;
    double nu = 0.0;
    double mu = 0.0;
    double omega = 1.0;
    ForcingProfile forcing = ForcingProfile::cosine();

    void validate() const {
        if (!(beta < 0.0 && 0.0 < alpha))
            throw std::invalid_argument("system params: need beta < 0 < alpha");
        if (!(std::fabs(beta) < alpha))
            throw std::invalid_argument("system params: need |beta| < alpha");
        if (!(omega > 0.0))
            throw std::invalid_argument("system params: need omega > 0");
        if (mu != 0.0 && forcing.is_constant())
            throw std::invalid_argument("system params: forcing profile must be non-constant");
    }

    // Saddle rates of the poles at nu = mu = 0: contraction c = alpha - beta,
    // expansion e = alpha + beta (both positive under the constraints above).
    double rate_c() const { return alpha - beta; }
    double rate_e() const { return alpha + beta; }

    // --- plain-text round trip (see configs/example.cfg) ------------------
    void to_config(Config& cfg) const {
        cfg.set("system", "alpha", alpha);
        cfg.set("system", "beta", beta);
        cfg.set("system", "nu", nu);
        cfg.set("system", "mu", mu);
        cfg.set("system", "omega", omega);
        cfg.set("system", "forcing_mean", forcing.mean);
        std::string cc, sc;
        for (std::size_t k = 0; k < forcing.cos_coeffs.size(); ++k)
            cc += (k ? " " : "") + format_double(forcing.cos_coeffs[k]);
        for (std::size_t k = 0; k < forcing.sin_coeffs.size(); ++k)
            sc += (k ? " " : "") + format_double(forcing.sin_coeffs[k]);
        cfg.set("system", "forcing_cos", cc.empty() ? "0" : cc);
        cfg.set("system", "forcing_sin", sc.empty() ? "0" : sc);
    }

    static SystemParams from_config(const Config& cfg) {
        SystemParams p;
        p.alpha = cfg.get_double("system", "alpha", p.alpha);
        p.beta = cfg.get_double("system", "beta", p.beta);
        p.nu = cfg.get_double("system", "nu", p.nu);
        p.mu = cfg.get_double("system", "mu", p.mu);
        p.omega = cfg.get_double("system", "omega", p.omega);
        p.forcing.mean = cfg.get_double("system", "forcing_mean", 0.0);
        if (cfg.has("system", "forcing_cos"))
            p.forcing.cos_coeffs = parse_series(cfg.get_str("system", "forcing_cos"));
        if (cfg.has("system", "forcing_sin"))
            p.forcing.sin_coeffs = parse_series(cfg.get_str("system", "forcing_sin"));
        p.validate();
        return p;
    }

  private:
    static std::vector<double> parse_series(const std::string& text) {
        std::vector<double> out;
        const char* s = text.c_str();
        char* end = nullptr;
        for (double v = std::strtod(s, &end); end != s; v = std::strtod(s, &end)) {
            out.push_back(v);
            s = end;
        }
        while (!out.empty() && out.back() == 0.0) out.pop_back();
        return out;
    }
};

// Right-hand side of the full 4d field.
inline State4 eval_rhs(const SystemParams& p, const State4& s) {
    const double r2 = s.r2();
    const double radial = 1.0 - r2;
    const double drive = p.mu * (p.forcing.eval(s.theta) - 1.0) + p.nu;
    State4 d;
    d.x1 = s.x1 * radial - p.alpha * s.x1 * s.x3 + p.beta * s.x1 * s.x3 * s.x3 +
           (1.0 - s.x1) * drive;
    d.x2 = s.x2 * radial + p.alpha * s.x2 * s.x3 + p.beta * s.x2 * s.x3 * s.x3;
    d.x3 = s.x3 * radial - p.alpha * (s.x2 * s.x2 - s.x1 * s.x1) -
           p.beta * s.x3 * (s.x1 * s.x1 + s.x2 * s.x2);
    d.theta = 2.0 * p.omega;
    return d;
}

using Jacobian4 = std::array<std::array<double, 4>, 4>;

// Analytic Jacobian, rows/cols ordered (x1, x2, x3, theta).  The theta row
// is identically zero; the theta column only feeds x1 through the forcing.
inline Jacobian4 eval_jacobian(const SystemParams& p, const State4& s) {
    const double x1 = s.x1, x2 = s.x2, x3 = s.x3;
    const double r2 = s.r2();
    const double radial = 1.0 - r2;
    const double drive = p.mu * (p.forcing.eval(s.theta) - 1.0) + p.nu;
    Jacobian4 J{};

    J[0][0] = radial - 2.0 * x1 * x1 - p.alpha * x3 + p.beta * x3 * x3 - drive;
    J[0][1] = -2.0 * x1 * x2;
    J[0][2] = -2.0 * x1 * x3 - p.alpha * x1 + 2.0 * p.beta * x1 * x3;
    J[0][3] = (1.0 - x1) * p.mu * p.forcing.deriv(s.theta);

    J[1][0] = -2.0 * x1 * x2;
    J[1][1] = radial - 2.0 * x2 * x2 + p.alpha * x3 + p.beta * x3 * x3;
    J[1][2] = -2.0 * x2 * x3 + p.alpha * x2 + 2.0 * p.beta * x2 * x3;
    J[1][3] = 0.0;

    J[2][0] = -2.0 * x1 * x3 + 2.0 * p.alpha * x1 - 2.0 * p.beta * x1 * x3;
    J[2][1] = -2.0 * x2 * x3 - 2.0 * p.alpha * x2 - 2.0 * p.beta * x2 * x3;
    J[2][2] = radial - 2.0 * x3 * x3 - p.beta * (x1 * x1 + x2 * x2);
    J[2][3] = 0.0;

    J[3][0] = J[3][1] = J[3][2] = J[3][3] = 0.0;
    return J;
}

// Restriction of the autonomous (mu = 0) field to the invariant plane
// {x2 = 0}, in the factored form used by the planar phase-portrait study:
//   F1 = x1 [ (1-x1^2-x3^2) - a x3 + b x3^2 - nu ] + nu
//   F3 = x3 (1-x1^2-x3^2) + a x1^2 - b x3 x1^2
// A test pins this against eval_rhs on the plane.
inline std::array<double, 2> eval_planar_rhs(const SystemParams& p, double x1, double x3) {
    const double rr = x1 * x1 + x3 * x3;
    const double f1 = x1 * ((1.0 - rr) - p.alpha * x3 + p.beta * x3 * x3 - p.nu) + p.nu;
    const double f3 = x3 * (1.0 - rr) + p.alpha * x1 * x1 - p.beta * x3 * x1 * x1;
    return {f1, f3};
}

// --- reflection equivariance check ---------------------------------------

struct EquivarianceReport {
    double max_residual = 0.0;
    State4 worst_point;
    bool pass = false;
};

// Verifies kappa . F = F . kappa on a deterministic sample cloud with radii
// in [lo, hi].  The residual should sit at rounding level for all (nu, mu).
inline EquivarianceReport check_kappa_equivariance(const SystemParams& p, int n_points = 1000,
                                                   double lo = 0.5, double hi = 1.5,
                                                   double tol = 1e-12,
                                                   std::uint64_t seed = 12345) {
    EquivarianceReport rep;
    std::uint64_t state = seed ? seed : 1;
    auto next_unit = [&state]() {  // xorshift*; deterministic across platforms
        state ^= state >> 12;
        state ^= state << 25;
        state ^= state >> 27;
        return double((state * 0x2545F4914F6CDD1DULL) >> 11) * 0x1.0p-53;
    };
    for (int i = 0; i < n_points; ++i) {
        State4 s;
        // direction from a cube sample, pushed to a radius in [lo, hi]
        double ux = 2 * next_unit() - 1, uy = 2 * next_unit() - 1, uz = 2 * next_unit() - 1;
        const double n = std::sqrt(ux * ux + uy * uy + uz * uz) + 1e-12;
        const double r = lo + (hi - lo) * next_unit();
        s.x1 = r * ux / n;
        s.x2 = r * uy / n;
        s.x3 = r * uz / n;
        s.theta = two_pi * next_unit();

        const State4 a = eval_rhs(p, kappa(s));
        const State4 b = kappa(eval_rhs(p, s));
        const double res = std::max({std::fabs(a.x1 - b.x1), std::fabs(a.x2 - b.x2),
                                     std::fabs(a.x3 - b.x3), std::fabs(a.theta - b.theta)});
        if (res > rep.max_residual) {
            rep.max_residual = res;
            rep.worst_point = s;
        }
    }
    rep.pass = rep.max_residual < tol;
    return rep;
}

} // namespace hetlab
