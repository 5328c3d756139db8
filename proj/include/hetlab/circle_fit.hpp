#pragma once

// Truncated-Fourier fit of an invariant circle from strobe samples.  Samples
// are parameterized by their centroid-relative (x1, x3) angle (the same
// convention the rotation number uses); each spatial component is fitted as
//   y(phi) = a0 + sum_{m=1..M} a_m cos(m phi) + b_m sin(m phi)
// by ridge-regularized least squares.  The fit is accepted when the samples
// cover the circle without large gaps and the curve passes through them to
// within max_residual_tol.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "math_util.hpp"
#include "system.hpp"

namespace hetlab {

struct CircleFit {
    int n_modes = 0;
    Eigen::Vector2d center{0, 0};                 // (x1, x3) projection centroid
    std::array<std::vector<double>, 3> coef{};    // per component: a0, a1, b1, a2, b2, ...
    double max_residual = 0;                      // worst 3d distance sample -> curve
    double max_gap = 0;                           // largest angular gap of the samples
    std::size_t n_samples = 0;
    bool ok = false;
};

inline Eigen::Vector3d circle_eval(const CircleFit& fit, double phi) {
    Eigen::Vector3d out;
    for (int c = 0; c < 3; ++c) {
        const auto& a = fit.coef[c];
        double v = a[0];
        for (int m = 1; m <= fit.n_modes; ++m)
            v += a[2 * m - 1] * std::cos(m * phi) + a[2 * m] * std::sin(m * phi);
        out[c] = v;
    }
    return out;
}

inline CircleFit fit_invariant_circle(const std::vector<Eigen::Vector3d>& pts, int n_modes = 32,
                                      double max_residual_tol = 1e-4, double max_gap_tol = two_pi / 16) {
    CircleFit fit;
    fit.n_modes = n_modes;
    fit.n_samples = pts.size();
    if (pts.size() < std::size_t(4 * n_modes)) return fit;  // hopelessly underdetermined

    Eigen::Vector2d c(0, 0);
    for (const auto& x : pts) c += Eigen::Vector2d(x[0], x[2]);
    c /= double(pts.size());
    fit.center = c;

    std::vector<double> phi(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k)
        phi[k] = std::atan2(pts[k][2] - c[1], pts[k][0] - c[0]);

    // coverage: largest gap between sorted sample angles (incl. wraparound)
    std::vector<double> sorted = phi;
    std::sort(sorted.begin(), sorted.end());
    fit.max_gap = sorted.front() + two_pi - sorted.back();
    for (std::size_t k = 0; k + 1 < sorted.size(); ++k)
        fit.max_gap = std::max(fit.max_gap, sorted[k + 1] - sorted[k]);

    const int ncol = 2 * n_modes + 1;
    Eigen::MatrixXd A(pts.size(), ncol);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        A(k, 0) = 1.0;
        for (int m = 1; m <= n_modes; ++m) {
            A(k, 2 * m - 1) = std::cos(m * phi[k]);
            A(k, 2 * m) = std::sin(m * phi[k]);
        }
    }
    // normal equations with a tiny ridge keep near-duplicate angles harmless
    const Eigen::MatrixXd G =
        A.transpose() * A + 1e-10 * Eigen::MatrixXd::Identity(ncol, ncol);
    const Eigen::LLT<Eigen::MatrixXd> llt(G);
    for (int comp = 0; comp < 3; ++comp) {
        Eigen::VectorXd b(pts.size());
        for (std::size_t k = 0; k < pts.size(); ++k) b[k] = pts[k][comp];
        const Eigen::VectorXd x = llt.solve(A.transpose() * b);
        fit.coef[comp].assign(x.data(), x.data() + ncol);
    }

    for (std::size_t k = 0; k < pts.size(); ++k)
        fit.max_residual = std::max(fit.max_residual, (circle_eval(fit, phi[k]) - pts[k]).norm());

    fit.ok = pts.size() >= 100 && fit.max_gap <= max_gap_tol &&
             fit.max_residual < max_residual_tol;
    return fit;
}

// Reflection image of a fitted circle: kappa flips x2 and (in the projection
// convention) preserves the sample angle, so the coefficients just flip sign
// in the x2 component.
inline CircleFit kappa_image(const CircleFit& fit) {
    CircleFit out = fit;
    for (double& v : out.coef[1]) v = -v;
    return out;
}

// Hausdorff-style one-sided distance between two fitted circles, by dense
// sampling: max over phi of min distance from curve a to curve b.
inline double circle_distance(const CircleFit& a, const CircleFit& b, int n = 512) {
    std::vector<Eigen::Vector3d> pb(n);
    for (int j = 0; j < n; ++j) pb[j] = circle_eval(b, two_pi * j / n);
    double worst = 0;
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector3d pa = circle_eval(a, two_pi * i / n);
        double best = 1e300;
        for (int j = 0; j < n; ++j) best = std::min(best, (pa - pb[j]).squaredNorm());
        worst = std::max(worst, best);
    }
    return std::sqrt(worst);
}

} // namespace hetlab
