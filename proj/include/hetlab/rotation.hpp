#pragma once

// Rotation number of a strobe orbit lying on (or near) an invariant circle.
//
// Angular speed along the near-heteroclinic circles is wildly non-uniform
// (orbits stall near the saddles), so naive unwrapping of raw projection
// angles miscounts whole turns whenever one strobe step sweeps the fast arc.
// The estimator here uses only the circular *order* of the samples, which a
// homeomorphism cannot distort:
//
//   1. project to the (x1, x3) plane about the sample centroid and rank the
//      samples by angle; rank/N is a parametrization of the circle in which
//      the dynamics is conjugacy-close to a rigid rotation,
//   2. average the rank-space increments (weighted Birkhoff mean with the
//      bump weight w(t) = exp(-1/(t(1-t))) over the re-centred branch),
//   3. refine with the closest return: if iterate n* nearly revisits the
//      start, the accumulated winding W over those steps gives the rational
//      approximant W/n*, accurate to O(1/N^2) and exact on locked orbits.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "errors.hpp"
#include "math_util.hpp"

namespace hetlab {

struct RotationNumber {
    double value = 0;         // turns per iterate in [0, 1), +angle orientation
    double winding_rate = 0;  // same rotation as a signed short-way rate in (-1/2, 1/2]
    double error = 0;         // disagreement between the two estimators + return defect
};

namespace detail {

inline std::vector<double> rank_positions(const std::vector<Eigen::Vector3d>& orbit) {
    const std::size_t n = orbit.size();
    Eigen::Vector2d c(0, 0);
    for (const auto& x : orbit) c += Eigen::Vector2d(x[0], x[2]);
    c /= double(n);

    std::vector<double> angle(n);
    for (std::size_t k = 0; k < n; ++k)
        angle[k] = std::atan2(orbit[k][2] - c[1], orbit[k][0] - c[0]);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return angle[a] < angle[b]; });

    std::vector<double> u(n);
    for (std::size_t pos = 0; pos < n; ++pos) u[order[pos]] = double(pos) / double(n);
    return u;
}

inline double wrap_unit(double x) {  // to (-1/2, 1/2]
    const double y = x - std::floor(x);
    return y > 0.5 ? y - 1.0 : y;
}

} // namespace detail

inline RotationNumber rotation_number(const std::vector<Eigen::Vector3d>& orbit) {
    const std::size_t n = orbit.size();
    if (n < 64) throw std::invalid_argument("rotation_number: need at least 64 samples");

    // collapsed orbit (fixed point of the strobe map): zero turns by convention
    Eigen::Vector3d c(0, 0, 0);
    for (const auto& x : orbit) c += x;
    c /= double(n);
    double spread = 0;
    for (const auto& x : orbit) spread = std::max(spread, (x - c).norm());
    if (spread < 1e-7) return RotationNumber{0.0, 0.0, spread};

    const std::vector<double> u = detail::rank_positions(orbit);

    // raw increments in rank space, each in [0, 1)
    std::vector<double> g(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        double d = u[k + 1] - u[k];
        g[k] = d - std::floor(d);
    }
    std::vector<double> tmp = g;
    std::nth_element(tmp.begin(), tmp.begin() + tmp.size() / 2, tmp.end());
    const double rho0 = tmp[tmp.size() / 2];

    // weighted Birkhoff mean of the increments, taken on the branch nearest
    // the median so near-0 (or near-1/2) rotations do not straddle a cut
    auto weighted_mean = [&](std::size_t m) {
        double ws = 0, acc = 0;
        for (std::size_t k = 0; k + 1 < m; ++k) {
            const double t = double(k + 1) / double(m);
            const double w = std::exp(-1.0 / (t * (1.0 - t)));
            acc += w * (rho0 + detail::wrap_unit(g[k] - rho0));
            ws += w;
        }
        return acc / ws;
    };
    const double rho_mean = weighted_mean(n);
    const double rho_half = weighted_mean(n / 2);

    // lifted rank-space trajectory; L_k tracks accumulated winding exactly
    // because the branch-corrected increments telescope
    std::vector<double> lift(n);
    lift[0] = 0;
    for (std::size_t k = 0; k + 1 < n; ++k)
        lift[k + 1] = lift[k] + rho0 + detail::wrap_unit(g[k] - rho0);

    // closest return to the starting rank over the second half of the orbit
    std::size_t nstar = n / 2;
    double dstar = 1.0;
    for (std::size_t k = n / 2; k < n; ++k) {
        const double d = std::fabs(detail::wrap_unit(u[k] - u[0]));
        if (d < dstar) { dstar = d; nstar = k; }
    }
    const double winding = std::round(lift[nstar] - detail::wrap_unit(u[nstar] - u[0]));
    const double rho_ret = winding / double(nstar);

    RotationNumber r;
    r.value = rho_ret - std::floor(rho_ret);
    r.winding_rate = detail::wrap_unit(rho_ret);
    r.error = std::fabs(detail::wrap_unit(rho_ret - rho_mean)) +
              std::fabs(detail::wrap_unit(rho_mean - rho_half)) + dstar / double(nstar);
    return r;
}

} // namespace hetlab
