#pragma once

// Equilibria of the autonomous spatial field (mu = 0): Newton from a fixed
// seed set, eigenvalues of the 3x3 spatial Jacobian, and the saddle rates
// (c, e) of the poles that feed the annulus return-map model.
//
// At nu = 0 the exact inventory is: the origin (source), the poles
// (0,0,+-1) (saddles), and four repelling foci at (+-s, +-s, 0), s = sqrt(2)/2.

#include <algorithm>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "system.hpp"

namespace hetlab {

enum class StabilityClass { saddle, source, sink, focus };

inline const char* to_string(StabilityClass c) {
    switch (c) {
        case StabilityClass::saddle: return "saddle";
        case StabilityClass::source: return "source";
        case StabilityClass::sink: return "sink";
        case StabilityClass::focus: return "focus";
    }
    return "?";
}

struct Equilibrium {
    double x1 = 0, x2 = 0, x3 = 0;
    std::array<std::complex<double>, 3> eigenvalues{};
    StabilityClass stability = StabilityClass::saddle;
    double residual = 0.0;
};

namespace detail {

inline Eigen::Vector3d spatial_rhs(const SystemParams& p, const Eigen::Vector3d& x) {
    SystemParams q = p;
    q.mu = 0.0;
    const State4 d = eval_rhs(q, {x[0], x[1], x[2], 0.0});
    return {d.x1, d.x2, d.x3};
}

inline Eigen::Matrix3d spatial_jacobian(const SystemParams& p, const Eigen::Vector3d& x) {
    SystemParams q = p;
    q.mu = 0.0;
    const Jacobian4 J = eval_jacobian(q, {x[0], x[1], x[2], 0.0});
    Eigen::Matrix3d A;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) A(i, j) = J[i][j];
    return A;
}

} // namespace detail

// Newton iteration on the spatial field.  Returns true on convergence.
inline bool newton_equilibrium(const SystemParams& p, Eigen::Vector3d& x,
                               double tol = 1e-13, int max_iter = 50) {
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::Vector3d f = detail::spatial_rhs(p, x);
        if (f.norm() < tol) return true;
        const Eigen::Matrix3d J = detail::spatial_jacobian(p, x);
        const Eigen::Vector3d dx = J.fullPivLu().solve(f);
        x -= dx;
        if (!x.allFinite() || x.norm() > 10.0) return false;
    }
    return detail::spatial_rhs(p, x).norm() < tol;
}

inline StabilityClass classify_eigenvalues(const std::array<std::complex<double>, 3>& ev) {
    bool has_complex = false;
    int n_pos = 0, n_neg = 0;
    for (const auto& l : ev) {
        if (std::fabs(l.imag()) > 1e-9 * (1.0 + std::abs(l))) has_complex = true;
        if (l.real() > 0) ++n_pos;
        else ++n_neg;
    }
    if (has_complex) return StabilityClass::focus;
    if (n_pos == 3) return StabilityClass::source;
    if (n_neg == 3) return StabilityClass::sink;
    return StabilityClass::saddle;
}

// Find all equilibria reachable from the canonical seeds (poles, origin,
// foci) plus a coarse in-plane grid, de-duplicated by distance.
inline std::vector<Equilibrium> find_equilibria(const SystemParams& p, double tol = 1e-12) {
    const double s = std::sqrt(0.5);
    std::vector<Eigen::Vector3d> seeds = {
        {0, 0, 1}, {0, 0, -1}, {0, 0, 0}, {s, s, 0}, {s, -s, 0}, {-s, s, 0}, {-s, -s, 0},
    };
    // coarse grid in the invariant plane picks up continuations that drift
    for (double x1 = -1.2; x1 <= 1.2; x1 += 0.4)
        for (double x3 = -1.2; x3 <= 1.2; x3 += 0.4) seeds.push_back({x1, 0.0, x3});

    std::vector<Equilibrium> found;
    int converged_any = 0;
    for (auto seed : seeds) {
        Eigen::Vector3d x = seed;
        if (!newton_equilibrium(p, x, tol)) continue;
        ++converged_any;
        const double res = detail::spatial_rhs(p, x).norm();
        bool dup = false;
        for (const auto& e : found)
            if ((x - Eigen::Vector3d(e.x1, e.x2, e.x3)).norm() < 1e-7) { dup = true; break; }
        if (dup) continue;

        Equilibrium e;
        e.x1 = x[0], e.x2 = x[1], e.x3 = x[2];
        e.residual = res;
        const Eigen::Matrix3d A = detail::spatial_jacobian(p, x);
        const Eigen::EigenSolver<Eigen::Matrix3d> es(A);
        for (int i = 0; i < 3; ++i) e.eigenvalues[i] = es.eigenvalues()[i];
        std::sort(e.eigenvalues.begin(), e.eigenvalues.end(),
                  [](const auto& a, const auto& b) {
                      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
                  });
        e.stability = classify_eigenvalues(e.eigenvalues);
        found.push_back(e);
    }
    if (found.empty())
        throw NonConvergence("find_equilibria: no Newton seed converged (" +
                             std::to_string(seeds.size()) + " seeds tried)");
    std::sort(found.begin(), found.end(), [](const Equilibrium& a, const Equilibrium& b) {
        if (a.x3 != b.x3) return a.x3 > b.x3;
        if (a.x1 != b.x1) return a.x1 < b.x1;
        return a.x2 < b.x2;
    });
    return found;
}

// Saddle rates at an equilibrium on (or near) the unit sphere: the radial
// eigendirection is the one most parallel to the position vector; of the two
// tangential eigenvalues one must be positive (expansion e) and one negative
// (contraction c, returned positive).
struct NodeRates {
    double c = 0, e = 0;
};

inline NodeRates node_rates(const SystemParams& p, const Equilibrium& eq) {
    const Eigen::Vector3d pos(eq.x1, eq.x2, eq.x3);
    if (pos.norm() < 0.5)
        throw NotASaddle("node_rates: equilibrium is not near the sphere");
    const Eigen::Matrix3d A = detail::spatial_jacobian(p, pos);
    const Eigen::EigenSolver<Eigen::Matrix3d> es(A);

    // all three eigenvalues must be real for the radial/tangential split
    for (int i = 0; i < 3; ++i)
        if (std::fabs(es.eigenvalues()[i].imag()) > 1e-8)
            throw NotASaddle("node_rates: complex eigenvalues");

    const Eigen::Vector3d dir = pos.normalized();
    int radial = 0;
    double best = -1.0;
    for (int i = 0; i < 3; ++i) {
        const Eigen::Vector3d v = es.eigenvectors().col(i).real().normalized();
        const double align = std::fabs(v.dot(dir));
        if (align > best) { best = align, radial = i; }
    }
    NodeRates r;
    bool have_c = false, have_e = false;
    for (int i = 0; i < 3; ++i) {
        if (i == radial) continue;
        const double l = es.eigenvalues()[i].real();
        if (l > 0) { r.e = l; have_e = true; }
        else       { r.c = -l; have_c = true; }
    }
    if (!have_c || !have_e)
        throw NotASaddle("node_rates: tangential eigenvalues not of opposite sign");
    return r;
}

// Convenience: rates at both poles for the current parameters.
struct NetworkRates {
    NodeRates v;  // pole (0,0,+1): contracting in-plane, expanding transverse
    NodeRates w;  // pole (0,0,-1): expanding in-plane, contracting transverse
};

inline NetworkRates network_node_rates(const SystemParams& p) {
    const auto eqs = find_equilibria(p);
    const Equilibrium* top = nullptr;
    const Equilibrium* bottom = nullptr;
    for (const auto& e : eqs) {
        if (std::hypot(e.x1, e.x2) < 0.3 && e.x3 > 0.5) top = &e;
        if (std::hypot(e.x1, e.x2) < 0.3 && e.x3 < -0.5) bottom = &e;
    }
    if (!top || !bottom)
        throw NotFound("network_node_rates: pole saddles not found at these parameters");
    return {node_rates(p, *top), node_rates(p, *bottom)};
}

} // namespace hetlab
