#pragma once

// Lyapunov spectrum of the spatial dynamics under the drive, by tangent-flow
// QR renormalization.  The 3x3 tangent matrix rides along in the variational
// system; after every renormalization interval it is re-orthonormalized with
// modified Gram-Schmidt and the log column norms accumulate into the
// exponents.  Standard errors come from block averaging of the per-interval
// log increments, so "chaotic" can be a significance test instead of a bare
// threshold.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <vector>

#include "section_map.hpp"

namespace hetlab {

struct LyapunovResult {
    std::array<double, 3> exponents{};   // descending
    std::array<double, 3> std_errors{};  // block-averaged standard error
    double t_total = 0;
    int n_renorm = 0;
    bool chaotic = false;  // lambda_1 clears both the noise floor and 3 sigma
};

namespace detail {

// MGS factorization in place: columns of M become orthonormal Q, returns
// the diagonal of R (column norms after projection).
inline std::array<double, 3> mgs(Eigen::Matrix3d& M) {
    std::array<double, 3> r{};
    for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < j; ++k) {
            const double proj = M.col(k).dot(M.col(j));
            M.col(j) -= proj * M.col(k);
        }
        r[j] = M.col(j).norm();
        if (r[j] < 1e-300) r[j] = 1e-300;  // keep logs finite on degenerate tangents
        M.col(j) /= r[j];
    }
    return r;
}

} // namespace detail

inline LyapunovResult lyapunov_spectrum(const SystemParams& p, const State4& s0,
                                        double t_transient, double t_total,
                                        IntegratorConfig cfg = {}, int n_blocks = 20) {
    p.validate();
    if (!(t_total > 0)) throw std::invalid_argument("lyapunov_spectrum: t_total must be > 0");

    // renormalize once per strobe period, subdividing long periods
    const double strobe = std::numbers::pi / p.omega;
    const int sub = std::max(1, int(std::ceil(strobe / 5.0)));
    const double tau = strobe / sub;
    const int n_intervals = std::max(n_blocks, int(std::ceil(t_total / tau)));

    State4 s = s0;
    if (t_transient > 0) s = integrate_to(p, s0, t_transient, cfg);

    Vec<12> y{};
    y[0] = s.x1, y[1] = s.x2, y[2] = s.x3;
    y[3] = y[7] = y[11] = 1.0;
    VariationalRHS rhs{&p, s.theta};
    Dopri5<12, VariationalRHS> st(rhs, cfg, 0.0, y);

    std::vector<std::array<double, 3>> logs;
    logs.reserve(n_intervals);
    for (int i = 0; i < n_intervals; ++i) {
        st.run((i + 1) * tau);
        Vec<12> z = st.y();
        Eigen::Matrix3d M;
        for (int col = 0; col < 3; ++col)
            for (int row = 0; row < 3; ++row) M(row, col) = z[3 + 3 * col + row];
        const auto r = detail::mgs(M);
        logs.push_back({std::log(r[0]), std::log(r[1]), std::log(r[2])});
        for (int col = 0; col < 3; ++col)
            for (int row = 0; row < 3; ++row) z[3 + 3 * col + row] = M(row, col);
        st.reset_state(st.t(), z);
    }

    LyapunovResult res;
    res.t_total = n_intervals * tau;
    res.n_renorm = n_intervals;

    std::array<double, 3> sum{};
    for (const auto& l : logs)
        for (int i = 0; i < 3; ++i) sum[i] += l[i];
    for (int i = 0; i < 3; ++i) res.exponents[i] = sum[i] / res.t_total;

    // block averaging for the standard errors
    const int per_block = std::max(1, int(logs.size()) / n_blocks);
    const int used_blocks = int(logs.size()) / per_block;
    for (int i = 0; i < 3; ++i) {
        double mean = 0, var = 0;
        std::vector<double> rates(used_blocks);
        for (int b = 0; b < used_blocks; ++b) {
            double acc = 0;
            for (int k = b * per_block; k < (b + 1) * per_block; ++k) acc += logs[k][i];
            rates[b] = acc / (per_block * tau);
            mean += rates[b];
        }
        mean /= used_blocks;
        for (int b = 0; b < used_blocks; ++b) var += (rates[b] - mean) * (rates[b] - mean);
        var /= std::max(1, used_blocks - 1);
        res.std_errors[i] = std::sqrt(var / used_blocks);
    }

    res.chaotic = res.exponents[0] > std::max(3.0 * res.std_errors[0], 1e-3);
    return res;
}

} // namespace hetlab
