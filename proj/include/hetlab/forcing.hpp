#pragma once

// Periodic forcing profile f(theta): a truncated Fourier series
//   f(theta) = mean + sum_k a_k cos(k theta) + b_k sin(k theta).
// Finite series are automatically 2*pi-periodic and smooth; the only real
// constraint is non-constancy, which callers can check with is_constant().

#include <cmath>
#include <string>
#include <vector>

namespace hetlab {

struct ForcingProfile {
    double mean = 0.0;
    std::vector<double> cos_coeffs;  // cos_coeffs[k-1] multiplies cos(k theta)
    std::vector<double> sin_coeffs;  // sin_coeffs[k-1] multiplies sin(k theta)

    // The default profile used throughout: f(theta) = cos(theta).
    static ForcingProfile cosine() {
        ForcingProfile f;
        f.cos_coeffs = {1.0};
        return f;
    }

    double eval(double theta) const {
        double v = mean;
        for (std::size_t k = 0; k < cos_coeffs.size(); ++k)
            v += cos_coeffs[k] * std::cos(double(k + 1) * theta);
        for (std::size_t k = 0; k < sin_coeffs.size(); ++k)
            v += sin_coeffs[k] * std::sin(double(k + 1) * theta);
        return v;
    }

    double deriv(double theta) const {
        double v = 0.0;
        for (std::size_t k = 0; k < cos_coeffs.size(); ++k) {
            const double kk = double(k + 1);
            v -= kk * cos_coeffs[k] * std::sin(kk * theta);
        }
        for (std::size_t k = 0; k < sin_coeffs.size(); ++k) {
            const double kk = double(k + 1);
            v += kk * sin_coeffs[k] * std::cos(kk * theta);
        }
        return v;
    }

    bool is_constant() const {
        for (double c : cos_coeffs) if (c != 0.0) return false;
        for (double c : sin_coeffs) if (c != 0.0) return false;
        return true;
    }
};

} // namespace hetlab
