#pragma once

// Offset profile xi(phi): the height at which the incoming connection
// crosses the entry wall of the lower block, as a function of arrival phase.
//
//   xi(phi) = nu * (1 + (mu/(1+mu)) * g(phi)),     default shape g = cos
//
// nu > 0 lifts the profile off zero (the connection is broken), mu shapes
// the phase dependence; mu/(1+mu) < 1 keeps xi positive whenever |g| <= 1.
// g is a truncated Fourier shape so the profile is automatically smooth and
// 2*pi-periodic.  Everything is templated on the scalar so the shadowing
// code can evaluate it in __float128.

#include <algorithm>
#include <vector>

#include "errors.hpp"
#include "math_util.hpp"

namespace hetlab {

struct AngleWindow {
    double phi_left = 0, phi_right = 0;
    double width() const { return phi_right - phi_left; }
};

struct XiProfile {
    double nu = 0.0;
    double mu = 0.0;
    std::vector<double> shape_cos = {1.0};  // shape_cos[k-1] * cos(k phi)
    std::vector<double> shape_sin = {};     // shape_sin[k-1] * sin(k phi)

    template <class T>
    T shape(T phi) const {
        T v = T(0);
        for (std::size_t k = 0; k < shape_cos.size(); ++k)
            v += T(shape_cos[k]) * m_cos(T(k + 1) * phi);
        for (std::size_t k = 0; k < shape_sin.size(); ++k)
            v += T(shape_sin[k]) * m_sin(T(k + 1) * phi);
        return v;
    }

    template <class T>
    T shape_deriv(T phi) const {
        T v = T(0);
        for (std::size_t k = 0; k < shape_cos.size(); ++k)
            v -= T(k + 1) * T(shape_cos[k]) * m_sin(T(k + 1) * phi);
        for (std::size_t k = 0; k < shape_sin.size(); ++k)
            v += T(k + 1) * T(shape_sin[k]) * m_cos(T(k + 1) * phi);
        return v;
    }

    template <class T>
    T eval(T phi) const {
        return T(nu) * (T(1) + T(mu) / (T(1) + T(mu)) * shape(phi));
    }

    template <class T>
    T deriv(T phi) const {
        return T(nu) * (T(mu) / (T(1) + T(mu))) * shape_deriv(phi);
    }

    bool is_constant() const {
        if (nu == 0.0 || mu == 0.0) return true;
        for (double c : shape_cos) if (c != 0.0) return false;
        for (double c : shape_sin) if (c != 0.0) return false;
        return true;
    }

    // Extremes by dense sampling (head count 10^4) plus local refinement.
    double max_value(int n = 10000) const { return extreme(n, +1); }
    double min_value(int n = 10000) const { return extreme(n, -1); }

    // Largest monotone-decreasing arc (by total drop), endpoints refined to
    // the critical points.  Throws NoWindow when the profile is constant.
    AngleWindow decreasing_arc(int n = 4096) const {
        if (is_constant()) throw NoWindow("xi profile is constant: no decreasing arc");
        // locate sign runs of xi' on a periodic grid
        std::vector<double> d(n);
        for (int i = 0; i < n; ++i) d[i] = deriv(two_pi * i / n);
        const double dphi = two_pi / n;
        double best_drop = 0;
        AngleWindow best;
        for (int i = 0; i < n; ++i) {
            if (!(d[i] < 0) || d[(i + n - 1) % n] < 0) continue;  // arc starts here
            int j = i;
            while (d[(j + 1) % n] < 0 && j - i < 2 * n) ++j;
            // the entry zero of xi' lies in cell [i-1, i], the exit zero in [j, j+1]
            const double a = falling_zero(dphi * (i - 1), dphi * i);
            const double b = rising_zero(dphi * j, dphi * (j + 1));
            const double drop = eval(a) - eval(b);
            if (drop > best_drop) {
                best_drop = drop;
                best = {a, b};
            }
        }
        if (best_drop <= 0) throw NoWindow("xi profile has no decreasing arc");
        return best;
    }

  private:
    double extreme(int n, int sign) const {
        double best = sign > 0 ? -1e300 : 1e300;
        double arg = 0;
        for (int i = 0; i < n; ++i) {
            const double phi = two_pi * i / n;
            const double v = eval(phi);
            if (sign > 0 ? v > best : v < best) { best = v, arg = phi; }
        }
        // golden-section polish around the grid winner
        double a = arg - two_pi / n, b = arg + two_pi / n;
        const double gr = 0.6180339887498949;
        double c = b - gr * (b - a), dd = a + gr * (b - a);
        for (int it = 0; it < 80; ++it) {
            const double fc = sign * eval(c), fd = sign * eval(dd);
            if (fc > fd) { b = dd; } else { a = c; }
            c = b - gr * (b - a);
            dd = a + gr * (b - a);
        }
        const double polished = eval(0.5 * (a + b));
        return sign > 0 ? std::max(best, polished) : std::min(best, polished);
    }

    // bisection for the zero of xi' where it turns negative (xi' >= 0 at a)
    double falling_zero(double a, double b) const {
        for (int it = 0; it < 100; ++it) {
            const double m = 0.5 * (a + b);
            if (deriv(m) >= 0) a = m;
            else b = m;
        }
        return 0.5 * (a + b);
    }

    // and where it turns non-negative again (xi' < 0 at a)
    double rising_zero(double a, double b) const {
        for (int it = 0; it < 100; ++it) {
            const double m = 0.5 * (a + b);
            if (deriv(m) < 0) a = m;
            else b = m;
        }
        return 0.5 * (a + b);
    }
};

} // namespace hetlab
