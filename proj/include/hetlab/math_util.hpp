#pragma once

// Small numeric helpers: angle reduction, scalar-generic elementary
// functions (the annulus maps are templated so the shadowing code can run
// them in __float128), and locale-proof float formatting.

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <string>

extern "C" {
#include <quadmath.h>
}

namespace hetlab {

inline constexpr const char* version_string = "0.1.0";

inline constexpr double two_pi = 6.283185307179586476925286766559;

// --- scalar-generic elementary functions -------------------------------
// std:: overloads cover double/long double; __float128 goes through libquadmath.

template <class T> inline T m_log(T x) { return std::log(x); }
template <class T> inline T m_exp(T x) { return std::exp(x); }
template <class T> inline T m_pow(T x, T y) { return std::pow(x, y); }
template <class T> inline T m_cos(T x) { return std::cos(x); }
template <class T> inline T m_sin(T x) { return std::sin(x); }
template <class T> inline T m_abs(T x) { return std::fabs(x); }
template <class T> inline T m_floor(T x) { return std::floor(x); }

template <> inline __float128 m_log(__float128 x) { return logq(x); }
template <> inline __float128 m_exp(__float128 x) { return expq(x); }
template <> inline __float128 m_pow(__float128 x, __float128 y) { return powq(x, y); }
template <> inline __float128 m_cos(__float128 x) { return cosq(x); }
template <> inline __float128 m_sin(__float128 x) { return sinq(x); }
template <> inline __float128 m_abs(__float128 x) { return fabsq(x); }
template <> inline __float128 m_floor(__float128 x) { return floorq(x); }

// Reduce an angle to [0, 2*pi).
template <class T>
inline T wrap_angle(T phi) {
    const T tp = T(2) * T(3.14159265358979323846264338327950288L);
    T w = phi - tp * m_floor(phi / tp);
    if (w < T(0)) w += tp;   // guard against rounding at the seam
    if (w >= tp) w -= tp;
    return w;
}

// Distance between two angles on the circle, in [0, pi].
inline double angle_distance(double a, double b) {
    double d = wrap_angle(a - b);
    return std::min(d, two_pi - d);
}

// --- deterministic formatting -------------------------------------------
// %.17g round-trips a double exactly and snprintf with the C locale is
// byte-stable, which the CSV/SVG writers rely on.

inline std::string format_double(double v, int significant = 17) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", significant, v);
    return buf;
}

// FNV-1a, used for config hashes in run manifests.
inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace hetlab
