#ifndef NODAL_COMMON_HPP
#define NODAL_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace nodal {

inline constexpr const char* version_string = "nodal 0.1.0";

/// Signed power map phi_p(s) = |s|^{p-2} s with phi_p(0) = 0.
inline double signed_pow(double s, double exponent_minus_one) {
    if (s == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(s), exponent_minus_one), s);
}

inline bool is_finite(double x) { return std::isfinite(x); }

/// Format a double with 17 significant digits (lossless round-trip).
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

/// FNV-1a 64-bit content hash, used for config digests and output manifests.
inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string fnv1a64_hex(const std::string& data) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

/// Geometric sequence from lo to hi with n points (inclusive endpoints).
inline std::vector<double> geomspace(double lo, double hi, int n) {
    if (!(lo > 0) || !(hi > 0) || n < 2)
        throw std::invalid_argument("geomspace: need lo, hi > 0 and n >= 2");
    std::vector<double> out(n);
    const double step = std::log(hi / lo) / (n - 1);
    for (int i = 0; i < n; ++i) out[i] = lo * std::exp(step * i);
    out.front() = lo;
    out.back() = hi;
    return out;
}

inline std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
    return out;
}

} // namespace nodal

#endif
