#ifndef NODAL_ROOTFIND_HPP
#define NODAL_ROOTFIND_HPP

#include <cmath>
#include <functional>
#include <stdexcept>

namespace nodal {

/// Brent's method on a sign-changing bracket [a, b].
template <typename F>
double brent(F&& f, double a, double b, double xtol = 1e-14, int maxit = 200) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw std::invalid_argument("brent: endpoints do not bracket a root");
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < maxit; ++it) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * xtol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double s = fb / fa, p, q;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                double qq = fa / fc, r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d; d = p / q;
            } else {
                d = xm; e = d;
            }
        } else {
            d = xm; e = d;
        }
        a = b; fa = fb;
        b += (std::abs(d) > tol1) ? d : std::copysign(tol1, xm);
        fb = f(b);
        if ((fb > 0) == (fc > 0)) { c = a; fc = fa; d = b - a; e = d; }
    }
    return b;
}

/// Newton iteration safeguarded by a bracket; falls back to bisection steps.
/// Requires f(lo) and f(hi) of opposite (or zero) sign.
template <typename F, typename DF>
double newton_bracketed(F&& f, DF&& df, double x0, double lo, double hi,
                        double xtol = 1e-14, int maxit = 60) {
    double flo = f(lo);
    if (flo == 0.0) return lo;
    const bool increasing = flo < 0.0;
    double x = std::min(std::max(x0, lo), hi);
    for (int it = 0; it < maxit; ++it) {
        double fx = f(x);
        if (fx == 0.0) return x;
        if ((fx > 0) == increasing) hi = x; else lo = x;
        double d = df(x);
        double xn = (d != 0.0) ? x - fx / d : 0.5 * (lo + hi);
        if (!(xn >= lo) || !(xn <= hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= xtol * (1.0 + std::abs(xn))) return xn;
        x = xn;
    }
    return x;
}

} // namespace nodal

#endif
