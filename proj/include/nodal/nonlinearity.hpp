#ifndef NODAL_NONLINEARITY_HPP
#define NODAL_NONLINEARITY_HPP

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "nodal/common.hpp"
#include "nodal/ptrig.hpp"
#include "nodal/quadrature.hpp"

namespace nodal {

/// A nonlinearity f with primitive F and the potential-well zeros F(beta_pm)=0.
struct Nonlinearity {
    std::string kind;  // "double-power" | "power" | "power-log" | "critical-extended" | "user"
    std::function<double(double)> f;
    std::function<double(double)> F;
    double beta_minus = 0.0;
    double beta_plus = 0.0;
    /// false when f is only Holder continuous at s = 0 (double-power with m < 1);
    /// the integrator then aligns v = 0 crossings with step boundaries.
    bool lipschitz_at_zero = true;
    /// set when the family satisfies (f2) by construction
    bool has_well = true;
    /// diagnostic flags recorded at construction
    std::vector<std::string> warnings;
};

/// f(s) = |s|^{gamma-1} s - |s|^{m-1} s, the canonical sign-changing family.
/// beta_pm = +-((gamma+1)/(m+1))^{1/(gamma-m)} in closed form.
inline Nonlinearity make_double_power(double gamma, double m) {
    if (!(gamma > m && m > 0))
        throw std::invalid_argument("make_double_power: need gamma > m > 0");
    Nonlinearity nl;
    nl.kind = "double-power";
    nl.f = [gamma, m](double s) {
        if (s == 0.0) return 0.0;
        return signed_pow(s, gamma) - signed_pow(s, m);
    };
    nl.F = [gamma, m](double s) {
        double a = std::abs(s);
        return std::pow(a, gamma + 1.0) / (gamma + 1.0) - std::pow(a, m + 1.0) / (m + 1.0);
    };
    nl.beta_plus = std::pow((gamma + 1.0) / (m + 1.0), 1.0 / (gamma - m));
    nl.beta_minus = -nl.beta_plus;
    nl.lipschitz_at_zero = (m >= 1.0);
    return nl;
}

/// Pure power f(s) = |s|^{gamma-1} s. F >= 0 everywhere, so (f2) fails;
/// used for oracle problems and sub-criticality probes.
inline Nonlinearity make_power(double gamma) {
    if (!(gamma > 0)) throw std::invalid_argument("make_power: need gamma > 0");
    Nonlinearity nl;
    nl.kind = "power";
    nl.f = [gamma](double s) { return signed_pow(s, gamma); };
    nl.F = [gamma](double s) { return std::pow(std::abs(s), gamma + 1.0) / (gamma + 1.0); };
    nl.beta_plus = 0.0;
    nl.beta_minus = 0.0;
    nl.has_well = false;
    nl.lipschitz_at_zero = (gamma >= 1.0);
    return nl;
}

namespace detail {

/// Solve the 3x3 linear system for the odd cubic fill
/// f(s) = c0 s + c1 s^2 + c2 s^3 on [0, cut] with
///   f(cut) = fval, f'(cut) = fslope, F(cut/2) = 0.
inline std::array<double, 3> cubic_fill_coeffs(double cut, double fval, double fslope) {
    const double bt = 0.5 * cut;
    double A[3][4] = {
        {cut, cut * cut, cut * cut * cut, fval},
        {1.0, 2.0 * cut, 3.0 * cut * cut, fslope},
        {bt * bt / 2.0, bt * bt * bt / 3.0, bt * bt * bt * bt / 4.0, 0.0}};
    // Gaussian elimination with partial pivoting
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int rw = col + 1; rw < 3; ++rw)
            if (std::abs(A[rw][col]) > std::abs(A[piv][col])) piv = rw;
        std::swap(A[piv], A[col]);
        for (int rw = col + 1; rw < 3; ++rw) {
            double fct = A[rw][col] / A[col][col];
            for (int cc = col; cc < 4; ++cc) A[rw][cc] -= fct * A[col][cc];
        }
    }
    std::array<double, 3> c{};
    for (int rw = 2; rw >= 0; --rw) {
        double s = A[rw][3];
        for (int cc = rw + 1; cc < 3; ++cc) s -= A[rw][cc] * c[cc];
        c[rw] = s / A[rw][rw];
    }
    return c;
}

inline void validate_fill(const Nonlinearity& nl, double cut) {
    const double bp = nl.beta_plus;
    for (double s : linspace(1e-4 * bp, bp * (1.0 - 1e-9), 512))
        if (!(nl.F(s) < 0.0))
            throw std::logic_error("nonlinearity fill: F is not negative on (0, beta+)");
    for (double s : linspace(bp, cut, 512))
        if (!(nl.f(s) > 0.0))
            throw std::logic_error("nonlinearity fill: f is not positive on [beta+, cut]");
}

} // namespace detail

/// Odd f equal to |s|^{2*-2} s for |s| >= beta (2* = 2d/(d-2)), joined below
/// beta by the C^1 cubic fill with F(beta/2) = 0, so that (f1)-(f2) hold with
/// beta_pm = +-beta/2. Intended for p = 2.
inline Nonlinearity make_critical_extended(int d, double beta) {
    if (d < 3) throw std::invalid_argument("make_critical_extended: need d >= 3");
    if (!(beta > 0)) throw std::invalid_argument("make_critical_extended: need beta > 0");
    const double tstar = 2.0 * d / (d - 2.0);
    auto c = detail::cubic_fill_coeffs(beta, std::pow(beta, tstar - 1.0),
                                       (tstar - 1.0) * std::pow(beta, tstar - 2.0));
    const double c0 = c[0], c1 = c[1], c2 = c[2];
    auto Ffill = [c0, c1, c2](double a) {
        return c0 * a * a / 2.0 + c1 * a * a * a / 3.0 + c2 * a * a * a * a / 4.0;
    };
    const double Fbeta = Ffill(beta);
    Nonlinearity nl;
    nl.kind = "critical-extended";
    nl.f = [beta, tstar, c0, c1, c2](double s) {
        double a = std::abs(s);
        if (a >= beta) return signed_pow(s, tstar - 1.0);
        return s * (c0 + c1 * a + c2 * a * a);
    };
    nl.F = [beta, tstar, Ffill, Fbeta](double s) {
        double a = std::abs(s);
        if (a >= beta) return Fbeta + (std::pow(a, tstar) - std::pow(beta, tstar)) / tstar;
        return Ffill(a);
    };
    nl.beta_plus = 0.5 * beta;
    nl.beta_minus = -0.5 * beta;
    detail::validate_fill(nl, beta);
    return nl;
}

/// f(s) = |s|^{p*-2} s / (log|s|)^zeta for |s| >= s0, p* = dp/(d-p),
/// with a sub-well fill below s0; F is a cached quadrature table above s0.
inline Nonlinearity make_power_log(int d, const PExponent& pe, double zeta, double s0,
                                   double table_s_max = 1e46) {
    if (!(pe.p < d)) throw std::invalid_argument("make_power_log: need p < d");
    const double pstar = d * pe.p / (d - pe.p);
    Nonlinearity nl;
    nl.kind = "power-log";
    if (!(zeta > pe.p / (d - pe.p)))
        nl.warnings.push_back("zeta <= p/(d-p): the (SC) certificate of this family fails");
    if (!(s0 > 2.0 * std::exp(1.0)))
        throw std::invalid_argument("make_power_log: need s0 > 2e");

    auto fpow = [pstar, zeta](double a) {
        return std::pow(a, pstar - 1.0) / std::pow(std::log(a), zeta);
    };
    // fill g(u) = u(u - u0)/(1 - u0) on [0,1]: g(1) = 1, single interior zero
    // at u0, F-zero at 1.5*u0 < 1/2 so that s0 > 2 beta+ holds.
    const double u0 = 0.3;
    const double fs0 = fpow(s0);
    nl.f = [s0, fs0, u0, fpow](double s) {
        double a = std::abs(s);
        if (a >= s0) return std::copysign(fpow(a), s);
        double u = a / s0;
        return std::copysign(fs0 * u * (u - u0) / (1.0 - u0), s);
    };
    auto Gfill = [u0](double u) { return (u * u * u / 3.0 - u0 * u * u / 2.0) / (1.0 - u0); };
    const double F_s0 = fs0 * s0 * Gfill(1.0);

    // cumulative table of int_{s0}^{s} fpow on a geometric grid
    auto grid = std::make_shared<std::vector<double>>(
        geomspace(s0, table_s_max, static_cast<int>(160 * std::log10(table_s_max / s0)) + 2));
    auto cum = std::make_shared<std::vector<double>>(grid->size(), 0.0);
    for (size_t i = 1; i < grid->size(); ++i)
        (*cum)[i] = (*cum)[i - 1] + gauss16(fpow, (*grid)[i - 1], (*grid)[i]);

    nl.F = [s0, fs0, u0, F_s0, Gfill, grid, cum, fpow](double s) {
        double a = std::abs(s);
        if (a < s0) return fs0 * s0 * Gfill(a / s0);
        if (a > grid->back())
            throw std::domain_error("power-log F: argument beyond cached table range");
        size_t lo = 0, hi = grid->size() - 1;
        while (hi - lo > 1) {
            size_t m = (lo + hi) / 2;
            if ((*grid)[m] <= a) lo = m; else hi = m;
        }
        return F_s0 + (*cum)[lo] + gauss16(fpow, (*grid)[lo], a);
    };
    nl.beta_plus = 1.5 * u0 * s0;
    nl.beta_minus = -nl.beta_plus;
    detail::validate_fill(nl, s0);
    return nl;
}

/// Tabulated user nonlinearity: piecewise-linear odd f through (s_i, f_i),
/// s_i > 0 increasing; F by exact integration of the interpolant.
inline Nonlinearity make_table_nonlinearity(std::vector<double> s, std::vector<double> fv) {
    if (s.size() != fv.size() || s.size() < 3)
        throw std::invalid_argument("table nonlinearity: need >= 3 matching samples");
    for (size_t i = 0; i + 1 < s.size(); ++i)
        if (!(s[i] > 0) || !(s[i + 1] > s[i]))
            throw std::invalid_argument("table nonlinearity: s must be positive increasing");
    auto sp = std::make_shared<std::vector<double>>(std::move(s));
    auto fp = std::make_shared<std::vector<double>>(std::move(fv));
    auto eval = [sp, fp](double a) {  // a >= 0
        const auto& ss = *sp; const auto& ff = *fp;
        if (a <= ss.front()) return ff.front() * a / ss.front();
        if (a >= ss.back()) return ff.back();
        size_t lo = 0, hi = ss.size() - 1;
        while (hi - lo > 1) { size_t m = (lo + hi) / 2; if (ss[m] <= a) lo = m; else hi = m; }
        double t = (a - ss[lo]) / (ss[lo + 1] - ss[lo]);
        return ff[lo] + t * (ff[lo + 1] - ff[lo]);
    };
    auto cums = std::make_shared<std::vector<double>>(sp->size(), 0.0);
    {
        const auto& ss = *sp; const auto& ff = *fp;
        (*cums)[0] = 0.5 * ff[0] * ss[0];
        for (size_t i = 1; i < ss.size(); ++i)
            (*cums)[i] = (*cums)[i - 1] + 0.5 * (ff[i] + ff[i - 1]) * (ss[i] - ss[i - 1]);
    }
    Nonlinearity nl;
    nl.kind = "user";
    nl.f = [eval](double sarg) { return std::copysign(eval(std::abs(sarg)), sarg); };
    nl.F = [sp, fp, cums, eval](double sarg) {
        double a = std::abs(sarg);
        const auto& ss = *sp;
        if (a <= ss.front()) return 0.5 * eval(a) * a;
        if (a >= ss.back()) return (*cums)[ss.size() - 1] + fp->back() * (a - ss.back());
        size_t lo = 0, hi = ss.size() - 1;
        while (hi - lo > 1) { size_t m = (lo + hi) / 2; if (ss[m] <= a) lo = m; else hi = m; }
        return (*cums)[lo] + 0.5 * (eval(a) + (*fp)[lo]) * (a - ss[lo]);
    };
    // locate beta_plus: first positive zero of F beyond the initial well
    const auto& ss = *sp;
    double bp = 0.0;
    for (double a : geomspace(ss.front(), ss.back(), 4096)) {
        if (nl.F(a) >= 0.0 && a > ss.front()) { bp = a; break; }
    }
    nl.beta_plus = bp;
    nl.beta_minus = -bp;
    nl.has_well = bp > 0.0;
    return nl;
}

/// Asymptotic growth classifier gamma = lim s f(s)/F(s) - 1, with one
/// Richardson step in 1/log s to absorb the slowly-decaying corrections of
/// logarithmic families.
inline double growth_gamma(const Nonlinearity& nl, double s1 = 1e8, double s2 = 1e16) {
    auto g = [&nl](double s) { return s * nl.f(s) / nl.F(s) - 1.0; };
    double g1 = g(s1), g2 = g(s2);
    return 2.0 * g2 - g1;
}

} // namespace nodal

#endif
