// Independent oracles used by the test suites. Everything here deliberately
// avoids the library's own integration/inversion paths: plain trapezoid
// cumulative quadrature, bisection inversion, and a fixed-step classical RK4.
#ifndef NODAL_TESTS_ORACLES_HPP
#define NODAL_TESTS_ORACLES_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "nodal/problem.hpp"

namespace oracles {

/// Reduced weight by brute force: cumulative trapezoid chi on a fine uniform
/// grid plus bisection inversion, then q = a^{1/p} b^{1/p'} at the preimage.
struct ReducedWeightOracle {
    std::function<double(double)> a, b;
    double p;
    double r_hi;
    int n;
    std::vector<double> chi;  // chi[i] at r_i = i*h
    double h;

    ReducedWeightOracle(std::function<double(double)> a_, std::function<double(double)> b_,
                        double p_, double r_hi_ = 8.0, int n_ = 4'000'000)
        : a(std::move(a_)), b(std::move(b_)), p(p_), r_hi(r_hi_), n(n_) {
        chi.assign(n + 1, 0.0);
        h = r_hi / n;
        double prev = std::pow(b(1e-12) / a(1e-12), 1.0 / p);  // r -> 0 limit
        for (int i = 1; i <= n; ++i) {
            double r = i * h;
            double cur = std::pow(b(r) / a(r), 1.0 / p);
            chi[i] = chi[i - 1] + 0.5 * (prev + cur) * h;
            prev = cur;
        }
    }

    double chi_of(double r) const {
        int i = static_cast<int>(r / h);
        double frac = r / h - i;
        return chi[i] + frac * (chi[i + 1] - chi[i]);
    }

    /// bisection inverse of chi
    double r_of(double t) const {
        double lo = 0.0, hi = r_hi;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            if (chi_of(mid) < t) lo = mid; else hi = mid;
        }
        return 0.5 * (lo + hi);
    }

    double q_of(double t) const {
        double r = r_of(t);
        double pc = p / (p - 1.0);
        return std::pow(a(r), 1.0 / p) * std::pow(b(r), 1.0 / pc);
    }
};

/// Fixed-step classical RK4 reference for the radial flow, sharing only the
/// problem's q'/q and f definitions.
struct Rk4Result {
    std::vector<double> nodes;
    std::string terminal;  // "settled" | "double_zero" | "rmax"
    double v_end = 0, w_end = 0, r_end = 0, E_end = 0;
};

inline Rk4Result rk4_reference(const nodal::Problem& prob, double lambda, double r_max,
                               double dr = 1e-4, double settle_tol = 1e-8,
                               double dz_tol = 1e-10) {
    const auto& pe = prob.pe;
    const auto& f = prob.nonlin.f;
    auto rhs = [&](double r, double v, double w, double& dv, double& dw) {
        dv = nodal::phi_pconj(w, pe);
        dw = -prob.weight.dlogq(r) * w - f(v);
    };
    double r = 1e-6;
    double v = lambda;
    double w = -prob.weight.Q(r) / prob.weight.q(r) * f(lambda);
    Rk4Result out;
    auto energy = [&](double vv, double ww) {
        return std::pow(std::abs(ww), pe.pconj) / pe.pconj + prob.nonlin.F(vv);
    };
    long steps = static_cast<long>((r_max - r) / dr);
    for (long i = 0; i < steps; ++i) {
        double k1v, k1w, k2v, k2w, k3v, k3w, k4v, k4w;
        rhs(r, v, w, k1v, k1w);
        rhs(r + dr / 2, v + dr / 2 * k1v, w + dr / 2 * k1w, k2v, k2w);
        rhs(r + dr / 2, v + dr / 2 * k2v, w + dr / 2 * k2w, k3v, k3w);
        rhs(r + dr, v + dr * k3v, w + dr * k3w, k4v, k4w);
        double vn = v + dr / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
        double wn = w + dr / 6 * (k1w + 2 * k2w + 2 * k3w + k4w);
        double rn = r + dr;
        if (v != 0.0 && v * vn < 0.0) out.nodes.push_back(r + dr * v / (v - vn));
        v = vn; w = wn; r = rn;
        double E = energy(v, w);
        double rho = nodal::p_polar_rho(v, w, pe);
        if (rho < dz_tol && std::abs(E) < dz_tol) {
            out.terminal = "double_zero";
            out.v_end = v; out.w_end = w; out.r_end = r; out.E_end = E;
            return out;
        }
        if (E < -settle_tol) {
            out.terminal = "settled";
            out.v_end = v; out.w_end = w; out.r_end = r; out.E_end = E;
            return out;
        }
    }
    out.terminal = "rmax";
    out.v_end = v; out.w_end = w; out.r_end = r; out.E_end = energy(v, w);
    return out;
}

} // namespace oracles

#endif
