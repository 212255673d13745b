#ifndef NODAL_PROBLEM_HPP
#define NODAL_PROBLEM_HPP

#include <cmath>
#include <optional>
#include <stdexcept>

#include "nodal/nonlinearity.hpp"
#include "nodal/ptrig.hpp"
#include "nodal/weight.hpp"

namespace nodal {

/// Grid extents used by hypothesis checkers and default solver ranges.
struct Grids {
    double r_min = 1e-6;
    double r_max = 100.0;
    double s_max = 1e30;
};

/// Estimate of the effective dimension N from 1/N = liminf_{r->0+} (Q/q)'(r).
struct EffectiveDimension {
    double n_eff;
    double mu_star;
    bool converged;
    double oscillation;  // spread of the extrapolated tail
};

/// Evaluate (Q/q)' on the geometric grid r0 * 2^{-j} and extrapolate the tail
/// (Aitken delta-squared, which handles non-integer convergence rates); the
/// liminf estimate is the minimum over the extrapolated tail.
inline EffectiveDimension effective_dimension(const Weight& w, const PExponent& pe,
                                              double r0 = 0.1, int jmax = 40) {
    std::vector<double> g(jmax + 1);
    for (int j = 0; j <= jmax; ++j) g[j] = w.Qq_prime(r0 * std::pow(2.0, -j));

    std::vector<double> extrap;
    const int tail = 12;
    for (int j = jmax - tail; j + 2 <= jmax; ++j) {
        double d1 = g[j + 1] - g[j], d2 = g[j + 2] - g[j + 1];
        double den = d2 - d1;
        if (std::abs(den) > 1e-14 * (1.0 + std::abs(g[j + 2])) && std::abs(d2) < std::abs(d1))
            extrap.push_back(g[j + 2] - d2 * d2 / den);
        else
            extrap.push_back(g[j + 2]);
    }
    double lim = extrap[0], lo = extrap[0], hi = extrap[0];
    for (double v : extrap) {
        lim = std::min(lim, v);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    EffectiveDimension ed;
    ed.oscillation = hi - lo;
    ed.converged = ed.oscillation <= 1e-3;
    double invN = std::max(lim, 1e-12);
    ed.n_eff = 1.0 / invN;
    ed.mu_star = std::max(1.0 / pe.p - invN, 0.0);
    return ed;
}

/// The assembled initial-value problem: exponent, weight, nonlinearity and
/// the derived effective dimension / critical threshold mu*.
struct Problem {
    PExponent pe;
    Weight weight;
    Nonlinearity nonlin;
    Grids grids;
    double n_eff = 0.0;
    double mu_star = 0.0;
    bool n_eff_converged = true;

    double pstar() const {
        return (n_eff > pe.p) ? n_eff * pe.p / (n_eff - pe.p)
                              : std::numeric_limits<double>::infinity();
    }
};

inline Problem make_problem(const PExponent& pe, Weight weight, Nonlinearity nonlin,
                            Grids grids = {}) {
    Problem prob;
    prob.pe = pe;
    prob.weight = std::move(weight);
    prob.nonlin = std::move(nonlin);
    prob.grids = grids;
    if (prob.weight.kind == "power-law" && std::isfinite(prob.weight.power_N)) {
        prob.n_eff = prob.weight.power_N;
        prob.mu_star = std::max(1.0 / pe.p - 1.0 / prob.n_eff, 0.0);
    } else {
        EffectiveDimension ed = effective_dimension(prob.weight, pe);
        prob.n_eff = ed.n_eff;
        prob.mu_star = ed.mu_star;
        prob.n_eff_converged = ed.converged;
    }
    if (!(prob.n_eff > 1.0))
        throw std::invalid_argument("make_problem: effective dimension must exceed 1 (got " +
                                    fmt17(prob.n_eff) + ")");
    if (prob.mu_star > 1.0 / pe.p + 1e-12)
        throw std::logic_error("make_problem: mu* exceeded 1/p");
    return prob;
}

} // namespace nodal

#endif
