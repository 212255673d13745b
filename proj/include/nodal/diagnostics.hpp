#ifndef NODAL_DIAGNOSTICS_HPP
#define NODAL_DIAGNOSTICS_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "nodal/integrator.hpp"
#include "nodal/rootfind.hpp"
#include "nodal/shooter.hpp"

namespace nodal {

/// Numeric certificate of the rotation bound -theta' > omega - c0 g(v, v')
/// on the energy band [c1/2, c1] for r >= r_bar, with every constant computed
/// from its defining formula.
struct RotationCertificate {
    double c1 = 0.0;
    double rho1 = 0.0, rho2 = 0.0;
    double A = 0.0, omega = 0.0, c0 = 0.0, r_bar = 0.0;
    double C2_used = 0.0;     // grid-estimated sup of r q'/q
    double F_bar = 0.0;       // sup of -F
    struct BandSample {
        double r, lhs, rhs;   // lhs = -theta', rhs = omega - c0 g
    };
    std::vector<BandSample> samples;
    bool band_visited = false;
    bool pass = false;
    double worst_margin = 0.0;  // min over samples of lhs - rhs
};

namespace detail {

/// Right inverse of F on [beta+, s_max] (F increasing there).
inline double f_inverse_right(const Nonlinearity& nl, double y, double s_max) {
    return brent([&](double s) { return nl.F(s) - y; }, nl.beta_plus, s_max, 1e-13);
}
/// Left inverse of F on [-s_max, beta-].
inline double f_inverse_left(const Nonlinearity& nl, double y, double s_max) {
    return brent([&](double s) { return nl.F(s) - y; }, -s_max, nl.beta_minus, 1e-13);
}

/// sup of -F over the well (grid scan plus golden-section polish).
inline double f_bar(const Nonlinearity& nl) {
    double best = 0.0, at = 0.0;
    for (double s : linspace(nl.beta_minus, nl.beta_plus, 2001)) {
        double v = -nl.F(s);
        if (v > best) { best = v; at = s; }
    }
    const double gr = 0.6180339887498949;
    double a = at - 0.01 * (nl.beta_plus - nl.beta_minus);
    double b = at + 0.01 * (nl.beta_plus - nl.beta_minus);
    for (int i = 0; i < 60; ++i) {
        double c = b - gr * (b - a), d = a + gr * (b - a);
        if (-nl.F(c) > -nl.F(d)) b = d; else a = c;
    }
    return std::max(best, -nl.F(0.5 * (a + b)));
}

/// inf of s f(s) over [lo, hi] by grid scan.
inline double inf_sf(const Nonlinearity& nl, double lo, double hi) {
    double best = 1e300;
    for (double s : linspace(lo, hi, 4001)) best = std::min(best, s * nl.f(s));
    return best;
}

} // namespace detail

/// Build the rotation certificate for one trajectory at band level c1.
inline RotationCertificate rotation_certificate(const Problem& prob, const Trajectory& traj,
                                                double c1) {
    const auto& nl = prob.nonlin;
    const auto& pe = prob.pe;
    if (!(c1 > 0.0)) throw std::invalid_argument("rotation_certificate: need c1 > 0");
    double F_lam = nl.F(traj.lambda);
    if (!(c1 < F_lam))
        throw std::invalid_argument("rotation_certificate: need c1 < F(lambda)");

    RotationCertificate cert;
    cert.c1 = c1;
    cert.F_bar = detail::f_bar(nl);

    const double s_cap = std::max(10.0 * std::abs(traj.lambda), 10.0);
    double fr4 = detail::f_inverse_right(nl, 0.25 * c1, s_cap);
    double fl4 = detail::f_inverse_left(nl, 0.25 * c1, s_cap);
    cert.rho1 = std::min({0.25 * pe.p * c1, std::pow(fr4, pe.p), std::pow(std::abs(fl4), pe.p)});
    double fr1 = detail::f_inverse_right(nl, c1, s_cap);
    double fl1 = detail::f_inverse_left(nl, c1, s_cap);
    cert.rho2 = std::max(std::pow(fr1, pe.p), std::pow(std::abs(fl1), pe.p)) +
                pe.p * (c1 + cert.F_bar);

    const double reach = std::pow(cert.rho2, 1.0 / pe.p);
    double A_right = detail::inf_sf(nl, nl.beta_plus, reach);
    double A_left = detail::inf_sf(nl, -reach, nl.beta_minus);
    cert.A = std::min(A_right, A_left);

    cert.omega = std::min(cert.A / (2.0 * cert.rho2), pe.p * c1 / (4.0 * cert.rho2));
    cert.c0 = std::pow(2.0 / (pe.pconj * c1), 1.0 / pe.p) / cert.rho1;

    // C2 from the sampled grid (recorded: may exceed the true sup is impossible,
    // may undershoot it; the certificate states which value was used)
    double C2 = 0.0;
    for (double r : geomspace(prob.grids.r_min, prob.grids.r_max, 400))
        C2 = std::max(C2, r * prob.weight.dq(r) / prob.weight.q(r));
    cert.C2_used = C2;
    cert.r_bar = std::max(2.0 * C2 * cert.rho2 / (pe.p * cert.A),
                          4.0 * C2 * cert.rho2 / (pe.p * pe.p * c1));

    for (const auto& s : traj.samples) {
        if (!(s.E >= 0.5 * c1 && s.E <= c1)) continue;
        if (!(s.r >= cert.r_bar)) continue;
        double vprime = phi_pconj(s.w, pe);
        double g = (s.v >= nl.beta_minus && s.v <= nl.beta_plus)
                       ? std::abs(s.v * nl.f(s.v) * vprime)
                       : 0.0;
        cert.samples.push_back({s.r, -s.dtheta, cert.omega - cert.c0 * g});
    }
    cert.band_visited = !cert.samples.empty();
    if (cert.band_visited) {
        double worst = 1e300;
        for (const auto& bs : cert.samples) worst = std::min(worst, bs.lhs - bs.rhs);
        cert.worst_margin = worst;
        cert.pass = worst > -1e-12;
    }
    return cert;
}

/// Normalized RMS residual of the weighted dissipation identity
///   d/dr (Q E + mu q v phi_p(v')) =
///       q |v'|^p (mu + (Q/q)' - 1/p) + q (F(v) - mu v f(v));
/// left side by central differences of the composite on a uniform resampling,
/// right side pointwise.
inline double dissipation_residual(const Problem& prob, const Trajectory& traj, double mu,
                                   int n_samples = 1 << 18) {
    if (!(mu >= 0.0)) throw std::invalid_argument("dissipation_residual: need mu >= 0");
    const auto& pe = prob.pe;
    const double r_lo = traj.samples[traj.main_start_index].r;
    const double r_hi = traj.r_end();
    if (!(r_hi > r_lo)) return 0.0;
    const double h = (r_hi - r_lo) / (n_samples + 1);

    auto composite = [&](double r) {
        auto s = traj.eval(r);
        return prob.weight.Q(r) * energy(prob, s.v, s.w) + mu * prob.weight.q(r) * s.v * s.w;
    };
    double num = 0.0, den = 0.0;
    for (int i = 1; i <= n_samples; ++i) {
        double r = r_lo + i * h;
        double lhs = (composite(r + h) - composite(r - h)) / (2.0 * h);
        auto s = traj.eval(r);
        double q = prob.weight.q(r);
        double rhs = q * std::pow(std::abs(s.w), pe.pconj) *
                         (mu + prob.weight.Qq_prime(r) - 1.0 / pe.p) +
                     q * (prob.nonlin.F(s.v) - mu * s.v * prob.nonlin.f(s.v));
        double d = lhs - rhs;
        num += d * d;
        den += rhs * rhs;
    }
    return (den > 0.0) ? std::sqrt(num / den) : std::sqrt(num / n_samples);
}

/// Normalized RMS residual of H' = h' (F o v) with H = h E, h = q^{p'}.
inline double h_identity_residual(const Problem& prob, const Trajectory& traj,
                                  int n_samples = 1 << 18) {
    const double r_lo = traj.samples[traj.main_start_index].r;
    const double r_hi = traj.r_end();
    if (!(r_hi > r_lo)) return 0.0;
    const double h = (r_hi - r_lo) / (n_samples + 1);

    auto Hfun = [&](double r) {
        auto s = traj.eval(r);
        return prob.weight.h(r) * energy(prob, s.v, s.w);
    };
    double num = 0.0, den = 0.0;
    for (int i = 1; i <= n_samples; ++i) {
        double r = r_lo + i * h;
        double lhs = (Hfun(r + h) - Hfun(r - h)) / (2.0 * h);
        auto s = traj.eval(r);
        double rhs = prob.weight.dh(r) * prob.nonlin.F(s.v);
        double d = lhs - rhs;
        num += d * d;
        den += rhs * rhs;
    }
    return (den > 0.0) ? std::sqrt(num / den) : std::sqrt(num / n_samples);
}

/// First crossing radii r_lambda(a) = inf{r : E(r) = a} for each level;
/// levels never attained are absent from the map.
inline std::map<double, double> level_crossings(const Problem& prob, const Trajectory& traj,
                                                const std::vector<double>& levels) {
    std::map<double, double> out;
    auto E_at = [&](double r) {
        auto s = traj.eval(r);
        return energy(prob, s.v, s.w);
    };
    for (double a : levels) {
        double found = -1.0;
        for (size_t i = traj.main_start_index; i + 1 < traj.samples.size(); ++i) {
            double e0 = traj.samples[i].E, e1 = traj.samples[i + 1].E;
            if ((e0 - a) == 0.0) { found = traj.samples[i].r; break; }
            if ((e0 - a) * (e1 - a) < 0.0) {
                found = brent([&](double r) { return E_at(r) - a; },
                              traj.samples[i].r, traj.samples[i + 1].r, 1e-12);
                break;
            }
        }
        if (found >= 0.0) out[a] = found;
    }
    return out;
}

/// Critical-layer probe (p = 2, q = r^{d-1}, critical-extended f): for each
/// lambda locate R with E(R) = sqrt(F(lambda)). A decreasing R(lambda) trend
/// is the numerical signature of the critical energy layer.
struct LayerProbeEntry {
    double lambda;
    std::optional<double> R;
};

inline std::vector<LayerProbeEntry> probe_energy_layer(const Problem& prob,
                                                       const std::vector<double>& lambdas,
                                                       const SolveOptions& opts) {
    std::vector<LayerProbeEntry> out;
    for (double lam : lambdas) {
        Trajectory traj = solve(prob, lam, opts);
        double level = std::sqrt(prob.nonlin.F(lam));
        auto hits = level_crossings(prob, traj, {level});
        LayerProbeEntry e{lam, std::nullopt};
        if (!hits.empty()) e.R = hits.begin()->second;
        out.push_back(e);
    }
    return out;
}

inline std::vector<LayerProbeEntry> critical_layer_probe(int d,
                                                         const std::vector<double>& lambdas,
                                                         double beta = 1.0,
                                                         SolveOptions opts = {}) {
    PExponent pe = PExponent::of(2.0);
    Problem prob = make_problem(pe, make_power_weight(static_cast<double>(d), pe),
                                make_critical_extended(d, beta));
    return probe_energy_layer(prob, lambdas, opts);
}

} // namespace nodal

#endif
