#ifndef NODAL_INTEGRATOR_HPP
#define NODAL_INTEGRATOR_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "nodal/ode.hpp"
#include "nodal/problem.hpp"
#include "nodal/rootfind.hpp"

namespace nodal {

enum class Terminal { reached_r_max, double_zero, settled_negative_energy, step_failure };

inline const char* to_string(Terminal t) {
    switch (t) {
        case Terminal::reached_r_max: return "reached_r_max";
        case Terminal::double_zero: return "double_zero";
        case Terminal::settled_negative_energy: return "settled_negative_energy";
        default: return "step_failure";
    }
}

struct SolveOptions {
    double r_max = 100.0;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double startup_radius = 1e-3;      // first candidate; shrunk until the Picard pass converges
    double double_zero_tol = 1e-10;    // joint threshold on rho and |E|
    double settle_tol = 1e-8;          // E < -settle_tol certifies no further sign change
    int max_nodes = 50;                // oscillation safeguard; maps to an undecided run
    bool stop_on_settle = true;
    std::optional<double> stop_at_energy;  // stop at the first E <= value (boundary trajectories)
    std::optional<int> stop_after_nodes;   // stop as soon as this many nodes are recorded
    long max_steps = 4000000;

    void validate() const {
        if (!(rel_tol > 0) || !(abs_tol > 0) || !(double_zero_tol > 0) || !(settle_tol > 0))
            throw std::invalid_argument("SolveOptions: tolerances must be positive");
        if (!(r_max > startup_radius) || !(startup_radius > 0))
            throw std::invalid_argument("SolveOptions: need r_max > startup_radius > 0");
    }
};

/// E(v, w) = |w|^{p'}/p' + F(v)  (equals |v'|^p/p' + F(v) since |v'|^p = |w|^{p'}).
inline double energy(const Problem& prob, double v, double w) {
    return std::pow(std::abs(w), prob.pe.pconj) / prob.pe.pconj + prob.nonlin.F(v);
}

struct TrajectorySample {
    double r, v, w, E, theta;
    double dv, dw, dtheta;  // flow derivatives at the sample
};

/// A discretized solution of the IVP with its event log.
struct Trajectory {
    double lambda = 0.0;
    std::vector<TrajectorySample> samples;
    std::vector<double> nodes;            // refined radii of sign changes of v
    std::vector<double> critical_points;  // refined radii of w = 0 crossings
    std::optional<double> double_zero;
    Terminal terminal = Terminal::reached_r_max;
    std::optional<double> settle_radius;        // first r with E < -settle_tol
    std::optional<double> uniqueness_boundary;  // w = 0 with f(v) = 0 reached (p > 2)
    double max_energy_increase = 0.0;           // max (E_{i+1}-E_i)/(1+|E_i|) over steps
    double angle_max_dev = 0.0;  // worst |theta/(pi_p/2) - expected parity integer| at events
    size_t main_start_index = 0;                // first sample of the adaptive phase
    std::vector<std::string> warnings;

    int node_count() const { return static_cast<int>(nodes.size()); }
    double r_end() const { return samples.back().r; }
    double final_energy() const { return samples.back().E; }

    /// Hermite evaluation of (v, w, theta) between stored samples.
    TrajectorySample eval(double r) const {
        if (samples.empty()) throw std::logic_error("empty trajectory");
        if (r <= samples.front().r) return samples.front();
        if (r >= samples.back().r) return samples.back();
        size_t lo = 0, hi = samples.size() - 1;
        while (hi - lo > 1) {
            size_t m = (lo + hi) / 2;
            if (samples[m].r <= r) lo = m; else hi = m;
        }
        const auto& a = samples[lo];
        const auto& b = samples[hi];
        double h = b.r - a.r, s = (r - a.r) / h;
        TrajectorySample out;
        out.r = r;
        out.v = hermite(s, a.v, b.v, a.dv, b.dv, h);
        out.w = hermite(s, a.w, b.w, a.dw, b.dw, h);
        out.theta = hermite(s, a.theta, b.theta, a.dtheta, b.dtheta, h);
        out.dv = hermite_deriv(s, a.v, b.v, a.dv, b.dv, h);
        out.dw = hermite_deriv(s, a.w, b.w, a.dw, b.dw, h);
        out.dtheta = hermite_deriv(s, a.theta, b.theta, a.dtheta, b.dtheta, h);
        out.E = 0.0;  // caller recomputes when needed
        return out;
    }
};

struct StartupState {
    double r1;
    double v;
    double w;
    std::vector<TrajectorySample> samples;  // includes the r = 0 sample
};

/// Startup through the r -> 0 singularity by the integral identity
///   q(r) phi_p(v') = -int_0^r q f(v) dt,
/// first with v = lambda frozen, then one Picard refinement. q'/q is never
/// evaluated inside the startup interval.
inline StartupState startup(const Problem& prob, double lambda, double r1_request) {
    const auto& f = prob.nonlin.f;
    const auto& pe = prob.pe;
    const double flam = f(lambda);
    if (!std::isfinite(flam)) throw std::domain_error("startup: f(lambda) is not finite");
    if (prob.nonlin.has_well && std::abs(lambda) <= prob.nonlin.beta_plus) {
        // exploration below beta+ is allowed; Proposition 3.1 just rules out decay
    }

    const int cells = 64;
    double r1 = r1_request;
    std::vector<double> v1(cells + 1), w1(cells + 1);
    std::vector<double> ts(cells + 1);
    for (int attempt = 0; attempt < 20; ++attempt) {
        for (int i = 0; i <= cells; ++i) ts[i] = r1 * i / cells;
        std::vector<double> g0(cells + 1), v0(cells + 1);
        g0[0] = 0.0;
        for (int i = 1; i <= cells; ++i) {
            double t = ts[i];
            g0[i] = phi_pconj(prob.weight.Q(t) / prob.weight.q(t) * flam, pe);
        }
        // cumulative composite Simpson over pairs of cells; odd indices use the
        // quadratic 3-point half-cell rules (exact through degree 2)
        auto cumsimp = [&](const std::vector<double>& g, std::vector<double>& out) {
            out[0] = 0.0;
            double hh = r1 / cells;
            for (int i = 2; i <= cells; i += 2)
                out[i] = out[i - 2] + hh / 3.0 * (g[i - 2] + 4.0 * g[i - 1] + g[i]);
            out[1] = hh / 12.0 * (5.0 * g[0] + 8.0 * g[1] - g[2]);
            for (int i = 3; i <= cells; i += 2)
                out[i] = out[i - 1] + hh / 12.0 * (5.0 * g[i] + 8.0 * g[i - 1] - g[i - 2]);
        };
        std::vector<double> I0(cells + 1);
        cumsimp(g0, I0);
        for (int i = 0; i <= cells; ++i) v0[i] = lambda - I0[i];
        // Picard refinement: w = -(1/q) int q f(v0) with the frozen-amplitude
        // part f(lambda) Q/q split off exactly, so dividing by the vanishing
        // q(t) never amplifies quadrature error near t = 0
        std::vector<double> inner(cells + 1), I1(cells + 1), gv(cells + 1);
        inner[0] = 0.0;
        for (int i = 1; i <= cells; ++i)
            inner[i] = prob.weight.q(ts[i]) * (f(v0[i]) - flam);
        cumsimp(inner, I1);
        w1[0] = 0.0;
        gv[0] = 0.0;
        for (int i = 1; i <= cells; ++i) {
            double qi = prob.weight.q(ts[i]);
            w1[i] = -(I1[i] / qi + flam * prob.weight.Q(ts[i]) / qi);
            gv[i] = phi_pconj(w1[i], pe);
        }
        std::vector<double> I2(cells + 1);
        cumsimp(gv, I2);
        double corr = 0.0;
        for (int i = 0; i <= cells; ++i) {
            v1[i] = lambda + I2[i];
            corr = std::max(corr, std::abs(v1[i] - v0[i]));
        }
        const double lam_scale = std::max(std::abs(lambda), 1e-30);
        if (corr > 1e-3 * lam_scale || std::abs(v1[cells] - lambda) > 1e-6 * lam_scale) {
            r1 *= 0.5;
            if (attempt == 19)
                throw std::runtime_error("startup: Picard pass did not converge after 20 "
                                         "radius reductions");
            continue;
        }
        break;
    }

    StartupState st;
    st.r1 = r1;
    st.v = v1[cells];
    st.w = w1[cells];
    const double qq0 = prob.weight.Qq_prime(std::max(1e-3 * r1, 1e-12));
    double theta_prev = 0.0;
    for (int i = 0; i <= cells; i += 8) {
        TrajectorySample s;
        s.r = ts[i];
        s.v = v1[i];
        s.w = w1[i];
        s.E = energy(prob, s.v, s.w);
        if (i == 0) {
            s.theta = 0.0;
            s.dv = 0.0;
            // limits at r -> 0+: w' -> -f(lambda)(Q/q)'(0+) and, since
            // (q'/q) w -> -f(lambda)(1 - (Q/q)'(0+)), theta' stays bounded
            s.dw = -flam * qq0;
            double rho0 = p_polar_rho(lambda, 0.0, pe);
            s.dtheta = -lambda * flam * qq0 / rho0;
        } else {
            double rho = p_polar_rho(s.v, s.w, pe);
            double tau = (rho > 0) ? p_polar_from_cartesian(s.v, s.w, pe, theta_prev).theta
                                   : theta_prev;
            s.theta = tau;
            theta_prev = tau;
            double dlq = prob.weight.dlogq(s.r);
            double fv = f(s.v);
            s.dv = phi_pconj(s.w, pe);
            s.dw = -dlq * s.w - fv;
            s.dtheta = (rho > 0)
                           ? -((pe.p / pe.pconj) * std::pow(std::abs(s.w), pe.pconj) +
                               s.v * fv + dlq * s.v * s.w) / rho
                           : 0.0;
        }
        st.samples.push_back(s);
    }
    return st;
}

namespace detail {

inline bool needs_alignment_v(const Problem& prob) { return !prob.nonlin.lipschitz_at_zero; }
inline bool needs_alignment_w(const Problem& prob) { return prob.pe.p != 2.0; }

} // namespace detail

/// Integrate the IVP from the startup state to termination.
inline Trajectory solve(const Problem& prob, double lambda, const SolveOptions& opts) {
    opts.validate();
    if (lambda == 0.0) throw std::invalid_argument("lambda must be nonzero");

    Trajectory traj;
    traj.lambda = lambda;
    if (prob.nonlin.has_well && std::abs(lambda) <= prob.nonlin.beta_plus)
        traj.warnings.push_back("lambda <= beta+: decaying solutions require lambda > beta+");

    StartupState st = startup(prob, lambda, std::min(opts.startup_radius, 0.01 * opts.r_max));
    traj.samples = st.samples;

    const auto& pe = prob.pe;
    const auto& f = prob.nonlin.f;
    const double cpp = pe.p / pe.pconj;
    const double quarter = ptrig_table(pe.p).pi_p() / 2.0;

    using Stepper = DormandPrince54<3>;
    auto rhs = [&prob, &pe, &f, cpp](double r, const Stepper::State& y, Stepper::State& dy) {
        const double v = y[0], w = y[1];
        const double dlq = prob.weight.dlogq(r);
        const double fv = f(v);
        dy[0] = phi_pconj(w, pe);
        dy[1] = -dlq * w - fv;
        const double rho = std::pow(std::abs(v), pe.p) + cpp * std::pow(std::abs(w), pe.pconj);
        dy[2] = (rho > 0.0)
                    ? -(cpp * std::pow(std::abs(w), pe.pconj) + v * fv + dlq * v * w) / rho
                    : 0.0;
    };

    Stepper stepper(rhs, opts.rel_tol, opts.abs_tol);
    double theta1 = traj.samples.back().theta;
    stepper.init(st.r1, {st.v, st.w, theta1});

    double E_prev = energy(prob, st.v, st.w);
    double h = stepper.initial_step(opts.r_max);
    long steps = 0;
    int realign_budget = 0;
    double aligned_until = -1.0;
    double h_resume = 0.0;
    traj.main_start_index = traj.samples.size() - 1;

    auto record_sample = [&]() {
        TrajectorySample s;
        s.r = stepper.r();
        s.v = stepper.y()[0];
        s.w = stepper.y()[1];
        s.theta = stepper.y()[2];
        s.dv = stepper.f()[0];
        s.dw = stepper.f()[1];
        s.dtheta = stepper.f()[2];
        s.E = energy(prob, s.v, s.w);
        traj.samples.push_back(s);
        return s.E;
    };

    auto angle_check = [&](double r_event, bool is_node) {
        // at a node theta/(pi_p/2) is an odd integer; at a critical point, even
        double s = (r_event - stepper.r_old()) / (stepper.r() - stepper.r_old());
        double th = stepper.dense(2, s) / quarter;
        double nearest = std::round(th);
        long par = static_cast<long>(std::llround(nearest));
        if ((std::abs(par) % 2 == 1) != is_node) nearest += (th > nearest) ? 1.0 : -1.0;
        traj.angle_max_dev = std::max(traj.angle_max_dev, std::abs(th - nearest));
    };

    bool done = false;
    while (!done) {
        if (stepper.r() >= opts.r_max) { traj.terminal = Terminal::reached_r_max; break; }
        h = std::min(h, opts.r_max - stepper.r());
        auto res = stepper.step(h);
        if (!res.accepted) {
            h = res.h_next;
            if (h < 1e-14 * std::max(stepper.r(), 1.0)) {
                traj.terminal = Terminal::step_failure;
                traj.warnings.push_back("step size underflow at r = " + fmt17(stepper.r()));
                done = true;
            }
            if (++steps > opts.max_steps) {
                traj.terminal = Terminal::step_failure;
                traj.warnings.push_back("max step count exceeded");
                done = true;
            }
            continue;
        }
        h = res.h_next;
        if (h_resume > 0.0) {  // restore the pre-alignment step size
            h = std::max(h, h_resume);
            h_resume = 0.0;
        }
        if (++steps > opts.max_steps) {
            traj.terminal = Terminal::step_failure;
            traj.warnings.push_back("max step count exceeded");
            record_sample();
            break;
        }

        const double r0 = stepper.r_old(), r1v = stepper.r();
        const double v0 = stepper.y_old()[0], v1 = stepper.y()[0];
        const double w0 = stepper.y_old()[1], w1 = stepper.y()[1];

        // earliest axis crossing inside the step, if any
        double s_event = 2.0;
        bool event_is_node = false;
        if (v0 != 0.0 && v0 * v1 < 0.0) {
            double sv = brent([&](double s) { return stepper.dense(0, s); }, 0.0, 1.0, 1e-13);
            if (sv < s_event) { s_event = sv; event_is_node = true; }
        }
        if (w0 != 0.0 && w0 * w1 < 0.0) {
            double sw = brent([&](double s) { return stepper.dense(1, s); }, 0.0, 1.0, 1e-13);
            if (sw < s_event) { s_event = sw; event_is_node = false; }
        }

        if (s_event <= 1.0) {
            double r_event = r0 + s_event * (r1v - r0);
            bool align = event_is_node ? detail::needs_alignment_v(prob)
                                       : detail::needs_alignment_w(prob);
            if (align && r_event > aligned_until && s_event > 1e-6 && s_event < 1.0 - 1e-9 &&
                realign_budget < 4) {
                // land the crossing on a step boundary: redo the step shortened
                stepper.revert();
                h_resume = std::max(h_resume, r1v - r0);
                h = std::max(r_event - r0, 1e-14 * std::max(r0, 1.0));
                aligned_until = r_event * (1.0 + 1e-12) + 1e-300;
                ++realign_budget;
                continue;
            }
            realign_budget = 0;
            if (event_is_node) {
                if (traj.nodes.empty() ||
                    r_event > traj.nodes.back() + 1e-9 * (1.0 + r_event)) {
                    traj.nodes.push_back(r_event);
                    angle_check(r_event, true);
                }
            } else {
                if (traj.critical_points.empty() ||
                    r_event > traj.critical_points.back() + 1e-9 * (1.0 + r_event)) {
                    traj.critical_points.push_back(r_event);
                    angle_check(r_event, false);
                    // Appendix A uniqueness boundary: w = 0 together with f(v) = 0
                    double v_at = stepper.dense(0, s_event);
                    double fscale = 1.0 + std::abs(phi_p(v_at, pe));
                    if (pe.p > 2.0 && std::abs(f(v_at)) < 1e-10 * fscale && v_at != 0.0) {
                        traj.uniqueness_boundary = r_event;
                        record_sample();
                        traj.terminal = (energy(prob, v_at, 0.0) < 0.0)
                                            ? Terminal::settled_negative_energy
                                            : Terminal::reached_r_max;
                        traj.warnings.push_back("stopped at uniqueness boundary (w=0, f(v)=0)");
                        break;
                    }
                }
            }
        } else {
            realign_budget = 0;
        }

        double E_new = record_sample();
        traj.max_energy_increase =
            std::max(traj.max_energy_increase, (E_new - E_prev) / (1.0 + std::abs(E_prev)));
        E_prev = E_new;

        if (static_cast<int>(traj.nodes.size()) > opts.max_nodes) {
            traj.terminal = Terminal::reached_r_max;
            traj.warnings.push_back("max_nodes cap reached; classification undecided");
            break;
        }
        if (opts.stop_after_nodes &&
            static_cast<int>(traj.nodes.size()) >= *opts.stop_after_nodes) {
            traj.terminal = Terminal::reached_r_max;
            break;
        }

        const double rho = p_polar_rho(stepper.y()[0], stepper.y()[1], pe);
        if (rho < opts.double_zero_tol && std::abs(E_new) < opts.double_zero_tol) {
            traj.double_zero = stepper.r();
            traj.terminal = Terminal::double_zero;
            break;
        }
        if (E_new < -opts.settle_tol) {
            if (!traj.settle_radius) traj.settle_radius = stepper.r();
            if (opts.stop_on_settle) {
                traj.terminal = Terminal::settled_negative_energy;
                break;
            }
        }
        if (opts.stop_at_energy && E_new <= *opts.stop_at_energy) {
            traj.terminal = Terminal::reached_r_max;
            traj.warnings.push_back("stopped at energy threshold");
            break;
        }
        if (stepper.r() >= opts.r_max) { traj.terminal = Terminal::reached_r_max; break; }
    }
    return traj;
}

/// Per-step double-zero predicate (exposed for tests; solve applies it inline).
inline std::optional<double> detect_double_zero(const Problem& prob, double r, double v, double w,
                                                double tol) {
    double rho = p_polar_rho(v, w, prob.pe);
    if (rho < tol && std::abs(energy(prob, v, w)) < tol) return r;
    return std::nullopt;
}

/// Normalized RMS residual of the energy identity E' = -(q'/q)|v'|^p across
/// the stored steps, using the corrected trapezoidal rule with exact endpoint
/// derivatives (no interior dense-output values enter).
inline double e_prime_residual(const Problem& prob, const Trajectory& traj) {
    const auto& pe = prob.pe;
    auto g_of = [&](const TrajectorySample& s) {
        return -prob.weight.dlogq(s.r) * std::pow(std::abs(s.w), pe.pconj);
    };
    auto gp_of = [&](const TrajectorySample& s) {
        double dlqp;
        if (prob.weight.dlogq_prime) {
            dlqp = prob.weight.dlogq_prime(s.r);
        } else {
            double d = 1e-5 * std::max(s.r, 1e-6);
            dlqp = (prob.weight.dlogq(s.r + d) - prob.weight.dlogq(s.r - d)) / (2.0 * d);
        }
        double absw = std::abs(s.w);
        return -dlqp * std::pow(absw, pe.pconj) -
               prob.weight.dlogq(s.r) * pe.pconj * std::pow(absw, pe.pconj - 1.0) *
                   ((s.w > 0) - (s.w < 0)) * s.dw;
    };
    double num = 0.0, den = 0.0;
    size_t count = 0;
    for (size_t i = traj.main_start_index; i + 1 < traj.samples.size(); ++i) {
        const auto& a = traj.samples[i];
        const auto& b = traj.samples[i + 1];
        if (a.r <= 0.0 || b.r <= a.r) continue;
        double hh = b.r - a.r;
        double integral = 0.5 * hh * (g_of(a) + g_of(b)) - hh * hh / 12.0 * (gp_of(b) - gp_of(a));
        double resid = (b.E - a.E - integral) / hh;
        double scale = integral / hh;
        num += resid * resid;
        den += scale * scale;
        ++count;
    }
    if (count == 0 || den == 0.0) return 0.0;
    return std::sqrt(num / count) / std::sqrt(den / count);
}

} // namespace nodal

#endif
