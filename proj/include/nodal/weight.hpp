#ifndef NODAL_WEIGHT_HPP
#define NODAL_WEIGHT_HPP

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "nodal/common.hpp"
#include "nodal/ptrig.hpp"
#include "nodal/quadrature.hpp"
#include "nodal/rootfind.hpp"

namespace nodal {

/// Thrown when a structural hypothesis fails hard enough that a construction
/// cannot proceed (e.g. the chi integral of the two-weight reduction diverges).
struct hypothesis_violation : std::runtime_error {
    std::string hypothesis;
    hypothesis_violation(std::string hyp, const std::string& msg)
        : std::runtime_error("(" + hyp + ") violation: " + msg), hypothesis(std::move(hyp)) {}
};

/// A single weight q for the reduced radial equation, with its derivative,
/// cumulative integral Q and the h = q^{p'} companion.
struct Weight {
    PExponent pe;
    std::string kind;  // "power-law" | "reduced" | "user"
    std::function<double(double)> q;
    std::function<double(double)> dq;
    std::function<double(double)> Q;
    /// q'(r)/q(r); the only weight quantity the flow needs per step.
    std::function<double(double)> dlogq;
    /// (Q/q)'(r); evaluated natively (no cancellation-prone composition).
    std::function<double(double)> Qq_prime;
    /// d/dr (q'/q); optional, used by high-order residual corrections.
    std::function<double(double)> dlogq_prime;
    double power_N = std::numeric_limits<double>::quiet_NaN();  // set for power-law kind

    double h(double r) const { return std::pow(q(r), pe.pconj); }
    double dh(double r) const { return pe.pconj * std::pow(q(r), pe.pconj - 1.0) * dq(r); }
};

/// q(r) = r^{N-1}, Q(r) = r^N / N, h(r) = r^{(N-1)p'}; requires N > 1.
inline Weight make_power_weight(double N, const PExponent& pe) {
    if (!(N > 1.0)) throw std::invalid_argument("make_power_weight: need N > 1");
    Weight w;
    w.pe = pe;
    w.kind = "power-law";
    w.power_N = N;
    w.q = [N](double r) { return std::pow(r, N - 1.0); };
    w.dq = [N](double r) { return (N - 1.0) * std::pow(r, N - 2.0); };
    w.Q = [N](double r) { return std::pow(r, N) / N; };
    w.dlogq = [N](double r) { return (N - 1.0) / r; };
    w.Qq_prime = [N](double) { return 1.0 / N; };
    w.dlogq_prime = [N](double r) { return -(N - 1.0) / (r * r); };
    return w;
}

/// One raw weight of the two-weight problem: w(r) = r^e (r^s/(1+r^s))^{sigma/s}.
/// sigma = 0 yields the plain power r^e.
struct PowerBumpWeight {
    double e = 0.0;
    double sigma = 0.0;
    double s = 1.0;

    double value(double r) const {
        if (sigma == 0.0) return std::pow(r, e);
        // overflow-safe split of r^e (r^s/(1+r^s))^{sigma/s}
        if (r >= 1.0)
            return std::pow(r, e) * std::pow(1.0 + std::pow(r, -s), -sigma / s);
        return std::pow(r, e + sigma) * std::pow(1.0 + std::pow(r, s), -sigma / s);
    }
    /// logarithmic derivative w'(r)/w(r)
    double dlog(double r) const {
        if (sigma == 0.0) return e / r;
        if (r >= 1.0) {
            const double rms = std::pow(r, -s);
            return e / r + sigma * rms / (r * (1.0 + rms));
        }
        const double rs = std::pow(r, s);
        return (e + sigma) / r - sigma * std::pow(r, s - 1.0) / (1.0 + rs);
    }
    double deriv(double r) const { return value(r) * dlog(r); }
};

/// The raw (a, b) weight pair of the two-weight equation, prior to reduction.
struct WeightPair {
    PowerBumpWeight a;
    PowerBumpWeight b;
    std::string kind = "custom";  // "matukuma" | "hessian" | "unified" | "custom"

    double psi(double p, double pconj, double r) const {
        return (a.dlog(r) / p + b.dlog(r) / pconj) * std::pow(a.value(r) / b.value(r), 1.0 / p);
    }
    /// (b/a)^{1/p}, the chi integrand.
    double chi_integrand(double p, double r) const {
        return std::pow(b.value(r) / a.value(r), 1.0 / p);
    }
};

/// Generalized Matukuma: a = r^{d-1}, b = r^{d-1}/(1+r^sigma).
inline WeightPair make_matukuma_pair(double d, double sigma) {
    WeightPair wp;
    wp.kind = "matukuma";
    wp.a = PowerBumpWeight{d - 1.0, 0.0, 1.0};
    wp.b = PowerBumpWeight{d - 1.0 - sigma, sigma, sigma};
    return wp;
}

/// k-Hessian: a = r^{d-k}, b = r^{d-1}; the caller must use p = k + 1.
inline WeightPair make_hessian_pair(double d, double k) {
    WeightPair wp;
    wp.kind = "hessian";
    wp.a = PowerBumpWeight{d - k, 0.0, 1.0};
    wp.b = PowerBumpWeight{d - 1.0, 0.0, 1.0};
    return wp;
}

/// The unified example family: a = r^{d+k-1}, b = r^{d+l-1} (r^s/(1+r^s))^{sigma/s}
/// (so b ~ r^{d+l+sigma-1} near zero and ~ r^{d+l-1} at infinity).
inline WeightPair make_unified_pair(double d, double k, double l, double sigma, double s) {
    WeightPair wp;
    wp.kind = "unified";
    wp.a = PowerBumpWeight{d + k - 1.0, 0.0, 1.0};
    wp.b = PowerBumpWeight{d + l - 1.0, sigma, s};
    return wp;
}

namespace detail {

/// Cumulative tables for chi(r) = int_0^r (b/a)^{1/p} and B(r) = int_0^r b,
/// on a shared geometric r-grid, with power-law extrapolation at both ends.
class ChiTable {
public:
    ChiTable(const WeightPair& pair, const PExponent& pe, double t_need)
        : pair_(pair), pe_(pe) {
        // local power-law exponents near zero decide (W1) integrability
        alpha0_ = log_slope_at(1e-7);
        if (alpha0_ <= -1.0 + 1e-9)
            throw hypothesis_violation("W1", "(b/a)^{1/p} is not integrable at r = 0 "
                                             "(local exponent " + fmt17(alpha0_) + ")");
        beta0_ = log_slope_b_at(1e-7);
        if (beta0_ <= -1.0 + 1e-9)
            throw hypothesis_violation("W1", "b is not integrable at r = 0");

        build(t_need);
    }

    double chi(double r) const {
        if (r <= grid_.front()) return chi0_ * std::pow(r / grid_.front(), alpha0_ + 1.0);
        if (r >= grid_.back()) return chi_.back() + tail_integral(r, alpha_inf_, f_end_());
        size_t j = cell_of(r);
        return chi_[j] + gauss16([this](double t) { return pair_.chi_integrand(pe_.p, t); },
                                 grid_[j], r);
    }

    double B(double r) const {
        if (r <= grid_.front()) return B0_ * std::pow(r / grid_.front(), beta0_ + 1.0);
        if (r >= grid_.back()) {
            double be = pair_.b.dlog(grid_.back()) * grid_.back();
            return B_.back() + tail_integral(r, be, pair_.b.value(grid_.back()));
        }
        size_t j = cell_of(r);
        return B_[j] + gauss16([this](double t) { return pair_.b.value(t); }, grid_[j], r);
    }

    /// Inverse of chi; valid for any t > 0 via the end asymptotics.
    double chi_inverse(double t) const {
        if (!(t > 0)) throw std::invalid_argument("chi_inverse: need t > 0");
        if (t <= chi0_) return grid_.front() * std::pow(t / chi0_, 1.0 / (alpha0_ + 1.0));
        if (t >= chi_.back()) return tail_inverse(t - chi_.back(), alpha_inf_, f_end_());
        size_t lo = 0, hi = chi_.size() - 1;
        while (hi - lo > 1) {
            size_t m = (lo + hi) / 2;
            if (chi_[m] <= t) lo = m; else hi = m;
        }
        double r = newton_bracketed(
            [&](double rr) { return chi_[lo] + gauss16([this](double u) {
                                 return pair_.chi_integrand(pe_.p, u); }, grid_[lo], rr) - t; },
            [&](double rr) { return pair_.chi_integrand(pe_.p, rr); },
            0.5 * (grid_[lo] + grid_[hi]), grid_[lo], grid_[hi], 1e-15);
        return r;
    }

    double chi_end() const { return chi_.back(); }
    double grid_end() const { return grid_.back(); }

private:
    WeightPair pair_;
    PExponent pe_;
    std::vector<double> grid_, chi_, B_;
    double chi0_ = 0, B0_ = 0;
    double alpha0_ = 0, beta0_ = 0, alpha_inf_ = 0;

    double log_slope_at(double r) const {
        double f1 = pair_.chi_integrand(pe_.p, r), f2 = pair_.chi_integrand(pe_.p, 2.0 * r);
        return std::log(f2 / f1) / std::log(2.0);
    }
    double log_slope_b_at(double r) const {
        double f1 = pair_.b.value(r), f2 = pair_.b.value(2.0 * r);
        return std::log(f2 / f1) / std::log(2.0);
    }

    size_t cell_of(double r) const {
        size_t lo = 0, hi = grid_.size() - 1;
        while (hi - lo > 1) {
            size_t m = (lo + hi) / 2;
            if (grid_[m] <= r) lo = m; else hi = m;
        }
        return lo;
    }

    double f_end_() const { return pair_.chi_integrand(pe_.p, grid_.back()); }

    /// int_{r_end}^{r} of a function ~ fe (r/r_end)^{alpha}; the alpha = -1
    /// (logarithmic) boundary is handled explicitly.
    double tail_integral(double r, double alpha, double fe) const {
        const double re = grid_.back();
        if (std::abs(alpha + 1.0) <= 1e-6) return fe * re * std::log(r / re);
        return fe * re * (std::pow(r / re, alpha + 1.0) - 1.0) / (alpha + 1.0);
    }
    /// inverse of tail_integral in its first argument (dt = target increment)
    double tail_inverse(double dt, double alpha, double fe) const {
        const double re = grid_.back();
        if (std::abs(alpha + 1.0) <= 1e-6) return re * std::exp(dt / (fe * re));
        double z = 1.0 + dt * (alpha + 1.0) / (fe * re);
        if (!(z > 0.0))
            throw std::domain_error("chi_inverse: target beyond the bounded chi tail");
        return re * std::pow(z, 1.0 / (alpha + 1.0));
    }

    void build(double t_need) {
        const double r_lo = 1e-9;
        double r_hi = 10.0;
        // base integrals over (0, r_lo] with endpoint-singularity-aware rule
        chi0_ = tanh_sinh([this](double r, double, double) {
                    return pair_.chi_integrand(pe_.p, r); }, 0.0, r_lo, 1e-13).value;
        B0_ = tanh_sinh([this](double r, double, double) {
                  return pair_.b.value(r); }, 0.0, r_lo, 1e-13).value;

        for (int attempt = 0; attempt < 12; ++attempt) {
            int per_decade = 48;
            int n = static_cast<int>(per_decade * std::log10(r_hi / r_lo)) + 2;
            grid_ = geomspace(r_lo, r_hi, n);
            chi_.assign(n, 0.0);
            B_.assign(n, 0.0);
            chi_[0] = chi0_;
            B_[0] = B0_;
            for (int i = 1; i < n; ++i) {
                chi_[i] = chi_[i - 1] + gauss16([this](double t) {
                              return pair_.chi_integrand(pe_.p, t); }, grid_[i - 1], grid_[i]);
                B_[i] = B_[i - 1] + gauss16([this](double t) {
                            return pair_.b.value(t); }, grid_[i - 1], grid_[i]);
            }
            alpha_inf_ = log_slope_at(0.5 * r_hi);
            if (chi_.back() >= t_need) return;
            if (alpha_inf_ < -1.0 - 1e-6)
                throw hypothesis_violation("W1", "chi(r) stays bounded as r -> infinity "
                                                 "(tail exponent " + fmt17(alpha_inf_) + ")");
            // size the next table end from the local tail law
            double needed = 1.1 * t_need - chi_.back();
            double fe = f_end_(), re = r_hi;
            double r_next;
            if (std::abs(alpha_inf_ + 1.0) <= 1e-6) {
                double expo = needed / (fe * re);
                if (expo > 600.0)
                    throw hypothesis_violation("W1", "chi(r) grows too slowly (logarithmically) "
                                                     "to cover the requested range");
                r_next = re * std::exp(expo);
            } else {
                double z = 1.0 + needed * (alpha_inf_ + 1.0) / (fe * re);
                if (!(z > 0.0))
                    throw hypothesis_violation("W1", "chi(r) stays bounded as r -> infinity");
                r_next = re * std::pow(z, 1.0 / (alpha_inf_ + 1.0));
            }
            r_hi = std::min(std::max(2.0 * r_next, 10.0 * r_hi), 1e250);
        }
        throw hypothesis_violation("W1", "chi(r) grows too slowly to cover the requested range");
    }
};

} // namespace detail

/// Reduce the two-weight problem to a single weight:
///   q(t) = a(chi^{-1}(t))^{1/p} b(chi^{-1}(t))^{1/p'},  Q(t) = B(chi^{-1}(t)).
/// Throws hypothesis_violation("W1", ...) when the change of variables fails.
inline Weight reduce_weights(const WeightPair& pair, const PExponent& pe, double t_need = 250.0) {
    auto tab = std::make_shared<detail::ChiTable>(pair, pe, t_need);
    Weight w;
    w.pe = pe;
    w.kind = "reduced";
    const double p = pe.p, pc = pe.pconj;
    auto pair_copy = pair;
    auto qtilde = [pair_copy, p, pc](double r) {
        return std::pow(pair_copy.a.value(r), 1.0 / p) * std::pow(pair_copy.b.value(r), 1.0 / pc);
    };
    w.q = [tab, qtilde](double t) { return qtilde(tab->chi_inverse(t)); };
    w.dq = [tab, qtilde, pair_copy, p, pc](double t) {
        double r = tab->chi_inverse(t);
        return qtilde(r) * pair_copy.psi(p, pc, r);
    };
    w.dlogq = [tab, pair_copy, p, pc](double t) {
        return pair_copy.psi(p, pc, tab->chi_inverse(t));
    };
    w.Q = [tab](double t) { return tab->B(tab->chi_inverse(t)); };
    w.Qq_prime = [tab, qtilde, pair_copy, p, pc](double t) {
        double r = tab->chi_inverse(t);
        return 1.0 - tab->B(r) * pair_copy.psi(p, pc, r) / qtilde(r);
    };
    w.dlogq_prime = [tab, pair_copy, p, pc](double t) {
        // (q'/q)'(t) = psi'(r) (a/b)^{1/p}; psi' by a small central difference
        double r = tab->chi_inverse(t);
        double dr = 1e-5 * r;
        double dpsi = (pair_copy.psi(p, pc, r + dr) - pair_copy.psi(p, pc, r - dr)) / (2.0 * dr);
        return dpsi / pair_copy.chi_integrand(p, r);
    };
    return w;
}

} // namespace nodal

#endif
