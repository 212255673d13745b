#ifndef NODAL_PTRIG_HPP
#define NODAL_PTRIG_HPP

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "nodal/common.hpp"
#include "nodal/ode.hpp"
#include "nodal/quadrature.hpp"
#include "nodal/rootfind.hpp"

namespace nodal {

/// An exponent p > 1 paired with its Holder conjugate p' = p/(p-1).
struct PExponent {
    double p;
    double pconj;

    static PExponent of(double p) {
        if (!(p > 1.0)) throw std::invalid_argument("PExponent: need p > 1");
        return PExponent{p, p / (p - 1.0)};
    }
};

/// phi_p(s) = |s|^{p-2} s, with phi_p(0) = 0.
inline double phi_p(double s, const PExponent& pe) { return signed_pow(s, pe.p - 1.0); }

/// The inverse map phi_{p'}.
inline double phi_pconj(double s, const PExponent& pe) { return signed_pow(s, pe.pconj - 1.0); }

/// Phi_p(s) = |s|^p / p, the primitive of phi_p.
inline double capital_phi_p(double s, const PExponent& pe) {
    return std::pow(std::abs(s), pe.p) / pe.p;
}

inline double capital_phi_pconj(double s, const PExponent& pe) {
    return std::pow(std::abs(s), pe.pconj) / pe.pconj;
}

/// Generalized phase-plane radius rho = p[Phi_p(v) + Phi_{p'}(w)].
inline double p_polar_rho(double v, double w, const PExponent& pe) {
    return std::pow(std::abs(v), pe.p) + (pe.p / pe.pconj) * std::pow(std::abs(w), pe.pconj);
}

/// Generalized polar coordinates of a phase-plane point.
struct PPolar {
    double rho;
    double theta;
};

/// Sampled quarter-period table of the (cos_{p'}, sin_{p'}) pair.
///
/// The pair solves dx/dtheta = -phi_{p'}(y), dy/dtheta = phi_p(x) with
/// x(0)=1, y(0)=0 and conserves Phi_p(x) + Phi_{p'}(y) = 1/p. One quarter
/// period is tabulated on a uniform theta grid; the rest of the period
/// follows from the reflection symmetries of the system. Evaluation always
/// interpolates the coordinate that is small in the current half-quarter and
/// reconstructs the other one from the conserved quantity, so the conservation
/// identity holds to round-off everywhere and no interpolation happens where
/// a coordinate is flat.
class PTrig {
public:
    explicit PTrig(double p, int quarter_samples = 2500) : pe_(PExponent::of(p)) {
        build(quarter_samples);
    }

    const PExponent& exponent() const { return pe_; }

    /// Half-period pi_p of the system (full period is 2*pi_p).
    double pi_p() const { return 2.0 * quarter_; }
    double quarter() const { return quarter_; }

    /// (cos_{p'}(theta), sin_{p'}(theta)); periodic for all theta.
    std::pair<double, double> cos_sin(double theta) const {
        const double period = 4.0 * quarter_;
        double tau = theta - period * std::floor(theta / period);
        int q = static_cast<int>(tau / quarter_);
        if (q > 3) q = 3;
        double u = tau - q * quarter_;
        double x, y;
        switch (q) {
            case 0: eval_quarter(u, x, y); break;
            case 1: eval_quarter(quarter_ - u, x, y); x = -x; break;
            case 2: eval_quarter(u, x, y); x = -x; y = -y; break;
            default: eval_quarter(quarter_ - u, x, y); y = -y; break;
        }
        return {x, y};
    }

    /// Angle of a normalized level-set point, in [0, 2*pi_p).
    /// (xh, yh) must satisfy the conservation identity (up to round-off).
    double base_angle(double xh, double yh) const {
        if (yh == 0.0) return (xh > 0) ? 0.0 : 2.0 * quarter_;
        if (xh == 0.0) return (yh > 0) ? quarter_ : 3.0 * quarter_;
        const double X = std::abs(xh), Y = std::abs(yh);
        double u = invert_quarter(X, Y);
        if (xh > 0 && yh > 0) return u;
        if (xh < 0 && yh > 0) return 2.0 * quarter_ - u;
        if (xh < 0 && yh < 0) return 2.0 * quarter_ + u;
        return 4.0 * quarter_ - u;
    }

private:
    PExponent pe_;
    double quarter_ = 0;     // T = pi_p / 2
    double h_ = 0;           // theta grid spacing
    int n_ = 0;              // number of nodes (n_-1 cells)
    int mid_ = 0;            // branch crossover node index
    double ymax_ = 0;        // y at theta = T
    std::vector<double> xs_, ys_;

    double cpp() const { return pe_.p / pe_.pconj; }

    void build(int quarter_samples) {
        const double p = pe_.p, pc = pe_.pconj;
        // quarter period T = (p/p')^{1/p} (1/p) B(1/p, 1/p') via tanh-sinh on
        // the u = x^p substituted integral; the endpoint singularities are
        // (1-u)^{-1/p} and u^{1/p-1}.
        auto integrand = [p](double, double da, double db) {
            return std::pow(da, 1.0 / p - 1.0) * std::pow(db, -1.0 / p);
        };
        QuadResult qr = tanh_sinh(integrand, 0.0, 1.0, 1e-14);
        if (!qr.converged)
            throw std::runtime_error("pi_p quadrature did not converge; error estimate " +
                                     fmt17(qr.error_estimate));
        quarter_ = std::pow(p / pc, 1.0 / p) * qr.value / p;

        n_ = quarter_samples + 1;
        mid_ = quarter_samples / 2;
        h_ = quarter_ / quarter_samples;
        xs_.assign(n_, 0.0);
        ys_.assign(n_, 0.0);
        ymax_ = std::pow(pc / p, 1.0 / pc);
        xs_[0] = 1.0;
        ys_[0] = 0.0;
        xs_[n_ - 1] = 0.0;
        ys_[n_ - 1] = ymax_;

        const double c = cpp();
        // dtheta/dy on the lower half-quarter
        auto W = [this, c](double y) {
            return std::pow(std::max(1.0 - c * std::pow(y, pe_.pconj), 1e-300), -1.0 / pe_.pconj);
        };
        // dtheta/dx magnitude on the upper half-quarter
        auto V = [this, c](double x) {
            return std::pow(pe_.p / pe_.pconj, 1.0 / pe_.p) *
                   std::pow(std::max(1.0 - std::pow(x, pe_.p), 1e-300), -1.0 / pe_.p);
        };

        // march y upward from theta = 0 to the crossover
        for (int j = 1; j <= mid_; ++j) {
            double yp = ys_[j - 1];
            double y = yp + h_ / W(yp);
            for (int it = 0; it < 4; ++it) {
                double g = gauss16(W, yp, y) - h_;
                y -= g / W(y);
                if (!(y > yp)) y = yp + 0.5 * h_ / W(yp);
                if (!(y < ymax_)) y = 0.5 * (yp + ymax_);
            }
            ys_[j] = y;
            xs_[j] = x_from_y(y);
        }
        // march x upward from theta = T back to the crossover
        for (int j = n_ - 2; j >= mid_; --j) {
            double xp = xs_[j + 1];
            double x = xp + h_ / V(xp);
            for (int it = 0; it < 4; ++it) {
                double g = gauss16(V, xp, x) - h_;
                x -= g / V(x);
                if (!(x > xp)) x = xp + 0.5 * h_ / V(xp);
                if (!(x < 1.0)) x = 0.5 * (xp + 1.0);
            }
            if (j == mid_) {
                // seam consistency between the two marches
                if (std::abs(x - xs_[mid_]) > 1e-9)
                    throw std::runtime_error("p-trig table seam mismatch: " +
                                             fmt17(std::abs(x - xs_[mid_])));
            } else {
                xs_[j] = x;
                ys_[j] = y_from_x(x);
            }
        }
    }

    double x_from_y(double y) const {
        double t = 1.0 - cpp() * std::pow(std::abs(y), pe_.pconj);
        return std::pow(std::max(t, 0.0), 1.0 / pe_.p);
    }
    double y_from_x(double x) const {
        double t = (1.0 - std::pow(std::abs(x), pe_.p)) / cpp();
        return std::pow(std::max(t, 0.0), 1.0 / pe_.pconj);
    }

    // node derivatives of the tabulated coordinates w.r.t. theta
    double dy_at(int j) const { return std::pow(xs_[j], pe_.p - 1.0); }        // phi_p(x), x >= 0
    double dx_at(int j) const { return -std::pow(ys_[j], pe_.pconj - 1.0); }   // -phi_{p'}(y), y >= 0

    void eval_quarter(double u, double& x, double& y) const {
        if (u <= 0.0) { x = 1.0; y = 0.0; return; }
        if (u >= quarter_) { x = 0.0; y = ymax_; return; }
        int j = static_cast<int>(u / h_);
        if (j > n_ - 2) j = n_ - 2;
        double s = (u - j * h_) / h_;
        if (j < mid_) {
            y = hermite(s, ys_[j], ys_[j + 1], dy_at(j), dy_at(j + 1), h_);
            y = std::min(std::max(y, 0.0), ymax_);
            x = x_from_y(y);
        } else {
            x = hermite(s, xs_[j], xs_[j + 1], dx_at(j), dx_at(j + 1), h_);
            x = std::min(std::max(x, 0.0), 1.0);
            y = y_from_x(x);
        }
    }

    /// Invert the quarter table: find u in [0, T] with X(u)=X, Y(u)=Y.
    double invert_quarter(double X, double Y) const {
        if (X >= xs_[mid_]) {
            // lower half: y-table is the well-conditioned coordinate
            int lo = 0, hi = mid_;
            while (hi - lo > 1) {
                int m = (lo + hi) / 2;
                if (ys_[m] <= Y) lo = m; else hi = m;
            }
            int j = lo;
            double s = newton_bracketed(
                [&](double ss) { return hermite(ss, ys_[j], ys_[j + 1], dy_at(j), dy_at(j + 1), h_) - Y; },
                [&](double ss) { return hermite_deriv(ss, ys_[j], ys_[j + 1], dy_at(j), dy_at(j + 1), h_) * h_; },
                0.5, 0.0, 1.0, 1e-15);
            return (j + s) * h_;
        }
        // upper half: x-table decreasing in u
        int lo = mid_, hi = n_ - 1;
        while (hi - lo > 1) {
            int m = (lo + hi) / 2;
            if (xs_[m] >= X) lo = m; else hi = m;
        }
        int j = lo;
        double s = newton_bracketed(
            [&](double ss) { return X - hermite(ss, xs_[j], xs_[j + 1], dx_at(j), dx_at(j + 1), h_); },
            [&](double ss) { return -hermite_deriv(ss, xs_[j], xs_[j + 1], dx_at(j), dx_at(j + 1), h_) * h_; },
            0.5, 0.0, 1.0, 1e-15);
        return (j + s) * h_;
    }
};

/// Process-wide per-p table cache; construction is synchronized, lookups after
/// construction are lock-protected map reads and the tables themselves are
/// immutable.
inline const PTrig& ptrig_table(double p) {
    static std::mutex mtx;
    static std::map<double, std::unique_ptr<PTrig>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(p);
    if (it == cache.end()) it = cache.emplace(p, std::make_unique<PTrig>(p)).first;
    return *it->second;
}

/// Half-period pi_p (cached).
inline double pi_p(const PExponent& pe) { return ptrig_table(pe.p).pi_p(); }

/// (cos_{p'}(theta), sin_{p'}(theta)) via the cached table.
inline std::pair<double, double> cos_sin_pp(double theta, const PExponent& pe) {
    return ptrig_table(pe.p).cos_sin(theta);
}

/// Generalized polar coordinates of (v, w) with continuous unwrapping:
/// the returned theta is the branch representative nearest theta_hint.
inline PPolar p_polar_from_cartesian(double v, double w, const PExponent& pe, double theta_hint) {
    double rho = p_polar_rho(v, w, pe);
    if (rho <= 0.0) throw std::domain_error("polar angle undefined at origin");
    const PTrig& tab = ptrig_table(pe.p);
    double xh = v / std::pow(rho, 1.0 / pe.p);
    double yh = w / std::pow(rho, 1.0 / pe.pconj);
    double tau = tab.base_angle(xh, yh);
    const double period = 2.0 * tab.pi_p();
    double theta = tau + period * std::round((theta_hint - tau) / period);
    return PPolar{rho, theta};
}

} // namespace nodal

#endif
