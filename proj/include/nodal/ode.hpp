#ifndef NODAL_ODE_HPP
#define NODAL_ODE_HPP

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace nodal {

/// Cubic Hermite evaluation on [0, 1] from endpoint values and scaled slopes.
/// y(s) for s in [0,1], given y0, y1 and derivatives f0, f1 w.r.t. r, step h.
inline double hermite(double s, double y0, double y1, double f0, double f1, double h) {
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1;
}

/// Derivative of the cubic Hermite interpolant w.r.t. r.
inline double hermite_deriv(double s, double y0, double y1, double f0, double f1, double h) {
    const double s2 = s * s;
    const double dh00 = 6 * s2 - 6 * s;
    const double dh10 = 3 * s2 - 4 * s + 1;
    const double dh01 = -6 * s2 + 6 * s;
    const double dh11 = 3 * s2 - 2 * s;
    return (dh00 * y0 + dh01 * y1) / h + dh10 * f0 + dh11 * f1;
}

/// Embedded Dormand-Prince 5(4) stepper with PI step-size control.
///
/// State dimension is a compile-time constant; the right-hand side is any
/// callable rhs(r, y, dydr). Dense output between accepted steps is cubic
/// Hermite from the FSAL derivative pair.
template <int N>
class DormandPrince54 {
public:
    using State = std::array<double, N>;
    using Rhs = std::function<void(double, const State&, State&)>;

    struct StepResult {
        bool accepted;
        double h_used;
        double h_next;
        double error;
    };

    DormandPrince54(Rhs rhs, double rel_tol, double abs_tol)
        : rhs_(std::move(rhs)), rtol_(rel_tol), atol_(abs_tol) {}

    /// Initialize at (r0, y0); evaluates the FSAL derivative.
    void init(double r0, const State& y0) {
        r_ = r0;
        y_ = y0;
        rhs_(r_, y_, f_);
        err_prev_ = 1.0;
    }

    double r() const { return r_; }
    const State& y() const { return y_; }
    const State& f() const { return f_; }

    /// Propose an initial step size from the local derivative scale.
    double initial_step(double r_scale) const {
        double dnorm = 0.0, ynorm = 0.0;
        for (int i = 0; i < N; ++i) {
            double sk = atol_ + rtol_ * std::abs(y_[i]);
            dnorm = std::max(dnorm, std::abs(f_[i]) / sk);
            ynorm = std::max(ynorm, std::abs(y_[i]) / sk);
        }
        double h = (dnorm > 1e-12) ? 0.01 * std::max(ynorm, 1.0) / dnorm : 1e-6 * r_scale;
        return std::min(h, 0.1 * r_scale);
    }

    /// One attempted step of size h. On acceptance the internal state advances
    /// and y_old/f_old hold the previous endpoint for dense output.
    StepResult step(double h) {
        static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                                a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                                a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                                b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                                e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

        State k2, k3, k4, k5, k6, k7, yt, ynew;
        const State& k1 = f_;

        for (int i = 0; i < N; ++i) yt[i] = y_[i] + h * a21 * k1[i];
        rhs_(r_ + c2 * h, yt, k2);
        for (int i = 0; i < N; ++i) yt[i] = y_[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs_(r_ + c3 * h, yt, k3);
        for (int i = 0; i < N; ++i) yt[i] = y_[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs_(r_ + c4 * h, yt, k4);
        for (int i = 0; i < N; ++i)
            yt[i] = y_[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs_(r_ + c5 * h, yt, k5);
        for (int i = 0; i < N; ++i)
            yt[i] = y_[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        rhs_(r_ + h, yt, k6);
        for (int i = 0; i < N; ++i)
            ynew[i] = y_[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        rhs_(r_ + h, ynew, k7);

        double err = 0.0;
        for (int i = 0; i < N; ++i) {
            double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            double sk = atol_ + rtol_ * std::max(std::abs(y_[i]), std::abs(ynew[i]));
            double q = e / sk;
            err += q * q;
        }
        err = std::sqrt(err / N);

        // PI controller (Gustafsson): beta = 0.04, alpha = 0.7/5 - 0.75*beta
        const double order = 5.0;
        const double beta = 0.04, alpha = 1.0 / order - 0.75 * beta;
        double fac = std::pow(std::max(err, 1e-32), -alpha) * std::pow(err_prev_, beta);
        fac = std::min(5.0, std::max(0.2, 0.9 * fac));
        double h_next = h * fac;

        StepResult res{false, h, h_next, err};
        if (err <= 1.0 || !std::isfinite(err)) {
            if (!std::isfinite(err)) {  // NaN in derivatives: force rejection
                res.h_next = 0.25 * h;
                return res;
            }
            y_old_ = y_;
            f_old_ = f_;
            r_old_ = r_;
            y_ = ynew;
            f_ = k7;
            r_ = r_old_ + h;
            err_prev_ = std::max(err, 1e-4);
            res.accepted = true;
        }
        return res;
    }

    /// Undo the last accepted step (used to land a step boundary on an event).
    void revert() {
        r_ = r_old_;
        y_ = y_old_;
        f_ = f_old_;
    }

    /// Dense output on the last accepted step: s in [0,1] maps to [r_old, r].
    double dense(int comp, double s) const {
        return hermite(s, y_old_[comp], y_[comp], f_old_[comp], f_[comp], r_ - r_old_);
    }
    double dense_deriv(int comp, double s) const {
        return hermite_deriv(s, y_old_[comp], y_[comp], f_old_[comp], f_[comp], r_ - r_old_);
    }
    double r_old() const { return r_old_; }
    const State& y_old() const { return y_old_; }
    const State& f_old() const { return f_old_; }

private:
    Rhs rhs_;
    double rtol_, atol_;
    double r_ = 0, r_old_ = 0;
    State y_{}, f_{}, y_old_{}, f_old_{};
    double err_prev_ = 1.0;
};

} // namespace nodal

#endif
