#ifndef NODAL_HYPOTHESES_HPP
#define NODAL_HYPOTHESES_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nodal/problem.hpp"
#include "nodal/quadrature.hpp"
#include "nodal/weight.hpp"

namespace nodal {

enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        default: return "inconclusive";
    }
}

/// Numeric evidence for one structural hypothesis. The artifact certifies
/// hypotheses on explicit sampled ranges; it never claims a proof.
struct HypothesisRecord {
    std::string name;
    Verdict verdict = Verdict::inconclusive;
    std::vector<std::pair<std::string, double>> evidence;
    std::string note;

    HypothesisRecord() = default;
    explicit HypothesisRecord(std::string nm) : name(std::move(nm)) {}

    void add(const std::string& key, double value) { evidence.emplace_back(key, value); }
};

struct ConditionReport {
    std::vector<HypothesisRecord> records;

    const HypothesisRecord* find(const std::string& name) const {
        for (const auto& r : records)
            if (r.name == name) return &r;
        return nullptr;
    }
    bool any_fail() const {
        for (const auto& r : records)
            if (r.verdict == Verdict::fail) return true;
        return false;
    }
    bool all_pass_or_inconclusive() const { return !any_fail(); }
};

namespace detail {

/// Divergence trend of g(r) sampled on a geometric tail: "pass" when the
/// last sample dominates the first by the given factor, "fail" when bounded.
inline Verdict divergence_verdict(const std::vector<double>& vals, double pass_factor = 10.0,
                                  double fail_factor = 2.0) {
    double first = vals.front(), last = vals.back();
    if (!(first > 0.0)) return last > 0.0 ? Verdict::inconclusive : Verdict::fail;
    double ratio = last / first;
    if (ratio >= pass_factor) return Verdict::pass;
    if (ratio <= fail_factor) return Verdict::fail;
    return Verdict::inconclusive;
}

} // namespace detail

/// (Q1)-(Q4) on a sampled geometric grid in (0, r_max]; also records the
/// D1 <= r q / Q <= D2 envelope implied by (Q3).
inline std::vector<HypothesisRecord> check_Q(const Weight& w, const PExponent& /*pe*/,
                                             const Grids& grids) {
    std::vector<double> grid = geomspace(grids.r_min, grids.r_max,
                                         static_cast<int>(48 * std::log10(grids.r_max / grids.r_min)) + 2);
    std::vector<HypothesisRecord> out;

    HypothesisRecord q1{"Q1"};
    double qmin = 1e300, dqmin = 1e300;
    for (double r : grid) {
        qmin = std::min(qmin, w.q(r));
        dqmin = std::min(dqmin, w.dq(r));
    }
    q1.add("min q", qmin);
    q1.add("min dq", dqmin);
    q1.verdict = (qmin > 0.0 && dqmin > 0.0) ? Verdict::pass : Verdict::fail;
    out.push_back(q1);

    HypothesisRecord q2{"Q2"};
    int violations = 0;
    double prev = w.dq(grid[0]) / w.q(grid[0]);
    double worst = 0.0;
    for (size_t i = 1; i < grid.size(); ++i) {
        double cur = w.dq(grid[i]) / w.q(grid[i]);
        if (cur >= prev * (1.0 - 1e-12)) {
            if (cur > prev * (1.0 + 1e-10)) ++violations;
            worst = std::max(worst, cur / prev - 1.0);
        }
        prev = cur;
    }
    q2.add("monotonicity violations", violations);
    q2.add("worst ratio excess", worst);
    q2.verdict = (violations == 0) ? Verdict::pass : Verdict::fail;
    out.push_back(q2);

    HypothesisRecord q3{"Q3"};
    double c1 = 1e300, c2 = 0.0, d1 = 1e300, d2 = 0.0;
    for (double r : grid) {
        double v = r * w.dq(r) / w.q(r);
        c1 = std::min(c1, v);
        c2 = std::max(c2, v);
        double u = r * w.q(r) / w.Q(r);
        d1 = std::min(d1, u);
        d2 = std::max(d2, u);
    }
    q3.add("C1", c1);
    q3.add("C2", c2);
    q3.add("D1", d1);
    q3.add("D2", d2);
    q3.verdict = (c1 > 0.0 && std::isfinite(c2)) ? Verdict::pass : Verdict::fail;
    out.push_back(q3);

    HypothesisRecord q4{"Q4"};
    Verdict v4 = Verdict::pass;
    double worst_ratio = 1e300;
    for (double r0 : {0.1, 1.0, 10.0}) {
        std::vector<double> inc;
        for (double r : geomspace(grids.r_max / 100.0, grids.r_max, 13))
            inc.push_back(w.h(r + r0) - w.h(r));
        Verdict vv = detail::divergence_verdict(inc);
        worst_ratio = std::min(worst_ratio, inc.back() / std::max(inc.front(), 1e-300));
        if (vv == Verdict::fail) v4 = Verdict::fail;
        else if (vv == Verdict::inconclusive && v4 == Verdict::pass) v4 = Verdict::inconclusive;
    }
    q4.add("worst tail growth ratio", worst_ratio);
    q4.note = "increments h(r+r0)-h(r) for r0 in {0.1, 1, 10} over the last two decades";
    q4.verdict = v4;
    out.push_back(q4);
    return out;
}

/// (f1)-(f2) on sampled ranges.
inline std::vector<HypothesisRecord> check_f(const Nonlinearity& nl, const Grids& grids) {
    std::vector<HypothesisRecord> out;

    HypothesisRecord f1{"f1"};
    f1.add("f(0)", nl.f(0.0));
    f1.add("|f(1e-12)|", std::abs(nl.f(1e-12)));
    f1.verdict = (nl.f(0.0) == 0.0 && std::abs(nl.f(1e-12)) < 1e-3) ? Verdict::pass : Verdict::fail;
    out.push_back(f1);

    HypothesisRecord f2{"f2"};
    if (!nl.has_well || nl.beta_plus <= 0.0) {
        f2.verdict = Verdict::fail;
        f2.note = "no potential well: F has no sign-changing zeros beta-+";
        out.push_back(f2);
        return out;
    }
    const double bp = nl.beta_plus, bm = nl.beta_minus;
    f2.add("beta_plus", bp);
    f2.add("beta_minus", bm);
    double fscale = std::max(std::abs(nl.F(2 * bp)), 1.0);
    f2.add("|F(beta+)|", std::abs(nl.F(bp)));
    f2.add("|F(beta-)|", std::abs(nl.F(bm)));
    bool ok = std::abs(nl.F(bp)) <= 1e-10 * fscale && std::abs(nl.F(bm)) <= 1e-10 * fscale;
    for (double s : linspace(1e-3 * bp, bp * (1 - 1e-6), 400)) ok = ok && nl.F(s) < 0.0;
    for (double s : linspace(bm * (1 - 1e-6), -1e-3 * bp, 400)) ok = ok && nl.F(s) < 0.0;
    double smax = std::min(grids.s_max, 1e12);
    for (double s : geomspace(bp, smax, 200)) ok = ok && nl.f(s) > 0.0;
    for (double s : geomspace(bp, smax, 200)) ok = ok && nl.f(-s) < 0.0;
    double fr = nl.F(smax), fl = nl.F(-smax);
    f2.add("F(smax)/F(-smax)", fr / fl);
    ok = ok && std::abs(fr / fl - 1.0) < 1e-6;
    f2.verdict = ok ? Verdict::pass : Verdict::fail;
    out.push_back(f2);
    return out;
}

/// Parameters of the sub-criticality probe.
struct ScOptions {
    double alpha = 0.5;
    std::optional<double> mu;          // defaults to the problem's mu*
    double s_min = 1e2;
    double s_max = 1e30;
    int points_per_decade = 4;
    int inner_samples = 256;
    double r0 = 1.0;                   // range for the small-r condition (1.6)
};

/// (SC): evaluates the product
///   inf_{s1,s2 in [alpha s, s]} (F(s2) - mu s2 f(s2)) * Q(((1-alpha)s/phi_{p'}(f(s1)))^{1/p'})
/// over a geometric s-grid and classifies divergence: pass when the
/// last-decade minimum exceeds the first-decade maximum by a factor >= 10,
/// fail when the products stay bounded (ratio <= 2), else inconclusive.
inline HypothesisRecord check_sc(const Problem& prob, const ScOptions& opts = {}) {
    const double mu = opts.mu.value_or(prob.mu_star);
    if (mu < prob.mu_star - 1e-12)
        throw std::invalid_argument("check_sc: mu must be >= mu*");
    const double alpha = opts.alpha;
    if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("check_sc: alpha in (0,1)");

    HypothesisRecord rec{"SC"};
    rec.add("alpha", alpha);
    rec.add("mu", mu);

    // small-r condition (1.6): mu + (Q/q)' - 1/p >= 0 on (0, r0)
    double worst_small_r = 1e300;
    for (double r : geomspace(prob.grids.r_min, opts.r0, 64))
        worst_small_r = std::min(worst_small_r, mu + prob.weight.Qq_prime(r) - 1.0 / prob.pe.p);
    rec.add("min of (1.6) on small-r grid", worst_small_r);
    if (worst_small_r < -1e-9) {
        rec.verdict = Verdict::fail;
        rec.note = "condition (1.6) fails on the small-r grid";
        return rec;
    }

    const auto& f = prob.nonlin.f;
    const auto& F = prob.nonlin.F;
    const double pc = prob.pe.pconj;
    int n = static_cast<int>(opts.points_per_decade * std::log10(opts.s_max / opts.s_min)) + 1;
    std::vector<double> svals = geomspace(opts.s_min, opts.s_max, n);
    std::vector<std::pair<double, double>> products;
    for (double s : svals) {
        double A = 1e300, fmax = -1e300;
        for (double si : geomspace(alpha * s, s, opts.inner_samples)) {
            A = std::min(A, F(si) - mu * si * f(si));
            fmax = std::max(fmax, f(si));
        }
        if (!(fmax > 0.0)) {
            if (alpha * s > 1.2 * prob.nonlin.beta_plus)
                throw std::domain_error("check_sc: f <= 0 on [alpha s, s] with s beyond beta+; "
                                        "(f2) violated");
            continue;  // inside the well region; entry skipped
        }
        double arg = std::pow((1.0 - alpha) * s / std::pow(fmax, pc - 1.0), 1.0 / pc);
        products.emplace_back(s, A * prob.weight.Q(arg));
    }
    if (products.size() < 8) {
        rec.verdict = Verdict::inconclusive;
        rec.note = "too few valid grid points";
        return rec;
    }
    double s_first = products.front().first, s_last = products.back().first;
    double first_max = -1e300, last_min = 1e300;
    for (const auto& [s, v] : products) {
        if (s <= s_first * 10.0) first_max = std::max(first_max, v);
        if (s >= s_last / 10.0) last_min = std::min(last_min, v);
    }
    rec.add("first-decade max", first_max);
    rec.add("last-decade min", last_min);
    rec.add("valid grid points", static_cast<double>(products.size()));
    double clamped = std::max(first_max, 0.0);
    if (last_min > 0.0 && (clamped == 0.0 || last_min >= 10.0 * clamped))
        rec.verdict = Verdict::pass;
    else if (last_min <= 2.0 * clamped)
        rec.verdict = Verdict::fail;
    else
        rec.verdict = Verdict::inconclusive;
    rec.note = "grid s in [" + fmt17(opts.s_min) + ", " + fmt17(opts.s_max) + "], " +
               std::to_string(opts.inner_samples) + " inner samples";
    return rec;
}

/// (H): either |F|^{-1/p} is integrable near 0 (tested by dyadic-increment
/// decay of the quadrature) or h' is non-decreasing with h' -> infinity.
inline HypothesisRecord check_H(const Problem& prob) {
    HypothesisRecord rec{"H"};
    const auto& F = prob.nonlin.F;
    const double p = prob.pe.p;
    const double eps0 = (prob.nonlin.beta_plus > 0) ? 0.25 * prob.nonlin.beta_plus : 0.25;

    auto side_ratio = [&](double sign) {
        std::vector<double> inc;
        for (int j = 0; j < 30; ++j) {
            double hi = eps0 * std::pow(2.0, -j), lo = 0.5 * hi;
            inc.push_back(gauss16([&](double s) {
                return std::pow(std::abs(F(sign * s)), -1.0 / p); }, lo, hi));
        }
        double rsum = 0.0;
        for (size_t k = inc.size() - 5; k < inc.size(); ++k) rsum += inc[k] / inc[k - 1];
        return rsum / 5.0;
    };
    double rplus = side_ratio(1.0), rminus = side_ratio(-1.0);
    rec.add("dyadic increment ratio (s>0)", rplus);
    rec.add("dyadic increment ratio (s<0)", rminus);
    Verdict integrable;
    if (rplus < 0.97 && rminus < 0.97) integrable = Verdict::pass;
    else if (rplus > 1.02 || rminus > 1.02) integrable = Verdict::fail;
    else integrable = Verdict::inconclusive;

    // second branch: h' non-decreasing and h' -> infinity
    std::vector<double> grid = geomspace(std::max(prob.grids.r_min, 1e-3), prob.grids.r_max, 200);
    bool nondecr = true;
    double prev = prob.weight.dh(grid[0]);
    for (size_t i = 1; i < grid.size(); ++i) {
        double cur = prob.weight.dh(grid[i]);
        if (cur < prev * (1.0 - 1e-10)) nondecr = false;
        prev = cur;
    }
    double tail_ratio = prob.weight.dh(grid.back()) /
                        std::max(prob.weight.dh(grid.back() / 100.0), 1e-300);
    rec.add("h' nondecreasing", nondecr ? 1.0 : 0.0);
    rec.add("h' growth over last two decades", tail_ratio);
    Verdict growth;
    if (nondecr && tail_ratio >= 10.0) growth = Verdict::pass;
    else if (!nondecr || tail_ratio <= 2.0) growth = Verdict::fail;
    else growth = Verdict::inconclusive;

    if (integrable == Verdict::pass) {
        rec.verdict = Verdict::pass;
        rec.note = "compact-support branch: |F|^{-1/p} integrable at 0";
    } else if (growth == Verdict::pass) {
        rec.verdict = Verdict::pass;
        rec.note = "weight branch: h' nondecreasing and diverging";
    } else if (integrable == Verdict::inconclusive || growth == Verdict::inconclusive) {
        rec.verdict = Verdict::inconclusive;
        rec.note = "neither branch certified on the tested ranges";
    } else {
        rec.verdict = Verdict::fail;
        rec.note = "both branches fail on the tested ranges";
    }
    return rec;
}

/// (W1)-(W4) for a raw weight pair.
inline std::vector<HypothesisRecord> check_W(const WeightPair& pair, const PExponent& pe,
                                             const Grids& grids) {
    std::vector<HypothesisRecord> out;
    const double p = pe.p, pc = pe.pconj;

    HypothesisRecord w1{"W1"};
    {
        auto slope = [&](double r) {
            double f1 = pair.chi_integrand(p, r), f2 = pair.chi_integrand(p, 2.0 * r);
            return std::log(f2 / f1) / std::log(2.0);
        };
        double a0 = slope(1e-8), ainf = slope(1e6);
        w1.add("local exponent of (b/a)^{1/p} at 0", a0);
        w1.add("local exponent of (b/a)^{1/p} at infinity", ainf);
        if (a0 > -1.0 + 1e-9 && ainf > -1.0 + 1e-9) w1.verdict = Verdict::pass;
        else w1.verdict = Verdict::fail;
        w1.note = "integrability at 0 and divergence of chi at infinity, by local power fits";
    }
    out.push_back(w1);

    std::vector<double> grid = geomspace(grids.r_min, grids.r_max * 100.0, 400);

    HypothesisRecord w2{"W2"};
    {
        bool pos = true, decr = true;
        double prev = pair.psi(p, pc, grid[0]);
        pos = pos && prev > 0;
        for (size_t i = 1; i < grid.size(); ++i) {
            double cur = pair.psi(p, pc, grid[i]);
            pos = pos && cur > 0;
            if (cur >= prev * (1.0 + 1e-12)) decr = false;
            prev = cur;
        }
        w2.add("psi positive", pos ? 1.0 : 0.0);
        w2.add("psi strictly decreasing", decr ? 1.0 : 0.0);
        w2.verdict = (pos && decr) ? Verdict::pass : Verdict::fail;
    }
    out.push_back(w2);

    HypothesisRecord w3{"W3"};
    {
        double lo = 1e300, hi = 0.0;
        // chi by direct cumulative quadrature on the sampled grid
        double chi = tanh_sinh([&](double r, double, double) {
                         return pair.chi_integrand(p, r); }, 0.0, grid[0], 1e-12).value;
        double prev_r = grid[0];
        std::vector<double> vals;
        for (double r : grid) {
            if (r > prev_r) chi += gauss16([&](double t) { return pair.chi_integrand(p, t); },
                                           prev_r, r);
            prev_r = r;
            double v = chi * pair.psi(p, pc, r);
            vals.push_back(v);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        // Boundedness at the far end: per-decade increments of chi*psi must
        // decay (a constant increment means logarithmic growth, which cannot
        // be certified bounded on any finite grid).
        double r_end = grid.back();
        std::vector<double> tail;
        for (int j = 5; j >= 0; --j) {
            double r = r_end * std::pow(10.0, -j);
            double chi_r = chi;  // chi at grid.back() after the loop above
            if (j > 0)
                chi_r = tanh_sinh([&](double t, double, double) {
                            return pair.chi_integrand(p, t); }, 0.0, r, 1e-12).value;
            tail.push_back(chi_r * pair.psi(p, pc, r));
        }
        double d1 = std::abs(tail[4] - tail[3]), d2 = std::abs(tail[5] - tail[4]);
        double decay = (d1 > 0) ? d2 / d1 : 0.0;
        w3.add("C1 (min chi*psi)", lo);
        w3.add("C2 (max chi*psi)", hi);
        w3.add("tail increment decay per decade", decay);
        if (!(lo > 0.0)) {
            w3.verdict = Verdict::fail;
        } else if (d2 <= 1e-9 * std::abs(tail[5]) || decay < 0.9) {
            // converged, or increments shrinking geometrically: bounded
            if (decay > 1e-12 && decay < 0.9)
                w3.add("C2 (extrapolated limit)", tail[5] + d2 * decay / (1.0 - decay));
            w3.verdict = Verdict::pass;
        } else {
            w3.verdict = Verdict::inconclusive;
            w3.note = "chi*psi increments not decaying: boundedness not certifiable "
                      "on the sampled range";
        }
    }
    out.push_back(w3);

    HypothesisRecord w4{"W4"};
    {
        auto g = [&](double r) { return std::pow(pair.a.value(r), pc - 1.0) * pair.b.value(r); };
        Verdict v4 = Verdict::pass;
        double worst = 1e300;
        for (double r0 : {0.1, 1.0, 10.0}) {
            std::vector<double> inc;
            for (double r : geomspace(grids.r_max, grids.r_max * 1000.0, 19))
                inc.push_back(g(r + r0) - g(r));
            Verdict vv = detail::divergence_verdict(inc);
            worst = std::min(worst, inc.back() / std::max(inc.front(), 1e-300));
            if (vv == Verdict::fail) v4 = Verdict::fail;
            else if (vv == Verdict::inconclusive && v4 == Verdict::pass) v4 = Verdict::inconclusive;
        }
        w4.add("worst tail growth ratio", worst);
        w4.verdict = v4;
    }
    out.push_back(w4);
    return out;
}

/// Full report: every hypothesis appears exactly once; W* entries are
/// inconclusive placeholders when the problem has no raw weight pair.
inline ConditionReport build_full_report(const Problem& prob,
                                         const std::optional<WeightPair>& pair = std::nullopt,
                                         const ScOptions& sc_opts = {}) {
    ConditionReport rep;
    for (auto& r : check_Q(prob.weight, prob.pe, prob.grids)) rep.records.push_back(std::move(r));
    for (auto& r : check_f(prob.nonlin, prob.grids)) rep.records.push_back(std::move(r));
    rep.records.push_back(check_sc(prob, sc_opts));
    rep.records.push_back(check_H(prob));
    if (pair) {
        for (auto& r : check_W(*pair, prob.pe, prob.grids)) rep.records.push_back(std::move(r));
    } else {
        for (const char* nm : {"W1", "W2", "W3", "W4"}) {
            HypothesisRecord r{nm};
            r.verdict = Verdict::inconclusive;
            r.note = "no raw weight pair in this problem";
            rep.records.push_back(std::move(r));
        }
    }
    return rep;
}

} // namespace nodal

#endif
