#ifndef NODAL_LIBRARY_HPP
#define NODAL_LIBRARY_HPP

#include <string>
#include <vector>

#include "nodal/problem.hpp"
#include "nodal/weight.hpp"

namespace nodal {

/// One desk-scale benchmark problem with its classification flags. The flags
/// record which structural regime each entry probes, so test suites can pick
/// the right subsets (identities run on all, rotation/trend only on the
/// sub-critical ones, node searches only where (f2) holds).
struct LibraryEntry {
    std::string name;
    Problem problem;
    double lambda;
    double r_max;
    bool sub_critical;     // (SC) holds (gamma+1 < p* or certified family)
    bool f2_ok;            // (f2) holds: sign-changing machinery applies
    bool compact_support;  // |F|^{-1/p} integrable at 0
};

/// The built-in problem library (>= 20 entries spanning p, weights, families).
inline std::vector<LibraryEntry> builtin_library() {
    std::vector<LibraryEntry> lib;
    auto add = [&lib](std::string name, double p, Weight w, Nonlinearity nl, double lambda,
                      double r_max, bool sub, bool f2ok, bool compact) {
        Problem prob = make_problem(PExponent::of(p), std::move(w), std::move(nl));
        prob.grids.r_max = r_max;
        lib.push_back({std::move(name), std::move(prob), lambda, r_max, sub, f2ok, compact});
    };
    auto pw = [](double N, double p) { return make_power_weight(N, PExponent::of(p)); };

    add("dp-n3-p2-g3m1-lam2", 2.0, pw(3, 2.0), make_double_power(3.0, 1.0), 2.0, 60, true, true, false);
    add("dp-n3-p2-g3m1-lam5", 2.0, pw(3, 2.0), make_double_power(3.0, 1.0), 5.0, 60, true, true, false);
    add("dp-n3-p2-g3m1-lam9", 2.0, pw(3, 2.0), make_double_power(3.0, 1.0), 9.0, 60, true, true, false);
    add("dp-n3-p2-g3m05-lam2", 2.0, pw(3, 2.0), make_double_power(3.0, 0.5), 2.0, 60, true, true, true);
    add("dp-n3-p2-g3m05-lam6", 2.0, pw(3, 2.0), make_double_power(3.0, 0.5), 6.0, 60, true, true, true);
    add("dp-n4-p2-g3m1-lam3", 2.0, pw(4, 2.0), make_double_power(3.0, 1.0), 3.0, 60, true, true, false);
    add("dp-n25-p2-g22m1-lam4", 2.0, pw(2.5, 2.0), make_double_power(2.2, 1.0), 4.0, 60, true, true, false);
    add("dp-n4-p3-g4m2-lam3", 3.0, pw(4, 3.0), make_double_power(4.0, 2.0), 3.0, 60, true, true, false);
    add("dp-n3-p15-g15m08-lam2", 1.5, pw(3, 1.5), make_double_power(1.5, 0.8), 2.0, 60, true, true, false);
    {
        PExponent pe = PExponent::of(2.0);
        add("matukuma-d3s15-g3m1-lam3", 2.0, reduce_weights(make_matukuma_pair(3, 1.5), pe, 140.0),
            make_double_power(3.0, 1.0), 3.0, 60, true, true, false);
        add("matukuma-d3s2-g3m1-lam7", 2.0, reduce_weights(make_matukuma_pair(3, 2), pe, 140.0),
            make_double_power(3.0, 1.0), 7.0, 60, true, true, false);
    }
    {
        PExponent pe = PExponent::of(3.0);
        add("hessian-d3k2-g25m1-lam2", 3.0, reduce_weights(make_hessian_pair(3, 2), pe),
            make_double_power(2.5, 1.0), 2.0, 60, true, true, false);
    }
    {
        PExponent pe = PExponent::of(2.0);
        add("unified-d3k1l1-g3m1-lam3", 2.0, reduce_weights(make_unified_pair(3, 1, 1, 1, 2), pe),
            make_double_power(3.0, 1.0), 3.0, 60, true, true, false);
        add("unified-d4k0l0-g3m1-lam2", 2.0, reduce_weights(make_unified_pair(4, 0, 0, 1, 1), pe),
            make_double_power(3.0, 1.0), 2.0, 60, true, true, false);
    }
    add("powerlog-d3z4-lam8", 2.0, pw(3, 2.0),
        make_power_log(3, PExponent::of(2.0), 4.0, 6.0), 8.0, 60, true, true, false);
    add("critext-d5-lam4", 2.0, pw(5, 2.0), make_critical_extended(5, 1.0), 4.0, 60, false, true, false);
    add("at-power-d4-lam1", 2.0, pw(4, 2.0), make_power(3.0), 1.0, 60, false, false, false);
    add("power-n3-g3-lam2", 2.0, pw(3, 2.0), make_power(3.0), 2.0, 60, true, false, false);
    add("dp-n35-p25-g25m12-lam3", 2.5, pw(3.5, 2.5), make_double_power(2.5, 1.2), 3.0, 60, true, true, false);
    add("dp-n3-p2-g5m1-lam3", 2.0, pw(3, 2.0), make_double_power(5.0, 1.0), 3.0, 60, false, true, false);
    add("dp-n3-p2-g45m1-lam6", 2.0, pw(3, 2.0), make_double_power(4.5, 1.0), 6.0, 60, true, true, false);
    add("dp-n6-p2-g15m05-lam3", 2.0, pw(6, 2.0), make_double_power(1.5, 0.5), 3.0, 60, true, true, true);
    add("dp-n6-p4-g3m1-lam2", 4.0, pw(6, 4.0), make_double_power(3.0, 1.0), 2.0, 60, true, true, false);
    add("dp-n2-p15-g12m04-lam2", 1.5, pw(2, 1.5), make_double_power(1.2, 0.4), 2.0, 60, true, true, true);
    return lib;
}

/// The canonical sub-critical problem of the node-existence tests:
/// p = 2, q = r^2, f(s) = s^3 - s  (radial Delta u + u^3 - u = 0 in R^3).
inline Problem canonical_problem() {
    PExponent pe = PExponent::of(2.0);
    return make_problem(pe, make_power_weight(3.0, pe), make_double_power(3.0, 1.0));
}

} // namespace nodal

#endif
