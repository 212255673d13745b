#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nodal/integrator.hpp"
#include "nodal/library.hpp"
#include "oracles.hpp"

using namespace nodal;

namespace {
Problem at_problem() {  // p = 2, d = 4, q = r^3, f = s^3: Aubin-Talenti oracle
    auto pe = PExponent::of(2.0);
    return make_problem(pe, make_power_weight(4.0, pe), make_power(3.0));
}
double at_exact(double r) { return 1.0 / (1.0 + r * r / 8.0); }
} // namespace

TEST_CASE("energy basics") {
    Problem prob = canonical_problem();
    REQUIRE(energy(prob, prob.nonlin.beta_plus, 0.0) == Catch::Approx(0.0).margin(1e-14));
    REQUIRE(energy(prob, 0.0, 0.7) == Catch::Approx(0.5 * 0.7 * 0.7));
    REQUIRE(energy(prob, 2.0, 0.0) == Catch::Approx(prob.nonlin.F(2.0)));
}

TEST_CASE("startup: constant solution at a zero of f") {
    Problem prob = canonical_problem();  // f(1) = 0
    auto st = startup(prob, 1.0, 1e-3);
    REQUIRE(st.v == Catch::Approx(1.0));
    REQUIRE(st.w == Catch::Approx(0.0).margin(1e-300));
    for (const auto& s : st.samples) {
        REQUIRE(s.v == Catch::Approx(1.0));
        REQUIRE(s.w == 0.0);
    }
}

TEST_CASE("startup: leading quadratic profile for p = 2 power weights") {
    // v(r) ~ lambda - f(lambda) r^2 / (2d)
    Problem prob = canonical_problem();  // d = 3
    double lam = 2.0;
    auto st = startup(prob, lam, 1e-3);
    double expected = lam - prob.nonlin.f(lam) * st.r1 * st.r1 / 6.0;
    REQUIRE(st.v == Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("startup: Aubin-Talenti profile to fourth order") {
    Problem prob = at_problem();
    auto st1 = startup(prob, 1.0, 1e-3);
    double e1 = std::abs(st1.v - at_exact(st1.r1));
    REQUIRE(e1 < 1e-9);
    // halving the startup radius must shrink the defect at fourth order
    auto st2 = startup(prob, 1.0, 5e-4);
    double e2 = std::abs(st2.v - at_exact(st2.r1));
    REQUIRE(e2 * 8.0 <= e1 + 1e-15);
}

TEST_CASE("solve: Aubin-Talenti closed-form oracle") {
    Problem prob = at_problem();
    SolveOptions opts;
    opts.r_max = 5.0;
    Trajectory traj = solve(prob, 1.0, opts);
    REQUIRE(traj.terminal == Terminal::reached_r_max);
    double worst = 0.0;
    for (const auto& s : traj.samples) {
        if (s.r > 5.0) continue;
        worst = std::max(worst, std::abs(s.v - at_exact(s.r)) / at_exact(s.r));
    }
    INFO("max rel err " << worst);
    REQUIRE(worst <= 1e-6);
    REQUIRE(traj.node_count() == 0);
}

TEST_CASE("solve: lambda inside the well settles with no nodes") {
    Problem prob = canonical_problem();
    SolveOptions opts;
    Trajectory traj = solve(prob, 1.2, opts);  // F(1.2) < 0
    REQUIRE(traj.terminal == Terminal::settled_negative_energy);
    REQUIRE(traj.node_count() == 0);
    REQUIRE_FALSE(traj.warnings.empty());  // lambda <= beta+ warning
    auto ref = oracles::rk4_reference(prob, 1.2, 60.0);
    REQUIRE(ref.terminal == "settled");
    REQUIRE(ref.nodes.empty());
}

TEST_CASE("solve: invalid inputs rejected") {
    Problem prob = canonical_problem();
    SolveOptions opts;
    REQUIRE_THROWS_AS(solve(prob, 0.0, opts), std::invalid_argument);
    SolveOptions bad;
    bad.rel_tol = -1.0;
    REQUIRE_THROWS_AS(solve(prob, 2.0, bad), std::invalid_argument);
}

TEST_CASE("energy identity residual on the canonical problem") {
    Problem prob = canonical_problem();
    SolveOptions opts;
    opts.stop_on_settle = false;
    opts.r_max = 40.0;
    for (double lam : {2.0, 5.0, 9.0}) {
        Trajectory traj = solve(prob, lam, opts);
        double resid = e_prime_residual(prob, traj);
        INFO("lambda = " << lam << " residual = " << resid);
        REQUIRE(resid <= 1e-7);
        REQUIRE(traj.max_energy_increase <= 1e-9);
    }
}

TEST_CASE("double zero detected at the compact-support boundary") {
    // m = 1/2: |F|^{-1/p} integrable; the 0/1-node boundary trajectory is
    // absorbed at (0,0) at finite radius
    auto pe = PExponent::of(2.0);
    Problem prob = make_problem(pe, make_power_weight(3.0, pe), make_double_power(3.0, 0.5));
    SolveOptions opts;
    opts.r_max = 60.0;
    double lo = 2.0, hi = 6.0;  // 0 nodes at 2, >= 1 node at 6
    std::optional<Trajectory> dz_traj;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        Trajectory t = solve(prob, mid, opts);
        if (t.terminal == Terminal::double_zero) {
            dz_traj = std::move(t);
            break;
        }
        if (t.node_count() == 0) lo = mid; else hi = mid;
    }
    REQUIRE(dz_traj.has_value());
    REQUIRE(dz_traj->double_zero.has_value());
    REQUIRE(*dz_traj->double_zero < 20.0);
    REQUIRE(*dz_traj->double_zero > 0.5);
}

TEST_CASE("no double zero for the exponentially decaying family") {
    // m = 1: rho -> 0 only asymptotically; up to r = 1e3 no double zero fires
    Problem prob = canonical_problem();
    SolveOptions opts;
    opts.r_max = 1000.0;
    opts.stop_on_settle = false;
    Trajectory t1 = solve(prob, 4.3374, opts);  // near-ground-state amplitude
    REQUIRE_FALSE(t1.double_zero.has_value());
    Trajectory t2 = solve(prob, 2.0, opts);
    REQUIRE_FALSE(t2.double_zero.has_value());
}

TEST_CASE("constant solution has constant rho and no double zero") {
    Problem prob = canonical_problem();
    SolveOptions opts;
    opts.stop_on_settle = false;
    opts.r_max = 50.0;
    Trajectory traj = solve(prob, 1.0, opts);  // f(1) = 0, F(1) < 0
    REQUIRE_FALSE(traj.double_zero.has_value());
    REQUIRE(traj.node_count() == 0);
    for (const auto& s : traj.samples) {
        REQUIRE(s.v == Catch::Approx(1.0).margin(1e-9));
        REQUIRE(p_polar_rho(s.v, s.w, prob.pe) == Catch::Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("oracle equivalence across the library") {
    auto lib = builtin_library();
    REQUIRE(lib.size() >= 20);
    for (const auto& e : lib) {
        INFO(e.name);
        SolveOptions opts;
        opts.r_max = e.r_max;
        Trajectory traj = solve(e.problem, e.lambda, opts);
        auto ref = oracles::rk4_reference(e.problem, e.lambda, e.r_max);
        INFO("lib terminal " << to_string(traj.terminal) << ", oracle " << ref.terminal);
        REQUIRE(traj.node_count() == static_cast<int>(ref.nodes.size()));
        switch (traj.terminal) {
            case Terminal::settled_negative_energy: REQUIRE(ref.terminal == "settled"); break;
            case Terminal::double_zero: REQUIRE(ref.terminal == "double_zero"); break;
            case Terminal::reached_r_max: REQUIRE(ref.terminal == "rmax"); break;
            default: FAIL("unexpected step failure"); break;
        }
        for (int i = 0; i < traj.node_count(); ++i) {
            REQUIRE(traj.nodes[i] == Catch::Approx(ref.nodes[i]).margin(2e-3));
        }
    }
}

TEST_CASE("energy monotonicity and winding consistency across the library") {
    for (const auto& e : builtin_library()) {
        INFO(e.name);
        SolveOptions opts;
        opts.r_max = e.r_max;
        Trajectory traj = solve(e.problem, e.lambda, opts);
        REQUIRE(traj.max_energy_increase <= 1e-9);
        REQUIRE(traj.angle_max_dev <= 0.75);  // half a quadrant plus refinement slack
        // node count vs winding estimate |theta|/pi_p within +-1
        if (traj.node_count() > 0) {
            double th_end = std::abs(traj.samples.back().theta);
            double winding = th_end / pi_p(e.problem.pe);
            REQUIRE(std::abs(traj.node_count() - winding) <= 1.0 + 1e-6);
        }
    }
}

TEST_CASE("settled trajectories approach a zero of f (asymptotic limit)") {
    Problem prob = canonical_problem();
    SolveOptions opts;
    opts.stop_on_settle = false;
    opts.r_max = 60.0;
    Trajectory traj = solve(prob, 2.0, opts);
    const auto& last = traj.samples.back();
    bool f_small = std::abs(prob.nonlin.f(last.v)) < 1e-4;
    // |w| envelope still decaying: compare the last tenth with the one before
    size_t n = traj.samples.size();
    double late = 0.0, prev = 0.0;
    for (size_t i = n - n / 10; i < n; ++i) late = std::max(late, std::abs(traj.samples[i].w));
    for (size_t i = n - 2 * (n / 10); i < n - n / 10; ++i)
        prev = std::max(prev, std::abs(traj.samples[i].w));
    REQUIRE((f_small || late < prev));
    // terminal E close to F at the approached zero of f
    REQUIRE(last.E <= 0.0);
    REQUIRE(last.E >= prob.nonlin.F(1.0) - 1e-6);
}

TEST_CASE("doubling r_max never changes the node count of a settled run") {
    Problem prob = canonical_problem();
    for (double lam : {2.0, 5.0, 9.0, 20.0}) {
        SolveOptions o1;
        o1.r_max = 60.0;
        SolveOptions o2;
        o2.r_max = 120.0;
        Trajectory t1 = solve(prob, lam, o1);
        Trajectory t2 = solve(prob, lam, o2);
        REQUIRE(t1.terminal == Terminal::settled_negative_energy);
        REQUIRE(t1.node_count() == t2.node_count());
    }
}

TEST_CASE("trajectory eval interpolates between samples") {
    Problem prob = canonical_problem();
    SolveOptions opts;
    Trajectory traj = solve(prob, 5.0, opts);
    for (size_t i = traj.main_start_index; i + 1 < traj.samples.size(); i += 7) {
        double r = 0.5 * (traj.samples[i].r + traj.samples[i + 1].r);
        auto s = traj.eval(r);
        REQUIRE(s.r == Catch::Approx(r));
        // interpolated state satisfies the flow to leading order
        REQUIRE(s.dv == Catch::Approx(phi_pconj(s.w, prob.pe)).margin(1e-5));
    }
}

TEST_CASE("e_prime residual shrinks when tolerances tighten") {
    Problem prob = canonical_problem();
    SolveOptions loose;
    loose.rel_tol = 1e-6;
    loose.abs_tol = 1e-9;
    loose.stop_on_settle = false;
    loose.r_max = 30.0;
    SolveOptions tight = loose;
    tight.rel_tol = 1e-10;
    tight.abs_tol = 1e-13;
    double r_loose = e_prime_residual(prob, solve(prob, 5.0, loose));
    double r_tight = e_prime_residual(prob, solve(prob, 5.0, tight));
    REQUIRE(r_tight < r_loose);
}
