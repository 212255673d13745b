#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nodal/library.hpp"
#include "nodal/shooter.hpp"
#include "oracles.hpp"

using namespace nodal;

namespace {
// ground-state amplitude of Delta u + u^3 - u = 0 (radial, d = 3), computed
// pre-build by an independent fixed-step RK4 bisection oracle and frozen
constexpr double lambda0_oracle = 4.337388;
} // namespace

TEST_CASE("classify: just above beta+ lands in A_0") {
    Problem prob = canonical_problem();
    SolveOptions opts;
    Classification c = classify(prob, 1.5, opts);  // beta+ = sqrt(2)
    REQUIRE(c.tag == SetTag::A);
    REQUIRE(c.k == 0);
    REQUIRE(c.final_E < 0.0);
    REQUIRE(c.settle_radius.has_value());
}

TEST_CASE("classify matches the RK4 oracle node count") {
    Problem prob = canonical_problem();
    SolveOptions opts;
    for (double lam : {3.0, 6.0, 10.0, 17.0}) {
        Classification c = classify(prob, lam, opts);
        auto ref = oracles::rk4_reference(prob, lam, opts.r_max);
        INFO("lambda = " << lam);
        REQUIRE(c.tag == SetTag::A);
        REQUIRE(c.k == static_cast<int>(ref.nodes.size()));
    }
    REQUIRE_THROWS_AS(classify(prob, -1.0, opts), std::invalid_argument);
}

TEST_CASE("classify: compact-support boundary lambda lands in I_k") {
    auto pe = PExponent::of(2.0);
    Problem prob = make_problem(pe, make_power_weight(3.0, pe), make_double_power(3.0, 0.5));
    SolveOptions opts;
    double lo = 2.0, hi = 6.0;
    Classification boundary;
    bool found = false;
    for (int it = 0; it < 60 && !found; ++it) {
        double mid = 0.5 * (lo + hi);
        Classification c = classify(prob, mid, opts);
        if (c.tag == SetTag::I) {
            boundary = c;
            found = true;
        } else if (c.k == 0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    REQUIRE(found);
    REQUIRE(boundary.double_zero_radius.has_value());
}

TEST_CASE("node_count: trivial cases and growth in lambda") {
    Problem prob = canonical_problem();
    SolveOptions opts;
    REQUIRE(node_count(prob, 1.45, opts) == 0);  // slightly above beta+
    REQUIRE(node_count(prob, 1.0, opts) == 0);   // constant solution at a zero of f

    // Prop 4.4 trend: N(lambda) -> infinity through the sweep 2, 4, ..., 2^12
    SolveOptions wide;
    wide.max_nodes = 500;
    wide.r_max = 200.0;
    int prev = 0;
    int first = -1, last = -1;
    for (int e = 1; e <= 12; ++e) {
        int n = node_count(prob, std::pow(2.0, e), wide);
        if (first < 0) first = n;
        INFO("lambda = 2^" << e << " -> " << n);
        REQUIRE(n >= prev - 1);  // nondecreasing in trend (small dips tolerated)
        prev = std::max(prev, n);
        last = n;
    }
    REQUIRE(last > first + 5);
    REQUIRE(last >= 10);
}

TEST_CASE("find_k_node reproduces the frozen ground-state amplitude") {
    Problem prob = canonical_problem();
    SolveOptions opts;
    ShootResult res = find_k_node(prob, 0, opts);
    INFO("lambda_0 = " << res.lambda_k);
    REQUIRE(std::abs(res.lambda_k - lambda0_oracle) <= 1e-3 * lambda0_oracle);
    REQUIRE(res.trajectory.node_count() == 0);
    REQUIRE(res.lambda_k > prob.nonlin.beta_plus);
    REQUIRE(res.bracket_lo < res.bracket_hi);
    // boundary trajectory: terminal energy in the +-10 settle_tol window
    double Eend = res.trajectory.final_energy();
    bool dz = res.trajectory.double_zero.has_value();
    REQUIRE((dz || std::abs(Eend) <= 10.0 * opts.settle_tol));
}

TEST_CASE("lambda_k strictly increasing in k with certified brackets") {
    Problem prob = canonical_problem();
    SolveOptions opts;
    double prev = 0.0;
    for (int k = 0; k <= 2; ++k) {
        ShootResult res = find_k_node(prob, k, opts);
        INFO("k = " << k << " lambda_k = " << res.lambda_k);
        REQUIRE(res.lambda_k > prev);
        prev = res.lambda_k;
        REQUIRE(res.trajectory.node_count() == k);

        // bracket endpoints classify to node counts on opposite sides of k
        Classification clo = classify(prob, res.bracket_lo, opts);
        Classification chi = classify(prob, res.bracket_hi, opts);
        REQUIRE(clo.k <= k);
        REQUIRE(chi.k >= k + 1);

        // +-neighborhoods of lambda_k (spec invariant)
        double tol = 1e-9;
        int below = node_count(prob, res.lambda_k * (1.0 - 10.0 * tol), opts);
        int above = node_count(prob, res.lambda_k * (1.0 + 100.0 * tol), opts);
        REQUIRE(below == k);
        REQUIRE(above >= k + 1);
    }
}

TEST_CASE("find_k_node input validation and failure modes") {
    Problem prob = canonical_problem();
    SolveOptions opts;
    REQUIRE_THROWS_AS(find_k_node(prob, -1, opts), std::invalid_argument);
    SearchParams sp;
    sp.lambda_cap = 2.0;  // sweep cannot reach the 1-node bracket
    REQUIRE_THROWS_WITH(find_k_node(prob, 1, opts, sp),
                        Catch::Matchers::ContainsSubstring("sweep log"));
}

TEST_CASE("sweep is deterministic regardless of parallel schedule") {
    Problem prob = canonical_problem();
    SolveOptions opts;
    auto lambdas = geomspace(1.5, 40.0, 12);
    auto par = sweep(prob, lambdas, opts, true);
    auto ser = sweep(prob, lambdas, opts, false);
    REQUIRE(par.size() == ser.size());
    for (size_t i = 0; i < par.size(); ++i) {
        REQUIRE(par[i].tag == ser[i].tag);
        REQUIRE(par[i].k == ser[i].k);
        REQUIRE(par[i].final_E == ser[i].final_E);  // bitwise: same solve path
    }
}

TEST_CASE("compact-support family: k-node solutions end in double zeros") {
    auto pe = PExponent::of(2.0);
    Problem prob = make_problem(pe, make_power_weight(3.0, pe), make_double_power(3.0, 0.5));
    SolveOptions opts;
    double prev_support = 0.0;
    for (int k = 0; k <= 1; ++k) {
        ShootResult res = find_k_node(prob, k, opts);
        INFO("k = " << k);
        REQUIRE(res.trajectory.node_count() == k);
        REQUIRE(res.trajectory.double_zero.has_value());
        REQUIRE(*res.trajectory.double_zero > prev_support);
        prev_support = *res.trajectory.double_zero;
    }
}
