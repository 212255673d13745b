#ifndef NODAL_SHOOTER_HPP
#define NODAL_SHOOTER_HPP

#include <cmath>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "nodal/integrator.hpp"

namespace nodal {

enum class SetTag { A, I, Undecided };

inline const char* to_string(SetTag t) {
    switch (t) {
        case SetTag::A: return "A";
        case SetTag::I: return "I";
        default: return "Undecided";
    }
}

/// Which amplitude set the shot landed in: A_k (settled with k nodes and no
/// double zero), I_k (double zero after k nodes), or Undecided.
struct Classification {
    SetTag tag = SetTag::Undecided;
    int k = 0;
    std::string reason;                 // populated for Undecided
    std::optional<double> settle_radius;
    std::optional<double> double_zero_radius;
    double final_E = 0.0;
    std::vector<double> nodes;
};

/// Run the IVP at amplitude lambda and map the terminal tag to a set.
inline Classification classify(const Problem& prob, double lambda, const SolveOptions& opts) {
    if (!(lambda > 0)) throw std::invalid_argument("classify: need lambda > 0");
    Classification c;
    Trajectory traj;
    try {
        traj = solve(prob, lambda, opts);
    } catch (const std::exception& e) {
        c.tag = SetTag::Undecided;
        c.reason = std::string("step_failure: ") + e.what();
        return c;
    }
    c.k = traj.node_count();
    c.nodes = traj.nodes;
    c.final_E = traj.final_energy();
    c.settle_radius = traj.settle_radius;
    c.double_zero_radius = traj.double_zero;
    switch (traj.terminal) {
        case Terminal::settled_negative_energy: c.tag = SetTag::A; break;
        case Terminal::double_zero: c.tag = SetTag::I; break;
        case Terminal::reached_r_max:
            c.tag = SetTag::Undecided;
            c.reason = "reached r_max without settling";
            break;
        default:
            c.tag = SetTag::Undecided;
            c.reason = "step_failure";
            break;
    }
    return c;
}

/// Number of interior sign changes N(lambda); requires a decided trajectory.
inline int node_count(const Problem& prob, double lambda, const SolveOptions& opts) {
    Classification c = classify(prob, lambda, opts);
    if (c.tag == SetTag::Undecided)
        throw std::runtime_error("node_count undecided at lambda = " + fmt17(lambda) +
                                 ": increase r_max or max_nodes (" + c.reason + ")");
    return c.k;
}

/// Classify a grid of amplitudes; classification calls run concurrently and
/// the result order is the input order.
inline std::vector<Classification> sweep(const Problem& prob, const std::vector<double>& lambdas,
                                         const SolveOptions& opts, bool parallel = true) {
    std::vector<Classification> out(lambdas.size());
    if (!parallel || lambdas.size() < 4) {
        for (size_t i = 0; i < lambdas.size(); ++i) out[i] = classify(prob, lambdas[i], opts);
        return out;
    }
    std::vector<std::future<Classification>> futs;
    futs.reserve(lambdas.size());
    for (double lam : lambdas)
        futs.push_back(std::async(std::launch::async,
                                  [&prob, lam, &opts] { return classify(prob, lam, opts); }));
    for (size_t i = 0; i < futs.size(); ++i) out[i] = futs[i].get();
    return out;
}

struct SearchParams {
    double lambda_start = 0.0;     // 0: auto (slightly above beta+)
    double growth_factor = 1.6;
    double bisect_tol = 1e-9;      // relative bracket width
    double lambda_cap = 1e12;      // sweep overflow guard
    int max_bisect = 200;
};

struct SweepLogEntry {
    double lambda;
    int nodes;          // -1 for undecided
    char tag;           // 'A', 'I', 'U'
};

/// Result of the k-node search: a certified bracket around lambda_k = sup A_k
/// and the near-boundary trajectory at its midpoint.
struct ShootResult {
    int k = 0;
    double lambda_k = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    int iterations = 0;
    Trajectory trajectory;
    std::vector<SweepLogEntry> sweep_log;
};

/// Locate lambda_k: geometric sweep until the node counts bracket {<= k, >= k+1},
/// then bisection maintaining that invariant. The returned trajectory is the
/// midpoint run stopped in the near-zero-energy boundary window, so it carries
/// exactly k nodes and terminal E within +-10 * settle_tol (or a double zero).
inline ShootResult find_k_node(const Problem& prob, int k, const SolveOptions& opts,
                               const SearchParams& sp = {}) {
    if (k < 0) throw std::invalid_argument("find_k_node: need k >= 0");
    ShootResult result;
    result.k = k;

    const double beta = prob.nonlin.has_well ? prob.nonlin.beta_plus : 0.0;
    double lam = (sp.lambda_start > 0) ? sp.lambda_start : std::max(1.05 * beta, 0.5);

    // counting is cheap: stop a run as soon as k+1 nodes appear
    SolveOptions copts = opts;
    copts.stop_after_nodes = k + 1;
    auto count_capped = [&](double l) -> int {
        Classification c = classify(prob, l, copts);
        if (c.tag == SetTag::Undecided && c.k <= k)
            throw std::runtime_error("find_k_node: undecided classification at lambda = " +
                                     fmt17(l) + " (" + c.reason +
                                     "); increase r_max or loosen settle_tol");
        result.sweep_log.push_back({l, c.k, to_string(c.tag)[0]});
        return c.k;
    };

    // establish the lower end: a lambda with <= k nodes
    int n0 = count_capped(lam);
    int guard = 0;
    while (n0 > k) {
        if (++guard > 200 || lam - beta < 1e-12 * (1.0 + beta))
            throw std::runtime_error("find_k_node: no amplitude with <= k nodes above beta+");
        lam = beta + (lam - beta) / sp.growth_factor;
        n0 = count_capped(lam);
    }
    double lo = lam;
    // sweep upward for the k+1 side
    double hi = 0.0;
    double probe = lam;
    while (true) {
        probe *= sp.growth_factor;
        if (probe > sp.lambda_cap) {
            std::string log = "sweep log:";
            for (const auto& e : result.sweep_log)
                log += " (" + fmt17(e.lambda) + " -> " + std::to_string(e.nodes) + e.tag + ")";
            throw std::runtime_error("find_k_node: sweep exhausted the lambda range; " + log);
        }
        int n = count_capped(probe);
        if (n <= k) {
            lo = probe;  // first bracket containing the k -> k+1 transition
        } else {
            hi = probe;
            break;
        }
    }

    // bisection on the bracket: lo classifies <= k, hi classifies >= k+1
    int it = 0;
    while ((hi - lo) > sp.bisect_tol * 0.5 * (hi + lo) && it < sp.max_bisect) {
        double mid = std::sqrt(lo * hi);
        int n = count_capped(mid);
        if (n <= k) lo = mid; else hi = mid;
        ++it;
    }
    result.iterations = it;
    result.bracket_lo = lo;
    result.bracket_hi = hi;
    result.lambda_k = 0.5 * (lo + hi);

    // boundary trajectory. A compactly supported boundary run reaches the
    // double zero outright; otherwise stop in the |E| <= 10*settle_tol window
    // where the trajectory still hugs the k-node bound state.
    Trajectory full = solve(prob, result.lambda_k, opts);
    if (full.terminal == Terminal::double_zero && full.node_count() == k) {
        result.trajectory = std::move(full);
        return result;
    }
    SolveOptions bopts = opts;
    bopts.stop_at_energy = 5.0 * opts.settle_tol;
    bopts.stop_on_settle = true;
    for (int attempt = 0; attempt < 3; ++attempt) {
        result.trajectory = solve(prob, result.lambda_k, bopts);
        if (result.trajectory.node_count() >= k) break;
        // stopped before the k-th node: the energy window opened too early
        bopts.stop_at_energy = *bopts.stop_at_energy / 100.0;
    }
    return result;
}

} // namespace nodal

#endif
