// nodal: radial sign-changing bound states of weighted p-Laplace equations
// by shooting. Subcommands: solve, shoot, sweep, check, reduce, diag.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "nodal/diagnostics.hpp"
#include "nodal/io.hpp"

namespace fs = std::filesystem;
using nodal::json;

namespace {

struct GlobalArgs {
    std::string config;
    std::string out_dir = ".";
    bool seedless = false;  // reserved: the tool uses no randomness anywhere
    bool force = false;
    double tol_rel = 1e-10;
    double tol_abs = 1e-12;
    double r_max = 0.0;  // 0: use config grids
};

nodal::SolveOptions solve_options(const GlobalArgs& g, const nodal::ProblemConfig& pc) {
    nodal::SolveOptions opts;
    opts.rel_tol = g.tol_rel;
    opts.abs_tol = g.tol_abs;
    opts.r_max = (g.r_max > 0) ? g.r_max : pc.problem.grids.r_max;
    return opts;
}

std::string join_command(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

/// Gate for solve/shoot: the structural (Q*) and (f*) checks must pass
/// unless --force is given. Returns the failing names.
std::vector<std::string> failed_structural_checks(const nodal::ProblemConfig& pc) {
    std::vector<std::string> failed;
    for (const auto& rec : nodal::check_Q(pc.problem.weight, pc.problem.pe, pc.problem.grids))
        if (rec.verdict == nodal::Verdict::fail) failed.push_back(rec.name);
    for (const auto& rec : nodal::check_f(pc.problem.nonlin, pc.problem.grids))
        if (rec.verdict == nodal::Verdict::fail) failed.push_back(rec.name);
    return failed;
}

int cmd_solve(const GlobalArgs& g, double lambda, int stride, const std::string& command) {
    auto pc = nodal::load_problem_config(g.config);
    if (lambda == 0.0) {
        std::cerr << "error: lambda must be nonzero\n";
        return 1;
    }
    auto failed = failed_structural_checks(pc);
    if (!failed.empty() && !g.force) {
        auto rep = nodal::build_full_report(pc.problem, pc.pair);
        std::cerr << "hypothesis checks failed:";
        for (const auto& n : failed) std::cerr << ' ' << n;
        std::cerr << "\n" << nodal::report_to_table(rep)
                  << "use --force to solve anyway\n";
        return 2;
    }
    auto opts = solve_options(g, pc);
    nodal::Trajectory traj = nodal::solve(pc.problem, lambda, opts);
    fs::create_directories(g.out_dir);
    std::string csv = (fs::path(g.out_dir) / "trajectory.csv").string();
    std::string evj = (fs::path(g.out_dir) / "events.json").string();
    std::string man = (fs::path(g.out_dir) / "manifest.json").string();
    nodal::write_trajectory_csv(traj, csv, stride);
    write_json(nodal::events_to_json(traj), evj);
    write_json(nodal::make_manifest(pc.raw, command, opts, {csv, evj}), man);
    std::cout << "terminal: " << nodal::to_string(traj.terminal)
              << ", nodes: " << traj.node_count() << ", r_end: " << traj.r_end()
              << ", E_end: " << traj.final_energy() << '\n';
    return 0;
}

void write_gnuplot_script(const std::string& path, const std::string& csv,
                          const nodal::Trajectory& traj, int k) {
    std::ofstream out(path);
    out << "# gnuplot script: v(r) profile with node markers\n";
    out << "set datafile separator ','\n";
    out << "set xlabel 'r'\nset ylabel 'v(r)'\n";
    out << "set title '" << k << "-node solution'\n";
    out << "set key top right\n";
    out << "plot '" << csv << "' every ::1 using 1:2 with lines lw 2 title 'v(r)', \\\n";
    out << "     '-' using 1:2 with points pt 7 ps 1.5 title 'nodes'\n";
    for (double r : traj.nodes) out << nodal::fmt17(r) << ", 0\n";
    out << "e\n";
}

int cmd_shoot(const GlobalArgs& g, int k, int stride, const std::string& command) {
    auto pc = nodal::load_problem_config(g.config);
    auto failed = failed_structural_checks(pc);
    if (!failed.empty() && !g.force) {
        std::cerr << "hypothesis checks failed:";
        for (const auto& n : failed) std::cerr << ' ' << n;
        std::cerr << "; use --force\n";
        return 2;
    }
    auto opts = solve_options(g, pc);
    nodal::ShootResult res;
    try {
        res = nodal::find_k_node(pc.problem, k, opts);
    } catch (const std::exception& e) {
        std::cerr << "shoot failed: " << e.what() << '\n';
        return 3;
    }
    fs::create_directories(g.out_dir);
    std::string csv = (fs::path(g.out_dir) / "trajectory.csv").string();
    std::string resj = (fs::path(g.out_dir) / "shoot_result.json").string();
    std::string gp = (fs::path(g.out_dir) / "plot.gp").string();
    std::string man = (fs::path(g.out_dir) / "manifest.json").string();
    nodal::write_trajectory_csv(res.trajectory, csv, stride);
    write_json(nodal::shoot_result_to_json(res, csv), resj);
    write_gnuplot_script(gp, csv, res.trajectory, k);
    write_json(nodal::make_manifest(pc.raw, command, opts, {csv, resj, gp}), man);
    std::cout << "lambda_" << k << " = " << nodal::fmt17(res.lambda_k) << " (bracket ["
              << nodal::fmt17(res.bracket_lo) << ", " << nodal::fmt17(res.bracket_hi)
              << "], " << res.iterations << " bisections)\n";
    return 0;
}

int cmd_sweep(const GlobalArgs& g, double lam_lo, double lam_hi, int count,
              const std::string& command) {
    auto pc = nodal::load_problem_config(g.config);
    auto opts = solve_options(g, pc);
    auto lambdas = nodal::geomspace(lam_lo, lam_hi, count);
    auto cls = nodal::sweep(pc.problem, lambdas, opts);
    fs::create_directories(g.out_dir);
    std::string csv = (fs::path(g.out_dir) / "sweep.csv").string();
    {
        std::ofstream out(csv);
        out << "lambda,nodes,tag,final_E,radius\n";
        for (size_t i = 0; i < cls.size(); ++i) {
            const auto& c = cls[i];
            double radius = c.double_zero_radius ? *c.double_zero_radius
                            : c.settle_radius    ? *c.settle_radius
                                                 : 0.0;
            out << nodal::fmt17(lambdas[i]) << ',' << c.k << ',' << nodal::to_string(c.tag)
                << ',' << nodal::fmt17(c.final_E) << ',' << nodal::fmt17(radius) << '\n';
        }
    }
    std::string man = (fs::path(g.out_dir) / "manifest.json").string();
    write_json(nodal::make_manifest(pc.raw, command, opts, {csv}), man);
    std::cout << "swept " << count << " amplitudes; results in " << csv << '\n';
    return 0;
}

int cmd_check(const GlobalArgs& g, double sc_alpha, double sc_smax) {
    auto pc = nodal::load_problem_config(g.config);
    nodal::ScOptions sc;
    sc.alpha = sc_alpha;
    if (sc_smax > 0) sc.s_max = sc_smax;
    auto rep = nodal::build_full_report(pc.problem, pc.pair, sc);
    std::cout << nodal::report_to_table(rep);
    std::cout << "n_eff = " << pc.problem.n_eff << ", mu* = " << pc.problem.mu_star << '\n';
    return rep.all_pass_or_inconclusive() ? 0 : 2;
}

int cmd_reduce(const GlobalArgs& g, int per_decade, const std::string& command) {
    std::ifstream in(g.config);
    if (!in) {
        std::cerr << "cannot open config: " << g.config << '\n';
        return 1;
    }
    json cfg;
    in >> cfg;
    nodal::ProblemConfig pc;
    try {
        pc = nodal::parse_problem_config(cfg);
    } catch (const nodal::hypothesis_violation& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    if (!pc.pair) {
        std::cerr << "config does not define a raw weight pair; nothing to reduce\n";
        return 1;
    }
    auto rep_entries = nodal::check_W(*pc.pair, pc.problem.pe, pc.problem.grids);
    nodal::ConditionReport wrep;
    wrep.records = rep_entries;
    std::cout << nodal::report_to_table(wrep);
    if (wrep.find("W1")->verdict == nodal::Verdict::fail) {
        std::cerr << "(W1) fails: reduction not defined\n";
        return 2;
    }
    fs::create_directories(g.out_dir);
    std::string csv = (fs::path(g.out_dir) / "reduced_weight.csv").string();
    {
        std::ofstream out(csv);
        out << "r,q,dq,Q,h\n";
        const auto& w = pc.problem.weight;
        auto grid = nodal::geomspace(pc.problem.grids.r_min, pc.problem.grids.r_max,
                                     static_cast<int>(per_decade *
                                         std::log10(pc.problem.grids.r_max /
                                                    pc.problem.grids.r_min)) + 2);
        for (double r : grid)
            out << nodal::fmt17(r) << ',' << nodal::fmt17(w.q(r)) << ',' << nodal::fmt17(w.dq(r))
                << ',' << nodal::fmt17(w.Q(r)) << ',' << nodal::fmt17(w.h(r)) << '\n';
    }
    std::string repj = (fs::path(g.out_dir) / "w_report.json").string();
    write_json(nodal::report_to_json(wrep), repj);
    std::string man = (fs::path(g.out_dir) / "manifest.json").string();
    write_json(nodal::make_manifest(cfg, command, nodal::SolveOptions{}, {csv, repj}), man);
    return 0;
}

int cmd_diag(const GlobalArgs& g, double lambda, const std::string& traj_path,
             bool want_rotation, double c1, bool want_dissipation, double mu_arg,
             bool want_hident, const std::string& levels_arg, int layer_d,
             const std::string& layer_lambdas, const std::string& command) {
    auto pc = nodal::load_problem_config(g.config);
    auto opts = solve_options(g, pc);
    fs::create_directories(g.out_dir);
    json certs = json::object();
    bool all_pass = true;

    nodal::Trajectory traj;
    bool have_traj = false;
    if (!traj_path.empty()) {
        traj = nodal::load_trajectory_csv(traj_path, &pc.problem);
        have_traj = true;
    } else if (lambda != 0.0) {
        traj = nodal::solve(pc.problem, lambda, opts);
        have_traj = true;
    }

    if (want_rotation) {
        if (!have_traj) {
            std::cerr << "--rotation needs --lambda or --traj\n";
            return 1;
        }
        auto cert = nodal::rotation_certificate(pc.problem, traj, c1);
        json cj;
        cj["c1"] = cert.c1;
        cj["rho1"] = cert.rho1;
        cj["rho2"] = cert.rho2;
        cj["A"] = cert.A;
        cj["omega"] = cert.omega;
        cj["c0"] = cert.c0;
        cj["r_bar"] = cert.r_bar;
        cj["C2_used"] = cert.C2_used;
        cj["band_visited"] = cert.band_visited;
        cj["samples_in_band"] = cert.samples.size();
        if (cert.band_visited) {
            cj["verdict"] = cert.pass ? "pass" : "fail";
            cj["worst_margin"] = cert.worst_margin;
            all_pass = all_pass && cert.pass;
        } else {
            cj["verdict"] = "inconclusive (band not visited)";
        }
        certs["rotation"] = cj;
    }
    if (want_dissipation) {
        if (!have_traj) {
            std::cerr << "--dissipation needs --lambda or --traj\n";
            return 1;
        }
        double mu = (mu_arg >= 0) ? mu_arg : pc.problem.mu_star;
        double resid = nodal::dissipation_residual(pc.problem, traj, mu);
        certs["dissipation"] = {{"mu", mu}, {"rms_residual", resid},
                                {"verdict", resid <= 1e-5 ? "pass" : "fail"}};
        all_pass = all_pass && resid <= 1e-5;
    }
    if (want_hident) {
        if (!have_traj) {
            std::cerr << "--h-identity needs --lambda or --traj\n";
            return 1;
        }
        double resid = nodal::h_identity_residual(pc.problem, traj);
        certs["h_identity"] = {{"rms_residual", resid},
                               {"verdict", resid <= 1e-5 ? "pass" : "fail"}};
        all_pass = all_pass && resid <= 1e-5;
    }
    if (!levels_arg.empty()) {
        if (!have_traj) {
            std::cerr << "--levels needs --lambda or --traj\n";
            return 1;
        }
        std::vector<double> levels;
        std::stringstream ss(levels_arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) levels.push_back(std::stod(tok));
        auto hits = nodal::level_crossings(pc.problem, traj, levels);
        json lj = json::array();
        for (const auto& [a, r] : hits) lj.push_back({{"level", a}, {"r", r}});
        certs["level_crossings"] = lj;
    }
    if (layer_d > 0) {
        std::vector<double> lambdas;
        std::stringstream ss(layer_lambdas);
        std::string tok;
        while (std::getline(ss, tok, ',')) lambdas.push_back(std::stod(tok));
        if (lambdas.empty()) lambdas = {10.0, 100.0, 1000.0};
        auto table = nodal::critical_layer_probe(layer_d, lambdas, 1.0, opts);
        std::string csv = (fs::path(g.out_dir) / "critical_layer.csv").string();
        std::ofstream out(csv);
        out << "lambda,R\n";
        for (const auto& e : table)
            out << nodal::fmt17(e.lambda) << ','
                << (e.R ? nodal::fmt17(*e.R) : std::string("nan")) << '\n';
        certs["critical_layer"] = {{"table", csv}};
    }

    std::string cj = (fs::path(g.out_dir) / "certificates.json").string();
    write_json(certs, cj);
    write_json(nodal::make_manifest(pc.raw, command, opts, {cj}),
               (fs::path(g.out_dir) / "manifest.json").string());
    std::cout << certs.dump(2) << '\n';
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nodal: sign-changing radial bound states of weighted p-Laplace "
                 "equations by shooting"};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--config", g.config, "problem configuration JSON")->required(false);
    app.add_option("--out", g.out_dir, "output directory");
    app.add_flag("--seedless", g.seedless,
                 "reserved; the tool is deterministic and uses no randomness (no-op)");
    app.add_flag("--force", g.force, "run even when hypothesis checks fail");
    app.add_option("--tol-rel", g.tol_rel, "integrator relative tolerance");
    app.add_option("--tol-abs", g.tol_abs, "integrator absolute tolerance");
    app.add_option("--r-max", g.r_max, "integration range override");

    auto* s_solve = app.add_subcommand("solve", "integrate one trajectory");
    double lambda = 0.0;
    int stride = 1;
    s_solve->add_option("--lambda", lambda, "initial amplitude v(0)")->required();
    s_solve->add_option("--stride", stride, "CSV sample stride");

    auto* s_shoot = app.add_subcommand("shoot", "locate the k-node solution");
    int k = 0;
    s_shoot->add_option("--k", k, "prescribed node count")->required();

    auto* s_sweep = app.add_subcommand("sweep", "classify a geometric lambda grid");
    double lam_lo = 1.0, lam_hi = 100.0;
    int count = 16;
    s_sweep->add_option("--lambda-min", lam_lo, "grid start");
    s_sweep->add_option("--lambda-max", lam_hi, "grid end");
    s_sweep->add_option("--count", count, "grid size");

    auto* s_check = app.add_subcommand("check", "hypothesis report");
    double sc_alpha = 0.5, sc_smax = 0.0;
    s_check->add_option("--sc-alpha", sc_alpha, "alpha in the (SC) probe");
    s_check->add_option("--sc-smax", sc_smax, "upper end of the (SC) s-grid");

    auto* s_reduce = app.add_subcommand("reduce", "two-weight reduction table");
    int per_decade = 32;
    s_reduce->add_option("--points-per-decade", per_decade, "table density");

    auto* s_diag = app.add_subcommand("diag", "certificates along a trajectory");
    double diag_lambda = 0.0, c1 = 0.1, mu_arg = -1.0;
    std::string traj_path, levels_arg, layer_lambdas;
    int layer_d = 0;
    bool want_rotation = false, want_dissipation = false, want_hident = false;
    s_diag->add_option("--lambda", diag_lambda, "solve at this amplitude first");
    s_diag->add_option("--traj", traj_path, "use an existing trajectory CSV");
    s_diag->add_flag("--rotation", want_rotation, "rotation certificate");
    s_diag->add_option("--c1", c1, "rotation band level");
    s_diag->add_flag("--dissipation", want_dissipation, "dissipation identity residual");
    s_diag->add_option("--mu", mu_arg, "mu for the dissipation identity (default mu*)");
    s_diag->add_flag("--h-identity", want_hident, "H' = h'(F o v) residual");
    s_diag->add_option("--levels", levels_arg, "comma-separated energy levels");
    s_diag->add_option("--critical-layer-d", layer_d, "run the critical layer probe in d");
    s_diag->add_option("--layer-lambdas", layer_lambdas, "comma-separated probe amplitudes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 64;
    }

    std::string command = join_command(argc, argv);
    try {
        if (s_solve->parsed()) return cmd_solve(g, lambda, stride, command);
        if (s_shoot->parsed()) {
            if (k < 0) {
                std::cerr << "usage error: k must be >= 0\n";
                return 64;
            }
            return cmd_shoot(g, k, stride, command);
        }
        if (s_sweep->parsed()) return cmd_sweep(g, lam_lo, lam_hi, count, command);
        if (s_check->parsed()) return cmd_check(g, sc_alpha, sc_smax);
        if (s_reduce->parsed()) return cmd_reduce(g, per_decade, command);
        if (s_diag->parsed())
            return cmd_diag(g, diag_lambda, traj_path, want_rotation, c1, want_dissipation,
                            mu_arg, want_hident, levels_arg, layer_d, layer_lambdas, command);
    } catch (const nodal::hypothesis_violation& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 64;
}
