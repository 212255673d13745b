#ifndef NODAL_IO_HPP
#define NODAL_IO_HPP

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "nodal/hypotheses.hpp"
#include "nodal/integrator.hpp"
#include "nodal/library.hpp"
#include "nodal/shooter.hpp"

namespace nodal {

using json = nlohmann::json;

/// Canonical serialization of a config: nlohmann::json keeps object keys
/// sorted and emits shortest round-trip numbers, so formatting-only changes
/// in the input file do not change the digest.
inline std::string canonical_json(const json& j) { return j.dump(); }

inline std::string config_digest(const json& j) { return fnv1a64_hex(canonical_json(j)); }

/// A parsed problem configuration.
struct ProblemConfig {
    Problem problem;
    std::optional<WeightPair> pair;  // present when the weight came as a raw pair
    json raw;
};

namespace detail {

inline double jnum(const json& j, const std::string& key) {
    if (!j.contains(key)) throw std::invalid_argument("config: missing parameter '" + key + "'");
    return j.at(key).get<double>();
}
inline double jnum_or(const json& j, const std::string& key, double dflt) {
    return j.contains(key) ? j.at(key).get<double>() : dflt;
}

} // namespace detail

inline ProblemConfig parse_problem_config(const json& cfg) {
    if (!cfg.contains("p")) throw std::invalid_argument("config: missing 'p'");
    PExponent pe = PExponent::of(cfg.at("p").get<double>());

    Grids grids;
    if (cfg.contains("grids")) {
        const auto& g = cfg.at("grids");
        grids.r_min = detail::jnum_or(g, "r_min", grids.r_min);
        grids.r_max = detail::jnum_or(g, "r_max", grids.r_max);
        grids.s_max = detail::jnum_or(g, "s_max", grids.s_max);
    }

    if (!cfg.contains("weight")) throw std::invalid_argument("config: missing 'weight'");
    const auto& wj = cfg.at("weight");
    std::string wkind = wj.value("kind", "");
    const auto& wp = wj.contains("params") ? wj.at("params") : json::object();
    Weight weight;
    std::optional<WeightPair> pair;
    double t_need = 2.0 * grids.r_max + 20.0;
    if (wkind == "power") {
        weight = make_power_weight(detail::jnum(wp, "N"), pe);
    } else if (wkind == "matukuma") {
        pair = make_matukuma_pair(detail::jnum(wp, "d"), detail::jnum(wp, "sigma"));
        weight = reduce_weights(*pair, pe, t_need);
    } else if (wkind == "hessian") {
        pair = make_hessian_pair(detail::jnum(wp, "d"), detail::jnum(wp, "k"));
        weight = reduce_weights(*pair, pe, t_need);
    } else if (wkind == "unified") {
        pair = make_unified_pair(detail::jnum(wp, "d"), detail::jnum(wp, "k"),
                                 detail::jnum(wp, "l"), detail::jnum(wp, "sigma"),
                                 detail::jnum_or(wp, "s", 1.0));
        weight = reduce_weights(*pair, pe, t_need);
    } else if (wkind == "pair") {
        WeightPair custom;
        custom.kind = "custom";
        const auto& aj = wp.at("a");
        const auto& bj = wp.at("b");
        custom.a = PowerBumpWeight{detail::jnum(aj, "e"), detail::jnum_or(aj, "sigma", 0.0),
                                   detail::jnum_or(aj, "s", 1.0)};
        custom.b = PowerBumpWeight{detail::jnum(bj, "e"), detail::jnum_or(bj, "sigma", 0.0),
                                   detail::jnum_or(bj, "s", 1.0)};
        pair = custom;
        weight = reduce_weights(*pair, pe, t_need);
    } else {
        throw std::invalid_argument(
            "config: unknown weight kind '" + wkind +
            "'; supported: power, matukuma, hessian, unified, pair");
    }

    if (!cfg.contains("nonlinearity")) throw std::invalid_argument("config: missing 'nonlinearity'");
    const auto& nj = cfg.at("nonlinearity");
    std::string nkind = nj.value("kind", "");
    const auto& np = nj.contains("params") ? nj.at("params") : json::object();
    Nonlinearity nl;
    if (nkind == "double_power") {
        nl = make_double_power(detail::jnum(np, "gamma"), detail::jnum(np, "m"));
    } else if (nkind == "power") {
        nl = make_power(detail::jnum(np, "gamma"));
    } else if (nkind == "power_log") {
        nl = make_power_log(static_cast<int>(detail::jnum(np, "d")), pe,
                            detail::jnum(np, "zeta"), detail::jnum(np, "s0"));
    } else if (nkind == "critical_extended") {
        nl = make_critical_extended(static_cast<int>(detail::jnum(np, "d")),
                                    detail::jnum_or(np, "beta", 1.0));
    } else if (nkind == "table") {
        nl = make_table_nonlinearity(np.at("s").get<std::vector<double>>(),
                                     np.at("f").get<std::vector<double>>());
    } else {
        throw std::invalid_argument(
            "config: unknown nonlinearity kind '" + nkind +
            "'; supported: double_power, power, power_log, critical_extended, table");
    }

    ProblemConfig out{make_problem(pe, std::move(weight), std::move(nl), grids), pair, cfg};
    return out;
}

inline ProblemConfig load_problem_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config parse error in " + path + ": " + e.what());
    }
    return parse_problem_config(j);
}

// ---------------------------------------------------------------------------
// trajectory CSV + events sidecar

inline void write_trajectory_csv(const Trajectory& traj, const std::string& path,
                                 int stride = 1) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "r,v,w,E,theta\n";
    for (size_t i = 0; i < traj.samples.size(); i += stride) {
        const auto& s = traj.samples[i];
        out << fmt17(s.r) << ',' << fmt17(s.v) << ',' << fmt17(s.w) << ',' << fmt17(s.E) << ','
            << fmt17(s.theta) << '\n';
    }
    if ((traj.samples.size() - 1) % stride != 0) {
        const auto& s = traj.samples.back();
        out << fmt17(s.r) << ',' << fmt17(s.v) << ',' << fmt17(s.w) << ',' << fmt17(s.E) << ','
            << fmt17(s.theta) << '\n';
    }
}

inline json events_to_json(const Trajectory& traj) {
    json j;
    j["nodes"] = traj.nodes;
    j["critical_points"] = traj.critical_points;
    if (traj.double_zero) j["double_zero"] = *traj.double_zero;
    else j["double_zero"] = nullptr;
    j["terminal"] = to_string(traj.terminal);
    j["lambda"] = traj.lambda;
    if (traj.settle_radius) j["settle_radius"] = *traj.settle_radius;
    if (traj.uniqueness_boundary) j["uniqueness_boundary"] = *traj.uniqueness_boundary;
    j["max_energy_increase"] = traj.max_energy_increase;
    j["angle_max_dev"] = traj.angle_max_dev;
    if (!traj.warnings.empty()) j["warnings"] = traj.warnings;
    return j;
}

/// Load a trajectory CSV (plus optional events sidecar). Derivative channels
/// are reconstructed from the problem's flow when one is given, so the loaded
/// trajectory supports Hermite evaluation and the diagnostic residuals.
inline Trajectory load_trajectory_csv(const std::string& path,
                                      const Problem* prob = nullptr,
                                      const std::string& events_path = "") {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trajectory: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty trajectory file: " + path);
    if (line != "r,v,w,E,theta")
        throw std::runtime_error("unexpected trajectory header: " + line);
    Trajectory traj;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        TrajectorySample s{};
        char* p = line.data();
        char* end = nullptr;
        double* fields[5] = {&s.r, &s.v, &s.w, &s.E, &s.theta};
        for (int i = 0; i < 5; ++i) {
            *fields[i] = std::strtod(p, &end);
            if (end == p) throw std::runtime_error("bad CSV row: " + line);
            p = (*end == ',') ? end + 1 : end;
        }
        if (prob) {
            const auto& pe = prob->pe;
            double fv = prob->nonlin.f(s.v);
            double dlq = (s.r > 0) ? prob->weight.dlogq(s.r) : 0.0;
            s.dv = phi_pconj(s.w, pe);
            s.dw = (s.r > 0) ? -dlq * s.w - fv : 0.0;
            double rho = p_polar_rho(s.v, s.w, pe);
            s.dtheta = (rho > 0 && s.r > 0)
                           ? -((pe.p / pe.pconj) * std::pow(std::abs(s.w), pe.pconj) +
                               s.v * fv + dlq * s.v * s.w) / rho
                           : 0.0;
        }
        traj.samples.push_back(s);
    }
    if (traj.samples.empty()) throw std::runtime_error("trajectory has no samples: " + path);
    while (traj.main_start_index + 1 < traj.samples.size() &&
           traj.samples[traj.main_start_index].r == 0.0)
        ++traj.main_start_index;
    if (!events_path.empty()) {
        std::ifstream ein(events_path);
        if (!ein) throw std::runtime_error("cannot open events: " + events_path);
        json j;
        ein >> j;
        traj.nodes = j.value("nodes", std::vector<double>{});
        traj.critical_points = j.value("critical_points", std::vector<double>{});
        if (j.contains("double_zero") && !j.at("double_zero").is_null())
            traj.double_zero = j.at("double_zero").get<double>();
        std::string term = j.value("terminal", "reached_r_max");
        if (term == "double_zero") traj.terminal = Terminal::double_zero;
        else if (term == "settled_negative_energy") traj.terminal = Terminal::settled_negative_energy;
        else if (term == "step_failure") traj.terminal = Terminal::step_failure;
        else traj.terminal = Terminal::reached_r_max;
        traj.lambda = j.value("lambda", 0.0);
        if (j.contains("settle_radius")) traj.settle_radius = j.at("settle_radius").get<double>();
    }
    return traj;
}

// ---------------------------------------------------------------------------
// reports and results

inline json report_to_json(const ConditionReport& rep) {
    json out = json::array();
    for (const auto& r : rep.records) {
        json e;
        e["hypothesis"] = r.name;
        e["verdict"] = to_string(r.verdict);
        json ev = json::object();
        for (const auto& [k, v] : r.evidence) ev[k] = v;
        e["evidence"] = ev;
        if (!r.note.empty()) e["note"] = r.note;
        out.push_back(e);
    }
    return out;
}

inline std::string report_to_table(const ConditionReport& rep) {
    std::ostringstream os;
    os << "hypothesis  verdict       evidence\n";
    for (const auto& r : rep.records) {
        os << r.name;
        for (size_t i = r.name.size(); i < 12; ++i) os << ' ';
        std::string v = to_string(r.verdict);
        os << v;
        for (size_t i = v.size(); i < 14; ++i) os << ' ';
        bool first = true;
        for (const auto& [k, val] : r.evidence) {
            if (!first) os << "; ";
            first = false;
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.6g", val);
            os << k << " = " << buf;
        }
        if (!r.note.empty()) os << (first ? "" : "; ") << r.note;
        os << '\n';
    }
    return os.str();
}

inline json shoot_result_to_json(const ShootResult& res, const std::string& trajectory_ref) {
    json j;
    j["k"] = res.k;
    j["lambda_k"] = res.lambda_k;
    j["bracket"] = {res.bracket_lo, res.bracket_hi};
    j["iterations"] = res.iterations;
    j["trajectory_ref"] = trajectory_ref;
    json ev;
    ev["nodes"] = res.trajectory.nodes;
    ev["terminal"] = to_string(res.trajectory.terminal);
    ev["final_E"] = res.trajectory.final_energy();
    if (res.trajectory.double_zero) ev["double_zero"] = *res.trajectory.double_zero;
    j["classification_evidence"] = ev;
    json log = json::array();
    for (const auto& e : res.sweep_log)
        log.push_back({{"lambda", e.lambda}, {"nodes", e.nodes}, {"tag", std::string(1, e.tag)}});
    j["sweep_log"] = log;
    return j;
}

inline std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for digest: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return fnv1a64_hex(ss.str());
}

/// Run manifest: digest of the canonicalized config, tool version, tolerances,
/// the command line, a timestamp and the digests of every emitted file.
inline json make_manifest(const json& cfg, const std::string& command,
                          const SolveOptions& opts,
                          const std::vector<std::string>& output_paths) {
    json m;
    m["config_digest"] = config_digest(cfg);
    m["version"] = version_string;
    m["command"] = command;
    m["tolerances"] = {{"rel_tol", opts.rel_tol},
                       {"abs_tol", opts.abs_tol},
                       {"double_zero_tol", opts.double_zero_tol},
                       {"settle_tol", opts.settle_tol}};
    {
        std::time_t t = std::time(nullptr);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
        m["timestamp"] = buf;
    }
    json outs = json::object();
    for (const auto& p : output_paths) outs[p] = file_digest(p);
    m["outputs"] = outs;
    return m;
}

} // namespace nodal

#endif
