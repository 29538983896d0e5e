#ifndef FRACWEST_SCENARIOS_HPP
#define FRACWEST_SCENARIOS_HPP

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fracwest/errors.hpp"
#include "fracwest/stepper.hpp"

namespace fracwest {

struct Scenario {
    std::string name;
    std::map<std::string, std::string> overrides;
    std::string out_dir = "out";
};

/// Fully resolved scalar parameters of a scenario run set.
struct ScenarioParams {
    std::string scenario;
    int dim = 1;
    double xa = -1.0, xb = 1.0;
    int mesh_cells = 400;
    double a = 1.0, k = 0.09, mu = 0.5, r = 0.0;
    char kernel = 'A';
    bool corrected = false;
    double T = 0.5, dt = 0.01;
    std::string u0_name = "zero", v0_name = "zero";
    double newton_tol = 1e-10;
    int newton_max = 20;
    std::vector<double> dt_list;
    int ref_refine = 16;
    std::vector<double> snapshot_times;
    std::string out_dir = "out";
};

inline const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names{
        "test1-convergence", "test2-vary-k", "test3-vary-a",
        "test4-vary-mu", "test5-vary-r", "conv2d"};
    return names;
}

// ---------------------------------------------------------------------------
// config text -> key/value pairs
// ---------------------------------------------------------------------------

struct ConfigEntry {
    std::string key, value;
    int line;
};

inline std::vector<ConfigEntry> parse_key_values(const std::string& text) {
    std::vector<ConfigEntry> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config parse error at line " + std::to_string(lineno) +
                                     ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config parse error at line " + std::to_string(lineno) +
                                     ": empty key");
        out.push_back({key, value, lineno});
    }
    return out;
}

namespace detail {

inline double parse_double(const ConfigEntry& e) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(e.value, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != e.value.size())
        throw std::runtime_error("config parse error at line " + std::to_string(e.line) +
                                 ": bad number for '" + e.key + "'");
    return v;
}

inline int parse_int(const ConfigEntry& e) {
    const double v = parse_double(e);
    const int i = static_cast<int>(std::llround(v));
    if (std::fabs(v - i) > 0)
        throw std::runtime_error("config parse error at line " + std::to_string(e.line) +
                                 ": integer expected for '" + e.key + "'");
    return i;
}

inline bool parse_bool(const ConfigEntry& e) {
    if (e.value == "true" || e.value == "1") return true;
    if (e.value == "false" || e.value == "0") return false;
    throw std::runtime_error("config parse error at line " + std::to_string(e.line) +
                             ": boolean expected for '" + e.key + "'");
}

inline std::vector<double> parse_double_list(const ConfigEntry& e) {
    std::vector<double> out;
    std::istringstream in(e.value);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        ConfigEntry sub{e.key, tok, e.line};
        const auto b = tok.find_first_not_of(" \t");
        const auto en = tok.find_last_not_of(" \t");
        sub.value = (b == std::string::npos) ? "" : tok.substr(b, en - b + 1);
        out.push_back(parse_double(sub));
    }
    if (out.empty())
        throw std::runtime_error("config parse error at line " + std::to_string(e.line) +
                                 ": empty list for '" + e.key + "'");
    return out;
}

} // namespace detail

inline ScenarioParams scenario_defaults(const std::string& name) {
    ScenarioParams p;
    p.scenario = name;
    if (name == "test1-convergence") {
        p.dim = 1;
        p.xa = -1.0;
        p.xb = 1.0;
        p.mesh_cells = 400;
        p.a = 30.0;
        p.k = 0.09;
        p.mu = 0.5;
        p.r = 0.0;
        p.T = 0.5;
        p.dt = 0.01;
        p.u0_name = "sin_pi";
        p.v0_name = "sin_pi";
        p.dt_list = {1.0 / 25, 1.0 / 50, 1.0 / 100, 1.0 / 200};
        p.ref_refine = 16;
    } else if (name == "test2-vary-k") {
        p.dim = 1;
        p.xa = 0.0;
        p.xb = 20.0;
        p.mesh_cells = 800;
        p.a = 1.0;
        p.T = 4.0;
        p.dt = 0.01;
        p.u0_name = "gaussian:5:10";
        p.v0_name = "zero";
        p.snapshot_times = {4.0};
    } else if (name == "test3-vary-a") {
        p.dim = 1;
        p.xa = 0.0;
        p.xb = 40.0;
        p.mesh_cells = 1600;
        p.T = 4.0;
        p.dt = 0.01;
        p.u0_name = "gaussian:5:20";
        p.v0_name = "zero";
        p.snapshot_times = {0.8, 1.6, 2.4, 3.2, 4.0};
    } else if (name == "test4-vary-mu") {
        p.dim = 1;
        p.xa = 0.0;
        p.xb = 20.0;
        p.mesh_cells = 800;
        p.a = 1.0;
        p.T = 4.0;
        p.dt = 0.01;
        p.u0_name = "gaussian:5:10";
        p.v0_name = "zero";
        p.snapshot_times = {4.0};
    } else if (name == "test5-vary-r") {
        p.dim = 1;
        p.xa = 0.0;
        p.xb = 20.0;
        p.mesh_cells = 800;
        p.a = 1.0;
        p.mu = 0.5;
        p.T = 4.0;
        p.dt = 0.01;
        p.u0_name = "gaussian:5:10";
        p.v0_name = "zero";
        p.snapshot_times = {4.0};
    } else if (name == "conv2d") {
        p.dim = 2;
        p.xa = -1.0;
        p.xb = 1.0;
        p.mesh_cells = 32;
        p.a = 1.0;
        p.k = 0.09;
        p.mu = 0.5;
        p.r = 0.0;
        p.T = 0.5;
        p.dt = 1.0 / 80;
        p.u0_name = "manufactured";
        p.v0_name = "manufactured";
        p.dt_list = {1.0 / 40, 1.0 / 80, 1.0 / 160};
    } else {
        throw std::runtime_error("unknown scenario '" + name + "'");
    }
    return p;
}

inline void apply_overrides(ScenarioParams& p, const std::vector<ConfigEntry>& kv) {
    for (const auto& e : kv) {
        if (e.key == "scenario") {
            if (e.value != p.scenario)
                throw std::runtime_error("config scenario '" + e.value +
                                         "' conflicts with selected '" + p.scenario + "'");
        } else if (e.key == "a") {
            p.a = detail::parse_double(e);
            if (!(p.a >= 0.0)) throw std::runtime_error("range error: a >= 0 required (line " + std::to_string(e.line) + ")");
        } else if (e.key == "k") {
            p.k = detail::parse_double(e);
            if (!(p.k >= 0.0)) throw std::runtime_error("range error: k >= 0 required (line " + std::to_string(e.line) + ")");
        } else if (e.key == "mu") {
            p.mu = detail::parse_double(e);
            if (!(p.mu > 0.0 && p.mu < 1.0))
                throw std::runtime_error("range error: mu must lie in (0,1) (line " + std::to_string(e.line) + ")");
        } else if (e.key == "r") {
            p.r = detail::parse_double(e);
            if (!(p.r >= 0.0)) throw std::runtime_error("range error: r >= 0 required (line " + std::to_string(e.line) + ")");
        } else if (e.key == "kernel") {
            if (e.value != "A" && e.value != "B")
                throw std::runtime_error("range error: kernel must be A or B (line " + std::to_string(e.line) + ")");
            p.kernel = e.value[0];
        } else if (e.key == "corrected") {
            p.corrected = detail::parse_bool(e);
        } else if (e.key == "T") {
            p.T = detail::parse_double(e);
            if (!(p.T > 0.0)) throw std::runtime_error("range error: T > 0 required (line " + std::to_string(e.line) + ")");
        } else if (e.key == "dt") {
            p.dt = detail::parse_double(e);
            if (!(p.dt > 0.0)) throw std::runtime_error("range error: dt > 0 required (line " + std::to_string(e.line) + ")");
        } else if (e.key == "mesh_cells") {
            p.mesh_cells = detail::parse_int(e);
            if (p.mesh_cells < 2) throw std::runtime_error("range error: mesh_cells >= 2 required (line " + std::to_string(e.line) + ")");
        } else if (e.key == "xa") {
            p.xa = detail::parse_double(e);
        } else if (e.key == "xb") {
            p.xb = detail::parse_double(e);
        } else if (e.key == "u0") {
            p.u0_name = e.value;
        } else if (e.key == "v0") {
            p.v0_name = e.value;
        } else if (e.key == "newton_tol") {
            p.newton_tol = detail::parse_double(e);
            if (!(p.newton_tol > 0.0)) throw std::runtime_error("range error: newton_tol > 0 required (line " + std::to_string(e.line) + ")");
        } else if (e.key == "newton_max") {
            p.newton_max = detail::parse_int(e);
            if (p.newton_max < 1) throw std::runtime_error("range error: newton_max >= 1 required (line " + std::to_string(e.line) + ")");
        } else if (e.key == "dt_list") {
            p.dt_list = detail::parse_double_list(e);
        } else if (e.key == "ref_refine") {
            p.ref_refine = detail::parse_int(e);
            if (p.ref_refine < 2) throw std::runtime_error("range error: ref_refine >= 2 required (line " + std::to_string(e.line) + ")");
        } else if (e.key == "snapshot_times") {
            p.snapshot_times = detail::parse_double_list(e);
        } else if (e.key == "out") {
            p.out_dir = e.value;
        } else {
            throw std::runtime_error("unknown config key '" + e.key + "' at line " + std::to_string(e.line));
        }
    }
    if (!(p.xb > p.xa)) throw std::runtime_error("range error: xb > xa required");
}

/// Resolve scenario-name + config text into final parameters.
inline ScenarioParams resolve_config(const std::string& scenario_name, const std::string& config_text) {
    ScenarioParams p = scenario_defaults(scenario_name);
    apply_overrides(p, parse_key_values(config_text));
    return p;
}

// ---------------------------------------------------------------------------
// initial-data selectors
// ---------------------------------------------------------------------------

inline ScalarField make_field(const std::string& name, int dim) {
    if (name == "zero")
        return {[](Point) { return 0.0; }, [](Point) { return 0.0; }};
    if (name == "sin_pi") {
        if (dim == 1)
            return {[](Point p) { return std::sin(M_PI * p.x); },
                    [](Point p) { return -M_PI * M_PI * std::sin(M_PI * p.x); }};
        return {[](Point p) { return std::sin(M_PI * p.x) * std::sin(M_PI * p.y); },
                [](Point p) { return -2.0 * M_PI * M_PI * std::sin(M_PI * p.x) * std::sin(M_PI * p.y); }};
    }
    if (name.rfind("gaussian", 0) == 0) {
        double amp = 5.0, center = 10.0;
        if (name.size() > 9) {
            std::string args = name.substr(9);
            for (auto& c : args)
                if (c == ':') c = ',';
            const auto vals = detail::parse_double_list({"gaussian", args, 0});
            if (vals.size() != 2) throw std::runtime_error("gaussian selector needs gaussian:amp:center");
            amp = vals[0];
            center = vals[1];
        }
        auto val = [amp, center](Point p) {
            const double d = p.x - center;
            return amp * std::exp(-0.5 * d * d);
        };
        return {val, [amp, center, val](Point p) {
                    const double d = p.x - center;
                    return (d * d - 1.0) * val(p);
                }};
    }
    if (name == "manufactured") {
        // resolved by the run builder (u0/v0 derived from the exact solution)
        return {};
    }
    throw std::runtime_error("unknown initial-data selector '" + name + "'");
}

/// Build a runnable config (mesh, space, data, source) from parameters.
inline RunConfig materialize_run_config(const ScenarioParams& p) {
    RunConfig cfg;
    cfg.a = p.a;
    cfg.k = p.k;
    cfg.kernel = KernelSpec(p.kernel == 'A' ? KernelFamily::A : KernelFamily::B, p.mu, p.r);
    cfg.T = p.T;
    cfg.dt = p.dt;
    cfg.corrected = p.corrected;
    cfg.newton_tol = p.newton_tol;
    cfg.newton_max = p.newton_max;
    const Mesh mesh = (p.dim == 1) ? make_interval_mesh(p.xa, p.xb, p.mesh_cells)
                                   : make_square_mesh(p.xa, p.xb, p.mesh_cells);
    cfg.space = std::make_shared<FeSpace>(build_space(mesh));
    if (p.u0_name == "manufactured" || p.v0_name == "manufactured") {
        if (p.dim != 2 || p.kernel != 'A' || p.r != 0.0 || std::fabs(p.mu - 0.5) > 1e-14)
            throw std::runtime_error("manufactured data requires the 2D mu=1/2, r=0, family-A setup");
        auto man = std::make_shared<Manufactured2d>(p.a, p.k);
        cfg.u0 = {[man](Point q) { return man->u(0.0, q.x, q.y); },
                  [](Point q) { return -2.0 * M_PI * M_PI * Manufactured2d::shape(q.x, q.y); }};
        cfg.v0 = {[](Point q) { return Manufactured2d::time_factor_dt(0.0) * Manufactured2d::shape(q.x, q.y); },
                  [](Point q) { return -2.0 * M_PI * M_PI * Manufactured2d::time_factor_dt(0.0) * Manufactured2d::shape(q.x, q.y); }};
        cfg.source = [man](double t, Point q) { return man->f(t, q.x, q.y); };
    } else {
        cfg.u0 = make_field(p.u0_name, p.dim);
        cfg.v0 = make_field(p.v0_name, p.dim);
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_snapshot_csv(const std::string& path,
                               const std::vector<std::pair<double, std::vector<double>>>& snaps) {
    std::ofstream f(path);
    f << "t,index,value\n";
    for (const auto& [t, u] : snaps)
        for (std::size_t i = 0; i < u.size(); ++i)
            f << fmt_g17(t) << ',' << i << ',' << fmt_g17(u[i]) << '\n';
}

inline void write_energy_csv(const std::string& path, double dt,
                             const std::vector<double>& energies, const std::vector<int>& newton) {
    std::ofstream f(path);
    f << "n,t_n,E_n,newton_iters\n";
    for (std::size_t n = 0; n < energies.size(); ++n) {
        const int iters = (n >= 1 && n - 1 < newton.size()) ? newton[n - 1] : 0;
        f << n << ',' << fmt_g17(n * dt) << ',' << fmt_g17(energies[n]) << ',' << iters << '\n';
    }
}

inline void write_weights_csv(const std::string& path, const CqScheme& s) {
    std::ofstream f(path);
    f << "j,omega_j,omega_j0\n";
    for (std::size_t j = 0; j < s.weights.size(); ++j)
        f << j << ',' << fmt_g17(s.weights[j]) << ',' << fmt_g17(s.corrections[j]) << '\n';
}

inline void write_convergence_csv(const std::string& path, const ErrorReport& rep) {
    validate_error_report(rep);
    std::ofstream f(path);
    f << "dt,error,fitted_slope_echo\n";
    for (std::size_t i = 0; i < rep.dts.size(); ++i)
        f << fmt_g17(rep.dts[i]) << ',' << fmt_g17(rep.errors[i]) << ',' << fmt_g17(rep.slope) << '\n';
}

inline void write_mesh_dump(const std::string& path, const Mesh& mesh) {
    std::ofstream f(path);
    f << "# nodes: id x y boundary\n";
    for (int i = 0; i < mesh.node_count(); ++i)
        f << i << ' ' << fmt_g17(mesh.nodes[i].x) << ' ' << fmt_g17(mesh.nodes[i].y) << ' '
          << int(mesh.on_boundary[i]) << '\n';
    if (mesh.dim == 2) {
        f << "# triangles: id n0 n1 n2\n";
        for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
            f << t << ' ' << mesh.triangles[t][0] << ' ' << mesh.triangles[t][1] << ' '
              << mesh.triangles[t][2] << '\n';
    }
}

inline void write_matrix_dump(const std::string& path, const SparseSym& A) {
    std::ofstream f(path);
    f << "# i j value\n";
    for (int i = 0; i < A.n; ++i)
        for (int p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p)
            f << i << ' ' << A.col[p] << ' ' << fmt_g17(A.val[p]) << '\n';
}

} // namespace detail

// ---------------------------------------------------------------------------
// scenario execution
// ---------------------------------------------------------------------------

struct RunJob {
    std::string label;
    ScenarioParams params;
};

inline std::vector<RunJob> plan_scenario(const ScenarioParams& base) {
    std::vector<RunJob> jobs;
    auto label_num = [](const std::string& pre, double v) {
        std::ostringstream os;
        os << pre << v;
        std::string s = os.str();
        for (auto& c : s)
            if (c == '.') c = 'p';
        return s;
    };
    if (base.scenario == "test1-convergence" || base.scenario == "conv2d") {
        for (std::size_t i = 0; i < base.dt_list.size(); ++i) {
            RunJob j{label_num("dt", base.dt_list[i]), base};
            j.params.dt = base.dt_list[i];
            j.params.T = snap_duration(base.T, j.params.dt);
            jobs.push_back(std::move(j));
        }
    } else if (base.scenario == "test2-vary-k") {
        for (double a : {0.0, 1.0})
            for (double k : {0.0, 0.03, 0.06, 0.09}) {
                RunJob j{label_num("a", a) + "_" + label_num("k", k), base};
                j.params.a = a;
                j.params.k = k;
                jobs.push_back(std::move(j));
            }
    } else if (base.scenario == "test3-vary-a") {
        for (double a : {0.0, 0.1, 1.0, 10.0}) {
            RunJob j{label_num("a", a), base};
            j.params.a = a;
            jobs.push_back(std::move(j));
        }
    } else if (base.scenario == "test4-vary-mu") {
        for (double k : {0.0, 0.09})
            for (double mu : {0.1, 0.25, 0.5, 0.75, 0.9}) {
                RunJob j{label_num("k", k) + "_" + label_num("mu", mu), base};
                j.params.k = k;
                j.params.mu = mu;
                jobs.push_back(std::move(j));
            }
    } else if (base.scenario == "test5-vary-r") {
        for (double k : {0.0, 0.09})
            for (double r : {0.0, 1.0, 5.0, 25.0}) {
                RunJob j{label_num("k", k) + "_" + label_num("r", r), base};
                j.params.k = k;
                j.params.r = r;
                jobs.push_back(std::move(j));
            }
    } else {
        throw std::runtime_error("unknown scenario '" + base.scenario + "'");
    }
    return jobs;
}

inline int sweep_thread_cap() {
    if (const char* env = std::getenv("FRACWEST_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

struct RunOutcome {
    std::string label;
    bool ok = false;
    bool partial = false;
    std::string message;
};

namespace detail {

// Step the scheme manually so partial output survives a mid-run failure.
inline RunOutcome execute_job(const RunJob& job, const std::filesystem::path& dir) {
    RunOutcome out;
    out.label = job.label;
    std::vector<std::pair<double, std::vector<double>>> snaps;
    std::vector<std::vector<double>> frames;
    RunConfig cfg;
    try {
        cfg = materialize_run_config(job.params);
        const int N = cfg.steps();
        auto want_snapshot = [&](int n) {
            for (double t : job.params.snapshot_times)
                if (std::llround(t / cfg.dt) == n) return true;
            return false;
        };
        SimState st = initialize(cfg);
        frames.push_back(st.u_prev);
        frames.push_back(st.u_curr);
        std::vector<int> newton;
        if (want_snapshot(0)) snaps.emplace_back(0.0, st.u_prev);
        if (want_snapshot(1)) snaps.emplace_back(cfg.dt, st.u_curr);
        try {
            while (st.n < N) {
                advance(st, cfg);
                frames.push_back(st.u_curr);
                newton.push_back(st.last_newton_iters);
                if (want_snapshot(st.n)) snaps.emplace_back(st.n * cfg.dt, st.u_curr);
            }
            out.ok = true;
        } catch (const std::exception& e) {
            out.partial = true;
            out.message = e.what();
        }
        if (snaps.empty() && !frames.empty())
            snaps.emplace_back((frames.size() - 1) * cfg.dt, frames.back());
        write_snapshot_csv((dir / (job.label + "_snapshots.csv")).string(), snaps);
        if (frames.size() >= 3) {
            const auto E = trajectory_energies(*cfg.space, cfg, frames, cfg.dt);
            write_energy_csv((dir / (job.label + "_energy.csv")).string(), cfg.dt, E, newton);
        }
    } catch (const std::exception& e) {
        out.ok = false;
        out.message = e.what();
        return out;
    }
    return out;
}

} // namespace detail

/// Execute a scenario: all runs (parallel across a sweep), CSV artifacts,
/// a status file, and for the convergence scenarios an order study.
/// Returns 0 when every run completed.
inline int run_scenario(const Scenario& s) {
    std::vector<ConfigEntry> kv;
    kv.reserve(s.overrides.size());
    for (const auto& [k, v] : s.overrides) kv.push_back({k, v, 0});
    ScenarioParams base = scenario_defaults(s.name);
    apply_overrides(base, kv);
    base.out_dir = s.out_dir.empty() ? base.out_dir : s.out_dir;

    const std::filesystem::path dir(base.out_dir);
    std::filesystem::create_directories(dir);

    const bool convergence = (s.name == "test1-convergence" || s.name == "conv2d");
    auto jobs = plan_scenario(base);

    std::vector<RunOutcome> outcomes(jobs.size());
    std::vector<Trajectory> trajectories(convergence ? jobs.size() : 0);

    const int nthreads = std::min<int>(sweep_thread_cap(), static_cast<int>(jobs.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            if (convergence) {
                RunOutcome out;
                out.label = jobs[i].label;
                try {
                    const RunConfig cfg = materialize_run_config(jobs[i].params);
                    trajectories[i] = run(cfg);
                    out.ok = true;
                } catch (const std::exception& e) {
                    out.message = e.what();
                }
                outcomes[i] = std::move(out);
            } else {
                outcomes[i] = detail::execute_job(jobs[i], dir);
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    bool all_ok = true;
    {
        std::ofstream status(dir / "status.txt");
        for (const auto& o : outcomes) {
            status << o.label << ',' << (o.ok ? "ok" : (o.partial ? "partial" : "failed"))
                   << (o.message.empty() ? "" : "," + o.message) << '\n';
            all_ok = all_ok && o.ok;
        }
    }

    if (convergence) {
        bool runs_ok = true;
        for (const auto& o : outcomes) runs_ok = runs_ok && o.ok;
        if (runs_ok) {
            ErrorReport rep;
            rep.config_echo = "scenario=" + s.name + " mu=" + detail::fmt_g17(base.mu) +
                              " corrected=" + (base.corrected ? "1" : "0") +
                              " cells=" + std::to_string(base.mesh_cells);
            if (s.name == "test1-convergence") {
                ScenarioParams rp = base;
                rp.dt = *std::min_element(base.dt_list.begin(), base.dt_list.end()) / base.ref_refine;
                rp.corrected = true;  // the most accurate available scheme serves as reference
                const RunConfig rcfg = materialize_run_config(rp);
                const Trajectory ref = run(rcfg);
                for (std::size_t i = 0; i < jobs.size(); ++i) {
                    rep.dts.push_back(jobs[i].params.dt);
                    rep.errors.push_back(energy_error(trajectories[i], ref, *rcfg.space));
                }
                rep.reference_desc = "corrected run at dt=" + detail::fmt_g17(rp.dt);
            } else {
                Manufactured2d man(base.a, base.k);
                for (std::size_t i = 0; i < jobs.size(); ++i) {
                    const RunConfig cfg = materialize_run_config(jobs[i].params);
                    rep.dts.push_back(jobs[i].params.dt);
                    rep.errors.push_back(max_l2_error(
                        trajectories[i], [&](double t, Point p) { return man.u(t, p.x, p.y); },
                        *cfg.space));
                }
                rep.reference_desc = "manufactured exact solution";
            }
            const auto [slope, resid] = fit_slope(rep.dts, rep.errors);
            rep.slope = slope;
            rep.fit_residual = resid;
            detail::write_convergence_csv((dir / "convergence.csv").string(), rep);
            std::ofstream sum(dir / "summary.txt");
            sum << "scenario " << s.name << " (mu=" << base.mu
                << ", corrected=" << (base.corrected ? "true" : "false") << ")\n";
            sum << "reference: " << rep.reference_desc << "\n";
            for (std::size_t i = 0; i < rep.dts.size(); ++i)
                sum << "  dt=" << detail::fmt_g17(rep.dts[i]) << "  error=" << detail::fmt_g17(rep.errors[i]) << "\n";
            sum << "fitted slope = " << detail::fmt_g17(rep.slope)
                << " (fit residual " << detail::fmt_g17(rep.fit_residual) << ")\n";
        }
    }
    return all_ok ? 0 : 1;
}

} // namespace fracwest

#endif
