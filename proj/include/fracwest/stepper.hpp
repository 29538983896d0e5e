#ifndef FRACWEST_STEPPER_HPP
#define FRACWEST_STEPPER_HPP

#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fracwest/common.hpp"
#include "fracwest/cq.hpp"
#include "fracwest/fem.hpp"
#include "fracwest/kernels.hpp"
#include "fracwest/linalg.hpp"

namespace fracwest {

/// Scalar field with an optional analytic Laplacian (used for the exact
/// second-derivative start-up value when available).
struct ScalarField {
    std::function<double(Point)> value;
    std::function<double(Point)> laplacian;  // may be empty
};

struct RunConfig {
    double a = 1.0;           // damping coefficient
    double k = 0.09;          // nonlinearity strength
    KernelSpec kernel{KernelFamily::A, 0.5, 0.0};
    double T = 1.0;
    double dt = 0.01;
    bool corrected = false;
    std::shared_ptr<const FeSpace> space;
    ScalarField u0;
    ScalarField v0;
    std::function<double(double, Point)> source;  // may be empty
    double newton_tol = 1e-10;
    int newton_max = 20;

    int steps() const {
        const auto n = static_cast<long long>(std::llround(T / dt));
        if (n < 1 || std::fabs(static_cast<double>(n) * dt - T) > 1e-12 * T)
            throw std::domain_error("RunConfig: T must be an integer multiple of dt");
        return static_cast<int>(n);
    }
};

/// Mutable stepping state.  dhistory[j] holds the coefficients of D u_j
/// (central difference), seeded with D u_0 := P_h v_0.
struct SimState {
    int n = 1;
    std::vector<double> u_prev;  // u_{n-1}
    std::vector<double> u_curr;  // u_n
    std::vector<std::vector<double>> dhistory;
    CqScheme scheme;
    int last_newton_iters = 0;
    double last_residual = 0.0;
};

struct Trajectory {
    double dt = 0.0;
    double T = 0.0;
    std::string config_echo;
    std::vector<double> times;
    std::vector<std::vector<double>> u;  // u_0 .. u_N
    std::vector<int> newton_iters;       // per advance
    std::vector<double> energies;        // E_0 .. E_{N-1}
};

inline std::string describe(const RunConfig& cfg) {
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "a=%g k=%g kernel=%s mu=%g r=%g T=%g dt=%g corrected=%d dim=%d cells=%d",
                  cfg.a, cfg.k, cfg.kernel.family == KernelFamily::A ? "A" : "B", cfg.kernel.mu,
                  cfg.kernel.r, cfg.T, cfg.dt, cfg.corrected ? 1 : 0, cfg.space->mesh.dim,
                  cfg.space->mesh.cells_per_side);
    return buf;
}

namespace detail {

inline void check_degeneracy(const RunConfig& cfg, std::span<const double> coeffs,
                             double time, const char* where) {
    if (cfg.k == 0.0) return;
    // P1 extrema sit at nodes, and boundary nodes carry the value 0
    double cmin = 1.0;
    for (double c : coeffs) cmin = std::min(cmin, 1.0 - 2.0 * cfg.k * c);
    if (cmin <= 1e-6)
        throw degeneracy_error(std::string(where) + ": 1 - 2k u reached " + std::to_string(cmin) +
                                   " (shock forming)",
                               cmin, time);
}

inline std::vector<double> source_load(const FeSpace& sp, const RunConfig& cfg, double t) {
    if (!cfg.source) return std::vector<double>(sp.n_dof, 0.0);
    return load_vector(sp, [&](Point p) { return cfg.source(t, p); });
}

} // namespace detail

/// Project the initial data and take the Taylor start-up step
///   u_1 = u_0 + dt P_h v_0 + dt^2/2 P_h w,  w = (Lap u_0 + 2k v_0^2 + f(0)) / (1 - 2k u_0).
/// The Laplacian is the analytic one when u0 declares it, otherwise the
/// discrete M^{-1}(-K u_0).
inline SimState initialize(const RunConfig& cfg) {
    const FeSpace& sp = *cfg.space;
    const int N = cfg.steps();

    auto u0c = l2_project(sp, cfg.u0.value);
    auto v0c = l2_project(sp, cfg.v0.value);

    // degeneracy precheck on the raw initial datum
    if (cfg.k != 0.0) {
        double cmin = 1.0;
        detail::for_each_quad_point(sp.mesh, [&](const std::array<int, 3>&, int, double,
                                                 const Point& p, const std::array<double, 3>&) {
            cmin = std::min(cmin, 1.0 - 2.0 * cfg.k * cfg.u0.value(p));
        });
        for (const auto& p : sp.mesh.nodes) cmin = std::min(cmin, 1.0 - 2.0 * cfg.k * cfg.u0.value(p));
        if (cmin <= 0.0)
            throw degeneracy_error("initialize: 1 - 2k u0 <= 0", cmin, 0.0);
    }

    std::vector<double> w;
    if (cfg.u0.laplacian) {
        auto wfun = [&](Point p) {
            const double v0p = cfg.v0.value(p);
            const double f0 = cfg.source ? cfg.source(0.0, p) : 0.0;
            return (cfg.u0.laplacian(p) + 2.0 * cfg.k * v0p * v0p + f0) / (1.0 - 2.0 * cfg.k * cfg.u0.value(p));
        };
        w = l2_project(sp, wfun);
    } else {
        auto ku = matvec(sp.stiffness, u0c);
        for (auto& v : ku) v = -v;
        auto lap = solve_spd(sp.mass, ku, 1e-12);
        w.resize(sp.n_dof);
        for (int i = 0; i < sp.n_dof; ++i) {
            const Point p = sp.mesh.nodes[sp.node_of_dof[i]];
            const double v0p = cfg.v0.value(p);
            const double f0 = cfg.source ? cfg.source(0.0, p) : 0.0;
            w[i] = (lap[i] + 2.0 * cfg.k * v0p * v0p + f0) / (1.0 - 2.0 * cfg.k * cfg.u0.value(p));
        }
    }

    SimState st;
    st.u_prev = u0c;
    st.u_curr.resize(sp.n_dof);
    for (int i = 0; i < sp.n_dof; ++i)
        st.u_curr[i] = u0c[i] + cfg.dt * v0c[i] + 0.5 * cfg.dt * cfg.dt * w[i];
    st.dhistory.push_back(std::move(v0c));
    st.scheme = make_cq_scheme(cfg.kernel, cfg.dt, N, cfg.corrected);
    st.n = 1;
    return st;
}

/// Residual of the fully discrete equation at candidate u_{n+1} = cand:
///   F = A_w({u}_n) D^2 u_n + K {u}_n + a K [beta *_dt D u]_n - 2k Q(D u_n) - load(f(t_n)).
/// `term_scale`, when given, receives the summed norms of the constituent
/// terms (the natural magnitude against which a residual of "zero" must be
/// judged in floating point).
inline std::vector<double> step_residual(const SimState& st, std::span<const double> cand,
                                         const RunConfig& cfg, double t_n,
                                         double* term_scale = nullptr) {
    const FeSpace& sp = *cfg.space;
    const int n = st.n;
    const double dt = cfg.dt;
    const int m = sp.n_dof;
    double scale = 0.0;

    std::vector<double> avg(m), d2(m), du(m);
    for (int i = 0; i < m; ++i) {
        avg[i] = (cand[i] + 2.0 * st.u_curr[i] + st.u_prev[i]) / 4.0;
        d2[i] = (cand[i] - 2.0 * st.u_curr[i] + st.u_prev[i]) / (dt * dt);
        du[i] = (cand[i] - st.u_prev[i]) / (2.0 * dt);
    }

    const SparseSym aw = assemble_weighted_mass(sp, avg, cfg.k);
    std::vector<double> F = matvec(aw, d2);
    scale += norm2(F);

    auto kavg = matvec(sp.stiffness, avg);
    for (int i = 0; i < m; ++i) F[i] += kavg[i];
    scale += norm2(kavg);

    if (cfg.a != 0.0) {
        auto conv = convolve_tail(st.scheme, st.dhistory, n);
        const double w0 = st.scheme.weights[0];
        for (int i = 0; i < m; ++i) conv[i] += w0 * du[i];
        auto kconv = matvec(sp.stiffness, conv);
        for (int i = 0; i < m; ++i) F[i] += cfg.a * kconv[i];
        scale += cfg.a * norm2(kconv);
    }

    if (cfg.k != 0.0) {
        auto q = assemble_quadratic_load(sp, du);
        for (int i = 0; i < m; ++i) F[i] -= 2.0 * cfg.k * q[i];
        scale += 2.0 * cfg.k * norm2(q);
    }

    if (cfg.source) {
        auto bf = detail::source_load(sp, cfg, t_n);
        for (int i = 0; i < m; ++i) F[i] -= bf[i];
        scale += norm2(bf);
    }
    if (term_scale) *term_scale = scale;
    return F;
}

/// Analytic Jacobian dF/dcand:
///   A_w({u}_n)/dt^2 - (k/2) B(D^2 u_n) + K/4 + (a w_0/(2 dt)) K - (2k/dt) B(D u_n).
inline SparseSym step_jacobian(const SimState& st, std::span<const double> cand, const RunConfig& cfg) {
    const FeSpace& sp = *cfg.space;
    const double dt = cfg.dt;
    const int m = sp.n_dof;

    std::vector<double> comb(m);  // affine coefficient of the combined mass-type part
    // (1 - 2k avg)/dt^2 - (k/2) d2 - (2k/dt) du, assembled in one pass
    for (int i = 0; i < m; ++i) {
        const double avg = (cand[i] + 2.0 * st.u_curr[i] + st.u_prev[i]) / 4.0;
        const double d2 = (cand[i] - 2.0 * st.u_curr[i] + st.u_prev[i]) / (dt * dt);
        const double du = (cand[i] - st.u_prev[i]) / (2.0 * dt);
        comb[i] = -2.0 * cfg.k * avg / (dt * dt) - 0.5 * cfg.k * d2 - 2.0 * cfg.k * du / dt;
    }
    const SparseSym Jm = detail::weighted_mass_affine(sp, 1.0 / (dt * dt), comb);
    const double kfac = 0.25 + (cfg.a != 0.0 ? cfg.a * st.scheme.weights[0] / (2.0 * dt) : 0.0);
    return add_scaled(Jm, kfac, sp.stiffness);
}

/// One Newton-solved step: from (u_{n-1}, u_n) to u_{n+1}, predictor
/// 2u_n - u_{n-1}.  Appends D u_n to the history and shifts the window.
inline void advance(SimState& st, const RunConfig& cfg) {
    const FeSpace& sp = *cfg.space;
    const int m = sp.n_dof;
    const double t_n = st.n * cfg.dt;

    std::vector<double> cand(m);
    for (int i = 0; i < m; ++i) cand[i] = 2.0 * st.u_curr[i] - st.u_prev[i];

    std::vector<double> trace;
    double scale = 1.0;
    bool done = false;
    bool update_stalled = false;  // last correction was at round-off size
    for (int it = 0; it <= cfg.newton_max; ++it) {
        double term_scale = 0.0;
        auto F = step_residual(st, cand, cfg, t_n, &term_scale);
        const double rn = norm2(F);
        if (!std::isfinite(rn))
            throw newton_divergence_error("advance: non-finite residual", trace);
        trace.push_back(rn);
        if (it == 0) scale = 1.0 + term_scale;
        if (rn <= cfg.newton_tol * scale || update_stalled) {
            st.last_newton_iters = it;
            st.last_residual = rn;
            done = true;
            break;
        }
        if (it == cfg.newton_max) break;
        const auto J = step_jacobian(st, cand, cfg);
        const auto delta = solve_spd(J, F, 1e-12);
        for (int i = 0; i < m; ++i) cand[i] -= delta[i];
        // at fine dt the residual floor eps*||u||/dt^2 sits above any fixed
        // tolerance; a round-off-sized update is the other convergence signal
        update_stalled = norm2(delta) <= 1e-13 * (1.0 + norm2(cand));

        std::vector<double> avg(m);
        for (int i = 0; i < m; ++i) avg[i] = (cand[i] + 2.0 * st.u_curr[i] + st.u_prev[i]) / 4.0;
        detail::check_degeneracy(cfg, avg, t_n, "advance");
    }
    if (!done)
        throw newton_divergence_error("advance: Newton did not converge in " +
                                          std::to_string(cfg.newton_max) + " iterations",
                                      trace);

    detail::check_degeneracy(cfg, cand, t_n, "advance");

    std::vector<double> du(m);
    for (int i = 0; i < m; ++i) du[i] = (cand[i] - st.u_prev[i]) / (2.0 * cfg.dt);
    st.dhistory.push_back(std::move(du));
    st.u_prev = std::move(st.u_curr);
    st.u_curr = std::move(cand);
    ++st.n;
}

/// Discrete energies E_n, n = 0..N-1, from a stored trajectory:
///   E_n = |(u_{n+1}+u_n)/2|_{H1}^2/2 + <A_w({u}_m) Du~, Du~>/2,  m = max(n,1).
inline std::vector<double> trajectory_energies(const FeSpace& sp, const RunConfig& cfg,
                                               std::span<const std::vector<double>> u, double dt) {
    const int N = static_cast<int>(u.size()) - 1;
    std::vector<double> E;
    E.reserve(N);
    for (int n = 0; n < N; ++n) {
        const int m = std::max(n, 1);
        std::vector<double> mid(sp.n_dof), dtil(sp.n_dof), avg(sp.n_dof);
        for (int i = 0; i < sp.n_dof; ++i) {
            mid[i] = 0.5 * (u[n + 1][i] + u[n][i]);
            dtil[i] = (u[n + 1][i] - u[n][i]) / dt;
            avg[i] = (m + 1 <= N) ? (u[m + 1][i] + 2.0 * u[m][i] + u[m - 1][i]) / 4.0 : mid[i];
        }
        const auto aw = assemble_weighted_mass(sp, avg, cfg.k);
        E.push_back(0.5 * quadratic_form(sp.stiffness, mid, mid) + 0.5 * quadratic_form(aw, dtil, dtil));
    }
    return E;
}

/// Run the full scheme; deterministic for a fixed config.
inline Trajectory run(const RunConfig& cfg) {
    const FeSpace& sp = *cfg.space;
    const int N = cfg.steps();
    SimState st = initialize(cfg);

    Trajectory tr;
    tr.dt = cfg.dt;
    tr.T = cfg.T;
    tr.config_echo = describe(cfg);
    tr.u.reserve(N + 1);
    tr.u.push_back(st.u_prev);
    tr.u.push_back(st.u_curr);
    tr.times.resize(N + 1);
    for (int n = 0; n <= N; ++n) tr.times[n] = n * cfg.dt;

    while (st.n < N) {
        advance(st, cfg);
        tr.u.push_back(st.u_curr);
        tr.newton_iters.push_back(st.last_newton_iters);
    }
    tr.energies = trajectory_energies(sp, cfg, tr.u, cfg.dt);
    return tr;
}

} // namespace fracwest

#endif
