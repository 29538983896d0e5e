// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Each criterion is pinned to its stated tolerance; runtimes are
// desk scale (the whole suite is a few minutes).

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fracwest/errors.hpp"
#include "fracwest/scenarios.hpp"
#include "fracwest/stepper.hpp"

using namespace fracwest;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
    std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

ScalarField sin_field() {
    return {[](Point p) { return std::sin(M_PI * p.x); },
            [](Point p) { return -M_PI * M_PI * std::sin(M_PI * p.x); }};
}

RunConfig test1_cfg(const std::shared_ptr<const FeSpace>& space, double mu, double dt,
                    bool corrected) {
    RunConfig cfg;
    cfg.a = 30.0;
    cfg.k = 0.09;
    cfg.kernel = KernelSpec(KernelFamily::A, mu, 0.0);
    cfg.T = 0.5;
    cfg.dt = dt;
    cfg.corrected = corrected;
    cfg.space = space;
    cfg.u0 = sin_field();
    cfg.v0 = sin_field();
    return cfg;
}

// Informational follow-up when the pinned coarse window misses the corrected
// order: at a = 30 the startup singular layer saturates the coarsest runs
// (errors near the solution scale), flattening the fit; the asymptotic order
// emerges on a 4x finer window.  Not a pass/fail gate.
void corrected_order_diagnostic(const std::shared_ptr<const FeSpace>& space, double mu,
                                double lo, double hi) {
    const std::vector<double> dts{1.0 / 100, 1.0 / 200, 1.0 / 400, 1.0 / 800};
    const Trajectory ref = run(test1_cfg(space, mu, dts.back() / 16.0, true));
    std::vector<double> errs;
    for (double dt : dts) errs.push_back(energy_error(run(test1_cfg(space, mu, dt, true)), ref, *space));
    const double slope = fit_slope(dts, errs).first;
    std::printf("[INFO] criterion 2 diagnostic: mu=%.2f corrected slope on refined window "
                "{1/100..1/800} is %.3f (target [%.2f,%.2f]); the pinned {1/25..1/200} window "
                "is pre-asymptotic at a=30 (coarse errors %.2f-ish of solution scale)\n",
                mu, slope, lo, hi, errs.front());
    std::fflush(stdout);
}

// Criteria 1 and 2: Test-1 convergence orders, uncorrected and corrected.
void convergence_orders() {
    const auto space = std::make_shared<const FeSpace>(build_space(make_interval_mesh(-1.0, 1.0, 400)));
    const std::vector<double> dts{1.0 / 25, 1.0 / 50, 1.0 / 100, 1.0 / 200};
    for (double mu : {0.25, 0.75}) {
        RunConfig rcfg = test1_cfg(space, mu, dts.back() / 16.0, true);
        const Trajectory ref = run(rcfg);
        for (bool corrected : {false, true}) {
            std::vector<double> errs;
            for (double dt : dts) {
                RunConfig cfg = test1_cfg(space, mu, dt, corrected);
                cfg.T = snap_duration(cfg.T, dt);
                errs.push_back(energy_error(run(cfg), ref, *space));
            }
            const double slope = fit_slope(dts, errs).first;
            char detail[160];
            if (!corrected) {
                std::snprintf(detail, sizeof detail,
                              "mu=%.2f uncorrected energy-error slope %.3f in [0.85,1.15]", mu, slope);
                report("criterion 1", slope >= 0.85 && slope <= 1.15, detail);
            } else {
                const double lo = 1.0 + mu - 0.2, hi = 1.0 + mu + 0.2;
                std::snprintf(detail, sizeof detail,
                              "mu=%.2f corrected energy-error slope %.3f in [%.2f,%.2f]", mu, slope, lo, hi);
                const bool ok = slope >= lo && slope <= hi;
                report("criterion 2", ok, detail);
                if (!ok) corrected_order_diagnostic(space, mu, lo, hi);
            }
        }
    }
}

// Criterion 3: corrected CQ exact on constants for every n <= 512.
void corrected_exact_on_constants() {
    bool ok = true;
    double worst = 0.0;
    const double dt = 0.05;
    const int N = 512;
    const std::vector<std::vector<double>> ones(N + 1, std::vector<double>{1.0});
    for (double mu : {0.25, 0.5, 0.75}) {
        for (const auto& spec : {KernelSpec(KernelFamily::A, mu, 0.0),
                                 KernelSpec(KernelFamily::A, mu, 2.0),
                                 KernelSpec(KernelFamily::B, mu, 0.0)}) {
            const auto scheme = make_cq_scheme(spec, dt, N, true);
            for (int n = 1; n <= N; ++n) {
                const double conv = convolve(scheme, ones, n)[0];
                const double exact = beta_integral(spec, n * dt);
                const double rel = std::fabs(conv - exact) / exact;
                worst = std::max(worst, rel);
                ok = ok && rel <= 1e-12;
            }
        }
    }
    char detail[120];
    std::snprintf(detail, sizeof detail,
                  "9 kernel configs, n<=512: worst relative deviation %.2e (<= 1e-12)", worst);
    report("criterion 3", ok, detail);
}

// Criterion 4: CQ monomial rates min(alpha+1, 2) within 0.15.
void monomial_rates() {
    const double mu = 0.5;
    const KernelSpec spec(KernelFamily::A, mu, 0.0);
    bool ok = true;
    std::string detail = "orders at t_n=1:";
    for (double alpha : {0.0, 0.5, 1.0, 2.0}) {
        std::vector<double> errs;
        for (int steps : {128, 256, 512}) {
            const double dt = 1.0 / steps;
            const auto scheme = make_cq_scheme(spec, dt, steps, false);
            std::vector<std::vector<double>> hist(steps + 1);
            for (int j = 0; j <= steps; ++j) hist[j] = {std::pow(j * dt, alpha)};
            const double exact = std::tgamma(alpha + 1.0) / std::tgamma(alpha + 1.0 + mu);
            errs.push_back(std::fabs(convolve(scheme, hist, steps)[0] - exact));
        }
        const double order = 0.5 * (std::log2(errs[0] / errs[1]) + std::log2(errs[1] / errs[2]));
        const double target = std::min(alpha + 1.0, 2.0);
        ok = ok && std::fabs(order - target) <= 0.15;
        char buf[64];
        std::snprintf(buf, sizeof buf, " alpha=%.1f: %.3f (target %.1f)", alpha, order, target);
        detail += buf;
    }
    report("criterion 4", ok, detail);
}

// Criterion 5: discrete positivity on random sequences.
void discrete_positivity() {
    const auto schemeB = make_cq_scheme(KernelSpec(KernelFamily::B, 0.5, 0.0), 0.1, 64, false);
    const auto schemeA = make_cq_scheme(KernelSpec(KernelFamily::A, 0.5, 1.0), 0.1, 64, false);
    std::mt19937 rng(0x5eed);
    std::normal_distribution<double> dist;
    bool ok = true;
    double worstB = 1e300, worstA = 1e300;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::vector<double>> v(64);
        for (auto& row : v) row = {dist(rng)};
        const auto [lb, rb] = positivity_form(schemeB, v, 1.0);
        worstB = std::min(worstB, lb - rb);
        ok = ok && lb >= rb - 1e-12 * std::fabs(rb);
        const auto [la, ra] = positivity_form(schemeA, v, 1.0);
        worstA = std::min(worstA, la);
        ok = ok && la >= -1e-12 * ra;
    }
    char detail[140];
    std::snprintf(detail, sizeof detail,
                  "200 trials: min(lhs-rhs) family B %.3e (>=0); min lhs family A r=1 %.3e (>=0)",
                  worstB, worstA);
    report("criterion 5", ok, detail);
}

// Criterion 6: 2D manufactured-solution convergence.
void manufactured_2d_convergence() {
    const auto space = std::make_shared<const FeSpace>(build_space(make_square_mesh(-1.0, 1.0, 32)));
    const double a = 1.0, k = 0.09;
    auto man = std::make_shared<Manufactured2d>(a, k);
    const std::vector<double> dts{1.0 / 40, 1.0 / 80, 1.0 / 160};
    std::vector<double> errs;
    for (double dt : dts) {
        RunConfig cfg;
        cfg.a = a;
        cfg.k = k;
        cfg.kernel = KernelSpec(KernelFamily::A, 0.5, 0.0);
        cfg.T = 0.5;
        cfg.dt = dt;
        cfg.space = space;
        cfg.u0 = {[man](Point p) { return man->u(0.0, p.x, p.y); },
                  [](Point p) { return -2.0 * M_PI * M_PI * Manufactured2d::shape(p.x, p.y); }};
        cfg.v0 = {[](Point p) { return Manufactured2d::time_factor_dt(0.0) * Manufactured2d::shape(p.x, p.y); },
                  nullptr};
        cfg.source = [man](double t, Point p) { return man->f(t, p.x, p.y); };
        errs.push_back(max_l2_error(run(cfg), [&](double t, Point p) { return man->u(t, p.x, p.y); }, *space));
    }
    const double slope = fit_slope(dts, errs).first;
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "max-L2 errors %.3e/%.3e/%.3e, slope %.3f in [0.8,1.2]",
                  errs[0], errs[1], errs[2], slope);
    report("criterion 6", slope >= 0.8 && slope <= 1.2, detail);
}

// Criterion 7: property suite.
void property_suite() {
    // (a) analytic Jacobian vs central differences, 1e-6 relative
    {
        RunConfig cfg;
        cfg.a = 1.0;
        cfg.k = 0.09;
        cfg.kernel = KernelSpec(KernelFamily::A, 0.5, 0.0);
        cfg.T = 0.5;
        cfg.dt = 0.05;
        cfg.space = std::make_shared<FeSpace>(build_space(make_interval_mesh(-1.0, 1.0, 12)));
        cfg.u0 = sin_field();
        cfg.v0 = sin_field();
        auto st = initialize(cfg);
        const int m = cfg.space->n_dof;
        std::mt19937 rng(19);
        std::uniform_real_distribution<double> dist(-0.03, 0.03);
        std::vector<double> cand(m);
        for (int i = 0; i < m; ++i) cand[i] = st.u_curr[i] + dist(rng);
        const auto J = step_jacobian(st, cand, cfg);
        double worst = 0.0;
        const double eps = 1e-7;
        for (int i = 0; i < m; ++i) {
            auto cp = cand, cm = cand;
            cp[i] += eps;
            cm[i] -= eps;
            const auto Fp = step_residual(st, cp, cfg, cfg.dt);
            const auto Fm = step_residual(st, cm, cfg, cfg.dt);
            std::vector<double> e(m, 0.0);
            e[i] = 1.0;
            const auto Je = matvec(J, e);
            for (int r = 0; r < m; ++r) {
                const double fd = (Fp[r] - Fm[r]) / (2.0 * eps);
                worst = std::max(worst, std::fabs(Je[r] - fd) / std::max(1.0, std::fabs(fd)));
            }
        }
        char detail[120];
        std::snprintf(detail, sizeof detail, "Jacobian vs finite differences: max rel dev %.2e (<= 1e-6)", worst);
        report("criterion 7a", worst <= 1e-6, detail);
    }
    // (b) trapezoidal energy conservation over 10^3 steps
    {
        RunConfig cfg;
        cfg.a = 0.0;
        cfg.k = 0.0;
        cfg.T = 1.0;
        cfg.dt = 1e-3;
        cfg.space = std::make_shared<FeSpace>(build_space(make_interval_mesh(-1.0, 1.0, 64)));
        cfg.u0 = sin_field();
        cfg.v0 = {[](Point) { return 0.0; }, [](Point) { return 0.0; }};
        const auto traj = run(cfg);
        const double e0 = traj.energies.front();
        double drift = 0.0;
        for (double e : traj.energies) drift = std::max(drift, std::fabs(e - e0) / e0);
        char detail[120];
        std::snprintf(detail, sizeof detail, "energy drift over 1000 steps: %.2e (<= 1e-8)", drift);
        report("criterion 7b", drift <= 1e-8, detail);
    }
    // (c) energy monotone nonincreasing, k = 0, a > 0, family B
    {
        RunConfig cfg;
        cfg.a = 5.0;
        cfg.k = 0.0;
        cfg.kernel = KernelSpec(KernelFamily::B, 0.5, 0.0);
        cfg.T = 1.0;
        cfg.dt = 0.01;
        cfg.space = std::make_shared<FeSpace>(build_space(make_interval_mesh(-1.0, 1.0, 64)));
        cfg.u0 = sin_field();
        cfg.v0 = {[](Point) { return 0.0; }, [](Point) { return 0.0; }};
        const auto traj = run(cfg);
        const double e0 = traj.energies.front();
        double worst = -1e300;
        for (std::size_t n = 1; n < traj.energies.size(); ++n)
            worst = std::max(worst, (traj.energies[n] - traj.energies[n - 1]) / e0);
        char detail[120];
        std::snprintf(detail, sizeof detail, "max per-step energy increment %.2e (<= 1e-8 relative)", worst);
        report("criterion 7c", worst <= 1e-8, detail);
    }
    // (d) Mittag-Leffler vs erfc identity at 20 points
    {
        double worst = 0.0;
        for (int i = 0; i < 20; ++i) {
            const double t = 0.01 * std::pow(500.0 / 0.01, i / 19.0);
            const double x = std::sqrt(t);
            const double id = static_cast<double>(std::exp(static_cast<long double>(t)) * std::erfc(static_cast<long double>(x)));
            const double got = ml_eval(MlParams(0.5, 1.0), -x);
            worst = std::max(worst, std::fabs(got - id) / id);
        }
        char detail[120];
        std::snprintf(detail, sizeof detail, "E_{1/2,1}(-sqrt t) vs e^t erfc(sqrt t): max rel dev %.2e (<= 1e-8)", worst);
        report("criterion 7d", worst <= 1e-8, detail);
    }
    // (e) 1D M=4 mass/stiffness stencils
    {
        const auto sp = build_space(make_interval_mesh(0.0, 1.0, 4));
        const double h = 0.25;
        double worst = 0.0;
        for (int i = 0; i < sp.n_dof; ++i) {
            for (int p = sp.stiffness.row_ptr[i]; p < sp.stiffness.row_ptr[i + 1]; ++p)
                worst = std::max(worst, std::fabs(sp.stiffness.val[p] -
                                                  (sp.stiffness.col[p] == i ? 2.0 : -1.0) / h));
            for (int p = sp.mass.row_ptr[i]; p < sp.mass.row_ptr[i + 1]; ++p)
                worst = std::max(worst, std::fabs(sp.mass.val[p] -
                                                  (sp.mass.col[p] == i ? 4.0 : 1.0) * h / 6.0));
        }
        char detail[120];
        std::snprintf(detail, sizeof detail, "hand-derived stencil deviation %.2e (<= 1e-14)", worst);
        report("criterion 7e", worst <= 1e-14, detail);
    }
    // (f) corrected == plain when the initial history entry vanishes
    {
        RunConfig cfg;
        cfg.a = 1.0;
        cfg.k = 0.09;
        cfg.kernel = KernelSpec(KernelFamily::A, 0.5, 0.0);
        cfg.T = 0.5;
        cfg.dt = 0.01;
        cfg.space = std::make_shared<FeSpace>(build_space(make_interval_mesh(-1.0, 1.0, 64)));
        cfg.u0 = sin_field();
        cfg.v0 = {[](Point) { return 0.0; }, [](Point) { return 0.0; }};
        cfg.corrected = false;
        const auto plain = run(cfg);
        cfg.corrected = true;
        const auto corr = run(cfg);
        double worst = 0.0;
        for (std::size_t n = 0; n < plain.u.size(); ++n)
            for (std::size_t i = 0; i < plain.u[n].size(); ++i)
                worst = std::max(worst, std::fabs(plain.u[n][i] - corr.u[n][i]));
        char detail[120];
        std::snprintf(detail, sizeof detail, "corrected vs plain with v0 = 0: max dev %.2e (<= 1e-10)", worst);
        report("criterion 7f", worst <= 1e-10, detail);
    }
}

// Criterion 8: degeneracy guard on the undamped long run.
void shock_guard() {
    RunConfig cfg;
    cfg.a = 0.0;
    cfg.k = 0.09;
    cfg.kernel = KernelSpec(KernelFamily::A, 0.5, 0.0);
    cfg.T = 8.0;
    cfg.dt = 0.01;
    cfg.space = std::make_shared<FeSpace>(build_space(make_interval_mesh(0.0, 40.0, 1600)));
    cfg.u0 = {[](Point p) {
                  const double d = p.x - 20.0;
                  return 5.0 * std::exp(-0.5 * d * d);
              },
              [](Point p) {
                  const double d = p.x - 20.0;
                  return (d * d - 1.0) * 5.0 * std::exp(-0.5 * d * d);
              }};
    cfg.v0 = {[](Point) { return 0.0; }, [](Point) { return 0.0; }};

    bool finite = true;
    std::string outcome;
    bool acceptable = false;
    try {
        SimState st = initialize(cfg);
        const int N = cfg.steps();
        while (st.n < N) {
            advance(st, cfg);
            for (double v : st.u_curr) finite = finite && std::isfinite(v);
        }
        outcome = "completed to T=8";
        acceptable = true;
    } catch (const degeneracy_error& e) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "shock diagnostic at t=%.3f (1-2k u min %.2e)", e.time, e.coeff_min);
        outcome = buf;
        acceptable = true;
    } catch (const std::exception& e) {
        outcome = std::string("unexpected error: ") + e.what();
    }
    report("criterion 8", acceptable && finite, outcome + (finite ? ", all outputs finite" : ", NON-FINITE OUTPUT"));
}

}  // namespace

int main() {
    std::printf("fracwest acceptance suite\n");
    convergence_orders();
    corrected_exact_on_constants();
    monomial_rates();
    discrete_positivity();
    manufactured_2d_convergence();
    property_suite();
    shock_guard();
    std::printf("%d criterion check(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
