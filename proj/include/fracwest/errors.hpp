#ifndef FRACWEST_ERRORS_HPP
#define FRACWEST_ERRORS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "fracwest/fem.hpp"
#include "fracwest/special.hpp"
#include "fracwest/stepper.hpp"

namespace fracwest {

/// One convergence study: errors per time step with the fitted order.
struct ErrorReport {
    std::vector<double> dts;
    std::vector<double> errors;
    double slope = 0.0;
    double fit_residual = 0.0;
    std::string config_echo;
    std::string reference_desc;
};

/// Enforce the report invariants: strictly decreasing dt list, positive
/// errors, finite slope.
inline void validate_error_report(const ErrorReport& rep) {
    if (rep.dts.size() != rep.errors.size() || rep.dts.empty())
        throw std::invalid_argument("ErrorReport: dt/error size mismatch");
    for (std::size_t i = 0; i < rep.dts.size(); ++i) {
        if (!(rep.errors[i] > 0.0)) throw std::invalid_argument("ErrorReport: errors must be positive");
        if (i > 0 && !(rep.dts[i] < rep.dts[i - 1]))
            throw std::invalid_argument("ErrorReport: dt list must be strictly decreasing");
    }
    if (!std::isfinite(rep.slope)) throw std::invalid_argument("ErrorReport: slope must be finite");
}

/// Largest duration N*dt <= T (+rounding slack) with an integer step count;
/// convergence studies with pinned dt lists run each dt over this window.
inline double snap_duration(double T, double dt) {
    return std::floor(T / dt + 1e-9) * dt;
}

/// Maximum-over-time discrete energy error between a trajectory and a
/// reference trajectory on the same mesh whose time grid refines the
/// coarse one by an integer stride (and covers its duration):
///   max_n ||D~(u - ref)||_{L2} + max_n ||grad mid(u - ref)||_{L2}.
inline double energy_error(const Trajectory& traj, const Trajectory& ref, const FeSpace& sp) {
    const double sr = traj.dt / ref.dt;
    const int stride = static_cast<int>(std::llround(sr));
    if (stride < 1 || std::fabs(sr - stride) > 1e-9 ||
        static_cast<std::size_t>(stride) * (traj.u.size() - 1) > ref.u.size() - 1)
        throw std::invalid_argument("energy_error: reference grid is not an integer refinement");
    const int N = static_cast<int>(traj.u.size()) - 1;
    const int m = sp.n_dof;
    double e_rate = 0.0, e_grad = 0.0;
    std::vector<double> diff_rate(m), diff_mid(m);
    for (int n = 1; n <= N; ++n) {
        const auto& a1 = traj.u[n];
        const auto& a0 = traj.u[n - 1];
        const auto& b1 = ref.u[static_cast<std::size_t>(n) * stride];
        const auto& b0 = ref.u[static_cast<std::size_t>(n - 1) * stride];
        for (int i = 0; i < m; ++i) {
            diff_rate[i] = (a1[i] - a0[i] - (b1[i] - b0[i])) / traj.dt;
            diff_mid[i] = 0.5 * (a1[i] + a0[i] - (b1[i] + b0[i]));
        }
        e_rate = std::max(e_rate, mass_norm(sp, diff_rate));
        e_grad = std::max(e_grad, stiffness_norm(sp, diff_mid));
    }
    return e_rate + e_grad;
}

/// Same error measure against an exact solution, L2-projected onto the mesh
/// at the trajectory's own time grid.
inline double energy_error(const Trajectory& traj,
                           const std::function<double(double, Point)>& exact, const FeSpace& sp) {
    Trajectory ref;
    ref.dt = traj.dt;
    ref.T = traj.T;
    ref.u.reserve(traj.u.size());
    for (std::size_t n = 0; n < traj.u.size(); ++n) {
        const double t = traj.times[n];
        ref.u.push_back(l2_project(sp, [&](Point p) { return exact(t, p); }));
    }
    return energy_error(traj, ref, sp);
}

/// max_n || u_n - I_h exact(t_n) ||_{L2}, interpolant comparison.
inline double max_l2_error(const Trajectory& traj,
                           const std::function<double(double, Point)>& exact, const FeSpace& sp) {
    double e = 0.0;
    std::vector<double> diff(sp.n_dof);
    for (std::size_t n = 1; n < traj.u.size(); ++n) {
        const double t = traj.times[n];
        for (int i = 0; i < sp.n_dof; ++i)
            diff[i] = traj.u[n][i] - exact(t, sp.mesh.nodes[sp.node_of_dof[i]]);
        e = std::max(e, mass_norm(sp, diff));
    }
    return e;
}

/// Riemann-Liouville half-order integral of a smooth g, by the
/// singularity-removing substitution s = t - tau^2:
///   I^{1/2} g (t) = (2/sqrt(pi)) int_0^{sqrt t} g(t - tau^2) dtau,
/// composite 64-point Gauss-Legendre.
inline double frac_integral_half(const std::function<double(double)>& g, double t) {
    if (t == 0.0) return 0.0;
    if (!(t > 0.0)) throw std::domain_error("frac_integral_half: t >= 0 required");
    static const auto rule = gauss_legendre(64);
    const double st = std::sqrt(t);
    const int panels = std::max(1, static_cast<int>(std::ceil(1.5 * st)));
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double a = st * p / panels, b = st * (p + 1) / panels;
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (int q = 0; q < 64; ++q) {
            const double tau = mid + half * rule.first[q];
            sum += half * rule.second[q] * g(t - tau * tau);
        }
    }
    return 2.0 / std::sqrt(M_PI) * sum;
}

/// Manufactured 2D solution u = (sin 24t + cos 12t) sin(pi x) sin(pi y) and
/// the source making the damped Westervelt equation hold for the
/// mu = 1/2, r = 0 kernel.  Fractional-integral values are cached per t.
class Manufactured2d {
public:
    Manufactured2d(double a, double k) : a_(a), k_(k) {}

    static double time_factor(double t) { return std::sin(24.0 * t) + std::cos(12.0 * t); }
    static double time_factor_dt(double t) { return 24.0 * std::cos(24.0 * t) - 12.0 * std::sin(12.0 * t); }
    static double time_factor_dtt(double t) { return -576.0 * std::sin(24.0 * t) - 144.0 * std::cos(12.0 * t); }
    static double shape(double x, double y) { return std::sin(M_PI * x) * std::sin(M_PI * y); }

    double u(double t, double x, double y) const { return time_factor(t) * shape(x, y); }

    /// f = (1-2ku) u_tt - Lap u - a beta * (d_t Lap u) - 2k (u_t)^2.
    double f(double t, double x, double y) const {
        const double S = shape(x, y);
        const double g = time_factor(t);
        const double gp = time_factor_dt(t);
        const double gpp = time_factor_dtt(t);
        const double Ig = frac_int(t);
        return (1.0 - 2.0 * k_ * g * S) * gpp * S + 2.0 * M_PI * M_PI * g * S +
               2.0 * M_PI * M_PI * a_ * Ig * S - 2.0 * k_ * gp * gp * S * S;
    }

    double frac_int(double t) const {
        auto it = cache_.find(t);
        if (it != cache_.end()) return it->second;
        const double v = frac_integral_half(&Manufactured2d::time_factor_dt, t);
        cache_.emplace(t, v);
        return v;
    }

private:
    double a_, k_;
    mutable std::map<double, double> cache_;
};

/// Exact-solution/source pair at one point, kernel family A, mu=1/2, r=0.
inline std::pair<double, double> manufactured_2d(double t, double x, double y,
                                                 double a = 1.0, double k = 0.09) {
    const Manufactured2d m(a, k);
    return {m.u(t, x, y), m.f(t, x, y)};
}

/// Least-squares order fit of log(err) against log(dt) over the finest
/// four points (all points when fewer are given).
inline std::pair<double, double> fit_slope(std::vector<double> dts, std::vector<double> errs) {
    if (dts.size() != errs.size() || dts.size() < 3)
        throw std::invalid_argument("fit_slope: need at least 3 matching points");
    for (std::size_t i = 0; i < dts.size(); ++i)
        if (!(dts[i] > 0.0) || !(errs[i] > 0.0))
            throw std::invalid_argument("fit_slope: dts and errs must be positive");
    std::vector<std::size_t> idx(dts.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return dts[a] < dts[b]; });
    const std::size_t use = std::min<std::size_t>(4, idx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t j = 0; j < use; ++j) {
        const double x = std::log(dts[idx[j]]);
        const double y = std::log(errs[idx[j]]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(use);
    const double denom = n * sxx - sx * sx;
    if (std::fabs(denom) < 1e-14)
        throw std::invalid_argument("fit_slope: degenerate abscissae");
    const double slope = (n * sxy - sx * sy) / denom;
    const double icept = (sy - slope * sx) / n;
    double rss = 0.0;
    for (std::size_t j = 0; j < use; ++j) {
        const double d = std::log(errs[idx[j]]) - (icept + slope * std::log(dts[idx[j]]));
        rss += d * d;
    }
    return {slope, std::sqrt(rss / n)};
}

} // namespace fracwest

#endif
