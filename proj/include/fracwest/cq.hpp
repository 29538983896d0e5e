#ifndef FRACWEST_CQ_HPP
#define FRACWEST_CQ_HPP

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "fracwest/common.hpp"
#include "fracwest/kernels.hpp"
#include "fracwest/linalg.hpp"

namespace fracwest {

/// BDF2 generating polynomial delta(zeta) = (1-zeta) + (1-zeta)^2/2.
inline std::complex<double> bdf2_delta(std::complex<double> zeta) {
    const std::complex<double> w = 1.0 - zeta;
    return w + 0.5 * w * w;
}

/// First N+1 Taylor coefficients of zeta -> beta_hat(delta(zeta)/dt).
///
/// Family A with r = 0 has the closed factorization
///   (delta(zeta)/dt)^{-mu} = (2 dt/3)^mu (1-zeta)^{-mu} (1-zeta/3)^{-mu},
/// whose coefficients satisfy a two-term recursion (exact, all positive).
/// Every other kernel goes through trapezoidal contour quadrature on
/// |zeta| = rho = eps^{1/(2N+2)} with 2(N+1) points and a discrete Fourier
/// inversion, carried out in long double; the recovered weights are accurate
/// to ~1e-12 absolute.
namespace detail {

inline std::vector<double> cq_weights_contour(const KernelSpec& spec, double dt, int N) {
    std::vector<double> w(static_cast<std::size_t>(N) + 1);
    using cld = std::complex<long double>;
    const int L = 2 * (N + 1);
    // Radius balances aliasing (~eps) against round-off amplified by
    // rho^{-N} = eps^{-1/2}; with long-double accumulation the optimum sits
    // near machine_eps^{2/3}.
    const long double eps = 1e-13L;
    const long double rho = std::pow(eps, 1.0L / L);
    std::vector<cld> f(L);
    for (int l = 0; l < L; ++l) {
        const long double th = 2.0L * M_PI * l / L;
        const cld zeta = rho * cld(std::cos(th), std::sin(th));
        const cld d = (cld(1, 0) - zeta) + cld(0.5L, 0) * (cld(1, 0) - zeta) * (cld(1, 0) - zeta);
        f[l] = detail::beta_hat_raw<long double>(spec, d / cld(dt, 0));
    }
    long double max_im = 0.0L, max_re = 0.0L;
    long double rinv = 1.0L;
    for (int j = 0; j <= N; ++j) {
        cld s(0, 0);
        for (int l = 0; l < L; ++l) {
            const long double th = -2.0L * M_PI * ((static_cast<long long>(j) * l) % L) / L;
            s += f[l] * cld(std::cos(th), std::sin(th));
        }
        s *= rinv / L;
        rinv /= rho;
        w[j] = static_cast<double>(s.real());
        max_im = std::max(max_im, std::fabs(s.imag()));
        max_re = std::max(max_re, std::fabs(s.real()));
    }
    if (max_im > 1e-8L * max_re)
        throw contour_accuracy_error("cq_weights: contour imaginary residue above tolerance",
                                     static_cast<double>(max_im));
    return w;
}

} // namespace detail

inline std::vector<double> cq_weights(const KernelSpec& spec, double dt, int N) {
    if (!(dt > 0.0)) throw std::domain_error("cq_weights: dt > 0 required");
    if (N < 0) throw std::domain_error("cq_weights: N >= 0 required");

    if (spec.family == KernelFamily::A && spec.r == 0.0) {
        std::vector<double> w(static_cast<std::size_t>(N) + 1);
        const double mu = spec.mu;
        const double scale = std::pow(2.0 * dt / 3.0, mu);
        // c_{n+1} = [ (4/3)(n+mu) c_n - (1/3)(n-1+2mu) c_{n-1} ] / (n+1)
        double cm1 = 0.0, c = 1.0;
        w[0] = scale;
        for (int n = 0; n < N; ++n) {
            const double cnext = ((4.0 / 3.0) * (n + mu) * c - (1.0 / 3.0) * (n - 1 + 2.0 * mu) * cm1) / (n + 1.0);
            cm1 = c;
            c = cnext;
            w[static_cast<std::size_t>(n) + 1] = scale * c;
        }
        return w;
    }
    return detail::cq_weights_contour(spec, dt, N);
}

/// Correction weights omega_{n,0} = int_0^{t_n} beta - sum_{j<=n} omega_j,
/// making the corrected rule exact on constants.
inline std::vector<double> correction_weights(const KernelSpec& spec, double dt, int N,
                                              std::span<const double> weights) {
    if (static_cast<int>(weights.size()) != N + 1)
        throw std::invalid_argument("correction_weights: weights must have N+1 entries");
    std::vector<double> c(static_cast<std::size_t>(N) + 1);
    long double prefix = 0.0L;
    for (int n = 0; n <= N; ++n) {
        prefix += weights[n];
        c[n] = static_cast<double>(static_cast<long double>(beta_integral(spec, n * dt)) - prefix);
    }
    return c;
}

/// BDF2 convolution quadrature state: weights, corrections, and the step
/// size they were generated for.  Immutable after construction.
struct CqScheme {
    KernelSpec spec{KernelFamily::A, 0.5, 0.0};
    double dt = 0.0;
    int n_steps = 0;
    std::vector<double> weights;      // omega_0 .. omega_N
    std::vector<double> corrections;  // omega_{0,0} .. omega_{N,0}
    bool corrected = false;
};

inline CqScheme make_cq_scheme(const KernelSpec& spec, double dt, int n_steps, bool corrected) {
    if (n_steps < 1) throw std::domain_error("make_cq_scheme: n_steps >= 1 required");
    CqScheme s{spec, dt, n_steps, cq_weights(spec, dt, n_steps), {}, corrected};
    s.corrections = correction_weights(spec, dt, n_steps, s.weights);
    return s;
}

/// Discrete convolution [beta *_dt v]_n = sum_{j<=n} omega_{n-j} v_j; in
/// corrected mode the extra omega_{n,0} v_0 term is added.  Coincides with
/// the plain rule whenever v_0 = 0.
inline std::vector<double> convolve(const CqScheme& scheme,
                                    std::span<const std::vector<double>> history, int n) {
    if (n < 0 || static_cast<std::size_t>(n) >= history.size() || n > scheme.n_steps)
        throw std::out_of_range("convolve: history shorter than n+1");
    const std::size_t dim = history[0].size();
    std::vector<double> out(dim, 0.0);
    for (int j = 0; j <= n; ++j) {
        const double wj = scheme.weights[static_cast<std::size_t>(n - j)];
        const auto& v = history[j];
        if (v.size() != dim) throw std::invalid_argument("convolve: inconsistent history dimensions");
        for (std::size_t i = 0; i < dim; ++i) out[i] += wj * v[i];
    }
    if (scheme.corrected) {
        const double c = scheme.corrections[static_cast<std::size_t>(n)];
        for (std::size_t i = 0; i < dim; ++i) out[i] += c * history[0][i];
    }
    return out;
}

/// Partial convolution over the known part of the history, j = 0..n-1,
/// plus the correction term; the caller owns the omega_0 * v_n contribution.
inline std::vector<double> convolve_tail(const CqScheme& scheme,
                                         std::span<const std::vector<double>> history, int n) {
    if (n < 1 || static_cast<std::size_t>(n) > history.size() || n > scheme.n_steps)
        throw std::out_of_range("convolve_tail: history shorter than n");
    const std::size_t dim = history[0].size();
    std::vector<double> out(dim, 0.0);
    for (int j = 0; j < n; ++j) {
        const double wj = scheme.weights[static_cast<std::size_t>(n - j)];
        const auto& v = history[j];
        for (std::size_t i = 0; i < dim; ++i) out[i] += wj * v[i];
    }
    if (scheme.corrected) {
        const double c = scheme.corrections[static_cast<std::size_t>(n)];
        for (std::size_t i = 0; i < dim; ++i) out[i] += c * history[0][i];
    }
    return out;
}

/// Both sides of the discrete positivity inequality for the plain rule:
///   lhs = sum_j rho^{2j} <v_j, [beta * v]_j>,  rhs = sum_j rho^{2j} ||[beta * v]_j||^2.
/// The pairing is Euclidean, or the mass inner product when `mass` is given
/// (FEM coefficient sequences).  Corrections are never applied here.
inline std::pair<double, double> positivity_form(const CqScheme& scheme,
                                                 std::span<const std::vector<double>> v,
                                                 double rho, const SparseSym* mass = nullptr) {
    if (!(rho > 0.0) || !(rho <= 1.0))
        throw std::domain_error("positivity_form: rho in (0,1] required");
    CqScheme plain = scheme;
    plain.corrected = false;
    double lhs = 0.0, rhs = 0.0;
    double r2 = 1.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
        const auto w = convolve(plain, v, static_cast<int>(j));
        if (mass) {
            const auto Mw = matvec(*mass, w);
            lhs += r2 * dot(v[j], Mw);
            rhs += r2 * dot(w, Mw);
        } else {
            lhs += r2 * dot(v[j], w);
            rhs += r2 * dot(w, w);
        }
        r2 *= rho * rho;
    }
    return {lhs, rhs};
}

} // namespace fracwest

#endif
