#ifndef FRACWEST_KERNELS_HPP
#define FRACWEST_KERNELS_HPP

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "fracwest/common.hpp"
#include "fracwest/special.hpp"

namespace fracwest {

enum class KernelFamily { A, B };

/// Damping kernel selector.  Family A is the tempered power kernel
/// t^{mu-1} e^{-r t} / Gamma(mu); family B is the Mittag-Leffler relaxation
/// kernel -d/dt E_{mu,1}(-t^mu).  The tempering rate r only applies to A.
struct KernelSpec {
    KernelSpec(KernelFamily family_, double mu_, double r_ = 0.0)
        : family(family_), mu(mu_), r(family_ == KernelFamily::B ? 0.0 : r_) {
        if (!(mu > 0.0) || !(mu < 1.0))
            throw std::domain_error("KernelSpec: mu must lie in (0,1)");
        if (family == KernelFamily::A && !(r >= 0.0))
            throw std::domain_error("KernelSpec: r must be >= 0");
    }

    KernelFamily family;
    double mu;
    double r;
};

/// Parameters of the two-parameter Mittag-Leffler function E_{mu,gamma}.
struct MlParams {
    MlParams(double mu_, double gamma_) : mu(mu_), gamma(gamma_) {
        if (!(mu > 0.0) || !(gamma > 0.0))
            throw std::domain_error("MlParams: mu and gamma must be positive");
    }
    double mu;
    double gamma;
};

namespace detail {

// The power series sum_k z^k / Gamma(mu k + gamma) is usable only while its
// largest term stays within the cancellation budget of the working
// precision.  On the negative axis the largest term has magnitude
// ~ exp(|z|^{1/mu}), so the regime splits are expressed through
// t := |z|^{1/mu} rather than |z| itself.
template <typename Real>
Real ml_series(double mu, double gamma, double z) {
    const Real zr = z;
    Real sum = 0, comp = 0, zk = 1;
    Real last = std::numeric_limits<double>::max();
    int decreasing = 0;
    for (int k = 0; k < 200000; ++k) {
        const Real term = zk / boost::math::tgamma(Real(mu) * k + Real(gamma));
        // compensated accumulation
        const Real y = term - comp;
        const Real t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        const Real mag = term < 0 ? -term : term;
        decreasing = (mag < last) ? decreasing + 1 : 0;
        if (decreasing >= 2 && mag < (sum < 0 ? -sum : sum) * std::numeric_limits<Real>::epsilon() + std::numeric_limits<Real>::min())
            return sum;
        last = mag;
        zk *= zr;
    }
    throw convergence_error("ml_eval: power series did not converge");
}

// Algebraic expansion E_{mu,gamma}(z) ~ -sum_{k>=1} z^{-k}/Gamma(gamma - mu k)
// for z -> -inf, truncated at the smallest term.  1/Gamma evaluated through
// the reflection formula so near-pole arguments are handled smoothly.
inline double ml_asymptotic(double mu, double gamma, double z) {
    const long double x = -static_cast<long double>(z);  // x > 0
    const long double lx = std::log(x);
    long double sum = 0.0L;
    // Truncate at the smallest ENVELOPE x^{-k} Gamma(1+mu k-gamma)/pi; the
    // sin(pi w) factor of 1/Gamma oscillates through zeros and cannot drive
    // the stopping rule.
    long double env_min = std::numeric_limits<long double>::max();
    for (int k = 1; k <= 200000; ++k) {
        const long double w = static_cast<long double>(gamma) - static_cast<long double>(mu) * k;
        long double env, term;
        if (w < 1.0L) {
            const long double ln_env = -k * lx + boost::math::lgamma(1.0L - w) - std::log(M_PI);
            env = std::exp(ln_env);
            term = -((k % 2 == 0) ? 1.0L : -1.0L) * env * std::sin(M_PI * w);
        } else {
            env = std::exp(-k * lx - boost::math::lgamma(w));
            term = -((k % 2 == 0) ? 1.0L : -1.0L) * env;
        }
        if (env > env_min) {
            if (env_min > 1e-12L * std::fabs(sum))
                throw convergence_error("ml_eval: asymptotic expansion insufficient");
            return static_cast<double>(sum);
        }
        env_min = env;
        sum += term;
        if (env < 1e-25L * std::fabs(sum)) return static_cast<double>(sum);
    }
    throw convergence_error("ml_eval: asymptotic expansion did not terminate");
}

} // namespace detail

/// Mittag-Leffler function E_{mu,gamma}(z) for real z <= 0 (small z > 0 also
/// served by the series).  Relative accuracy ~1e-10 or better across
/// z in [-1e300, 0] for the kernel parameter ranges used here.
inline double ml_eval(const MlParams& p, double z) {
    if (z == 0.0) return 1.0 / std::tgamma(p.gamma);
    if (!std::isfinite(z)) throw std::domain_error("ml_eval: z must be finite");

    // t = |z|^{1/mu}: the time variable the kernel evaluations come from,
    // and the natural measure of how hard the series cancellation is.
    const double t = std::pow(std::fabs(z), 1.0 / p.mu);
    if (t <= 12.0) return static_cast<double>(detail::ml_series<long double>(p.mu, p.gamma, z));
    if (t <= 42.0 || (z > 0.0) || p.mu >= 1.0) {
        if (t > 42.0)
            throw convergence_error("ml_eval: argument outside supported regimes");
        using bf50 = boost::multiprecision::cpp_bin_float_50;
        return static_cast<double>(detail::ml_series<bf50>(p.mu, p.gamma, z));
    }
    return detail::ml_asymptotic(p.mu, p.gamma, z);
}

/// Damping kernel beta(t), t > 0.
/// Family A: t^{mu-1} e^{-rt} / Gamma(mu).
/// Family B: -d/dt E_{mu,1}(-t^mu) = t^{mu-1} E_{mu,mu}(-t^mu).
inline double beta_eval(const KernelSpec& spec, double t) {
    if (!(t > 0.0)) throw std::domain_error("beta_eval: t > 0 required");
    if (spec.family == KernelFamily::A)
        return std::exp((spec.mu - 1.0) * std::log(t) - spec.r * t - boost::math::lgamma(spec.mu));
    return std::pow(t, spec.mu - 1.0) * ml_eval(MlParams(spec.mu, spec.mu), -std::pow(t, spec.mu));
}

/// Antiderivative int_0^t beta(tau) dtau.
/// Family A, r=0: t^mu/Gamma(mu+1); r>0: P(mu, r t)/r^mu;
/// family B: 1 - E_{mu,1}(-t^mu)  (uses e_mu(0) = 1).
inline double beta_integral(const KernelSpec& spec, double t) {
    if (!(t >= 0.0)) throw std::domain_error("beta_integral: t >= 0 required");
    if (t == 0.0) return 0.0;
    if (spec.family == KernelFamily::A) {
        if (spec.r == 0.0) return std::pow(t, spec.mu) / std::tgamma(spec.mu + 1.0);
        return gamma_p(spec.mu, spec.r * t) / std::pow(spec.r, spec.mu);
    }
    const double x = std::pow(t, spec.mu);
    if (x < 0.1) {
        // direct series for 1 - E_{mu,1}(-x); avoids cancellation near t = 0
        double sum = 0.0, xk = x;
        for (int k = 1; k < 60; ++k) {
            const double term = xk / std::tgamma(spec.mu * k + 1.0);
            sum += (k % 2 == 1) ? term : -term;
            if (term < 1e-18 * std::fabs(sum)) break;
            xk *= x;
        }
        return sum;
    }
    return 1.0 - ml_eval(MlParams(spec.mu, 1.0), -x);
}

namespace detail {

// Laplace transform formulas without the half-plane check; the CQ contour
// needs them on arguments that may graze the imaginary axis.
template <typename Real>
std::complex<Real> beta_hat_raw(const KernelSpec& spec, std::complex<Real> z) {
    if (spec.family == KernelFamily::A)
        return std::pow(z + std::complex<Real>(static_cast<Real>(spec.r), 0), std::complex<Real>(static_cast<Real>(-spec.mu), 0));
    return std::complex<Real>(1, 0) / (std::pow(z, std::complex<Real>(static_cast<Real>(spec.mu), 0)) + std::complex<Real>(1, 0));
}

} // namespace detail

/// Laplace transform beta_hat(z) for Re z > 0 (principal branches).
/// Family A: (z+r)^{-mu}; family B: 1/(z^mu + 1).
inline std::complex<double> beta_hat(const KernelSpec& spec, std::complex<double> z) {
    if (!(z.real() > 0.0)) throw std::domain_error("beta_hat: Re z > 0 required");
    return detail::beta_hat_raw<double>(spec, z);
}

/// Lower-bound weight gamma(t) of the continuous positivity estimate
/// (test-suite use only; the solver never calls this).
inline double gamma_weight(const KernelSpec& spec, double t) {
    if (!(t > 0.0)) throw std::domain_error("gamma_weight: t > 0 required");
    const double g1 = std::tgamma(1.0 - spec.mu);
    if (spec.family == KernelFamily::B)
        return std::pow(t, -spec.mu) / g1 + 1.0;
    double out = std::exp(-spec.r * t) * std::pow(t, -spec.mu) / g1;
    if (spec.r > 0.0) {
        // (r/Gamma(1-mu)) int_0^t tau^{-mu} e^{-r tau} dtau = r^mu P(1-mu, r t)
        out += std::pow(spec.r, spec.mu) * gamma_p(1.0 - spec.mu, spec.r * t);
    }
    return out;
}

} // namespace fracwest

#endif
