#ifndef FRACWEST_SPECIAL_HPP
#define FRACWEST_SPECIAL_HPP

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "fracwest/common.hpp"

namespace fracwest {

/// Regularized lower incomplete gamma P(a,x) = gamma(a,x)/Gamma(a).
///
/// Series for x < a+1, Lentz continued fraction otherwise
/// (Abramowitz & Stegun 6.5.29 / 6.5.31 split).
inline double gamma_p(double a, double x) {
    if (!(a > 0.0) || !(x >= 0.0))
        throw std::domain_error("gamma_p: need a > 0 and x >= 0");
    if (x == 0.0) return 0.0;

    const double eps = std::numeric_limits<double>::epsilon();
    const double log_prefac = a * std::log(x) - x - boost::math::lgamma(a);

    if (x < a + 1.0) {
        double ap = a;
        double term = 1.0 / a;
        double sum = term;
        for (int i = 0; i < 10000; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * eps)
                return sum * std::exp(log_prefac);
        }
        throw convergence_error("gamma_p: series did not converge");
    }

    // Q(a,x) via modified Lentz on the A&S continued fraction.
    const double fpmin = std::numeric_limits<double>::min() / eps;
    double b = x + 1.0 - a;
    double c = 1.0 / fpmin;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = b + an / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) <= eps)
            return 1.0 - std::exp(log_prefac) * h;
    }
    throw convergence_error("gamma_p: continued fraction did not converge");
}

/// Gauss-Legendre rule with n points on [-1,1].  Nodes by Newton iteration
/// on the Legendre recurrence; deterministic for fixed n.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    if (n < 1) throw std::domain_error("gauss_legendre: n >= 1 required");
    std::vector<double> x(n), w(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::fabs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    return {x, w};
}

} // namespace fracwest

#endif
