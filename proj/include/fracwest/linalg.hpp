#ifndef FRACWEST_LINALG_HPP
#define FRACWEST_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "fracwest/common.hpp"

namespace fracwest {

/// Structurally symmetric sparse matrix in compressed-row form with sorted
/// column indices and no duplicate entries.
struct SparseSym {
    int n = 0;
    std::vector<int> row_ptr;  // size n+1
    std::vector<int> col;
    std::vector<double> val;

    int bandwidth() const {
        int bw = 0;
        for (int i = 0; i < n; ++i)
            for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
                bw = std::max(bw, std::abs(col[p] - i));
        return bw;
    }

    std::vector<double> diagonal() const {
        std::vector<double> d(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
                if (col[p] == i) d[i] = val[p];
        return d;
    }
};

/// Assemble CSR from coordinate triplets; duplicates are summed.
inline SparseSym sparse_from_triplets(int n, std::vector<std::tuple<int, int, double>> trip) {
    for (const auto& [i, j, v] : trip) {
        (void)v;
        if (i < 0 || i >= n || j < 0 || j >= n)
            throw std::out_of_range("sparse_from_triplets: index out of range");
    }
    std::sort(trip.begin(), trip.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    SparseSym A;
    A.n = n;
    A.row_ptr.assign(n + 1, 0);
    for (std::size_t k = 0; k < trip.size();) {
        const int i = std::get<0>(trip[k]);
        const int j = std::get<1>(trip[k]);
        double s = 0.0;
        while (k < trip.size() && std::get<0>(trip[k]) == i && std::get<1>(trip[k]) == j)
            s += std::get<2>(trip[k++]);
        A.col.push_back(j);
        A.val.push_back(s);
        ++A.row_ptr[i + 1];
    }
    for (int i = 0; i < n; ++i) A.row_ptr[i + 1] += A.row_ptr[i];
    return A;
}

/// A + c*B (patterns merged).
inline SparseSym add_scaled(const SparseSym& A, double c, const SparseSym& B) {
    if (A.n != B.n) throw std::invalid_argument("add_scaled: dimension mismatch");
    std::vector<std::tuple<int, int, double>> trip;
    trip.reserve(A.val.size() + B.val.size());
    for (int i = 0; i < A.n; ++i)
        for (int p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p)
            trip.emplace_back(i, A.col[p], A.val[p]);
    for (int i = 0; i < B.n; ++i)
        for (int p = B.row_ptr[i]; p < B.row_ptr[i + 1]; ++p)
            trip.emplace_back(i, B.col[p], c * B.val[p]);
    return sparse_from_triplets(A.n, std::move(trip));
}

inline std::vector<double> matvec(const SparseSym& A, std::span<const double> x) {
    if (static_cast<int>(x.size()) != A.n)
        throw std::invalid_argument("matvec: dimension mismatch");
    std::vector<double> y(A.n, 0.0);
    for (int i = 0; i < A.n; ++i) {
        double s = 0.0;
        for (int p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p) s += A.val[p] * x[A.col[p]];
        y[i] = s;
    }
    return y;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// x^T A y for symmetric A.
inline double quadratic_form(const SparseSym& A, std::span<const double> x, std::span<const double> y) {
    return dot(x, matvec(A, y));
}

namespace detail {

// Banded Cholesky (no pivoting).  A nonpositive pivot is the degeneracy
// signal the caller wants, so it maps to non_spd_error rather than being
// patched up.
inline std::vector<double> solve_banded_cholesky(const SparseSym& A, std::span<const double> b, int bw) {
    const int n = A.n;
    const int ld = bw + 1;
    std::vector<double> band(static_cast<std::size_t>(n) * ld, 0.0); // band[i*ld + d] = A(i, i-d)
    for (int i = 0; i < n; ++i)
        for (int p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p) {
            const int j = A.col[p];
            if (j <= i) band[static_cast<std::size_t>(i) * ld + (i - j)] = A.val[p];
        }
    // factor A = L L^T in band storage
    for (int i = 0; i < n; ++i) {
        for (int d = std::min(bw, i); d >= 1; --d) {
            const int j = i - d;
            double s = band[static_cast<std::size_t>(i) * ld + d];
            for (int e = 1; e <= std::min(bw - d, j); ++e)
                s -= band[static_cast<std::size_t>(i) * ld + d + e] * band[static_cast<std::size_t>(j) * ld + e];
            band[static_cast<std::size_t>(i) * ld + d] = s / band[static_cast<std::size_t>(j) * ld];
        }
        double s = band[static_cast<std::size_t>(i) * ld];
        for (int e = 1; e <= std::min(bw, i); ++e) {
            const double l = band[static_cast<std::size_t>(i) * ld + e];
            s -= l * l;
        }
        if (!(s > 0.0))
            throw non_spd_error("banded Cholesky: nonpositive pivot", s);
        band[static_cast<std::size_t>(i) * ld] = std::sqrt(s);
    }
    std::vector<double> x(b.begin(), b.end());
    for (int i = 0; i < n; ++i) {
        double s = x[i];
        for (int e = 1; e <= std::min(bw, i); ++e)
            s -= band[static_cast<std::size_t>(i) * ld + e] * x[i - e];
        x[i] = s / band[static_cast<std::size_t>(i) * ld];
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = x[i];
        for (int e = 1; e <= std::min(bw, n - 1 - i); ++e)
            s -= band[static_cast<std::size_t>(i + e) * ld + e] * x[i + e];
        x[i] = s / band[static_cast<std::size_t>(i) * ld];
    }
    return x;
}

} // namespace detail

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

/// Preconditioned conjugate gradients; Jacobi preconditioner optional so the
/// effect of preconditioning is testable.
inline CgResult cg_solve(const SparseSym& A, std::span<const double> b, double tol,
                         int max_iter, bool jacobi = true) {
    const int n = A.n;
    CgResult out;
    out.x.assign(n, 0.0);
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        out.converged = true;
        return out;
    }
    std::vector<double> dinv(n, 1.0);
    if (jacobi) {
        const auto d = A.diagonal();
        for (int i = 0; i < n; ++i) {
            if (!(d[i] > 0.0)) throw non_spd_error("cg_solve: nonpositive diagonal", d[i]);
            dinv[i] = 1.0 / d[i];
        }
    }
    std::vector<double> r(b.begin(), b.end()), z(n), p(n);
    for (int i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= max_iter; ++it) {
        const auto Ap = matvec(A, p);
        const double pAp = dot(p, Ap);
        if (!(pAp > 0.0)) throw non_spd_error("cg_solve: p^T A p <= 0", pAp);
        const double alpha = rz / pAp;
        for (int i = 0; i < n; ++i) {
            out.x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        out.iterations = it;
        out.relative_residual = norm2(r) / bnorm;
        if (out.relative_residual <= tol) {
            out.converged = true;
            return out;
        }
        for (int i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    return out;
}

/// Solve A x = b for SPD A.  Narrow band: exact banded Cholesky (tol
/// ignored); otherwise Jacobi-CG with relative tolerance `tol` and an
/// iteration cap of 10n.  Failure to converge or a nonpositive pivot raises
/// non_spd_error.
inline std::vector<double> solve_spd(const SparseSym& A, std::span<const double> b, double tol = 1e-10) {
    if (static_cast<int>(b.size()) != A.n)
        throw std::invalid_argument("solve_spd: dimension mismatch");
    const int bw = A.bandwidth();
    if (bw <= 2) return detail::solve_banded_cholesky(A, b, bw);
    auto res = cg_solve(A, b, tol, 10 * A.n);
    if (!res.converged)
        throw non_spd_error("solve_spd: CG did not converge within 10n iterations", res.relative_residual);
    return std::move(res.x);
}

} // namespace fracwest

#endif
