#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fracwest/cq.hpp"
#include "fracwest/fem.hpp"
#include "support/oracles.hpp"

using namespace fracwest;

namespace {
const KernelSpec kA05{KernelFamily::A, 0.5, 0.0};
const KernelSpec kA05r2{KernelFamily::A, 0.5, 2.0};
const KernelSpec kB05{KernelFamily::B, 0.5, 0.0};

std::vector<std::vector<double>> as_scalars(const std::vector<double>& v) {
    std::vector<std::vector<double>> out;
    out.reserve(v.size());
    for (double x : v) out.push_back({x});
    return out;
}
}  // namespace

TEST(Bdf2Delta, GeneratingPolynomial) {
    EXPECT_EQ(bdf2_delta({1.0, 0.0}), (std::complex<double>{0.0, 0.0}));
    EXPECT_EQ(bdf2_delta({0.0, 0.0}), (std::complex<double>{1.5, 0.0}));
    EXPECT_EQ(bdf2_delta({-1.0, 0.0}), (std::complex<double>{4.0, 0.0}));
}

TEST(CqWeights, ExactRecursionLeadingTerms) {
    const auto w = cq_weights(kA05, 0.1, 5);
    EXPECT_NEAR(w[0], std::sqrt(0.1 * 2.0 / 3.0), 1e-14);      // beta_hat(3/(2 dt))
    EXPECT_NEAR(w[1], w[0] * (4.0 / 3.0) * 0.5, 1e-14);        // mu + mu/3
    // numerically computed Taylor coefficients (independent oracle)
    EXPECT_NEAR(w[2], 0.12909944487358056, 1e-13);
    EXPECT_NEAR(w[3], 0.10519214026736194, 1e-13);
    EXPECT_NEAR(w[5], 0.080487925507602697, 1e-13);
}

TEST(CqWeights, FirstWeightMatchesLaplaceTransform) {
    for (const auto& spec : {kA05, kA05r2, kB05}) {
        for (double dt : {0.1, 0.01}) {
            const auto w = cq_weights(spec, dt, 8);
            const double expected = beta_hat(spec, {1.5 / dt, 0.0}).real();
            EXPECT_NEAR(w[0], expected, 1e-12 * expected);
        }
    }
}

TEST(CqWeights, ContourMatchesExactRecursion) {
    const KernelSpec spec(KernelFamily::A, 0.25, 0.0);
    const auto exact = cq_weights(spec, 0.05, 64);
    const auto contour = detail::cq_weights_contour(spec, 0.05, 64);
    for (int j = 0; j <= 64; ++j)
        EXPECT_NEAR(contour[j], exact[j], 1e-9) << "j=" << j;
}

TEST(CqWeights, ContourMatchesTaylorOracle) {
    const auto wb = cq_weights(kB05, 0.1, 7);
    const auto& refb = oracles::ref::cq_weights_B_half_dt01();
    for (int j = 0; j <= 7; ++j) EXPECT_NEAR(wb[j], refb[j], 1e-10) << "j=" << j;

    const auto wa = cq_weights(KernelSpec(KernelFamily::A, 0.25, 1.0), 0.05, 7);
    const auto& refa = oracles::ref::cq_weights_A_quarter_r1_dt005();
    for (int j = 0; j <= 7; ++j) EXPECT_NEAR(wa[j], refa[j], 1e-10) << "j=" << j;
}

TEST(CqWeights, PositiveAndScaling) {
    for (double mu : {0.25, 0.5, 0.75}) {
        const KernelSpec spec(KernelFamily::A, mu, 0.0);
        const auto w = cq_weights(spec, 0.01, 256);
        for (double v : w) EXPECT_GT(v, 0.0);
        const auto w1 = cq_weights(spec, 1.0, 256);
        const double scale = std::pow(0.01, mu);
        for (int j = 0; j <= 256; ++j)
            EXPECT_NEAR(w[j], scale * w1[j], 1e-12 * std::fabs(scale * w1[j]));
    }
}

TEST(CqWeights, LeadingWeightAsymptotics) {
    // omega_0 ~ (2/3)^mu dt^mu: exact for A r=0, ratio -> 1 otherwise
    for (const auto& spec : {kA05r2, kB05, KernelSpec(KernelFamily::B, 0.25, 0.0)}) {
        double prev = 1e9;
        for (double dt : {1e-2, 1e-3, 1e-4}) {
            const auto w = cq_weights(spec, dt, 0);
            const double ratio = w[0] / std::pow(2.0 * dt / 3.0, spec.mu);
            EXPECT_LT(std::fabs(ratio - 1.0), prev);
            prev = std::fabs(ratio - 1.0);
        }
        EXPECT_LT(prev, 0.1);
    }
    const auto w = cq_weights(kA05, 1e-3, 0);
    EXPECT_NEAR(w[0], std::pow(2.0 * 1e-3 / 3.0, 0.5), 1e-15);
}

TEST(CorrectionWeights, DefinitionAndExactnessOnConstants) {
    for (const auto& spec : {kA05, kA05r2, kB05}) {
        const double dt = 0.05;
        const int N = 64;
        const auto scheme = make_cq_scheme(spec, dt, N, true);
        EXPECT_EQ(scheme.corrections[0], -scheme.weights[0]);  // omega_{0,0} = -omega_0
        const std::vector<std::vector<double>> ones(N + 1, std::vector<double>{1.0});
        for (int n = 0; n <= N; ++n) {
            const double conv = convolve(scheme, ones, n)[0];
            const double exact = beta_integral(spec, n * dt);
            EXPECT_NEAR(conv, exact, 1e-12 * std::max(1.0, exact)) << "n=" << n;
        }
    }
}

TEST(CorrectionWeights, DerivedSecondCorrection) {
    const auto scheme = make_cq_scheme(kA05, 0.1, 4, true);
    const double expected = beta_integral(kA05, 0.1) - scheme.weights[0] - scheme.weights[1];
    EXPECT_NEAR(scheme.corrections[1], expected, 1e-15);
    EXPECT_NEAR(scheme.corrections[1], -0.07350666, 5e-8);
}

TEST(CorrectionWeights, StabilityBound) {
    // |omega_{n,0}| <= C t_n^{mu-1} dt with C stable under refinement
    for (const auto& spec : {kA05, kA05r2, kB05}) {
        double c_prev = 0.0;
        for (double dt : {0.02, 0.01}) {
            const int N = static_cast<int>(std::lround(1.0 / dt));
            const auto scheme = make_cq_scheme(spec, dt, N, true);
            double cmax = 0.0;
            for (int n = 1; n <= N; ++n) {
                const double tn = n * dt;
                cmax = std::max(cmax, std::fabs(scheme.corrections[n]) /
                                          (std::pow(tn, spec.mu - 1.0) * dt));
            }
            EXPECT_TRUE(std::isfinite(cmax));
            if (c_prev > 0.0) { EXPECT_LT(cmax, 2.0 * c_prev); }
            c_prev = cmax;
        }
    }
}

TEST(Convolve, LinearityAndEdgeCases) {
    const auto scheme = make_cq_scheme(kA05r2, 0.1, 16, false);
    const std::vector<std::vector<double>> zeros(10, std::vector<double>(3, 0.0));
    const auto z = convolve(scheme, zeros, 9);
    for (double v : z) EXPECT_EQ(v, 0.0);

    std::mt19937 rng(42);
    std::normal_distribution<double> dist;
    std::vector<std::vector<double>> v(12, std::vector<double>(3)), w = v, combo = v;
    const double alpha = 1.7;
    for (auto& row : v)
        for (auto& x : row) x = dist(rng);
    for (auto& row : w)
        for (auto& x : row) x = dist(rng);
    for (std::size_t i = 0; i < v.size(); ++i)
        for (int d = 0; d < 3; ++d) combo[i][d] = alpha * v[i][d] + w[i][d];
    const auto cv = convolve(scheme, v, 11);
    const auto cw = convolve(scheme, w, 11);
    const auto cc = convolve(scheme, combo, 11);
    for (int d = 0; d < 3; ++d) EXPECT_NEAR(cc[d], alpha * cv[d] + cw[d], 1e-12);

    EXPECT_THROW(convolve(scheme, v, 12), std::out_of_range);

    // brute-force cross-check of the convolution sum
    std::vector<double> scal(8);
    for (auto& x : scal) x = dist(rng);
    const auto brute = oracles::brute_convolution(
        std::vector<double>(scheme.weights.begin(), scheme.weights.begin() + 8), scal);
    const auto hist = as_scalars(scal);
    for (int n = 0; n < 8; ++n)
        EXPECT_NEAR(convolve(scheme, hist, n)[0], brute[n], 1e-13);
}

TEST(Convolve, CorrectedEqualsPlainForZeroStart) {
    const auto plain = make_cq_scheme(kB05, 0.05, 12, false);
    auto corrected = plain;
    corrected.corrected = true;
    std::mt19937 rng(3);
    std::normal_distribution<double> dist;
    std::vector<std::vector<double>> v(13, std::vector<double>{0.0});
    for (std::size_t i = 1; i < v.size(); ++i) v[i][0] = dist(rng);
    for (int n = 0; n <= 12; ++n)
        EXPECT_EQ(convolve(plain, v, n)[0], convolve(corrected, v, n)[0]);
}

TEST(Convolve, MonomialRates) {
    // error at fixed t_n = 1 behaves like dt^{min(alpha+1,2)} for v = t^alpha
    const double mu = 0.5;
    const KernelSpec spec(KernelFamily::A, mu, 0.0);
    for (double alpha : {0.0, 2.0}) {
        std::vector<double> errs;
        for (int steps : {64, 128, 256}) {
            const double dt = 1.0 / steps;
            const auto scheme = make_cq_scheme(spec, dt, steps, false);
            std::vector<std::vector<double>> hist(steps + 1);
            for (int j = 0; j <= steps; ++j) hist[j] = {std::pow(j * dt, alpha)};
            const double exact = std::tgamma(alpha + 1.0) / std::tgamma(alpha + 1.0 + mu);
            errs.push_back(std::fabs(convolve(scheme, hist, steps)[0] - exact));
        }
        const double order = std::log2(errs[1] / errs[2]);
        EXPECT_NEAR(order, std::min(alpha + 1.0, 2.0), 0.15) << "alpha=" << alpha;
    }
}

TEST(PositivityForm, ZeroAndRandomSequences) {
    const auto schemeB = make_cq_scheme(kB05, 0.1, 64, false);
    const std::vector<std::vector<double>> zeros(8, std::vector<double>{0.0});
    const auto [l0, r0] = positivity_form(schemeB, zeros, 1.0);
    EXPECT_EQ(l0, 0.0);
    EXPECT_EQ(r0, 0.0);

    const auto schemeA1 = make_cq_scheme(KernelSpec(KernelFamily::A, 0.5, 1.0), 0.1, 64, false);
    std::mt19937 rng(0x5eed);
    std::normal_distribution<double> dist;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::vector<double>> v(64);
        for (auto& row : v) row = {dist(rng)};
        const auto [lb, rb] = positivity_form(schemeB, v, 1.0);
        EXPECT_GE(lb, rb * (1.0 - 1e-12) - 1e-12);  // C_beta = 1 for family B
        const auto [la, ra] = positivity_form(schemeA1, v, 1.0);
        EXPECT_GE(la, -1e-12 * ra);
    }
}

TEST(PositivityForm, MassPairingAndWeightedSequence) {
    // FEM coefficient sequences pair through the mass matrix
    const auto sp = build_space(make_interval_mesh(0.0, 1.0, 12));
    const auto schemeB = make_cq_scheme(kB05, 0.05, 32, false);
    std::mt19937 rng(0xabc);
    std::normal_distribution<double> dist;
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<std::vector<double>> v(32, std::vector<double>(sp.n_dof));
        for (auto& row : v)
            for (auto& x : row) x = dist(rng);
        const auto [lhs, rhs] = positivity_form(schemeB, v, 1.0, &sp.mass);
        EXPECT_GE(lhs, rhs * (1.0 - 1e-12));
    }
    // weighted sequence rho = e^{-dt/T} < 1 admissible for family A, r = 0
    const double dt = 0.05, T = 32 * dt;
    const auto schemeA = make_cq_scheme(kA05, dt, 32, false);
    const double rho = std::exp(-dt / T);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<std::vector<double>> v(32, std::vector<double>(sp.n_dof));
        for (auto& row : v)
            for (auto& x : row) x = dist(rng);
        const auto [lhs, rhs] = positivity_form(schemeA, v, rho, &sp.mass);
        EXPECT_GE(lhs, -1e-12 * rhs);
    }
}

TEST(MakeCqScheme, ArgumentChecks) {
    EXPECT_THROW(cq_weights(kA05, 0.0, 4), std::domain_error);
    EXPECT_THROW(cq_weights(kA05, 0.1, -1), std::domain_error);
    EXPECT_THROW(make_cq_scheme(kA05, 0.1, 0, false), std::domain_error);
    EXPECT_THROW(positivity_form(make_cq_scheme(kA05, 0.1, 2, false), {}, 1.5), std::domain_error);
}
