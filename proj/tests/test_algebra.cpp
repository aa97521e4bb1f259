#include "invcone/algebra.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "invcone/error.hpp"

namespace invcone {
namespace {

void expect_proportional(const std::vector<double>& a, const std::vector<double>& b, double tol = 1e-10) {
    // a = s b for some s != 0
    std::size_t piv = 0;
    for (std::size_t i = 0; i < b.size(); ++i)
        if (std::fabs(b[i]) > std::fabs(b[piv])) piv = i;
    const double s = a[piv] / b[piv];
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], s * b[i], tol) << "entry " << i;
}

Mat random_mat(std::size_t n, std::mt19937_64& rng, double lo = -2.0, double hi = 2.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = d(rng);
    return m;
}

Mat permutation(const std::vector<std::size_t>& perm) {
    Mat p(perm.size(), perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) p(i, perm[i]) = 1.0;
    return p;
}

TEST(Eigen, SimpleRealSpectrum) {
    const Mat b{{6, 1}, {-8, 0}};
    const auto d = eigen(b);
    ASSERT_TRUE(d.real_eigenbasis.has_value());
    ASSERT_EQ(d.eigenvalues.size(), 2u);
    EXPECT_NEAR(d.eigenvalues[0].real(), 2.0, 1e-10 * 2);
    EXPECT_NEAR(d.eigenvalues[1].real(), 4.0, 1e-10 * 4);
    expect_proportional(d.real_eigenbasis->column(0), {-1, 4});
    expect_proportional(d.real_eigenbasis->column(1), {0.5, -1});
    EXPECT_TRUE(d.simple());
}

TEST(Eigen, IdentityGivesIdentityBasis) {
    const auto d = eigen(Mat::identity(2));
    ASSERT_TRUE(d.real_eigenbasis.has_value());
    EXPECT_EQ(*d.real_eigenbasis, Mat::identity(2));
    ASSERT_EQ(d.clusters.size(), 1u);
    EXPECT_EQ(d.clusters[0].algebraic_multiplicity, 2u);
    EXPECT_EQ(d.clusters[0].geometric_multiplicity, 2u);
}

TEST(Eigen, RotationHasNoRealBasis) {
    const auto d = eigen(Mat{{0, -1}, {1, 0}});
    EXPECT_FALSE(d.real_eigenbasis.has_value());
    ASSERT_EQ(d.eigenvalues.size(), 2u);
    EXPECT_NEAR(d.eigenvalues[0].imag(), -1.0, 1e-12);
    EXPECT_NEAR(d.eigenvalues[1].imag(), 1.0, 1e-12);
    EXPECT_FALSE(d.all_real());
}

TEST(Eigen, JordanBlockIsNotDiagonalizable) {
    const auto d = eigen(Mat{{0, -1}, {0, 0}});
    EXPECT_FALSE(d.real_eigenbasis.has_value());
    ASSERT_EQ(d.clusters.size(), 1u);
    EXPECT_EQ(d.clusters[0].algebraic_multiplicity, 2u);
    EXPECT_EQ(d.clusters[0].geometric_multiplicity, 1u);
}

TEST(Eigen, Errors) {
    try {
        eigen(Mat(2, 3));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonSquare);
    }
    try {
        eigen(Mat::identity(17));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DimensionTooLarge);
    }
}

// V^{-1} M V diagonal and V D V^{-1} = M for random matrices with real spectrum
// (built as S D S^{-1}).
TEST(EigenProperty, DiagonalizationRoundTrip) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> d(-5.0, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 5);
        Mat s = random_mat(n, rng);
        for (std::size_t i = 0; i < n; ++i) s(i, i) += 3.0;  // keep S well conditioned
        std::vector<double> diag(n);
        for (double& x : diag) x = d(rng);
        const Mat m = s * Mat::diagonal(diag) * invert(s).inverse;
        const auto dec = eigen(m);
        ASSERT_TRUE(dec.real_eigenbasis.has_value()) << "trial " << trial;
        const Mat& v = *dec.real_eigenbasis;
        const Mat vinv = invert(v).inverse;
        const Mat dm = vinv * m * v;
        std::vector<double> lam(n);
        for (std::size_t i = 0; i < n; ++i) lam[i] = dec.eigenvalues[i].real();
        const double scale = std::max(1.0, m.max_abs()) * dec.basis_condition;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                EXPECT_NEAR(dm(i, j), i == j ? lam[i] : 0.0, kAlgTol * scale) << "trial " << trial;
        EXPECT_LE(max_abs_diff(v * Mat::diagonal(lam) * vinv, m), kAlgTol * scale);
    }
}

TEST(Cooperative, WorkedExampleMatrices) {
    EXPECT_TRUE(is_cooperative(Mat{{-3, 2}, {1, -2}}).is_cooperative);
    EXPECT_TRUE(is_cooperative(Mat{{-4, 3}, {0, -1}}).is_cooperative);
    const auto r = is_cooperative(Mat{{0, 1}, {1, 0}});
    EXPECT_FALSE(r.is_cooperative);
    EXPECT_DOUBLE_EQ(r.worst_rowsum_margin, 1.0);
    EXPECT_DOUBLE_EQ(r.worst_offdiag_margin, 1.0);
    EXPECT_DOUBLE_EQ(r.strict_level, -1.0);
}

TEST(Cooperative, StrictLevel) {
    // off-diagonals >= 2, row sums <= -3  => K = 2
    const auto r = is_cooperative(Mat{{-5, 2}, {3, -7}});
    EXPECT_DOUBLE_EQ(r.strict_level, 2.0);
    EXPECT_THROW(is_cooperative(Mat(2, 3)), Error);
}

TEST(CooperativeProperty, PermutationInvariance) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 4);
        Mat c = random_mat(n, rng, -1.0, 1.0);
        // bias half of the samples toward cooperativity
        if (trial % 2 == 0)
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j)
                    if (i != j) c(i, j) = std::fabs(c(i, j));
                c(i, i) = -static_cast<double>(n);
            }
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        const Mat p = permutation(perm);
        EXPECT_EQ(is_cooperative(c).is_cooperative, is_cooperative(p * c * p.transpose()).is_cooperative);
    }
}

TEST(MMatrix, WorkedExample) {
    const auto r = is_m_matrix(Mat{{2, -1}, {-1, 2}});
    EXPECT_TRUE(r.is_m_matrix);
    EXPECT_DOUBLE_EQ(r.s, 2.0);
    // s = max diagonal = 2 gives X = [[0,1],[1,0]], rho = 1 < 2.
    EXPECT_EQ(r.x, (Mat{{0, 1}, {1, 0}}));
    EXPECT_NEAR(r.spectral_radius, 1.0, 1e-12);
    EXPECT_TRUE(r.inverse_nonnegative);
}

TEST(MMatrix, IdentityAndSingular) {
    EXPECT_TRUE(is_m_matrix(Mat::identity(3)).is_m_matrix);
    const auto r = is_m_matrix(Mat{{0, -1}, {-1, 0}});
    EXPECT_FALSE(r.is_m_matrix);
    EXPECT_GE(r.spectral_radius, r.s);
    EXPECT_FALSE(is_m_matrix(Mat{{2, 1}, {1, 2}}).is_m_matrix);  // positive off-diagonal
}

TEST(MMatrixProperty, InverseIsNonnegative) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int accepted = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 4);
        Mat x(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) x(i, j) = u(rng);
        const double s = spectral_radius(x) * (0.8 + 0.4 * u(rng));
        const Mat q = s * Mat::identity(n) - x;
        const auto r = is_m_matrix(q);
        if (!r.is_m_matrix) continue;
        ++accepted;
        const Mat inv = invert(q, 1e15).inverse;
        for (double v : inv.data()) EXPECT_GE(v, -kAlgTol);
        EXPECT_TRUE(r.inverse_nonnegative);
    }
    EXPECT_GT(accepted, 100);
}

TEST(Conjugate, KnownProduct) {
    const Mat c{{-3, 2}, {1, -2}};
    const Mat q{{2, -1}, {-1, 2}};
    EXPECT_LE(max_abs_diff(conjugate(c, q), Mat{{-4, 3}, {0, -1}}), 1e-12);
}

TEST(Conjugate, IdentityAndScalar) {
    std::mt19937_64 rng(14);
    const Mat c = random_mat(3, rng);
    EXPECT_LE(max_abs_diff(conjugate(c, Mat::identity(3)), c), 1e-15);
    const Mat minus_i = -1.0 * Mat::identity(2);
    EXPECT_LE(max_abs_diff(conjugate(minus_i, Mat{{3, 1}, {-2, 5}}), minus_i), 1e-14);
}

TEST(Conjugate, SingularQ) {
    try {
        conjugate(Mat::identity(2), Mat{{1, 2}, {2, 4}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SingularQ);
    }
}

TEST(ConjugateProperty, RoundTrip) {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 4);
        const Mat c = random_mat(n, rng);
        Mat q = random_mat(n, rng);
        for (std::size_t i = 0; i < n; ++i) q(i, i) += 4.0;
        const Mat back = q * conjugate(c, q) * invert(q).inverse;
        EXPECT_LE(max_abs_diff(back, c), kAlgTol * std::max(1.0, c.max_abs()));
    }
}

TEST(Flux, CooperativeHolds) {
    EXPECT_TRUE(flux_condition_orthant(Mat{{-3, 2}, {1, -2}}, 1000).holds);
    EXPECT_TRUE(flux_condition_orthant(Mat(3, 3), 10).holds);
}

TEST(Flux, PositiveRowSumsCaughtAtTranslatedVertex) {
    const Mat c{{0, 1}, {1, 0}};
    // On the orthant face itself the sample passes: u = (0,-1), p = e_1.
    const auto cu = c * std::vector<double>{0, -1};
    EXPECT_DOUBLE_EQ(cu[0], -1.0);
    const auto r = flux_condition_orthant(c, 1000);
    EXPECT_FALSE(r.holds);
    EXPECT_GT(r.worst.value, 0.0);
    EXPECT_EQ(r.worst.shift, 1.0);
}

TEST(FluxProperty, AgreesWithCooperativity) {
    std::mt19937_64 rng(16);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int coop = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 3);
        Mat c = random_mat(n, rng, -1.0, 1.0);
        if (trial % 3 == 0)
            for (std::size_t i = 0; i < n; ++i) {
                double off = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    if (i != j) off += (c(i, j) = std::fabs(c(i, j)));
                c(i, i) = -off - 0.3 * u(rng);
            }
        const bool expected = is_cooperative(c).is_cooperative;
        coop += expected;
        EXPECT_EQ(flux_condition_orthant(c, 50, 100 + static_cast<std::uint64_t>(trial)).holds, expected)
            << "trial " << trial;
    }
    EXPECT_GT(coop, 50);
}

TEST(Nullspace, CanonicalBasis) {
    const auto ns = nullspace(Mat(3, 3));
    ASSERT_EQ(ns.size(), 3u);
    EXPECT_EQ(ns[0], (std::vector<double>{1, 0, 0}));
    EXPECT_EQ(ns[2], (std::vector<double>{0, 0, 1}));
    EXPECT_TRUE(nullspace(Mat::identity(3)).empty());
}

}  // namespace
}  // namespace invcone
