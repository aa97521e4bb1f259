#include "invcone/closed_forms.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "invcone/error.hpp"

namespace invcone {
namespace {

// Reference values from 40-digit evaluations of the defining formulas.
constexpr double kZeta1 = 3.099754194137351064;
constexpr double kZeta10x10 = 10.00817945553131117;
constexpr double kZeta3 = 1.292080877697314858;
constexpr double kZetaHalf = 6.049969991864259078;
constexpr double kZeta20 = 1.000000078323844119;
constexpr double kC0Half10 = 86.14982818217671114;   // c0(rho = 1/2, alpha/eps = 10)
constexpr double kUk50At1 = -0.5313290145968682635;  // eps = c = 1, alpha = 0
constexpr double kUk50At03 = -0.04229341269709343497;
constexpr double kUk3Mixed = -0.2230420779486888257;  // eps = 2, c = 4, alpha/eps = 1/2, k = 3, x = 0.7

std::vector<Point> grid(double lo, double hi, std::size_t n) {
    std::vector<Point> pts;
    for (std::size_t i = 1; i <= n; ++i) pts.push_back({lo + (hi - lo) * double(i) / double(n + 1)});
    return pts;
}

TEST(Zeta, ReferenceValues) {
    EXPECT_NEAR(zeta(1.0), kZeta1, 1e-14);
    EXPECT_NEAR(zeta(1.0), 3.0998, 1e-3);
    EXPECT_NEAR(zeta(3.0), kZeta3, 1e-14);
    EXPECT_NEAR(zeta(0.5), kZetaHalf, 1e-13);
    EXPECT_NEAR(zeta(20.0), kZeta20, 1e-14);
    EXPECT_NEAR(zeta(50.0), 1.0, 1e-10);
    EXPECT_NEAR(zeta(10.0) * 10.0, kZeta10x10, 1e-12);
}

TEST(Zeta, BranchesAgreeAtSwitch) {
    // series below 1, exponential form above
    const double below = zeta(std::nextafter(1.0, 0.0)), at = zeta(1.0);
    EXPECT_NEAR(below, at, 1e-14);
}

TEST(Zeta, SmallArgumentSeries) {
    for (double t : {1e-8, 1e-5, 1e-3, 0.1, 0.9}) {
        // 3/t (1 + t^2/30 + ...) at leading orders
        EXPECT_NEAR(zeta(t) * t / 3.0, 1.0 + t * t / 30.0, 1e-4 * t * t + 1e-15) << t;
    }
    EXPECT_NEAR(zeta(1e-3), 3000.0000999999997619, 1e-9);
}

TEST(Zeta, Errors) {
    for (double t : {0.0, -1.0, std::nan("")}) {
        try {
            zeta(t);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::NonPositiveTau);
        }
    }
}

TEST(Prediction, Examples) {
    const auto a = wmp_fails_prediction({1.0, 1.0, 0.0});
    EXPECT_TRUE(a.fails);
    EXPECT_NEAR(a.margin, kZeta1, 1e-12);
    for (double c : {1e-9, 1e-3, 1.0, 1e3, 1e8}) EXPECT_TRUE(wmp_fails_prediction({0.5, c, 5.999}).fails) << c;
    const auto b = wmp_fails_prediction({1.0, 100.0, 10.5});
    EXPECT_FALSE(b.fails);
    EXPECT_NEAR(b.value, kZeta10x10, 1e-12);
    // c below the cutoff uses the limit
    EXPECT_DOUBLE_EQ(wmp_fails_prediction({2.0, 0.0, 0.0}).value, 1.5);
    EXPECT_THROW(wmp_fails_prediction({0.0, 1.0, 0.0}), Error);
}

TEST(ZetaCurve, Limits) {
    EXPECT_NEAR(zeta_curve(0.5, 1e-10), 6.0, 1e-4);
    EXPECT_NEAR(zeta_curve(1.0, 1e6) / 1e3, 1.0, 1e-6);
}

TEST(ZetaCurveProperty, StrictlyIncreasing) {
    for (double rho : {0.25, 0.5, 1.0, 2.0}) {
        double prev = -1.0;
        for (int i = 0; i < 500; ++i) {
            const double c = std::pow(10.0, -6.0 + 12.0 * i / 499.0);
            const double v = zeta_curve(rho, c);
            EXPECT_GT(v, prev) << "rho=" << rho << " c=" << c;
            prev = v;
        }
        EXPECT_NEAR(zeta_curve(rho, 1e-6) * rho / 3.0, 1.0, 1e-3);
        EXPECT_NEAR(zeta_curve(rho, 1e6) / 1e3, 1.0, 1e-3);
    }
}

TEST(Threshold, Branches) {
    EXPECT_EQ(c_threshold(1.0, 0.0), 0.0);
    EXPECT_EQ(c_threshold(0.5, 5.9), 0.0);
    EXPECT_EQ(c_threshold(0.5, 6.0), 0.0);
    EXPECT_NEAR(c_threshold(1.0, 100.0), 1e4, 1e-6 * 1e4);
    EXPECT_NEAR(c_threshold(0.5, 10.0), kC0Half10, 1e-9 * kC0Half10);
}

TEST(ThresholdProperty, SeparatesPrediction) {
    for (double rho : {0.25, 1.0, 3.0})
        for (double ae : {0.5, 4.0, 13.0, 250.0}) {
            const double c0 = c_threshold(rho, ae);
            EXPECT_TRUE(wmp_fails_prediction({rho, c0 * (1 + 1e-9) + 1e-300, ae}).fails || c0 == 0.0);
            if (c0 > 0.0) EXPECT_FALSE(wmp_fails_prediction({rho, c0 * (1 - 1e-6), ae}).fails);
        }
}

TEST(Uk, ReferenceValues) {
    const auto f = u_k_family({1.0, 1.0, 0.0}, 1.0, 50);
    EXPECT_NEAR(f.value(0, Point{1.0}), kUk50At1, 1e-14);
    EXPECT_NEAR(f.value(0, Point{0.3}), kUk50At03, 1e-15);
    EXPECT_EQ(f.value(0, Point{0.0}), 0.0);
    EXPECT_EQ(f.value(1, Point{0.25}), -0.25);
    const auto g = u_k_family({1.0, 4.0, 0.5}, 2.0, 3);
    EXPECT_NEAR(g.value(0, Point{0.7}), kUk3Mixed, 1e-14);
}

TEST(Uk, ZeroAtOriginExactly) {
    for (double c : {1e-6, 0.3, 1.0, 50.0})
        for (double ae : {0.0, 0.7, 20.0})
            for (double k : {1.0, 7.0, 1e3, 1e7}) EXPECT_EQ(u_k_family({1.0, c, ae}, 1.5, k).value(0, Point{0.0}), 0.0);
}

TEST(Uk, DerivativeAtOrigin) {
    const auto f = u_k_family({1.0, 1.0, 0.0}, 1.0, 100);
    const double d = f.gradient(0, Point{0.0})[0];
    EXPECT_LE(std::fabs(d - 1.0 / 200.0), 0.2 / 200.0);
    EXPECT_NEAR(d, 0.004999958333749996, 1e-15);  // (1/sqrt c) tanh(sqrt c / 2k)
}

TEST(Uk, Identity) {
    // u_k'' - eps v' - c u_k + alpha v = 0 exactly
    for (double ae : {0.0, 1.3}) {
        const double eps = 1.0, c = 1.0, rho = 1.0;
        const auto sys = prop14_system(eps, eps * ae, c, 0.0);
        const auto f = u_k_family({rho, c, ae}, eps, 50);
        const auto pts = grid(0.0, rho, 1000);
        for (const auto& p : pts) EXPECT_NEAR(residual_at(sys, f, p)[0], 0.0, 1e-8);
        EXPECT_GE(residual(sys, f, pts)[1], 0.0);  // v'' - c_tilde v = c_tilde x >= 0
    }
}

TEST(Uk, Errors) {
    EXPECT_THROW(u_k_family({1.0, 0.0, 0.0}, 1.0, 5), Error);
    try {
        u_k_family({1.0, 0.0, 0.0}, 1.0, 5);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonPositiveC);
    }
    EXPECT_THROW(u_k_family({1.0, 1.0, 0.0}, -1.0, 5), Error);
}

TEST(U0, Value) {
    const auto f = u0_limit({1.0, 1.0, 0.0}, 1.0);
    EXPECT_NEAR(f.value(0, Point{1.0}), -(std::cosh(1.0) - 1.0), 1e-15);
    EXPECT_NEAR(f.value(0, Point{1.0}), -0.5430806, 1e-7);
    // c = 0 polynomial limit and continuity in c
    const auto z = u0_limit({1.0, 0.0, 2.0}, 1.0);
    const auto s = u0_limit({1.0, 1e-9, 2.0}, 1.0);
    for (double x : {0.2, 0.9}) EXPECT_NEAR(z.value(0, Point{x}), s.value(0, Point{x}), 1e-9);
}

TEST(UkProperty, ConvergesToLimit) {
    for (double ae : {0.0, 0.8}) {
        const ZetaQuery q{1.0, 1.0, ae};
        const auto uk = u_k_family(q, 1.0, 1e6);
        const auto u0 = u0_limit(q, 1.0);
        for (const auto& p : grid(0.0, 1.0, 100)) EXPECT_LE(std::fabs(uk.value(0, p) - u0.value(0, p)), 1e-6);
    }
}

TEST(UkProperty, ViolatesWmpForLargeK) {
    // For every parameter set meeting the condition: find k0 by scanning, then
    // check u_k(rho) <= 0 and u_k'(0) > 0 on a range of k >= k0.
    const struct { double rho, c, ae, eps; } cases[] = {{1, 1, 0, 1}, {0.5, 3, 5, 2}, {2, 10, 2.5, 0.5}};
    for (const auto& cs : cases) {
        const ZetaQuery q{cs.rho, cs.c, cs.ae};
        ASSERT_TRUE(wmp_fails_prediction(q).fails);
        auto good = [&](double k) {
            const auto f = u_k_family(q, cs.eps, k);
            return f.value(0, Point{cs.rho}) <= 0.0 && f.gradient(0, Point{0.0})[0] > 0.0;
        };
        // k0 = start of the tail of 1..1000 on which every k passes
        int k0 = 1000;
        while (k0 > 1 && good(k0 - 1)) --k0;
        ASSERT_TRUE(good(1000));
        for (double k = k0; k < 1e7; k = k < 1000 ? k + 1 : k * 1.7) {
            EXPECT_TRUE(good(k)) << "rho=" << cs.rho << " k=" << k << " k0=" << k0;
            const auto f = u_k_family(q, cs.eps, k);
            double mx = -1;
            // the positive region shrinks with k: sample geometrically toward 0
            for (int j = 0; j < 400; ++j) mx = std::max(mx, f.value(0, Point{cs.rho * std::pow(10.0, -j / 25.0)}));
            EXPECT_GT(mx, 0.0);
        }
    }
}

TEST(UkProperty, FiniteDifferenceConsistency) {
    const auto pts = grid(0.0, 1.0, 50);
    EXPECT_TRUE(fd_consistency(u_k_family({1.0, 2.0, 0.5}, 1.0, 10), pts).ok);
    EXPECT_TRUE(fd_consistency(u0_limit({1.0, 2.0, 0.5}, 1.0), pts).ok);
    EXPECT_TRUE(fd_consistency(u0_limit({1.0, 0.0, 0.5}, 1.0), pts).ok);
}

TEST(Prop16, DefaultThresholds) {
    const auto r = prop16_construct({});
    const auto& p = r.params;
    EXPECT_DOUBLE_EQ(p.x_star, 0.2);
    EXPECT_NEAR(p.chi1_norm, 9.375, 1e-12);
    EXPECT_NEAR(p.chi2_norm, 10.0 / std::sqrt(3.0) / 0.04, 1e-9);
    EXPECT_NEAR(p.sigma1, 1.0 / 22.75, 1e-15);
    const double s2 = 1.0 / (8.0 * p.chi2_norm);
    EXPECT_NEAR(p.sigma2, s2, 1e-15);
    EXPECT_DOUBLE_EQ(p.sigma, std::min(p.sigma1, p.sigma2));
    EXPECT_NEAR(p.c_threshold, 2.0 / p.sigma, 1e-9);
    EXPECT_NEAR(r.c, 1.01 * p.c_threshold, 1e-9);
    EXPECT_GT(p.delta, 0.0);
    EXPECT_TRUE(r.checks.passed());
    EXPECT_GT(r.checks.min_residual_u, 0.0);
    EXPECT_GT(r.checks.min_residual_v, 0.0);
    EXPECT_EQ(r.checks.u_at_0, 0.0);
    EXPECT_LE(r.checks.u_at_1, 0.0);
    EXPECT_GT(r.checks.max_interior_u, 0.0);
}

TEST(Prop16, ChiSupNormsNumerically) {
    // sup norms of chi', chi'' against a dense sample of the field itself
    const auto r = prop16_construct({});
    double m1 = 0, m2 = 0;
    for (int i = 0; i <= 200000; ++i) {
        const Point x{double(i) / 200000.0};
        m1 = std::max(m1, std::fabs(r.base.gradient(0, x)[0]));
        m2 = std::max(m2, std::fabs(r.base.laplacian(0, x)));
    }
    EXPECT_NEAR(m1 / r.params.sigma, r.params.chi1_norm, 1e-6 * r.params.chi1_norm);
    EXPECT_NEAR(m2 / r.params.sigma, r.params.chi2_norm, 1e-6 * r.params.chi2_norm);
}

TEST(Prop16, SpecializedSigma1) {
    Prop16Params p;
    p.beta = 0.0;
    p.eps_tilde = 0.0;
    const auto r = prop16_construct(p);
    EXPECT_DOUBLE_EQ(r.params.sigma1, 1.0);
    EXPECT_DOUBLE_EQ(r.params.sigma, std::min(1.0, r.params.sigma2));
}

TEST(Prop16, NegativeEpsIsReflected) {
    Prop16Params p;
    p.eps = -1.0;
    const auto r = prop16_construct(p);
    EXPECT_TRUE(r.reflected);
    EXPECT_TRUE(r.checks.passed());
    EXPECT_GT(r.checks.argmax_interior_u, 0.5);
}

TEST(Prop16, Errors) {
    Prop16Params p;
    p.eps = 0.0;
    EXPECT_THROW(prop16_construct(p), Error);
    p = {};
    p.c_tilde = 0.0;
    EXPECT_THROW(prop16_construct(p), Error);
}

TEST(Prop16, SecondStatement) {
    const auto r = prop16_construct({});
    const auto s = prop16_restricted(r, r.params.c_threshold / 2);
    EXPECT_TRUE(s.violates_wmp());
    EXPECT_NEAR(s.lo, 0.0, 1e-12);
    EXPECT_GT(s.hi, 0.0);
    EXPECT_LT(s.hi, 1.0);
    // at this c the full-interval pair is no longer a strict subsolution
    const auto full = residual(prop16_system(r.params, r.params.c_threshold / 2), r.pair, grid(0, 1, 10000));
    EXPECT_LT(full[0], 0.0);
}

TEST(Prop16Property, WideParameterSweep) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int t = 0; t < 12; ++t) {
        Prop16Params p;
        p.eps = u(rng);
        if (std::fabs(p.eps) < 0.05) p.eps = 0.5;
        p.eps_tilde = u(rng);
        p.alpha = u(rng);
        p.beta = u(rng);
        p.c_tilde = std::fabs(u(rng)) + 0.1;
        const auto r = prop16_construct(p, 1.01, 100 + t);
        EXPECT_TRUE(r.checks.passed()) << t;
    }
}

TEST(Prop16Property, FiniteDifferenceConsistencyAwayFromJoin) {
    const auto r = prop16_construct({});
    std::vector<Point> pts;
    for (const auto& p : grid(0.0, 1.0, 97))
        if (std::fabs(p[0] - r.params.x_star) > 1e-3) pts.push_back(p);
    EXPECT_TRUE(fd_consistency(r.pair, pts).ok);
}

TEST(Figure1, SamplesAndCsv) {
    const auto s = figure1_samples();
    ASSERT_EQ(s.size(), 1600u);
    EXPECT_DOUBLE_EQ(s.front().c, 1e-3);
    EXPECT_DOUBLE_EQ(s[399].c, 1e4);
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t i = 1; i < 400; ++i) EXPECT_GT(s[k * 400 + i].value, s[k * 400 + i - 1].value);
    const auto csv = figure1_csv(s);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "c,value,rho");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        double c, v, rho;
        char comma;
        std::istringstream ls(line);
        ls >> c >> comma >> v >> comma >> rho;
        EXPECT_EQ(c, s[rows].c);
        EXPECT_EQ(v, s[rows].value);
        ++rows;
    }
    EXPECT_EQ(rows, 1600u);
}

}  // namespace
}  // namespace invcone
