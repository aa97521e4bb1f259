#include "invcone/fd.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "invcone/algebra.hpp"
#include "invcone/closed_forms.hpp"
#include "invcone/cone.hpp"
#include "invcone/error.hpp"
#include "invcone/registry.hpp"

namespace invcone {
namespace {

EllipticSystem scalar1d(double b, double c) { return EllipticSystem{1, 1, {Mat{{b}}}, Mat{{c}}}; }

double entry(const Csr& a, std::size_t r, std::size_t c) {
    for (std::size_t e = a.row_ptr[r]; e < a.row_ptr[r + 1]; ++e)
        if (a.col[e] == c) return a.val[e];
    return 0.0;
}

TEST(Grid, Layout) {
    const auto g = GridDomain::rectangle(0, 1, 0, 2, 4, 5);
    EXPECT_EQ(g.nodes(), 20u);
    EXPECT_DOUBLE_EQ(g.h(0), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(g.h(1), 0.5);
    EXPECT_EQ(g.coords(19), (std::vector<double>{1.0, 2.0}));
    EXPECT_EQ(g.coords(5), (std::vector<double>{1.0 / 3.0, 0.5}));
    EXPECT_EQ(g.interior_nodes().size(), 6u);
    EXPECT_EQ(g.boundary_nodes().size(), 14u);
    const auto s = GridDomain::with_spacing(GridDomain::Kind::interval, {0}, {1}, 1.0 / 400);
    EXPECT_EQ(s.resolution[0], 401u);
    EXPECT_THROW(GridDomain::interval(0, 1, 2), Error);
    EXPECT_THROW(GridDomain::interval(1, 0, 5), Error);
}

TEST(Assemble, CenteredStencil) {
    const auto g = GridDomain::interval(0, 1, 5);  // h = 1/4
    const auto op = assemble(scalar1d(2.0, -3.0), g);
    EXPECT_DOUBLE_EQ(entry(op.matrix, 2, 1), 16.0 - 4.0);
    EXPECT_DOUBLE_EQ(entry(op.matrix, 2, 3), 16.0 + 4.0);
    EXPECT_DOUBLE_EQ(entry(op.matrix, 2, 2), -32.0 - 3.0);
    EXPECT_DOUBLE_EQ(entry(op.matrix, 0, 0), 1.0);
    EXPECT_EQ(op.interior, (std::vector<std::size_t>{1, 2, 3}));
    EXPECT_EQ(op.boundary, (std::vector<std::size_t>{0, 4}));
}

TEST(Assemble, UpwindStencil) {
    const auto g = GridDomain::interval(0, 1, 5);
    const auto fwd = assemble(scalar1d(2.0, 0.0), g, Scheme::upwind);
    EXPECT_DOUBLE_EQ(entry(fwd.matrix, 2, 1), 16.0);
    EXPECT_DOUBLE_EQ(entry(fwd.matrix, 2, 3), 16.0 + 8.0);
    EXPECT_DOUBLE_EQ(entry(fwd.matrix, 2, 2), -32.0 - 8.0);
    const auto bwd = assemble(scalar1d(-2.0, 0.0), g, Scheme::upwind);
    EXPECT_DOUBLE_EQ(entry(bwd.matrix, 2, 1), 16.0 + 8.0);
    EXPECT_DOUBLE_EQ(entry(bwd.matrix, 2, 3), 16.0);
}

TEST(Assemble, CouplingBlocks2d) {
    const EllipticSystem sys{2, 2, {Mat{{0, 3}, {0, 0}}, Mat{{0, 0}, {5, 0}}}, Mat{{-1, 2}, {0, -1}}};
    const auto g = GridDomain::rectangle(0, 1, 0, 1, 3, 3);  // single interior node 4, h = 1/2
    const auto op = assemble(sys, g);
    const std::size_t r0 = 2 * 4, r1 = 2 * 4 + 1;
    EXPECT_DOUBLE_EQ(entry(op.matrix, r0, 2 * 5 + 1), 3.0);   // +x neighbor, component 1
    EXPECT_DOUBLE_EQ(entry(op.matrix, r0, 2 * 3 + 1), -3.0);
    EXPECT_DOUBLE_EQ(entry(op.matrix, r1, 2 * 7 + 0), 5.0);   // +y neighbor, component 0
    EXPECT_DOUBLE_EQ(entry(op.matrix, r1, 2 * 1 + 0), -5.0);
    EXPECT_DOUBLE_EQ(entry(op.matrix, r0, r0), -16.0 - 1.0);
    EXPECT_DOUBLE_EQ(entry(op.matrix, r0, r1), 2.0);
    EXPECT_DOUBLE_EQ(entry(op.matrix, r0, 2 * 5), 4.0);
}

TEST(Assemble, CflWarning) {
    EXPECT_TRUE(assemble(scalar1d(2.0, 0.0), GridDomain::interval(0, 0.8, 3)).warnings.empty());  // h b = 0.8
    const auto op = assemble(scalar1d(2.0, 0.0), GridDomain::interval(0, 1.2, 3));                // h b = 1.2
    EXPECT_EQ(op.warnings.size(), 1u);
    EXPECT_NEAR(op.cfl_ratio, 1.2, 1e-15);
}

TEST(Assemble, Errors) {
    const EllipticSystem three{3, 1, {Mat{{0}}, Mat{{0}}, Mat{{0}}}, Mat{{0}}};
    try {
        assemble(three, GridDomain::interval(0, 1, 5));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnsupportedDimension);
    }
    EXPECT_THROW(assemble(scalar1d(0, 0), GridDomain::rectangle(0, 1, 0, 1, 4, 4)), Error);
}

TEST(Dirichlet, ExactForLowDegree) {
    // u'' + 2u' - u = f reproduces quadratics exactly with centered differences
    const auto g = GridDomain::interval(0, 1, 41);
    const auto op = assemble(scalar1d(2.0, -1.0), g);
    auto u = [](double x) { return 3 * x * x - x + 2; };
    std::vector<double> rhs, bd;
    for (std::size_t i : op.interior) {
        const double x = g.coords(i)[0];
        rhs.push_back(6 + 2 * (6 * x - 1) - u(x));
    }
    for (std::size_t i : op.boundary) bd.push_back(u(g.coords(i)[0]));
    const auto f = solve_dirichlet(op, rhs, bd);
    for (std::size_t p = 0; p < g.nodes(); ++p) EXPECT_NEAR(f.at(p, 0), u(g.coords(p)[0]), 1e-11);
}

TEST(Dirichlet, DecoupledBlocksMatchScalarSolves) {
    const auto g = GridDomain::rectangle(0, 1, 0, 1, 12, 9);
    const EllipticSystem sys{2, 2, {Mat{{1, 0}, {0, -2}}, Mat{{0.5, 0}, {0, 3}}}, Mat{{-1, 0}, {0, -4}}};
    const EllipticSystem s0{2, 1, {Mat{{1}}, Mat{{0.5}}}, Mat{{-1}}};
    const EllipticSystem s1{2, 1, {Mat{{-2}}, Mat{{3}}}, Mat{{-4}}};
    const auto op = assemble(sys, g), o0 = assemble(s0, g), o1 = assemble(s1, g);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> rhs(op.interior.size()), bd(op.boundary.size());
    for (double& v : rhs) v = u(rng);
    for (double& v : bd) v = u(rng);
    std::vector<double> r0, r1, b0, b1;
    for (std::size_t i = 0; i < rhs.size(); ++i) (i % 2 ? r1 : r0).push_back(rhs[i]);
    for (std::size_t i = 0; i < bd.size(); ++i) (i % 2 ? b1 : b0).push_back(bd[i]);
    const auto f = solve_dirichlet(op, rhs, bd);
    const auto f0 = solve_dirichlet(o0, r0, b0), f1 = solve_dirichlet(o1, r1, b1);
    for (std::size_t p = 0; p < g.nodes(); ++p) {
        EXPECT_NEAR(f.at(p, 0), f0.at(p, 0), 1e-12);
        EXPECT_NEAR(f.at(p, 1), f1.at(p, 0), 1e-12);
    }
}

TEST(Dirichlet, SizeErrors) {
    const auto op = assemble(scalar1d(0, 0), GridDomain::interval(0, 1, 5));
    std::vector<double> rhs(2), bd(2);
    EXPECT_THROW(solve_dirichlet(op, rhs, bd), Error);
}

TEST(Dirichlet, SingularInteriorBlock) {
    // h = 1/2 and c = 8: the single interior row is -8 + 8 = 0
    const auto g = GridDomain::interval(0, 1, 3);
    const auto op = assemble(scalar1d(0.0, 8.0), g);
    try {
        BandLu lu(op);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SingularOperator);
    }
}

TEST(Dirichlet, SecondOrderConvergence) {
    // Smooth analytic field; max error should shrink like h^2.
    const auto e = example_registry("ex1.10");
    const auto& w = *e.witness;
    double prev = 0.0;
    std::vector<double> orders;
    for (std::size_t n : {11u, 21u, 41u}) {
        const auto g = GridDomain::rectangle(0, 1, 0, 1, n, n);
        const auto op = assemble(e.system, g);
        std::vector<double> rhs, bd;
        for (std::size_t i : op.interior) {
            const auto x = g.coords(i / 2);
            rhs.push_back(residual_at(e.system, w, x)[i % 2]);
        }
        for (std::size_t i : op.boundary) bd.push_back(w.value(i % 2, g.coords(i / 2)));
        const auto f = solve_dirichlet(op, rhs, bd);
        const auto exact = sample(w, g);
        double err = 0.0;
        for (std::size_t i = 0; i < f.values.size(); ++i) err = std::max(err, std::fabs(f.values[i] - exact.values[i]));
        if (prev > 0) orders.push_back(std::log2(prev / err));
        prev = err;
    }
    for (double o : orders) EXPECT_GE(o, 1.8);
}

TEST(Wmp, ScalarLaplacianHolds) {
    const auto op = assemble(scalar1d(0.0, 0.0), GridDomain::interval(0, 1, 51));
    const auto v = wmp_certificate(op);
    const EllipticSystem lap2{2, 1, {Mat{{0}}, Mat{{0}}}, Mat{{0}}};
    EXPECT_EQ(v.outcome, Outcome::holds);
    EXPECT_GE(v.margin, -v.tau);
    EXPECT_FALSE(v.witness.has_value());
    const auto v2 = wmp_certificate(assemble(lap2, GridDomain::rectangle(0, 1, 0, 1, 15, 15)));
    EXPECT_EQ(v2.outcome, Outcome::holds);
}

TEST(Wmp, Prop14FailsAndPersists) {
    const auto sys = prop14_system(1.0, 0.0, 1.0, 0.0);
    for (double h : {1.0 / 400, 1.0 / 200, 1.0 / 100}) {
        const auto g = GridDomain::with_spacing(GridDomain::Kind::interval, {0}, {1}, h);
        const auto op = assemble(sys, g);
        const auto v = wmp_certificate(op);
        ASSERT_EQ(v.outcome, Outcome::fails) << h;
        ASSERT_TRUE(v.witness.has_value());
        EXPECT_TRUE(v.witness_check.valid);
        // independent recheck of the returned witness
        const auto w = validate_witness(op, *v.witness, nullptr, op.m, v.tau);
        EXPECT_TRUE(w.valid);
        EXPECT_GT(w.max_interior, 10 * v.tau);
        EXPECT_LE(w.max_boundary, v.tau);
        EXPECT_LT(v.margin, 0.0);
    }
}

TEST(Wmp, Ex13DecoupledHoldsCoupledFails) {
    const auto g = GridDomain::rectangle(0, 1, 0, 1, 16, 16);
    EXPECT_EQ(wmp_certificate(assemble(example_1_3(0.0, 0.0).system, g)).outcome, Outcome::holds);
    const auto v = wmp_certificate(assemble(example_1_3(1.0, 1.0).system, g));
    EXPECT_EQ(v.outcome, Outcome::fails);
    EXPECT_TRUE(v.witness_check.valid);
}

TEST(Wmp, TooLargeForDense) {
    const auto op = assemble(scalar1d(0, 0), GridDomain::interval(0, 1, kMaxDenseUnknowns + 3));
    try {
        wmp_certificate(op);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::TooLargeForDense);
    }
}

TEST(Cone, Ex18Holds) {
    const auto e = example_registry("ex1.8");
    const auto cert = certificate_from_cone(e.system, *e.cone_p, 2);
    const auto g = GridDomain::with_spacing(GridDomain::Kind::rectangle, {0, 0}, {1, 1}, 1.0 / 30);
    const auto v = cone_certificate(e.system, cert, g);
    EXPECT_EQ(v.outcome, Outcome::holds);
    EXPECT_GE(v.margin, -v.tau);
}

TEST(Cone, NegatedConeFails) {
    const auto e = example_registry("ex1.8");
    auto cert = certificate_from_cone(e.system, *e.cone_p, 2);
    cert.p = -1.0 * cert.p;
    cert.q = -1.0 * cert.q;
    const auto g = GridDomain::rectangle(0, 1, 0, 1, 13, 13);
    const auto v = cone_certificate(e.system, cert, g);
    EXPECT_EQ(v.outcome, Outcome::fails);
    ASSERT_TRUE(v.witness.has_value());
    const auto w = validate_witness(assemble(e.system, g), *v.witness, &cert.p, 2, v.tau);
    EXPECT_TRUE(w.valid);
}

TEST(Cone, IdentityConeMatchesWmp) {
    const EllipticSystem sys{1, 2, {Mat{{1, 0}, {0, -1}}}, Mat{{-2, 1}, {0.5, -1}}};
    const auto g = GridDomain::interval(0, 1, 31);
    const ConeCertificate id{Mat::identity(2), Mat::identity(2), 2, {}, {}};
    const auto a = cone_certificate(sys, id, g);
    const auto b = wmp_certificate(assemble(sys, g));
    EXPECT_EQ(a.outcome, b.outcome);
    EXPECT_EQ(a.max_positive, b.max_positive);
    EXPECT_EQ(a.max_row, b.max_row);
    EXPECT_EQ(a.max_col, b.max_col);
    EXPECT_EQ(a.tau, b.tau);
}

TEST(Cone, PartialRejected) {
    const auto e = example_registry("ex1.10");
    const auto cert = certificate_from_cone(e.system, *e.cone_p, 1);
    try {
        cone_certificate(e.system, cert, GridDomain::rectangle(0, 1, 0, 1, 5, 5));
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.code(), ErrorCode::PartialConeUnsupported);
    }
}

TEST(Conjugate, CenteredRoundTrip) {
    const auto e = example_registry("ex1.8");
    const auto cert = certificate_from_cone(e.system, *e.cone_p, 2);
    const auto g = GridDomain::rectangle(0, 1, 0, 1, 9, 7);
    const auto lhat = assemble(e.system.transformed(cert.q, cert.p), g);
    const auto back = conjugate_operator(lhat, cert.q, cert.p);
    const auto orig = assemble(e.system, g);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> x(orig.size());
    for (double& v : x) v = u(rng);
    const auto y1 = orig.apply(x), y2 = back.apply(x);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y1[i], y2[i], 1e-9 * (1 + std::fabs(y1[i])));
}

TEST(MonteCarlo, Ex110HalfSpaceHoldsOrthantFails) {
    const auto e = example_registry("ex1.10");
    const auto g = GridDomain::with_spacing(GridDomain::Kind::rectangle, {0, 0}, {1, 1}, 1.0 / 30);
    const auto half = certificate_from_cone(e.system, *e.cone_p, 1);
    const auto v = monte_carlo_invariance(e.system, half, g, 200, 42);
    EXPECT_EQ(v.outcome, Outcome::holds);
    EXPECT_GE(v.margin, -kMcTol);
    const ConeCertificate orthant{Mat::identity(2), Mat::identity(2), 2, {}, {}};
    const auto o = monte_carlo_invariance(e.system, orthant, g, 200, 42);
    EXPECT_EQ(o.outcome, Outcome::fails);
    EXPECT_TRUE(o.witness_check.valid);
}

TEST(MonteCarlo, Deterministic) {
    const auto e = example_registry("ex1.8");
    const auto cert = certificate_from_cone(e.system, *e.cone_p, 2);
    const auto g = GridDomain::rectangle(0, 1, 0, 1, 11, 11);
    const auto a = monte_carlo_invariance(e.system, cert, g, 20, 7);
    const auto b = monte_carlo_invariance(e.system, cert, g, 20, 7);
    EXPECT_EQ(a.outcome, Outcome::holds);
    EXPECT_EQ(a.margin, b.margin);
    EXPECT_EQ(a.max_row, b.max_row);
}

TEST(MonteCarlo, ZeroDataGivesZero) {
    const auto e = example_registry("ex1.8");
    const auto op = assemble(e.system, GridDomain::rectangle(0, 1, 0, 1, 8, 8));
    const std::vector<double> rhs(op.interior.size(), 0.0), bd(op.boundary.size(), 0.0);
    const auto f = solve_dirichlet(op, rhs, bd);
    for (double v : f.values) EXPECT_EQ(v, 0.0);
}

TEST(FdProperty, ScalarMonotoneInverseNonnegative) {
    // scalar c <= 0 with h|b| <= 1 gives an M-matrix interior block
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 40; ++t) {
        const std::size_t n = 5 + std::size_t(u(rng) * 30);
        const double h = 1.0 / double(n - 1);
        const double b = (2 * u(rng) - 1) / h, c = -5 * u(rng);
        const auto op = assemble(scalar1d(b, c), GridDomain::interval(0, 1, n),
                                 u(rng) < 0.5 ? Scheme::centered : Scheme::upwind);
        EXPECT_EQ(wmp_certificate(op).outcome, Outcome::holds) << b << " " << c << " " << n;
    }
}

TEST(FdProperty, FailingVerdictsCarryValidWitnesses) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-3, 3);
    int fails = 0;
    for (int t = 0; t < 60; ++t) {
        const EllipticSystem sys{1, 2, {Mat{{u(rng), u(rng)}, {u(rng), u(rng)}}}, Mat{{u(rng), u(rng)}, {u(rng), u(rng)}}};
        DiscreteOperator op;
        Verdict v;
        try {
            op = assemble(sys, GridDomain::interval(0, 1, 25));
            v = wmp_certificate(op);
        } catch (const Error&) {
            continue;  // singular interior block
        }
        if (v.outcome != Outcome::fails) continue;
        ++fails;
        ASSERT_TRUE(v.witness.has_value());
        EXPECT_TRUE(validate_witness(op, *v.witness, nullptr, 2, v.tau).valid);
    }
    EXPECT_GT(fails, 10);
}

}  // namespace
}  // namespace invcone
