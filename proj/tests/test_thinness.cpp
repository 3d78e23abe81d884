#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "semilinear/thinness.hpp"

using namespace semilinear;

namespace {

Grid halfplane_box(double R) { return build_box_grid({{-R, R}, {0.25, R}}, 0.25); }

Nonlinearity identity_phi() {
    return Nonlinearity([](const Point&, double t) { return std::max(t, 0.0); }, true, "max(t,0)");
}

} // namespace

TEST(Certificate, SqrtWitnessOnHalfPlane) {
    const Grid g = halfplane_box(8.0);
    const auto cert = make_certificate(g, [](const Point& p) { return p.y >= 1.0; },
                                       [](const Point& p) { return std::sqrt(p.y); }, 0.01);
    const CertificateVerdict v = verify_certificate(g, EllipticCoefficients::laplacian(), cert, 1e-12);
    EXPECT_TRUE(v.pass) << v.reason;
    EXPECT_LT(v.superharmonic_residual, 0.0);
    EXPECT_NEAR(v.min_over_grid, 0.5, 1e-15);
    EXPECT_GT(v.nodes_in_A, 0u);
}

TEST(Certificate, TruncatedSqrtWitness) {
    const Grid g = halfplane_box(8.0);
    const auto cert = make_certificate(g, [](const Point& p) { return p.y > 1.0; },
                                       [](const Point& p) { return std::min(1.0, std::sqrt(p.y)); }, 0.01);
    EXPECT_TRUE(verify_certificate(g, EllipticCoefficients::laplacian(), cert, 1e-12).pass);
}

TEST(Certificate, WholeGridWithUnitWitnessFails) {
    const Grid g = halfplane_box(4.0);
    const auto cert = make_certificate(g, [](const Point&) { return true; }, [](const Point&) { return 1.0; }, 0.01);
    const CertificateVerdict v = verify_certificate(g, EllipticCoefficients::laplacian(), cert, 1e-12);
    EXPECT_FALSE(v.pass);
    EXPECT_TRUE(v.superharmonic);
    EXPECT_FALSE(v.inf_below_one);
}

TEST(Certificate, ConvexWitnessFails) {
    const Grid g = build_box_grid({{-1.0, 1.0}, {-1.0, 1.0}}, 0.125);
    const auto cert = make_certificate(g, [](const Point& p) { return std::abs(p.x) >= 1.0; },
                                       [](const Point& p) { return p.x * p.x; }, 0.01);
    const CertificateVerdict v = verify_certificate(g, EllipticCoefficients::laplacian(), cert, 1e-9);
    EXPECT_FALSE(v.superharmonic);
    EXPECT_NEAR(v.superharmonic_residual, 2.0, 1e-9);
    EXPECT_FALSE(v.pass);
}

TEST(Criterion, ZeroIntegrandGivesZero) {
    const auto r = criterion_integral(GreenKernel::halfplane, identity_phi(), 1.0, [](const Point&) { return true; },
                                      {4, 8, 16, 32});
    for (double v : r.values) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(r.verdict, TrendVerdict::bounded_trend);
}

TEST(Criterion, StripMatchesOracleAndIsBounded) {
    const std::vector<double> radii{4, 8, 16, 32};
    CriterionOptions opt;
    opt.anchor = {0.0, 1.0};
    const auto r = criterion_integral(GreenKernel::halfplane, identity_phi(), 1.0,
                                      [](const Point& p) { return p.y > 1.0; }, radii, opt);
    ASSERT_EQ(r.values.size(), 4u);
    for (std::size_t k = 0; k < radii.size(); ++k) {
        const double ref = oracle::halfplane_box_integral(1.0, 0.0, 1.0, radii[k]);
        EXPECT_NEAR(r.values[k], ref, 2e-4 * ref) << "R = " << radii[k];
        if (k > 0) EXPECT_GE(r.values[k], r.values[k - 1]);
    }
    EXPECT_EQ(r.verdict, TrendVerdict::bounded_trend);
    EXPECT_NEAR(r.ratios.back(), 0.5, 0.05);
    EXPECT_LT(r.values.back(), 0.5);
}

TEST(Criterion, WholeHalfPlaneDiverges) {
    const Nonlinearity one([](const Point&, double t) { return t > 0 ? 1.0 : 0.0; }, false, "t>0");
    CriterionOptions opt;
    opt.anchor = {0.0, 1.0};
    const auto r = criterion_integral(GreenKernel::halfplane, one, 1.0, [](const Point&) { return false; },
                                      {4, 8, 16, 32}, opt);
    EXPECT_EQ(r.verdict, TrendVerdict::diverging_trend);
    for (std::size_t k = 1; k < r.values.size(); ++k) EXPECT_GT(r.values[k], r.values[k - 1]);
    const double ref = oracle::halfplane_box_integral(1.0, 0.0, 4.0, 4.0);
    EXPECT_NEAR(r.values[0], ref, 2e-4 * ref);
}

TEST(Criterion, IntervalKernelMatchesClosedForm) {
    CriterionOptions opt;
    opt.anchor = {0.5, 0.0};
    opt.cell = 1.0 / 64;
    const auto r = criterion_integral(GreenKernel::interval, identity_phi(), 1.0, [](const Point&) { return false; },
                                      {0.125, 0.25, 0.5}, opt);
    // int_0^1 G(1/2, y) dy = x(1 - x)/2 at x = 1/2
    EXPECT_NEAR(r.values.back(), 0.125, 1e-14);
}

TEST(Criterion, RejectsBadRadii) {
    EXPECT_THROW(criterion_integral(GreenKernel::halfplane, identity_phi(), 1.0, [](const Point&) { return false; },
                                    {4, 3}),
                 ValidationError);
    EXPECT_THROW(criterion_integral(GreenKernel::halfplane, identity_phi(), 1.0, [](const Point&) { return false; },
                                    {4.1}),
                 ValidationError);
    CriterionOptions opt;
    opt.singular_correction = false;
    EXPECT_THROW(criterion_integral(GreenKernel::halfplane, identity_phi(), 1.0, [](const Point&) { return false; },
                                    {4}, opt),
                 DomainError);
}

TEST(Probe, FlatSolutionHasNoSplit) {
    const Exhaustion exh = build_exhaustion({{-1.0, 1.0}, {-1.0, 1.0}}, 2.0, 2, SpacingRule{0.25});
    const ExhaustionRun run =
        run_exhaustion(exh, EllipticCoefficients::laplacian(), Nonlinearity::zero(), Supersolution::constant_value(1.0));
    EXPECT_THROW(necessary_direction_probe(run, EllipticCoefficients::laplacian(), 1.0), ValidationError);
}

TEST(Probe, ThinSupportSolutionYieldsCertificate) {
    const Exhaustion exh = build_halfplane_exhaustion(2.0, 2.0, 3, SpacingRule{0.25}, 0.25, {0.0, 0.5});
    const Nonlinearity phi([](const Point& p, double t) { return p.y > 1.0 ? std::max(t, 0.0) : 0.0; }, true, "thin");
    const ExhaustionRun run = run_exhaustion(exh, EllipticCoefficients::laplacian(), phi, Supersolution::constant_value(1.0));
    const ProbeResult pr = necessary_direction_probe(run, EllipticCoefficients::laplacian(), 1.0);
    EXPECT_TRUE(pr.verdict.pass) << pr.verdict.reason;
    EXPECT_GT(pr.c0, 0.0);
    EXPECT_LT(pr.c0, 1.0);
    const PointPredicate in_A = mask_predicate(pr.certificate);
    EXPECT_FALSE(in_A({100.0, 100.0}));
}
