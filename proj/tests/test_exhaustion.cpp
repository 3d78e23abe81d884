#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "semilinear/exhaustion.hpp"

using namespace semilinear;

namespace {

Nonlinearity thin_support() {
    return Nonlinearity([](const Point& p, double t) { return p.y > 1.0 ? std::max(t, 0.0) : 0.0; }, true,
                        "(y>1)*max(t,0)");
}

Nonlinearity linear_absorption() {
    return Nonlinearity([](const Point&, double t) { return std::max(t, 0.0); }, true, "max(t,0)");
}

Exhaustion small_box() { return build_exhaustion({{-1.0, 1.0}, {-1.0, 1.0}}, 2.0, 3, SpacingRule{0.25}); }

} // namespace

TEST(Exhaustion, NoAbsorptionReproducesHarmonicData) {
    const Exhaustion exh = small_box();
    const auto s = Supersolution::function([](const Point& p) { return 8.0 + p.x - 0.5 * p.y; }, "8 + x - y/2");
    const ExhaustionRun run = run_exhaustion(exh, EllipticCoefficients::laplacian(), Nonlinearity::zero(), s);
    ASSERT_EQ(run.stages.size(), 3u);
    for (const auto& st : run.stages)
        for (std::size_t k = 0; k < st.grid.size(); ++k) {
            const Point p = st.grid.position(k);
            EXPECT_NEAR(st.u[k], 8.0 + p.x - 0.5 * p.y, 1e-11);
        }
    EXPECT_EQ(run.verdict, Triviality::nontrivial);
}

TEST(Exhaustion, RejectsBadSupersolutions) {
    const Exhaustion exh = small_box();
    const auto convex = Supersolution::function([](const Point& p) { return 1.0 + p.x * p.x; }, "1 + x^2");
    EXPECT_THROW(run_exhaustion(exh, EllipticCoefficients::laplacian(), linear_absorption(), convex), ValidationError);
    const auto negative = Supersolution::function([](const Point& p) { return p.x; }, "x");
    EXPECT_THROW(run_exhaustion(exh, EllipticCoefficients::laplacian(), linear_absorption(), negative), ValidationError);
    EllipticCoefficients absorbing;
    absorbing.zero_order_mode = ZeroOrderMode::c_nonpos;
    absorbing.c = constant_coefficient(-1.0);
    EXPECT_THROW(run_exhaustion(exh, absorbing, linear_absorption(), Supersolution::constant_value(1.0)),
                 ValidationError);
}

TEST(Exhaustion, ThinSupportStaysNontrivial) {
    const auto t0 = std::chrono::steady_clock::now();
    const Exhaustion exh = build_halfplane_exhaustion(4.0, 2.0, 4, SpacingRule{0.25}, 0.25, {0.0, 0.5});
    const ExhaustionRun run =
        run_exhaustion(exh, EllipticCoefficients::laplacian(), thin_support(), Supersolution::constant_value(1.0));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LT(secs, 60.0);
    ASSERT_EQ(run.anchor_values.size(), 4u);
    EXPECT_EQ(run.verdict, Triviality::nontrivial);
    EXPECT_LE(run.max_monotone_violation, 1e-9);
    EXPECT_LE(run.max_bound_violation, 1e-9);
    EXPECT_GE(run.anchor_values.back(), 1.0 - std::sqrt(0.5) - 1e-3);
    for (double r : run.tail_metrics) EXPECT_LE(r, 1e-10);
}

TEST(Exhaustion, SqrtAbsorptionDecreases) {
    const Exhaustion exh = build_halfplane_exhaustion(4.0, 2.0, 4, SpacingRule{0.25}, 0.25, {0.0, 2.0});
    const Nonlinearity phi([](const Point&, double t) { return std::sqrt(std::max(t, 0.0)); }, true, "max(t,0)^0.5");
    const ExhaustionRun run = run_exhaustion(exh, EllipticCoefficients::laplacian(), phi, Supersolution::constant_value(1.0));
    ASSERT_EQ(run.anchor_values.size(), 4u);
    EXPECT_LT(run.anchor_values[1], run.anchor_values[0]);
    for (std::size_t n = 1; n < run.anchor_values.size(); ++n)
        EXPECT_LE(run.anchor_values[n], run.anchor_values[n - 1] + 1e-9);
    EXPECT_LE(run.max_monotone_violation, 1e-9);
}

TEST(Exhaustion, TrendClassification) {
    ExhaustionOptions opt;
    EXPECT_EQ(classify_trend({1.0, 0.1, 1e-3, 1e-4}, 1.0, opt), Triviality::trivial_trend);
    EXPECT_EQ(classify_trend({0.5, 0.42, 0.41, 0.405}, 1.0, opt), Triviality::nontrivial);
    EXPECT_EQ(classify_trend({0.5, 0.3, 0.2, 0.1}, 1.0, opt), Triviality::undecided);
    EXPECT_EQ(classify_trend({0.5, 0.4}, 1.0, opt), Triviality::undecided);
}

TEST(HarmonicMajorant, HarmonicFamilyIsFixed) {
    const Exhaustion exh = small_box();
    const auto w = [](const Point& p) { return 2.0 + p.x * p.y; };
    const MajorantResult m = harmonic_majorant(exh, EllipticCoefficients::laplacian(), w, 1e-10);
    EXPECT_TRUE(m.increasing);
    for (const auto& h : m.h)
        for (std::size_t k = 0; k < h.size(); ++k) EXPECT_NEAR(h[k], w(h.grid().position(k)), 1e-11);
    const MajorantResult z = harmonic_majorant(exh, EllipticCoefficients::laplacian(), [](const Point&) { return 0.0; }, 1e-10);
    for (double v : z.majorant.values()) EXPECT_EQ(v, 0.0);
}

TEST(HarmonicMajorant, SubharmonicFamilyIncreases) {
    const Exhaustion exh = build_exhaustion({{-1.0, 1.0}}, 2.0, 4, SpacingRule{0.125});
    const MajorantResult m =
        harmonic_majorant(exh, EllipticCoefficients::laplacian(), [](const Point& p) { return std::cosh(p.x); }, 1e-10);
    EXPECT_TRUE(m.increasing);
    EXPECT_NEAR(m.majorant.at({0.0, 0.0}), std::cosh(8.0), 1e-6 * std::cosh(8.0));
}

TEST(HarmonicMajorant, RecoversBoundaryExtensionOfSolution) {
    const Grid g = build_box_grid({{0.0, 1.0}, {0.0, 1.0}}, 1.0 / 16);
    const GreenOperator gop(assemble(g, EllipticCoefficients::laplacian()));
    const ScalarField f = ScalarField::sample(g, [](const Point& p) { return 1.0 + p.x * p.y; });
    const SolveResult u = solve_U(gop, f, linear_absorption());
    const MajorantResult m = harmonic_majorant(Exhaustion{{g}, {0.5, 0.5}}, EllipticCoefficients::laplacian(),
                                               std::vector<ScalarField>{u.u}, 1e-10);
    EXPECT_LE(max_abs_diff(m.majorant, harmonic_extension(gop, f)), 2e-10);
}

TEST(Correspondence, ZeroMapsToZero) {
    const Grid g = build_box_grid({{0.0, 1.0}}, 1.0 / 32);
    const CorrespondenceReport r =
        correspondence_roundtrip(g, EllipticCoefficients::laplacian(), linear_absorption(), ScalarField(g, 0.0));
    for (double v : r.u.values()) EXPECT_EQ(v, 0.0);
    EXPECT_TRUE(r.pass);
}

TEST(Correspondence, ReconstructsLinearData) {
    const Grid g = build_box_grid({{0.0, 1.0}}, 1.0 / 64);
    const ScalarField h = ScalarField::sample(g, [](const Point& p) { return p.x; });
    const CorrespondenceReport r = correspondence_roundtrip(g, EllipticCoefficients::laplacian(), linear_absorption(), h);
    EXPECT_LE(r.reconstruction_residual, 1e-9);
    EXPECT_TRUE(r.pass);
}

TEST(Correspondence, OrderedData) {
    const Grid g = build_box_grid({{0.0, 2.0}, {0.0, 1.0}}, 1.0 / 16);
    const EllipticCoefficients lap = EllipticCoefficients::laplacian();
    const auto one = correspondence_roundtrip(g, lap, linear_absorption(), ScalarField(g, 1.0));
    const auto two = correspondence_roundtrip(g, lap, linear_absorption(), ScalarField(g, 2.0));
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_GE(two.u[k], one.u[k] - 1e-12);
    EXPECT_GT(two.u.at({1.0, 0.5}) - one.u.at({1.0, 0.5}), 1e-4);
    EXPECT_TRUE(one.order_holds && one.distinct);
}

TEST(Correspondence, RejectsNonHarmonicData) {
    const Grid g = build_box_grid({{0.0, 1.0}}, 1.0 / 16);
    const ScalarField h = ScalarField::sample(g, [](const Point& p) { return p.x * p.x; });
    EXPECT_THROW(correspondence_roundtrip(g, EllipticCoefficients::laplacian(), linear_absorption(), h), ValidationError);
}

TEST(Split, ZeroIsDominating) {
    const Exhaustion exh = small_box();
    const SplitReport r = split_experiment(exh, EllipticCoefficients::laplacian(), Nonlinearity::zero(),
                                           linear_absorption(), Supersolution::constant_value(1.0),
                                           SplitMode::domination);
    EXPECT_TRUE(r.pass);
    for (double v : r.run1.limit_estimate.values()) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Split, HalfIsDominating) {
    const Exhaustion exh = small_box();
    const SplitReport r = split_experiment(exh, EllipticCoefficients::laplacian(), linear_absorption().scaled(0.5),
                                           linear_absorption(), Supersolution::constant_value(1.0),
                                           SplitMode::domination);
    EXPECT_TRUE(r.pass);
    EXPECT_LE(r.max_violation, 1e-9);
}

TEST(Split, DominationViolationIsRejected) {
    const Exhaustion exh = small_box();
    EXPECT_THROW(split_experiment(exh, EllipticCoefficients::laplacian(), linear_absorption(),
                                  linear_absorption().scaled(0.5), Supersolution::constant_value(1.0),
                                  SplitMode::domination),
                 ValidationError);
}

TEST(Split, SumOfStripAndThinSupportStaysNontrivial) {
    const Exhaustion exh = build_halfplane_exhaustion(2.0, 2.0, 4, SpacingRule{0.25}, 0.25, {0.0, 0.5});
    const Nonlinearity strip([](const Point& p, double t) { return p.y < 1.0 ? std::min(std::max(t, 0.0), 1.0) : 0.0; },
                             true, "(y<1)*min(max(t,0),1)");
    const SplitReport r = split_experiment(exh, EllipticCoefficients::laplacian(), strip, thin_support(),
                                           Supersolution::constant_value(1.0), SplitMode::sum);
    EXPECT_TRUE(r.pass);
    ASSERT_TRUE(r.run_sum.has_value());
    EXPECT_EQ(r.sum_verdict, Triviality::nontrivial);
}
