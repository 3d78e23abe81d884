#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "semilinear/error.hpp"
#include "semilinear/exhaustion.hpp"
#include "semilinear/expr.hpp"
#include "semilinear/grid.hpp"
#include "semilinear/nonlinearity.hpp"
#include "semilinear/operator.hpp"
#include "semilinear/potential.hpp"
#include "semilinear/solver.hpp"
#include "semilinear/thinness.hpp"

namespace semilinear {

struct VerifyItem {
    std::string module;
    std::string check;
    bool pass = false;
    std::string detail;
};

namespace detail {

inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

inline VerifyItem run_check(const std::string& module, const std::string& check,
                            const std::function<std::string(bool&)>& body) {
    VerifyItem item{module, check, false, {}};
    try {
        bool ok = false;
        item.detail = body(ok);
        item.pass = ok;
    } catch (const std::exception& e) {
        item.pass = false;
        item.detail = std::string("exception: ") + e.what();
    }
    return item;
}

} // namespace detail

/// Invariant suites of every module on small default problems. Randomized
/// checks draw from std::mt19937 seeded with `seed`.
inline std::vector<VerifyItem> run_verify_suite(unsigned seed) {
    std::vector<VerifyItem> items;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const EllipticCoefficients lap = EllipticCoefficients::laplacian();
    const Nonlinearity lin([](const Point&, double t) { return std::max(t, 0.0); }, true, "max(t,0)");

    items.push_back(detail::run_check("geometry", "restrict is exact on nested stages", [&](bool& ok) {
        const Exhaustion exh = build_exhaustion({{-1.0, 1.0}, {-1.0, 1.0}}, 2.0, 3, SpacingRule{0.25});
        const auto f = [](const Point& p) { return std::sin(3 * p.x) * std::exp(p.y); };
        ok = true;
        for (std::size_t n = 0; n + 1 < exh.stages.size(); ++n) {
            const ScalarField r = restrict(ScalarField::sample(exh.stages[n + 1], f), exh.stages[n]);
            const ScalarField d = ScalarField::sample(exh.stages[n], f);
            for (std::size_t k = 0; k < r.size(); ++k) ok = ok && r[k] == d[k];
        }
        return std::to_string(exh.stages.size()) + " stages";
    }));

    items.push_back(detail::run_check("expr", "print/parse round trip", [&](bool& ok) {
        const char* samples[] = {"x^2 - 3*y + t", "exp(-x)*max(t,0)^0.5", "(y>1)*max(t,0)", "-2^2", "pow(x, 3) / (1 + y^2)"};
        ok = true;
        int n = 0;
        for (const char* s : samples) {
            const Expr e = Expr::parse(s);
            const Expr back = Expr::parse(e.print());
            for (int i = 0; i < 50; ++i, ++n) {
                const double x = unit(rng) * 2 - 1, y = unit(rng) * 2 + 0.1, t = unit(rng) * 3;
                ok = ok && e.eval(x, y, t) == back.eval(x, y, t);
            }
        }
        return std::to_string(n) + " evaluations";
    }));

    items.push_back(detail::run_check("operator", "M-matrix and L1 <= 0 with random coefficients", [&](bool& ok) {
        const Grid g = build_box_grid({{0.0, 1.0}, {0.0, 1.0}}, 1.0 / 16);
        ok = true;
        for (int trial = 0; trial < 20; ++trial) {
            EllipticCoefficients k;
            const double a = 0.5 + unit(rng), b = 4 * unit(rng) - 2, c = -unit(rng);
            k.a11 = constant_coefficient(a);
            k.b1 = constant_coefficient(b);
            k.c = constant_coefficient(c);
            k.zero_order_mode = ZeroOrderMode::c_nonpos;
            const DiscreteOperator op = assemble(g, k);
            const ScalarField l1 = apply(op, ScalarField(g, 1.0));
            ok = ok && op.m_matrix;
            for (std::size_t n : g.interior_nodes()) ok = ok && l1[n] <= 1e-12;
        }
        return std::string("20 operators");
    }));

    items.push_back(detail::run_check("potential", "G_D positivity and harmonic maximum principle", [&](bool& ok) {
        const Grid g = build_box_grid({{0.0, 1.0}, {0.0, 1.0}}, 1.0 / 16);
        const GreenOperator gop(assemble(g, lap));
        ok = true;
        for (int trial = 0; trial < 20; ++trial) {
            ScalarField psi(g), f(g);
            for (std::size_t k = 0; k < g.size(); ++k) {
                psi[k] = unit(rng);
                f[k] = unit(rng);
            }
            const ScalarField gp = green_potential(gop, psi);
            const ScalarField h = harmonic_extension(gop, f);
            double fmax = 0.0, fmin = 1.0;
            for (std::size_t k : g.boundary_nodes()) fmax = std::max(fmax, f[k]), fmin = std::min(fmin, f[k]);
            for (std::size_t k : g.interior_nodes()) ok = ok && gp[k] >= 0.0 && h[k] <= fmax + 1e-12 && h[k] >= fmin - 1e-12;
        }
        return std::string("20 trials");
    }));

    items.push_back(detail::run_check("solver", "fixed-point identity and sandwich interleaving", [&](bool& ok) {
        const Grid g = build_box_grid({{0.0, 1.0}}, 1.0 / 32);
        const GreenOperator gop(assemble(g, lap));
        ok = true;
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            ScalarField f(g);
            for (std::size_t k : g.boundary_nodes()) f[k] = 2 * unit(rng);
            const SolveResult r = solve_U(gop, f, lin);
            worst = std::max(worst, r.report.final_identity_residual);
            ok = ok && r.report.status == SolveStatus::converged && r.report.final_identity_residual <= 1e-10;
            for (std::size_t k = 0; k < g.size(); ++k) ok = ok && r.lower[k] <= r.u[k] + 1e-10 && r.u[k] <= r.upper[k] + 1e-10;
        }
        return "max residual " + detail::sci(worst);
    }));

    items.push_back(detail::run_check("solver", "monotone in boundary data", [&](bool& ok) {
        const Grid g = build_box_grid({{0.0, 1.0}, {0.0, 1.0}}, 1.0 / 8);
        const GreenOperator gop(assemble(g, lap));
        ok = true;
        for (int trial = 0; trial < 10; ++trial) {
            ScalarField f(g), h(g);
            for (std::size_t k : g.boundary_nodes()) {
                f[k] = unit(rng);
                h[k] = f[k] + unit(rng);
            }
            ok = ok && check_monotone_in_data(gop, f, h, lin, SolveOptions{}, 1e-9).pass;
        }
        return std::string("10 trials");
    }));

    items.push_back(detail::run_check("exhaustion", "stagewise decrease and bound by sup s", [&](bool& ok) {
        const Exhaustion exh = build_exhaustion({{-1.0, 1.0}, {-1.0, 1.0}}, 2.0, 3, SpacingRule{0.25});
        const ExhaustionRun run = run_exhaustion(exh, lap, lin, Supersolution::constant_value(1.0));
        ok = run.max_monotone_violation <= 1e-9 && run.max_bound_violation <= 1e-9;
        return "verdict " + std::string(to_string(run.verdict));
    }));

    items.push_back(detail::run_check("exhaustion", "correspondence round trip", [&](bool& ok) {
        const Grid g = build_box_grid({{0.0, 1.0}}, 1.0 / 32);
        const auto rep = correspondence_roundtrip(g, lap, lin, ScalarField::sample(g, [](const Point& p) { return p.x; }));
        ok = rep.pass && rep.reconstruction_residual <= 1e-9;
        return "residual " + detail::sci(rep.reconstruction_residual);
    }));

    items.push_back(detail::run_check("thinness", "half-plane sqrt(y) certificate", [&](bool& ok) {
        const Grid g = build_box_grid({{-4.0, 4.0}, {0.25, 4.0}}, 0.25);
        const auto cert = make_certificate(g, [](const Point& p) { return p.y >= 1.0; },
                                           [](const Point& p) { return std::sqrt(p.y); }, 0.01);
        const CertificateVerdict v = verify_certificate(g, lap, cert, 1e-12);
        ok = v.pass;
        return v.pass ? std::string("pass") : v.reason;
    }));

    items.push_back(detail::run_check("thinness", "criterion integral nondecreasing in R", [&](bool& ok) {
        const auto r = criterion_integral(GreenKernel::halfplane, lin, 1.0, [](const Point& p) { return p.y > 1.0; },
                                          {1, 2, 4, 8});
        ok = true;
        for (std::size_t k = 1; k < r.values.size(); ++k) ok = ok && r.values[k] >= r.values[k - 1];
        return "I_8 = " + detail::sci(r.values.back());
    }));
    return items;
}

} // namespace semilinear
