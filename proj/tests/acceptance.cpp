// Acceptance suite: one PASS/FAIL line per numbered criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "semilinear/semilinear.hpp"

using namespace semilinear;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %2d [%s] %s: %s\n", id, o.pass ? "PASS" : "FAIL", title.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

Nonlinearity max_t() { return Nonlinearity([](const Point&, double t) { return std::max(t, 0.0); }, true, "max(t,0)"); }

Nonlinearity thin_support() {
    return Nonlinearity([](const Point& p, double t) { return p.y > 1.0 ? std::max(t, 0.0) : 0.0; }, true,
                        "(y>1)*max(t,0)");
}

// ||u + G_D phi(u) - H_D f|| over interior nodes, assembled from the potential operators.
double identity_defect(const GreenOperator& gop, const ScalarField& f, const ScalarField& u, const Nonlinearity& phi) {
    const ScalarField h = harmonic_extension(gop, f);
    ScalarField ph(u.grid());
    for (std::size_t k : u.grid().interior_nodes()) ph[k] = phi(u.grid().position(k), u[k]);
    const ScalarField g = green_potential(gop, ph);
    double m = 0.0;
    for (std::size_t k : u.grid().interior_nodes()) m = std::max(m, std::abs(u[k] + g[k] - h[k]));
    return m;
}

double max_restriction_increase(const ExhaustionRun& run) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n + 1 < run.stages.size(); ++n) {
        const ScalarField r = restrict(run.stages[n + 1].u, run.stages[n].grid);
        for (std::size_t k = 0; k < r.size(); ++k) worst = std::max(worst, r[k] - run.stages[n].u[k]);
    }
    return worst;
}

} // namespace

int main() {
    const EllipticCoefficients lap = EllipticCoefficients::laplacian();

    report(1, "interval Green oracle G_D 1 = x(1-x)/2", [&] {
        const auto t0 = Clock::now();
        double worst = 0.0;
        for (int cells : {4, 8, 64, 512, 1024}) {
            const Grid g = build_box_grid({{0.0, 1.0}}, 1.0 / cells);
            const ScalarField gd = green_potential(GreenOperator(assemble(g, lap)), ScalarField(g, 1.0));
            for (std::size_t k = 0; k < g.size(); ++k) {
                const double x = g.position(k).x;
                worst = std::max(worst, std::abs(gd[k] - 0.5 * x * (1.0 - x)));
            }
        }
        const double secs = seconds_since(t0);
        return Outcome{worst <= 1e-12 && secs < 1.0,
                       "max error " + fmt(worst) + " over h = 1/4..1/1024, " + fmt(secs) + " s"};
    });

    report(2, "fixed-point identity on benchmark configs", [&] {
        struct Bench {
            std::string name;
            Grid grid;
            EllipticCoefficients coeffs;
            Nonlinearity phi;
            ScalarField f;
            SolveOptions opt;
        };
        std::vector<Bench> benches;
        for (const char* name : {"cosh", "sqrt_interval", "drift_square"}) {
            const RunConfig cfg = load_config(std::string(SEMILINEAR_CONFIG_DIR) + "/" + name + ".ini");
            const Grid g = cfg.grid();
            benches.push_back({name, g, cfg.op.coefficients(), cfg.phi(),
                               ScalarField::sample(g, [&](const Point& p) {
                                   return cfg.boundary_f.eval(Bindings{p.x, p.y, std::nullopt});
                               }),
                               cfg.solver});
        }
        {
            const Grid g = build_box_grid({{0.0, 1.0}, {0.0, 1.0}}, 1.0 / 32);
            SolveOptions opt;
            opt.scheme = Scheme::damped_picard;
            benches.push_back({"square exp-absorption picard", g, lap,
                               Nonlinearity([](const Point&, double t) { return t > 0 ? std::expm1(t) : 0.0; }, true, "expm1"),
                               ScalarField::sample(g, [](const Point& p) { return 2.0 + std::sin(3 * p.x); }), opt});
        }
        {
            const Grid g = build_box_grid({{-4.0, 4.0}, {0.25, 4.0}}, 0.25);
            SolveOptions opt;
            opt.scheme = Scheme::newton;
            benches.push_back({"half-plane thin support newton", g, lap, thin_support(), ScalarField(g, 1.0), opt});
        }
        {
            const Grid g = build_box_grid({{0.0, 2.0}}, 1.0 / 64);
            EllipticCoefficients k;
            k.b1 = constant_coefficient(-3.0);
            k.c = [](const Point& p) { return -p.x; };
            k.zero_order_mode = ZeroOrderMode::c_nonpos;
            benches.push_back({"1D drift + c<0 sandwich", g, k,
                               Nonlinearity([](const Point&, double t) { return std::pow(std::max(t, 0.0), 3); }, true, "t^3"),
                               ScalarField(g, 1.5), SolveOptions{}});
        }
        int converged = 0;
        double worst = 0.0;
        std::string detail;
        for (const auto& b : benches) {
            const GreenOperator gop(assemble(b.grid, b.coeffs));
            const SolveResult r = solve_U(gop, b.f, b.phi, b.opt);
            if (r.report.status != SolveStatus::converged) {
                detail += " [" + b.name + " not converged]";
                continue;
            }
            ++converged;
            worst = std::max(worst, identity_defect(gop, b.f, r.u, b.phi));
        }
        return Outcome{converged == static_cast<int>(benches.size()) && converged >= 5 && worst <= 1e-10,
                       std::to_string(converged) + "/" + std::to_string(benches.size()) +
                           " converged, max identity residual " + fmt(worst) + detail};
    });

    report(3, "cosh benchmark second-order convergence", [&] {
        const auto t0 = Clock::now();
        std::vector<double> errors;
        for (int cells : {32, 64, 128}) {
            const Grid g = build_box_grid({{0.0, 1.0}}, 1.0 / cells);
            const SolveResult r = solve_U(GreenOperator(assemble(g, lap)), ScalarField(g, 1.0), max_t());
            if (r.report.status != SolveStatus::converged) return Outcome{false, "solve did not converge"};
            double e = 0.0;
            for (std::size_t k = 0; k < g.size(); ++k) {
                const double x = g.position(k).x;
                e = std::max(e, std::abs(r.u[k] - std::cosh(x - 0.5) / std::cosh(0.5)));
            }
            errors.push_back(e);
        }
        const double r1 = errors[0] / errors[1], r2 = errors[1] / errors[2];
        const double secs = seconds_since(t0);
        const bool ok = r1 >= 3.5 && r1 <= 4.5 && r2 >= 3.5 && r2 <= 4.5 && secs < 10.0;
        return Outcome{ok, "errors " + fmt(errors[0]) + ", " + fmt(errors[1]) + ", " + fmt(errors[2]) + "; ratios " +
                               fmt(r1) + ", " + fmt(r2) + "; " + fmt(secs) + " s"};
    });

    report(4, "randomized comparison / monotonicity / interleaving / positivity", [&] {
        std::mt19937 rng(20260);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double tol = 1e-9;
        auto random_phi = [&]() {
            const double a = 0.2 + 2 * unit(rng);
            const double p = std::array<double, 3>{0.5, 1.0, 2.0}[rng() % 3];
            return Nonlinearity([a, p](const Point& q, double t) { return a * (1 + q.x * q.x) * std::pow(std::max(t, 0.0), p); },
                                true, "random");
        };
        auto random_grid = [&](int trial) {
            return trial % 2 == 0 ? build_box_grid({{0.0, 1.0}}, 1.0 / 32) : build_box_grid({{0.0, 1.0}, {0.0, 1.0}}, 1.0 / 8);
        };
        auto random_coeffs = [&]() {
            EllipticCoefficients k;
            const double a = 0.5 + unit(rng), b = 4 * unit(rng) - 2;
            k.a11 = constant_coefficient(a);
            k.b1 = constant_coefficient(b);
            return k;
        };
        int fail_cmp = 0, fail_mono = 0, fail_inter = 0, fail_pos = 0;
        for (int trial = 0; trial < 200; ++trial) {
            const Grid g = random_grid(trial);
            const GreenOperator gop(assemble(g, random_coeffs()));
            const Nonlinearity phi = random_phi();
            ScalarField lo(g), hi(g);
            for (std::size_t k : g.boundary_nodes()) {
                lo[k] = 2 * unit(rng);
                hi[k] = lo[k] + unit(rng);
            }
            SolveOptions opt;
            opt.scheme = Scheme::newton;
            opt.tol = 1e-12;

            // comparison: U(hi) against U(lo), and H_D hi (a supersolution) against U(hi)
            const SolveResult ulo = solve_U(gop, lo, phi, opt);
            const SolveResult uhi = solve_U(gop, hi, phi, opt);
            if (!check_comparison(gop, uhi.u, ulo.u, phi, tol).pass) ++fail_cmp;
            if (!check_comparison(gop, harmonic_extension(gop, hi), uhi.u, phi, tol).pass) ++fail_cmp;

            if (!check_monotone_in_data(gop, lo, hi, phi, opt, tol).pass) ++fail_mono;

            // interleaving of the first T iterates around the fixed point
            const ScalarField hf = harmonic_extension(gop, hi);
            std::vector<ScalarField> it{hf};
            for (int k = 0; k < 6; ++k) it.push_back(apply_T_with(gop, hf, it.back(), phi));
            bool inter = true;
            for (std::size_t k = 0; k < it.size(); ++k)
                for (std::size_t n = 0; n < g.size(); ++n) {
                    if (k % 2 == 0) inter = inter && it[k][n] >= uhi.u[n] - tol;
                    else inter = inter && it[k][n] <= uhi.u[n] + tol;
                    if (k + 2 < it.size()) {
                        if (k % 2 == 0) inter = inter && it[k + 2][n] <= it[k][n] + tol;
                        else inter = inter && it[k + 2][n] >= it[k][n] - tol;
                    }
                }
            if (!inter) ++fail_inter;

            ScalarField psi(g);
            for (std::size_t k = 0; k < g.size(); ++k) psi[k] = unit(rng) < 0.3 ? 0.0 : unit(rng);
            const ScalarField gp = green_potential(gop, psi);
            for (double v : gp.values())
                if (v < -tol) {
                    ++fail_pos;
                    break;
                }
        }
        const int total = fail_cmp + fail_mono + fail_inter + fail_pos;
        return Outcome{total == 0, "200 trials each; failures comparison=" + std::to_string(fail_cmp) +
                                       " monotone=" + std::to_string(fail_mono) + " interleave=" +
                                       std::to_string(fail_inter) + " positivity=" + std::to_string(fail_pos)};
    });

    // shared by criteria 5, 6 and 10
    const RunConfig thin_cfg = load_config(std::string(SEMILINEAR_CONFIG_DIR) + "/halfplane_thin.ini");
    std::optional<ExhaustionRun> thin_run;
    double thin_secs = 0.0;
    {
        const auto t0 = Clock::now();
        try {
            ExhaustionOptions opt;
            opt.solve = thin_cfg.solver;
            thin_run = run_exhaustion(thin_cfg.build_exhaustion_stages(), thin_cfg.op.coefficients(), thin_cfg.phi(),
                                      thin_cfg.supersolution.build(), opt);
        } catch (const std::exception& e) {
            std::printf("thin-support run failed: %s\n", e.what());
        }
        thin_secs = seconds_since(t0);
    }

    report(5, "exhaustion monotonicity on half-plane truncations R = 4..32", [&] {
        if (!thin_run) return Outcome{false, "thin-support run failed"};
        std::string detail;
        bool ok = true;
        const double v_thin = max_restriction_increase(*thin_run);
        ok = ok && v_thin <= 1e-9;
        detail += "thin-support max increase " + fmt(v_thin);
        for (const char* name : {"halfplane_sqrt"}) {
            const RunConfig cfg = load_config(std::string(SEMILINEAR_CONFIG_DIR) + "/" + name + ".ini");
            ExhaustionOptions opt;
            opt.solve = cfg.solver;
            const ExhaustionRun run = run_exhaustion(cfg.build_exhaustion_stages(), cfg.op.coefficients(), cfg.phi(),
                                                     cfg.supersolution.build(), opt);
            const double v = max_restriction_increase(run);
            ok = ok && v <= 1e-9;
            detail += std::string("; ") + name + " max increase " + fmt(v);
        }
        {
            const Exhaustion exh = build_halfplane_exhaustion(4.0, 2.0, 4, SpacingRule{0.25}, 0.25, {0.0, 1.0});
            const ExhaustionRun run = run_exhaustion(exh, lap, max_t(), Supersolution::constant_value(1.0));
            const double v = max_restriction_increase(run);
            ok = ok && v <= 1e-9;
            detail += "; max(t,0) max increase " + fmt(v);
        }
        return Outcome{ok, detail};
    });

    report(6, "thin-support nontriviality", [&] {
        if (!thin_run) return Outcome{false, "thin-support run failed"};
        const Grid& g = thin_run->stages.back().grid;
        const auto s0 = [](const Point& p) { return std::min(1.0, std::sqrt(p.y)); };
        const ThinnessCertificate cert = make_certificate(g, [](const Point& p) { return p.y > 1.0; }, s0, 0.01);
        const CertificateVerdict v = verify_certificate(g, lap, cert, 1e-12);
        const Point x0 = thin_run->anchor;
        const double u0 = thin_run->anchor_values.back();
        const double bound = 1.0 - s0(x0) - 1e-3;

        // runtime budget on a 257 x 257 stage of the same problem
        const auto t0 = Clock::now();
        const Grid big = build_box_grid({{-32.0, 32.0}, {0.25, 64.25}}, 0.25);
        SolveOptions opt;
        opt.scheme = Scheme::newton;
        const SolveResult rb = solve_U(GreenOperator(assemble(big, lap)), ScalarField(big, 1.0), thin_support(), opt);
        const double big_secs = seconds_since(t0);

        const bool ok = v.pass && u0 >= bound && thin_run->verdict == Triviality::nontrivial && thin_secs < 60.0 &&
                        rb.report.status == SolveStatus::converged && big_secs < 60.0;
        return Outcome{ok, "u(x0) = " + fmt(u0) + " >= " + fmt(bound) + ", certificate " + (v.pass ? "verified" : v.reason) +
                               ", verdict " + to_string(thin_run->verdict) + ", finest stage " +
                               std::to_string(g.count(0)) + "x" + std::to_string(g.count(1)) + " in " + fmt(thin_secs) +
                               " s; 257x257 stage solve " + fmt(big_secs) + " s"};
    });

    report(7, "criterion trend dichotomy", [&] {
        const std::vector<double> radii{4, 8, 16, 32};
        CriterionOptions opt;
        opt.anchor = {0.0, 1.0};
        auto t0 = Clock::now();
        const auto strip = criterion_integral(GreenKernel::halfplane, max_t(), 1.0,
                                              [](const Point& p) { return p.y > 1.0; }, radii, opt);
        const double strip_secs = seconds_since(t0);
        double worst_rel = 0.0;
        for (std::size_t k = 0; k < radii.size(); ++k) {
            const double ref = oracle::halfplane_box_integral(1.0, 0.0, 1.0, radii[k]);
            worst_rel = std::max(worst_rel, std::abs(strip.values[k] - ref) / ref);
        }
        t0 = Clock::now();
        const Nonlinearity one([](const Point&, double t) { return t > 0 ? 1.0 : 0.0; }, false, "1");
        const auto whole = criterion_integral(GreenKernel::halfplane, one, 1.0, [](const Point&) { return false; }, radii, opt);
        const double whole_secs = seconds_since(t0);
        const bool ok = strip.verdict == TrendVerdict::bounded_trend && whole.verdict == TrendVerdict::diverging_trend &&
                        strip_secs < 30.0 && whole_secs < 30.0 && worst_rel <= 1e-3;
        return Outcome{ok, std::string("strip ") + to_string(strip.verdict) + " (last ratio " + fmt(strip.ratios.back()) +
                               ", oracle rel. error " + fmt(worst_rel) + ", " + fmt(strip_secs) + " s); whole plane " +
                               to_string(whole.verdict) + " (last ratio " + fmt(whole.ratios.back()) + ", " +
                               fmt(whole_secs) + " s)"};
    });

    report(8, "correspondence round trip", [&] {
        double worst_res = 0.0, min_gap = std::numeric_limits<double>::infinity();
        bool order = true;
        for (int dim : {1, 2}) {
            const Grid g = dim == 1 ? build_box_grid({{0.0, 1.0}}, 1.0 / 64) : build_box_grid({{0.0, 1.0}, {0.0, 1.0}}, 1.0 / 32);
            const Point anchor = dim == 1 ? Point{0.5, 0.0} : Point{0.5, 0.5};
            CorrespondenceOptions opt;
            opt.anchor = anchor;
            std::vector<CorrespondenceReport> reps;
            for (auto h : {std::function<double(const Point&)>([](const Point&) { return 1.0; }),
                           std::function<double(const Point&)>([](const Point&) { return 2.0; }),
                           std::function<double(const Point&)>([](const Point& p) { return p.x; })}) {
                reps.push_back(correspondence_roundtrip(g, lap, max_t(), ScalarField::sample(g, h), opt));
                worst_res = std::max(worst_res, reps.back().reconstruction_residual);
            }
            for (std::size_t k = 0; k < g.size(); ++k) order = order && reps[1].u[k] >= reps[0].u[k] - 1e-12;
            min_gap = std::min(min_gap, reps[1].u.at(anchor) - reps[0].u.at(anchor));
        }
        return Outcome{worst_res <= 1e-9 && order && min_gap >= 1e-4,
                       "max reconstruction residual " + fmt(worst_res) + ", order " + (order ? "holds" : "violated") +
                           ", min anchor gap " + fmt(min_gap)};
    });

    report(9, "Poisson kernel normalization and indicator extension", [&] {
        const Grid line = build_box_grid({{-100.0, 100.0}}, 0.01);
        const std::vector<Point> pts{{0.0, 1.0}, {3.0, 0.5}, {-20.0, 2.0}, {0.0, 0.05}};
        const auto mass = poisson_extension(ScalarField(line, 1.0), pts);
        double worst_mass = 0.0;
        for (double m : mass) worst_mass = std::max(worst_mass, std::abs(m - 1.0));
        PoissonExtensionOptions raw;
        raw.tail_correction = false;
        const double raw_mass = poisson_extension(ScalarField(line, 1.0), std::vector<Point>{{0.0, 1.0}}, raw)[0];
        const ScalarField ind = ScalarField::sample(line, [](const Point& p) {
            const double a = std::abs(p.x);
            return a < 1.0 ? 1.0 : (a == 1.0 ? 0.5 : 0.0);
        });
        const double v = poisson_extension(ind, std::vector<Point>{{0.0, 1.0}})[0];
        const double exact = (std::atan(1.0) + std::atan(1.0)) / std::numbers::pi;
        const bool ok = worst_mass <= 1e-3 && std::abs(v - exact) <= 1e-6 && std::abs(raw_mass - 1.0) <= 1e-2;
        return Outcome{ok, "max |mass - 1| " + fmt(worst_mass) + " (untruncated-tail mass " + fmt(raw_mass) +
                               "), indicator at (0,1) = " + fmt(v) + " vs " + fmt(exact)};
    });

    report(10, "necessary-direction probe from the thin-support solution", [&] {
        if (!thin_run) return Outcome{false, "thin-support run failed"};
        const ProbeResult pr = necessary_direction_probe(*thin_run, lap, 1.0);
        CriterionOptions opt;
        opt.anchor = thin_run->anchor;
        const std::vector<double> radii{2, 4, 8, 16};
        const auto crit = criterion_integral(GreenKernel::halfplane, thin_support(), pr.c0,
                                             mask_predicate(pr.certificate), radii, opt);
        bool below = true;
        for (double v : crit.values) below = below && v <= pr.c;
        return Outcome{pr.verdict.pass && below,
                       "c0 = " + fmt(pr.c0) + ", certificate " + (pr.verdict.pass ? "verified" : pr.verdict.reason) +
                           " (max L s " + fmt(pr.verdict.superharmonic_residual) + ", |A| = " +
                           std::to_string(pr.verdict.nodes_in_A) + " nodes), I_R for R = 2..16: " +
                           fmt(crit.values.front()) + " .. " + fmt(crit.values.back()) + " <= c = 1, trend " +
                           to_string(crit.verdict)};
    });

    std::printf("acceptance: %d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
