#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "semilinear/semilinear.hpp"

namespace fs = std::filesystem;
using namespace semilinear;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNonConvergence = 3;

struct Globals {
    std::string config_path;
    std::string out_dir;
    std::optional<unsigned> seed;
};

struct SolveFlags {
    std::string scheme;
    std::optional<double> tol;
    std::optional<int> max_iter;
};

struct GreenFlags {
    std::string oracle;
    bool compare = false;
};

RunConfig load(const Globals& g) {
    if (g.config_path.empty()) throw ValidationError("--config: a run configuration file is required");
    RunConfig cfg = load_config(g.config_path);
    if (!g.out_dir.empty()) cfg.output.dir = g.out_dir;
    if (g.seed) cfg.seed = *g.seed;
    return cfg;
}

fs::path out_path(const RunConfig& cfg, const std::string& name) {
    const fs::path dir(cfg.output.dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ValidationError("[output] dir: cannot create '" + dir.string() + "': " + ec.message());
    return dir / name;
}

int run_solve(RunConfig cfg, const SolveFlags& flags) {
    if (!flags.scheme.empty()) cfg.solver.scheme = parse_scheme(flags.scheme);
    if (flags.tol) cfg.solver.tol = *flags.tol;
    if (flags.max_iter) cfg.solver.max_iter = *flags.max_iter;
    if (!(cfg.solver.tol > 0.0)) throw ValidationError("--tol: must be positive");
    if (cfg.solver.max_iter < 1) throw ValidationError("--max-iter: must be >= 1");

    const Grid grid = cfg.grid();
    const EllipticCoefficients coeffs = cfg.op.coefficients();
    const Nonlinearity phi = cfg.phi();
    const ScalarField f = ScalarField::sample(
        grid, [&](const Point& p) { return cfg.boundary_f.eval(Bindings{p.x, p.y, std::nullopt}); });
    const NonlinearityCheck chk = validate(phi, grid, std::max(1.0, sup_norm(f)), cfg.nonlinearity.monotone_check_samples);
    if (!chk.ok) throw ValidationError("[nonlinearity] phi: " + chk.message);

    const GreenOperator gop(assemble(grid, coeffs));
    const SolveResult r = solve_U(gop, f, phi, cfg.solver);
    write_field_csv(out_path(cfg, "solution.csv"), r.u, "u", cfg.output.precision);
    {
        CsvWriter log(out_path(cfg, "convergence.csv"), {"iteration", "envelope_gap", "identity_residual"},
                      cfg.output.precision);
        const auto& res = r.report.residual_history;
        const auto& gap = r.report.sandwich_gap_history;
        for (std::size_t k = 0; k < res.size(); ++k)
            log.row({static_cast<long long>(k), k < gap.size() ? gap[k] : res[k], res[k]});
    }
    std::printf("solve: scheme=%s status=%s iterations=%d identity_residual=%s\n", to_string(cfg.solver.scheme),
                to_string(r.report.status), r.report.iterations,
                format_number(r.report.final_identity_residual, 6).c_str());
    return r.report.status == SolveStatus::converged ? kExitOk : kExitNonConvergence;
}

void write_stages(const RunConfig& cfg, const ExhaustionRun& run, const std::string& name) {
    CsvWriter w(out_path(cfg, name), {"stage", "nodes", "anchor_value", "identity_residual", "min_u", "max_u"},
                cfg.output.precision);
    for (std::size_t n = 0; n < run.stages.size(); ++n) {
        const auto& st = run.stages[n];
        w.row({static_cast<long long>(n), static_cast<long long>(st.grid.size()), st.anchor_value,
               st.identity_residual, st.min_u, st.max_u});
    }
}

int run_exhaust(const RunConfig& cfg) {
    const Exhaustion exh = cfg.build_exhaustion_stages();
    const EllipticCoefficients coeffs = cfg.op.coefficients();
    const Supersolution s = cfg.supersolution.build();
    ExhaustionOptions opt;
    opt.solve = cfg.solver;
    if (cfg.nonlinearity.phi2) {
        const Nonlinearity phi2 = Nonlinearity::from_expr(*cfg.nonlinearity.phi2, cfg.nonlinearity.differentiable);
        const SplitReport rep = split_experiment(exh, coeffs, cfg.phi(), phi2, s, cfg.nonlinearity.split_mode, opt);
        write_stages(cfg, rep.run1, "stages_phi1.csv");
        write_stages(cfg, rep.run2, "stages_phi2.csv");
        if (rep.run_sum) write_stages(cfg, *rep.run_sum, "stages_sum.csv");
        std::printf("split: mode=%s max_violation=%s verdict=%s%s\n", to_string(rep.mode),
                    format_number(rep.max_violation, 6).c_str(), rep.pass ? "pass" : "fail",
                    rep.run_sum ? (std::string(" sum_verdict=") + to_string(rep.sum_verdict)).c_str() : "");
        return rep.pass ? kExitOk : kExitCheckFailed;
    }
    const ExhaustionRun run = run_exhaustion(exh, coeffs, cfg.phi(), s, opt);
    write_stages(cfg, run, "stages.csv");
    write_field_csv(out_path(cfg, "limit.csv"), run.limit_estimate, "u", cfg.output.precision);
    std::printf("exhaust: stages=%zu anchor=(%s, %s) anchor_value=%s max_monotone_violation=%s verdict=%s\n",
                run.stages.size(), format_number(run.anchor.x, 6).c_str(), format_number(run.anchor.y, 6).c_str(),
                format_number(run.anchor_values.back(), 10).c_str(),
                format_number(run.max_monotone_violation, 3).c_str(), to_string(run.verdict));
    return kExitOk;
}

int run_thin_check(const RunConfig& cfg) {
    const Grid grid = cfg.grid();
    const DiscreteOperator op = assemble(grid, cfg.op.coefficients());
    const Expr s = cfg.thinness.super_s;
    const ThinnessCertificate cert = make_certificate(
        grid, expr_predicate(cfg.thinness.set_A),
        [&](const Point& p) { return s.eval(Bindings{p.x, p.y, std::nullopt}); }, cfg.thinness.margin,
        cfg.thinness.set_A.source());
    const CertificateVerdict v = verify_certificate(op, cert, cfg.thinness.tol);
    const ScalarField ls = apply(op, cert.witness);
    std::vector<std::string> header{"node", "x"};
    if (grid.dim() == 2) header.push_back("y");
    for (const char* h : {"in_A", "s", "Ls"}) header.push_back(h);
    CsvWriter w(out_path(cfg, "certificate.csv"), header, cfg.output.precision);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const Point p = grid.position(k);
        std::vector<CsvCell> row{static_cast<long long>(k), p.x};
        if (grid.dim() == 2) row.push_back(p.y);
        row.push_back(static_cast<long long>(cert.set_A[k]));
        row.push_back(cert.witness[k]);
        row.push_back(ls[k]);
        w.row(row);
    }
    std::printf("thin-check: %s min_s=%s min_s_on_A=%s max_Ls=%s%s%s\n", v.pass ? "pass" : "fail",
                format_number(v.min_over_grid, 10).c_str(), format_number(v.min_on_A, 10).c_str(),
                format_number(v.superharmonic_residual, 6).c_str(), v.pass ? "" : " reason=", v.reason.c_str());
    return v.pass ? kExitOk : kExitCheckFailed;
}

int run_criterion(const RunConfig& cfg) {
    const auto r = criterion_integral(cfg.criterion.kernel, cfg.phi(), cfg.criterion.c0,
                                      expr_predicate(cfg.criterion.set_A), cfg.criterion.radii, cfg.criterion.options);
    CsvWriter w(out_path(cfg, "criterion.csv"), {"radius", "value", "increment", "ratio"}, cfg.output.precision);
    for (std::size_t k = 0; k < r.values.size(); ++k) {
        const double inc = k == 0 ? r.values[0] : r.increments[k - 1];
        const std::string ratio = k < 2 ? std::string{} : format_number(r.ratios[k - 2], cfg.output.precision);
        w.row({r.radii[k], r.values[k], inc, ratio});
    }
    std::printf("criterion: kernel=%s I_R=%s verdict=%s\n", to_string(cfg.criterion.kernel),
                format_number(r.values.back(), 10).c_str(), to_string(r.verdict));
    return kExitOk;
}

int run_green(RunConfig cfg, const GreenFlags& flags) {
    if (!flags.oracle.empty()) {
        if (flags.oracle != "interval" && flags.oracle != "halfplane")
            throw ValidationError("--oracle: expected interval or halfplane");
        cfg.green.oracle = flags.oracle;
    }
    const bool halfplane = cfg.green.oracle == "halfplane";
    const Grid grid = cfg.grid();
    if (grid.dim() != (halfplane ? 2 : 1))
        throw ValidationError("[green] oracle: " + cfg.green.oracle + " needs [domain] dim = " + (halfplane ? "2" : "1"));
    const GreenOperator gop(assemble(grid, cfg.op.coefficients()));
    const std::size_t pole = grid.nearest_node(cfg.green.pole);
    if (!grid.is_interior(pole)) throw ValidationError("[green] pole: nearest node is not interior");
    const ScalarField col = green_column(gop, pole);
    const Point w = grid.position(pole);
    const double a = grid.extent(0).lo, b = grid.extent(0).hi;
    const double y_shift = halfplane ? grid.extent(1).lo : 0.0;  // the half-plane is {y > lo}

    std::vector<std::string> header{"node", "x"};
    if (halfplane) header.push_back("y");
    header.push_back("discrete");
    if (flags.compare) {
        header.push_back("analytic");
        header.push_back("abs_error");
    }
    CsvWriter out(out_path(cfg, "green.csv"), header, cfg.output.precision);
    double worst = 0.0;
    for (std::size_t k : grid.interior_nodes()) {
        if (k == pole && halfplane && flags.compare) continue;  // analytic value is infinite there
        const Point p = grid.position(k);
        std::vector<CsvCell> row{static_cast<long long>(k), p.x};
        if (halfplane) row.push_back(p.y);
        row.push_back(col[k]);
        if (flags.compare) {
            const double exact = halfplane ? halfplane_green({p.x, p.y - y_shift}, {w.x, w.y - y_shift})
                                           : interval_green(p.x, w.x, a, b);
            row.push_back(exact);
            row.push_back(std::abs(col[k] - exact));
            worst = std::max(worst, std::abs(col[k] - exact));
        }
        out.row(row);
    }
    if (flags.compare)
        std::printf("green: oracle=%s pole_node=%zu max_abs_error=%s\n", cfg.green.oracle.c_str(), pole,
                    format_number(worst, 6).c_str());
    else
        std::printf("green: pole_node=%zu\n", pole);
    return kExitOk;
}

int run_verify(const Globals& g) {
    unsigned seed = 12345;
    std::string dir;
    if (!g.config_path.empty()) {
        const RunConfig cfg = load(g);
        seed = cfg.seed;
        dir = cfg.output.dir;
    } else {
        if (g.seed) seed = *g.seed;
        dir = g.out_dir;
    }
    const auto items = run_verify_suite(seed);
    bool all = true;
    for (const auto& it : items) {
        std::printf("%-4s  %-11s %-48s %s\n", it.pass ? "PASS" : "FAIL", it.module.c_str(), it.check.c_str(),
                    it.detail.c_str());
        all = all && it.pass;
    }
    if (!dir.empty()) {
        RunConfig sink;
        sink.output.dir = dir;
        CsvWriter w(out_path(sink, "verify.csv"), {"module", "check", "pass"});
        for (const auto& it : items) w.row({it.module, it.check, std::string(it.pass ? "true" : "false")});
    }
    std::printf("verify: %s\n", all ? "all checks passed" : "failures present");
    return all ? kExitOk : kExitCheckFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semilinear elliptic solver: Lu = phi(., u) on grids, exhaustions and thinness certificates"};
    Globals g;
    app.add_option("--config", g.config_path, "Run configuration file")->check(CLI::ExistingFile);
    app.add_option("--out-dir", g.out_dir, "Directory for CSV output (overrides [output] dir)");
    app.add_option("--seed", g.seed, "RNG seed for randomized checks");
    app.require_subcommand(0, 1);

    SolveFlags sf;
    auto* solve = app.add_subcommand("solve", "Solve u = H_D f - G_D phi(., u) on the configured grid");
    solve->add_option("--scheme", sf.scheme, "sandwich | damped_picard | newton");
    solve->add_option("--tol", sf.tol, "Identity-residual tolerance");
    solve->add_option("--max-iter", sf.max_iter, "Iteration cap");
    auto* exhaust = app.add_subcommand("exhaust", "Run the exhaustion sequence (and split experiments)");
    auto* thin = app.add_subcommand("thin-check", "Verify a thinness certificate");
    auto* crit = app.add_subcommand("criterion", "Criterion integral over truncations");
    GreenFlags gf;
    auto* green = app.add_subcommand("green", "Discrete Green function column and analytic oracle");
    green->add_option("--oracle", gf.oracle, "interval | halfplane");
    green->add_flag("--compare", gf.compare, "Add analytic value and error columns");
    auto* verify = app.add_subcommand("verify", "Run the invariant suites of all modules");
    for (auto* sub : {solve, exhaust, thin, crit, green, verify}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (verify->parsed()) return run_verify(g);
        if (green->parsed() || solve->parsed() || exhaust->parsed() || thin->parsed() || crit->parsed()) {
            const RunConfig cfg = load(g);
            if (solve->parsed()) return run_solve(cfg, sf);
            if (exhaust->parsed()) return run_exhaust(cfg);
            if (thin->parsed()) return run_thin_check(cfg);
            if (crit->parsed()) return run_criterion(cfg);
            return run_green(cfg, gf);
        }
        // no subcommand: run the experiment named in the config
        const RunConfig cfg = load(g);
        switch (cfg.experiment) {
        case Experiment::solve: return run_solve(cfg, sf);
        case Experiment::exhaust: return run_exhaust(cfg);
        case Experiment::thin_check: return run_thin_check(cfg);
        case Experiment::criterion: return run_criterion(cfg);
        case Experiment::green: return run_green(cfg, gf);
        case Experiment::verify: return run_verify(g);
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNonConvergence;
    } catch (const SolveError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNonConvergence;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitOk;
}
