#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "semilinear/error.hpp"
#include "semilinear/grid.hpp"
#include "semilinear/nonlinearity.hpp"
#include "semilinear/operator.hpp"
#include "semilinear/potential.hpp"
#include "semilinear/solver.hpp"

namespace semilinear {

enum class Triviality { nontrivial, trivial_trend, undecided };

inline const char* to_string(Triviality t) {
    switch (t) {
    case Triviality::nontrivial: return "nontrivial";
    case Triviality::trivial_trend: return "trivial_trend";
    case Triviality::undecided: return "undecided";
    }
    return "?";
}

/// Supersolution data s for an exhaustion: a constant (harmonic when c = 0)
/// or a field given pointwise, checked for discrete L-superharmonicity.
struct Supersolution {
    std::function<double(const Point&)> fn;
    std::optional<double> constant;
    std::string label;

    static Supersolution constant_value(double c) {
        return {[c](const Point&) { return c; }, c, "constant " + std::to_string(c)};
    }
    static Supersolution function(std::function<double(const Point&)> f, std::string label) {
        return {std::move(f), std::nullopt, std::move(label)};
    }
};

struct ExhaustionOptions {
    SolveOptions solve{Scheme::newton, 1e-10, 200, 0.5, 30};
    double kappa = 10.0;                 // monotonicity violations beyond kappa * tol are errors
    double superharmonic_tol = 1e-9;
    double decay_fraction = 1e-3;        // trivial_trend: last anchor < decay_fraction * first
    double nontrivial_fraction = 0.05;   // nontrivial: last window >= nontrivial_fraction * sup s
    double stabilize_drop = 0.10;        // and last relative drop <= stabilize_drop
    int window = 3;
};

struct ExhaustionStage {
    Grid grid;
    ScalarField u;   // U_{D_n} s
    ScalarField h;   // H_{D_n} s
    double anchor_value = 0.0;
    double identity_residual = 0.0;
    double min_u = 0.0;
    double max_u = 0.0;
    int iterations = 0;
};

struct ExhaustionRun {
    std::vector<ExhaustionStage> stages;
    Point anchor;
    std::vector<double> anchor_values;
    std::vector<double> tail_metrics;   // identity residual per stage
    ScalarField limit_estimate;
    Triviality verdict = Triviality::undecided;
    double sup_s = 0.0;
    double max_monotone_violation = 0.0;  // max over stages of restrict(u_{n+1}) - u_n
    double max_bound_violation = 0.0;     // max over stages of u_n - sup s
};

/// Verdict from an anchor trace: trivial_trend when the last `window`
/// values are nonincreasing and the last is below decay_fraction times the
/// first; nontrivial when the last `window` values all exceed
/// nontrivial_fraction * sup_s and the final relative drop is at most
/// stabilize_drop; undecided otherwise.
inline Triviality classify_trend(const std::vector<double>& anchors, double sup_s, const ExhaustionOptions& opt) {
    const auto n = anchors.size();
    const auto w = static_cast<std::size_t>(std::max(opt.window, 2));
    if (n < w) return Triviality::undecided;
    bool nonincreasing = true, above = true;
    for (std::size_t k = n - w; k < n; ++k) {
        if (k > n - w && anchors[k] > anchors[k - 1]) nonincreasing = false;
        if (anchors[k] < opt.nontrivial_fraction * sup_s) above = false;
    }
    if (nonincreasing && anchors.back() < opt.decay_fraction * anchors.front()) return Triviality::trivial_trend;
    const double prev = anchors[n - 2];
    const double drop = prev > 0.0 ? (prev - anchors.back()) / prev : 0.0;
    if (above && drop <= opt.stabilize_drop) return Triviality::nontrivial;
    return Triviality::undecided;
}

/// u_n = U_{D_n}^phi s on every stage of `exh`, with the decrease
/// u_{n+1} <= u_n checked on shared nodes.
inline ExhaustionRun run_exhaustion(const Exhaustion& exh, const EllipticCoefficients& coeffs, const Nonlinearity& phi,
                                    const Supersolution& s, const ExhaustionOptions& opt = {}) {
    if (exh.stages.empty()) throw ValidationError("exhaustion: no stages");
    if (s.constant && coeffs.zero_order_mode != ZeroOrderMode::c_zero)
        throw ValidationError("exhaustion: constant supersolution requires zero_order_mode c_zero");
    const double tol = opt.solve.tol;
    ExhaustionRun run;
    run.anchor = exh.anchor;
    run.sup_s = 0.0;

    for (std::size_t n = 0; n < exh.stages.size(); ++n) {
        const Grid& grid = exh.stages[n];
        const std::string where = "exhaustion: stage " + std::to_string(n);
        const DiscreteOperator op = assemble(grid, coeffs);
        const ScalarField s_field = ScalarField::sample(grid, s.fn);
        for (std::size_t k = 0; k < grid.size(); ++k)
            if (!(s_field[k] >= 0.0) || !std::isfinite(s_field[k]))
                throw ValidationError(where + ": supersolution s must be finite and >= 0 (node " + std::to_string(k) + ")");
        if (!s.constant) {
            const SuperharmonicReport sr = check_superharmonic(op, s_field, opt.superharmonic_tol);
            if (!sr.pass)
                throw ValidationError(where + ": s is not L-superharmonic (L s = " + std::to_string(sr.max_residual) +
                                      " at node " + std::to_string(sr.worst_node) + ")");
        }
        run.sup_s = std::max(run.sup_s, sup_norm(s_field));

        const GreenOperator gop(op);
        SolveResult res = solve_U(gop, s_field, phi, opt.solve);
        if (res.report.status != SolveStatus::converged)
            throw ConvergenceError(where + ": solve did not converge (" + to_string(res.report.status) +
                                   ", residual " + std::to_string(res.report.final_identity_residual) + ")");

        ExhaustionStage st;
        st.grid = grid;
        st.h = harmonic_extension(gop, s_field);
        st.identity_residual = res.report.final_identity_residual;
        st.iterations = res.report.iterations;
        st.u = std::move(res.u);
        st.anchor_value = st.u.at(exh.anchor);
        st.min_u = *std::min_element(st.u.values().begin(), st.u.values().end());
        st.max_u = *std::max_element(st.u.values().begin(), st.u.values().end());
        run.max_bound_violation = std::max(run.max_bound_violation, st.max_u - run.sup_s);

        if (n > 0) {
            const ExhaustionStage& prev = run.stages.back();
            const ScalarField r = restrict(st.u, prev.grid);
            double worst = -std::numeric_limits<double>::infinity();
            std::size_t worst_node = 0;
            for (std::size_t k = 0; k < r.size(); ++k)
                if (r[k] - prev.u[k] > worst) {
                    worst = r[k] - prev.u[k];
                    worst_node = k;
                }
            run.max_monotone_violation = std::max(run.max_monotone_violation, worst);
            if (worst > opt.kappa * tol)
                throw SolveError(where + ": monotone decrease violated by " + std::to_string(worst) +
                                 " at node " + std::to_string(worst_node) + " of stage " + std::to_string(n - 1));
        }
        run.anchor_values.push_back(st.anchor_value);
        run.tail_metrics.push_back(st.identity_residual);
        run.stages.push_back(std::move(st));
    }
    run.limit_estimate = run.stages.back().u;
    run.verdict = classify_trend(run.anchor_values, run.sup_s, opt);
    return run;
}

struct MajorantResult {
    std::vector<ScalarField> h;   // h_n = H_{D_n} (w_n on the boundary)
    ScalarField majorant;         // h_N
    double max_decrease = 0.0;    // max over stages of h_{n-1} - restrict(h_n)
    bool increasing = true;       // max_decrease <= kappa * tol
};

/// Harmonic extensions of a family w_n (one field per stage) and the check
/// that they increase with n on shared nodes.
inline MajorantResult harmonic_majorant(const Exhaustion& exh, const EllipticCoefficients& coeffs,
                                        const std::vector<ScalarField>& w, double tol, double kappa = 10.0) {
    if (w.size() != exh.stages.size())
        throw ValidationError("harmonic_majorant: need one field per stage (" + std::to_string(exh.stages.size()) + ")");
    MajorantResult out;
    for (std::size_t n = 0; n < w.size(); ++n) {
        require_same_grid(w[n], exh.stages[n], "harmonic_majorant");
        ScalarField h = harmonic_extension(assemble(exh.stages[n], coeffs), w[n]);
        if (n > 0) {
            const ScalarField r = restrict(h, exh.stages[n - 1]);
            for (std::size_t k = 0; k < r.size(); ++k) out.max_decrease = std::max(out.max_decrease, out.h.back()[k] - r[k]);
        }
        out.h.push_back(std::move(h));
    }
    out.increasing = out.max_decrease <= kappa * tol;
    out.majorant = out.h.back();
    return out;
}

inline MajorantResult harmonic_majorant(const Exhaustion& exh, const EllipticCoefficients& coeffs,
                                        const std::function<double(const Point&)>& w, double tol, double kappa = 10.0) {
    std::vector<ScalarField> fields;
    for (const Grid& g : exh.stages) fields.push_back(ScalarField::sample(g, w));
    return harmonic_majorant(exh, coeffs, fields, tol, kappa);
}

struct CorrespondenceReport {
    double harmonic_residual = 0.0;        // max interior |L h|
    double reconstruction_residual = 0.0;  // ||u + G_D phi(u) - h||
    ScalarField u;
    ScalarField u_shifted;                 // from h + bump
    double min_order_gap = 0.0;            // min (u_shifted - u)
    double anchor_gap = 0.0;               // (u_shifted - u) at the anchor
    bool order_holds = false;
    bool distinct = false;
    bool pass = false;
};

struct CorrespondenceOptions {
    SolveOptions solve;
    double kappa = 10.0;
    double harmonic_tol = 1e-8;
    double bump = 1.0;                     // the shift h' = h + H_D(bump)
    std::optional<Point> anchor;           // default: interior node nearest the centre
};

/// h -> u with u + G_D phi(., u) = h, plus the injectivity probe h' = h + H_D(bump).
inline CorrespondenceReport correspondence_roundtrip(const Grid& grid, const EllipticCoefficients& coeffs,
                                                     const Nonlinearity& phi, const ScalarField& h,
                                                     const CorrespondenceOptions& opt = {}) {
    require_same_grid(h, grid, "correspondence_roundtrip");
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (!(h[k] >= 0.0)) throw ValidationError("correspondence_roundtrip: h must be >= 0 (node " + std::to_string(k) + ")");
    const DiscreteOperator op = assemble(grid, coeffs);
    const GreenOperator gop(op);
    CorrespondenceReport rep;
    const ScalarField lh = apply(op, h);
    for (std::size_t k : grid.interior_nodes()) rep.harmonic_residual = std::max(rep.harmonic_residual, std::abs(lh[k]));
    if (rep.harmonic_residual > opt.harmonic_tol)
        throw ValidationError("correspondence_roundtrip: h is not L-harmonic (|L h| = " +
                              std::to_string(rep.harmonic_residual) + ")");

    const double tol = opt.solve.tol;
    SolveResult a = solve_U(gop, h, phi, opt.solve);
    if (a.report.status != SolveStatus::converged) throw ConvergenceError("correspondence_roundtrip: solve failed");
    const ScalarField g = green_potential(gop, phi_field(phi, a.u));
    for (std::size_t k : grid.interior_nodes())
        rep.reconstruction_residual = std::max(rep.reconstruction_residual, std::abs(a.u[k] + g[k] - h[k]));

    ScalarField shifted = harmonic_extension(gop, ScalarField(grid, opt.bump));
    for (std::size_t k = 0; k < grid.size(); ++k) shifted[k] += h[k];
    SolveResult b = solve_U(gop, shifted, phi, opt.solve);
    if (b.report.status != SolveStatus::converged) throw ConvergenceError("correspondence_roundtrip: shifted solve failed");

    const Point centre = [&] {
        Point c{0.5 * (grid.extent(0).lo + grid.extent(0).hi), 0.0};
        if (grid.dim() == 2) c.y = 0.5 * (grid.extent(1).lo + grid.extent(1).hi);
        return c;
    }();
    const std::size_t anchor = grid.nearest_node(opt.anchor.value_or(centre));
    rep.min_order_gap = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < grid.size(); ++k) rep.min_order_gap = std::min(rep.min_order_gap, b.u[k] - a.u[k]);
    rep.anchor_gap = b.u[anchor] - a.u[anchor];
    rep.order_holds = rep.min_order_gap >= -2.0 * tol;
    rep.distinct = rep.anchor_gap > 2.0 * tol;
    rep.pass = rep.reconstruction_residual <= opt.kappa * tol && rep.order_holds && rep.distinct;
    rep.u = std::move(a.u);
    rep.u_shifted = std::move(b.u);
    return rep;
}

enum class SplitMode { domination, sum };

struct SplitReport {
    SplitMode mode = SplitMode::domination;
    ExhaustionRun run1, run2;
    std::optional<ExhaustionRun> run_sum;
    double max_violation = 0.0;   // domination: max(u2 - u1); sum: max(u_sum - min(u1, u2))
    bool pass = false;
    Triviality sum_verdict = Triviality::undecided;
};

/// Splitting experiments: under domination (phi1 <= phi2) the phi1 run
/// dominates the phi2 run; under sum the phi1 + phi2 run lies below both.
inline SplitReport split_experiment(const Exhaustion& exh, const EllipticCoefficients& coeffs, const Nonlinearity& phi1,
                                    const Nonlinearity& phi2, const Supersolution& s, SplitMode mode,
                                    const ExhaustionOptions& opt = {}, int samples = 16) {
    const double tol = opt.solve.tol;
    SplitReport rep;
    rep.mode = mode;
    if (mode == SplitMode::domination) {
        double t_max = 0.0;
        for (const Grid& g : exh.stages)
            for (std::size_t k = 0; k < g.size(); ++k) t_max = std::max(t_max, s.fn(g.position(k)));
        if (!(t_max > 0.0)) t_max = 1.0;
        const Grid& g = exh.stages.back();
        for (std::size_t k : g.interior_nodes()) {
            const Point p = g.position(k);
            for (int i = 0; i <= samples; ++i) {
                const double t = t_max * i / samples;
                if (phi1(p, t) > phi2(p, t))
                    throw ValidationError("split_experiment: phi1 > phi2 at node " + std::to_string(k) +
                                          ", t = " + std::to_string(t));
            }
        }
    }
    rep.run1 = run_exhaustion(exh, coeffs, phi1, s, opt);
    rep.run2 = run_exhaustion(exh, coeffs, phi2, s, opt);
    rep.max_violation = -std::numeric_limits<double>::infinity();
    if (mode == SplitMode::domination) {
        for (std::size_t n = 0; n < exh.stages.size(); ++n) {
            const auto& u1 = rep.run1.stages[n].u;
            const auto& u2 = rep.run2.stages[n].u;
            for (std::size_t k = 0; k < u1.size(); ++k) rep.max_violation = std::max(rep.max_violation, u2[k] - u1[k]);
        }
    } else {
        rep.run_sum = run_exhaustion(exh, coeffs, phi1 + phi2, s, opt);
        for (std::size_t n = 0; n < exh.stages.size(); ++n) {
            const auto& u1 = rep.run1.stages[n].u;
            const auto& u2 = rep.run2.stages[n].u;
            const auto& us = rep.run_sum->stages[n].u;
            for (std::size_t k = 0; k < u1.size(); ++k)
                rep.max_violation = std::max(rep.max_violation, us[k] - std::min(u1[k], u2[k]));
        }
        rep.sum_verdict = rep.run_sum->verdict;
    }
    rep.pass = rep.max_violation <= opt.kappa * tol;
    return rep;
}

inline const char* to_string(SplitMode m) { return m == SplitMode::domination ? "domination" : "sum"; }

} // namespace semilinear
