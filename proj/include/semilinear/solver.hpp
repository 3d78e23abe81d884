#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include "semilinear/error.hpp"
#include "semilinear/grid.hpp"
#include "semilinear/nonlinearity.hpp"
#include "semilinear/operator.hpp"
#include "semilinear/potential.hpp"

namespace semilinear {

enum class Scheme { sandwich, damped_picard, newton };
enum class SolveStatus { converged, max_iter, diverged };

inline const char* to_string(Scheme s) {
    switch (s) {
    case Scheme::sandwich: return "sandwich";
    case Scheme::damped_picard: return "damped_picard";
    case Scheme::newton: return "newton";
    }
    return "?";
}

inline const char* to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::diverged: return "diverged";
    }
    return "?";
}

inline Scheme parse_scheme(const std::string& s) {
    if (s == "sandwich") return Scheme::sandwich;
    if (s == "damped_picard") return Scheme::damped_picard;
    if (s == "newton") return Scheme::newton;
    throw ValidationError("unknown scheme '" + s + "' (expected sandwich, damped_picard or newton)");
}

struct SolveOptions {
    Scheme scheme = Scheme::sandwich;
    double tol = 1e-10;        // sup norm of u + G_D phi(., u) - H_D f
    int max_iter = 200;
    double omega = 0.5;        // damped_picard relaxation
    int line_search_steps = 30;
};

struct SolveReport {
    int iterations = 0;
    std::vector<double> residual_history;      // identity residual per iteration
    std::vector<double> sandwich_gap_history;  // |u^k - u^{k+1}|, sandwich only
    SolveStatus status = SolveStatus::max_iter;
    double final_identity_residual = std::numeric_limits<double>::infinity();
};

struct SolveResult {
    ScalarField u;
    SolveReport report;
    // Last even/odd sandwich iterates; when the scheme stalls these are a
    // verified super/subsolution pair bracketing the fixed point.
    ScalarField upper;
    ScalarField lower;
};

/// phi(x, u(x)) at interior nodes, zero on the boundary.
inline ScalarField phi_field(const Nonlinearity& phi, const ScalarField& u) {
    ScalarField out(u.grid());
    for (std::size_t k : u.grid().interior_nodes()) out[k] = phi(u.grid().position(k), u[k]);
    return out;
}

/// T u = H_D f - G_D phi(., u) with H_D f supplied.
inline ScalarField apply_T_with(const GreenOperator& gop, const ScalarField& hf, const ScalarField& u,
                                const Nonlinearity& phi) {
    require_same_grid(u, gop.grid(), "apply_T");
    for (double v : u.values())
        if (!std::isfinite(v)) throw ValidationError("apply_T: non-finite input field");
    const ScalarField g = green_potential(gop, phi_field(phi, u));
    ScalarField out = hf;
    for (std::size_t k : u.grid().interior_nodes()) out[k] -= g[k];
    return out;
}

/// T u = H_D f - G_D phi(., u); boundary values of the result are f.
inline ScalarField apply_T(const GreenOperator& gop, const ScalarField& f, const ScalarField& u,
                           const Nonlinearity& phi) {
    return apply_T_with(gop, harmonic_extension(gop, f), u, phi);
}

namespace detail {

inline double interior_sup_diff(const ScalarField& a, const ScalarField& b) {
    double m = 0.0;
    for (std::size_t k : a.grid().interior_nodes()) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

inline bool exploded(double gap, const ScalarField& hf) {
    return !std::isfinite(gap) || gap > 1e12 * (1.0 + sup_norm(hf));
}

inline SolveResult solve_sandwich(const GreenOperator& gop, const ScalarField& hf, const Nonlinearity& phi,
                                  const SolveOptions& opt) {
    SolveResult res;
    ScalarField cur = hf;
    res.upper = hf;
    for (int k = 0; k < opt.max_iter; ++k) {
        ScalarField next = apply_T_with(gop, hf, cur, phi);
        const double gap = interior_sup_diff(cur, next);
        res.report.iterations = k + 1;
        res.report.residual_history.push_back(gap);
        res.report.sandwich_gap_history.push_back(gap);
        (k % 2 == 0 ? res.lower : res.upper) = next;
        if (gap <= opt.tol) {
            res.report.status = SolveStatus::converged;
            res.report.final_identity_residual = gap;
            res.u = std::move(cur);
            return res;
        }
        if (exploded(gap, hf)) {
            res.report.status = SolveStatus::diverged;
            res.report.final_identity_residual = gap;
            res.u = std::move(cur);
            return res;
        }
        cur = std::move(next);
    }
    res.report.status = SolveStatus::max_iter;
    res.report.final_identity_residual = res.report.residual_history.back();
    res.u = std::move(cur);
    return res;
}

inline SolveResult solve_picard(const GreenOperator& gop, const ScalarField& hf, const Nonlinearity& phi,
                                const SolveOptions& opt) {
    if (!(opt.omega > 0.0 && opt.omega <= 1.0)) throw ValidationError("solver: omega must lie in (0, 1]");
    SolveResult res;
    ScalarField cur = hf;
    for (int k = 0; k < opt.max_iter; ++k) {
        const ScalarField tu = apply_T_with(gop, hf, cur, phi);
        const double r = interior_sup_diff(cur, tu);
        res.report.iterations = k + 1;
        res.report.residual_history.push_back(r);
        res.report.final_identity_residual = r;
        if (r <= opt.tol) {
            res.report.status = SolveStatus::converged;
            res.u = std::move(cur);
            return res;
        }
        if (exploded(r, hf)) {
            res.report.status = SolveStatus::diverged;
            res.u = std::move(cur);
            return res;
        }
        for (std::size_t n : cur.grid().interior_nodes()) cur[n] = (1.0 - opt.omega) * cur[n] + opt.omega * tu[n];
    }
    res.report.status = SolveStatus::max_iter;
    res.u = std::move(cur);
    return res;
}

// Newton on r(u) = u - T u. The step solves (I + G_D diag(phi'(u))) d = -r,
// which after multiplying by -A reads (-A + diag(phi')) d = L u - phi(u).
inline SolveResult solve_newton(const GreenOperator& gop, const ScalarField& hf, const Nonlinearity& phi,
                                const SolveOptions& opt) {
    const DiscreteOperator& op = gop.op();
    const Grid& grid = op.grid;
    const auto& nodes = grid.interior_nodes();
    const auto n = static_cast<Eigen::Index>(nodes.size());

    SolveResult res;
    ScalarField cur = hf;
    ScalarField tu = apply_T_with(gop, hf, cur, phi);
    double r = interior_sup_diff(cur, tu);

    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    // the diagonal of A is never structurally zero, so -A + diag(phi') shares its pattern
    const SparseMatrix neg_a = -op.interior;
    lu.analyzePattern(neg_a);
    const Eigen::VectorXd bf =
        op.coupling * Eigen::Map<const Eigen::VectorXd>(hf.values().data(), static_cast<Eigen::Index>(hf.size()));

    for (int k = 0; k < opt.max_iter; ++k) {
        res.report.residual_history.push_back(r);
        res.report.final_identity_residual = r;
        if (r <= opt.tol) {
            res.report.status = SolveStatus::converged;
            res.u = std::move(cur);
            return res;
        }
        res.report.iterations = k + 1;

        // residual of the PDE: L u - phi(u)
        const ScalarField lu_field = apply(op, cur);
        Eigen::VectorXd rhs(n);
        SparseMatrix j = neg_a;
        for (Eigen::Index i = 0; i < n; ++i) {
            const std::size_t node = nodes[static_cast<std::size_t>(i)];
            const Point p = grid.position(node);
            rhs[i] = lu_field[node] - phi(p, cur[node]);
            j.coeffRef(i, i) += phi.derivative(p, cur[node]);
        }
        lu.factorize(j);
        if (lu.info() != Eigen::Success) throw SolveError("newton: Jacobian factorization failed");
        const Eigen::VectorXd step = lu.solve(rhs);
        if (!step.allFinite()) throw SolveError("newton: non-finite step");

        // backtracking on the sup-norm identity residual
        double lambda = 1.0;
        ScalarField trial = cur;
        ScalarField trial_tu;
        double trial_r = std::numeric_limits<double>::infinity();
        for (int ls = 0; ls < opt.line_search_steps; ++ls, lambda *= 0.5) {
            for (Eigen::Index i = 0; i < n; ++i) {
                const std::size_t node = nodes[static_cast<std::size_t>(i)];
                // the solution lies in [0, H_D f]; project onto that box
                trial[node] = std::clamp(cur[node] + lambda * step[i], 0.0, std::max(hf[node], 0.0));
            }
            trial_tu = apply_T_with(gop, hf, trial, phi);
            trial_r = interior_sup_diff(trial, trial_tu);
            if (trial_r < (1.0 - 1e-4 * lambda) * r) break;
        }
        if (!(trial_r < r)) {
            // no decrease along the Newton direction (non-Lipschitz phi near a
            // dead core): take a chord step (-A + diag(phi(u)/u)) u' = B f
            SparseMatrix chord = neg_a;
            for (Eigen::Index i = 0; i < n; ++i) {
                const std::size_t node = nodes[static_cast<std::size_t>(i)];
                const double t = std::max(cur[node], std::numeric_limits<double>::min());
                chord.coeffRef(i, i) += phi(grid.position(node), t) / t;
            }
            lu.factorize(chord);
            if (lu.info() != Eigen::Success) throw SolveError("newton: chord factorization failed");
            const Eigen::VectorXd next = lu.solve(bf);
            if (!next.allFinite()) throw SolveError("newton: non-finite chord step");
            for (Eigen::Index i = 0; i < n; ++i) {
                const std::size_t node = nodes[static_cast<std::size_t>(i)];
                trial[node] = std::clamp(next[i], 0.0, std::max(hf[node], 0.0));
            }
            trial_tu = apply_T_with(gop, hf, trial, phi);
            trial_r = interior_sup_diff(trial, trial_tu);
        }
        if (detail::exploded(trial_r, hf)) {
            res.report.status = SolveStatus::diverged;
            res.report.final_identity_residual = trial_r;
            res.u = std::move(cur);
            return res;
        }
        cur = std::move(trial);
        tu = std::move(trial_tu);
        r = trial_r;
    }
    res.report.residual_history.push_back(r);
    res.report.final_identity_residual = r;
    res.report.status = r <= opt.tol ? SolveStatus::converged : SolveStatus::max_iter;
    res.u = std::move(cur);
    return res;
}

} // namespace detail

/// U_D^phi f: the fixed point u = H_D f - G_D phi(., u) with boundary data f >= 0.
///
/// Non-convergence is reported through report.status, not thrown. A phi
/// that turns negative or non-finite during the iteration throws
/// ValidationError.
inline SolveResult solve_U(const GreenOperator& gop, const ScalarField& f, const Nonlinearity& phi,
                           const SolveOptions& opt = {}) {
    require_same_grid(f, gop.grid(), "solve_U");
    bool all_zero = true;
    for (std::size_t k : f.grid().boundary_nodes()) {
        if (!(f[k] >= 0.0)) throw ValidationError("solve_U: boundary data must be >= 0 (node " + std::to_string(k) + ")");
        all_zero = all_zero && f[k] == 0.0;
    }
    if (opt.scheme == Scheme::newton && !phi.differentiable())
        throw ValidationError("solve_U: newton requires phi declared differentiable");
    if (all_zero) {
        SolveResult res;
        res.u = ScalarField(f.grid());
        res.upper = res.u;
        res.lower = res.u;
        res.report.status = SolveStatus::converged;
        res.report.final_identity_residual = 0.0;
        return res;
    }
    const ScalarField hf = harmonic_extension(gop, f);
    switch (opt.scheme) {
    case Scheme::sandwich: return detail::solve_sandwich(gop, hf, phi, opt);
    case Scheme::damped_picard: return detail::solve_picard(gop, hf, phi, opt);
    case Scheme::newton: return detail::solve_newton(gop, hf, phi, opt);
    }
    throw ValidationError("solve_U: unknown scheme");
}

/// sup over interior nodes of |u + G_D phi(., u) - H_D f|.
inline double identity_residual(const GreenOperator& gop, const ScalarField& f, const ScalarField& u,
                                const Nonlinearity& phi) {
    return detail::interior_sup_diff(u, apply_T(gop, f, u, phi));
}

struct ComparisonVerdict {
    bool residual_premise = false;  // L u - phi(u) <= L v - phi(v) + tol in the interior
    bool boundary_premise = false;  // u >= v - tol on the boundary
    bool conclusion = false;        // u >= v - kappa tol in the interior
    bool pass = false;
    double kappa = 1.0;
    double min_gap = std::numeric_limits<double>::infinity();  // min over interior of u - v
    std::size_t worst_node = 0;
};

/// Discrete comparison principle check. kappa = 1 + |G_D 1|_inf bounds how a
/// residual defect of size tol propagates into the interior.
inline ComparisonVerdict check_comparison(const GreenOperator& gop, const ScalarField& u, const ScalarField& v,
                                          const Nonlinearity& phi, double tol) {
    const DiscreteOperator& op = gop.op();
    require_same_grid(u, op.grid, "check_comparison");
    require_same_grid(v, op.grid, "check_comparison");
    ComparisonVerdict out;
    out.kappa = 1.0 + sup_norm(green_potential(gop, ScalarField(op.grid, 1.0)));

    const ScalarField lu = apply(op, u);
    const ScalarField lv = apply(op, v);
    out.residual_premise = true;
    for (std::size_t k : op.grid.interior_nodes()) {
        const Point p = op.grid.position(k);
        const double ru = lu[k] - phi(p, u[k]);
        const double rv = lv[k] - phi(p, v[k]);
        if (ru > rv + tol) out.residual_premise = false;
    }
    out.boundary_premise = true;
    for (std::size_t k : op.grid.boundary_nodes())
        if (u[k] < v[k] - tol) out.boundary_premise = false;
    for (std::size_t k : op.grid.interior_nodes()) {
        const double gap = u[k] - v[k];
        if (gap < out.min_gap) {
            out.min_gap = gap;
            out.worst_node = k;
        }
    }
    out.conclusion = out.min_gap >= -out.kappa * tol;
    out.pass = out.residual_premise && out.boundary_premise && out.conclusion;
    return out;
}

struct MonotoneVerdict {
    bool pass = false;
    double max_violation = 0.0;  // max over nodes of U f - U g (<= tol expected)
    std::size_t worst_node = 0;
    SolveStatus status_f = SolveStatus::max_iter;
    SolveStatus status_g = SolveStatus::max_iter;
};

/// U_D^phi f <= U_D^phi g + tol for boundary data f <= g.
inline MonotoneVerdict check_monotone_in_data(const GreenOperator& gop, const ScalarField& f, const ScalarField& g,
                                              const Nonlinearity& phi, const SolveOptions& opt, double tol) {
    for (std::size_t k : gop.grid().boundary_nodes())
        if (f[k] > g[k]) throw ValidationError("check_monotone_in_data: f > g at boundary node " + std::to_string(k));
    const SolveResult uf = solve_U(gop, f, phi, opt);
    const SolveResult ug = solve_U(gop, g, phi, opt);
    MonotoneVerdict out;
    out.status_f = uf.report.status;
    out.status_g = ug.report.status;
    out.max_violation = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double d = uf.u[k] - ug.u[k];
        if (d > out.max_violation) {
            out.max_violation = d;
            out.worst_node = k;
        }
    }
    out.pass = out.status_f == SolveStatus::converged && out.status_g == SolveStatus::converged &&
               out.max_violation <= tol;
    return out;
}

} // namespace semilinear
