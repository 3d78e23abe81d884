#pragma once

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include "semilinear/error.hpp"
#include "semilinear/grid.hpp"
#include "semilinear/operator.hpp"

namespace semilinear {

/// Factorization of -A for a DiscreteOperator, shared by H_D and G_D.
///
/// G_D psi is the field g with L g = -psi in D and g = 0 on the boundary,
/// so G_D psi >= 0 for psi >= 0 whenever the operator is an M-matrix.
/// Copies share the factorization; solves are serialized internally so the
/// object may be used from several threads.
class GreenOperator {
public:
    GreenOperator() = default;

    explicit GreenOperator(const DiscreteOperator& op) : state_(std::make_shared<State>()) {
        state_->op = op;
        if (op.grid.interior_count() == 0) throw SolveError("green: grid has no interior nodes");
        const SparseMatrix neg = -op.interior;
        state_->lu.analyzePattern(neg);
        state_->lu.factorize(neg);
        if (state_->lu.info() != Eigen::Success)
            throw SolveError("green: factorization of -L failed (singular system): " + state_->lu.lastErrorMessage());
    }

    const DiscreteOperator& op() const { return state_->op; }
    const Grid& grid() const { return state_->op.grid; }

    /// Solve (-A) x = rhs on the interior unknowns.
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
        Eigen::VectorXd x;
        {
            std::lock_guard lock(state_->mutex);
            x = state_->lu.solve(rhs);
        }
        if (!x.allFinite()) throw SolveError("green: solve produced non-finite values");
        return x;
    }

private:
    struct State {
        DiscreteOperator op;
        Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
        std::mutex mutex;
    };
    std::shared_ptr<State> state_;
};

namespace detail {

inline Eigen::VectorXd interior_values(const ScalarField& f) {
    const auto& nodes = f.grid().interior_nodes();
    Eigen::VectorXd v(static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t r = 0; r < nodes.size(); ++r) v[static_cast<Eigen::Index>(r)] = f[nodes[r]];
    return v;
}

inline void scatter_interior(const Eigen::VectorXd& v, ScalarField& out) {
    const auto& nodes = out.grid().interior_nodes();
    for (std::size_t r = 0; r < nodes.size(); ++r) out[nodes[r]] = v[static_cast<Eigen::Index>(r)];
}

} // namespace detail

/// H_D f: L h = 0 in the interior, h = f on boundary nodes. Interior values
/// of `f` are ignored.
inline ScalarField harmonic_extension(const GreenOperator& gop, const ScalarField& f) {
    require_same_grid(f, gop.grid(), "harmonic_extension");
    for (std::size_t k : f.grid().boundary_nodes())
        if (!std::isfinite(f[k])) throw ValidationError("harmonic_extension: non-finite boundary value at node " + std::to_string(k));
    const Eigen::Map<const Eigen::VectorXd> fv(f.values().data(), static_cast<Eigen::Index>(f.size()));
    // A h_I + B f_B = 0  <=>  (-A) h_I = B f_B
    const Eigen::VectorXd rhs = gop.op().coupling * fv;
    ScalarField h(f.grid());
    for (std::size_t k : f.grid().boundary_nodes()) h[k] = f[k];
    detail::scatter_interior(gop.solve(rhs), h);
    return h;
}

inline ScalarField harmonic_extension(const DiscreteOperator& op, const ScalarField& f) {
    return harmonic_extension(GreenOperator(op), f);
}

/// G_D psi: L g = -psi at interior nodes, g = 0 on the boundary. Boundary
/// values of `psi` are ignored.
inline ScalarField green_potential(const GreenOperator& gop, const ScalarField& psi) {
    require_same_grid(psi, gop.grid(), "green_potential");
    const Eigen::VectorXd rhs = detail::interior_values(psi);
    if (!rhs.allFinite()) throw ValidationError("green_potential: non-finite source");
    ScalarField g(psi.grid());
    detail::scatter_interior(gop.solve(rhs), g);
    return g;
}

/// Discrete Green function G_D(., y) for the interior node y: the response
/// to a delta of mass 1 (value 1/h^d at y).
inline ScalarField green_column(const GreenOperator& gop, std::size_t node) {
    const Grid& g = gop.grid();
    if (node >= g.size() || !g.is_interior(node))
        throw ValidationError("green_column: node " + std::to_string(node) + " is not interior");
    ScalarField delta(g);
    delta[node] = 1.0 / g.cell_volume();
    return green_potential(gop, delta);
}

/// Green function of d^2/dx^2 on (a, b) with L G(., y) = -delta_y:
/// (x - a)(b - y)/(b - a) for x <= y, symmetric otherwise.
inline double interval_green(double x, double y, double a, double b) {
    if (!(b > a)) throw ValidationError("interval_green: empty interval");
    if (!(x > a && x < b) || !(y > a && y < b))
        throw DomainError("interval_green: arguments must lie strictly inside (a, b)");
    const double lo = std::min(x, y);
    const double hi = std::max(x, y);
    return (lo - a) * (b - hi) / (b - a);
}

/// Green function of the Laplacian on the upper half-plane:
/// (1/2pi) ln(|z - conj(w)| / |z - w|).
inline double halfplane_green(const Point& z, const Point& w) {
    if (!(z.y > 0.0) || !(w.y > 0.0)) throw DomainError("halfplane_green: points must satisfy y > 0");
    const double dx = z.x - w.x;
    const double near = dx * dx + (z.y - w.y) * (z.y - w.y);
    if (near == 0.0) throw DomainError("halfplane_green: coincident points");
    const double far = dx * dx + (z.y + w.y) * (z.y + w.y);
    return std::log(far / near) / (4.0 * std::numbers::pi);
}

/// Normalizing constant of the half-space Poisson kernel on R^n:
/// Gamma((n+1)/2) / pi^((n+1)/2), so that the kernel has unit mass.
inline double poisson_constant(int n) {
    if (n < 1) throw ValidationError("poisson_constant: n must be >= 1");
    const double half = 0.5 * (n + 1);
    return std::tgamma(half) / std::pow(std::numbers::pi, half);
}

/// P(x, y) = c_n y / (|x|^2 + y^2)^((n+1)/2) with n = x.size().
inline double poisson_kernel_halfspace(std::span<const double> x, double y) {
    if (!(y > 0.0)) throw DomainError("poisson_kernel: y must be positive");
    const int n = static_cast<int>(x.size());
    double r2 = y * y;
    for (double v : x) r2 += v * v;
    return poisson_constant(n) * y / std::pow(r2, 0.5 * (n + 1));
}

inline double poisson_kernel_halfplane(double x, double y) {
    const double xs[1] = {x};
    return poisson_kernel_halfspace(xs, y);
}

struct PoissonExtensionOptions {
    /// Add the exact kernel mass outside [-R, R] weighted by the data's end values.
    bool tail_correction = true;
};

/// Poisson integral h(x, y) = int f(z) P(x - z, y) dz of data sampled on a
/// 1D grid spanning [-R, R], by composite Simpson. With tail correction the
/// data is taken as constant beyond the grid ends. A node carrying a jump
/// should hold the mean of the one-sided limits; with the jump on an even
/// node this integrates piecewise-smooth data exactly up to Simpson error.
inline std::vector<double> poisson_extension(const ScalarField& f, std::span<const Point> points,
                                             const PoissonExtensionOptions& opts = {}) {
    const Grid& g = f.grid();
    if (g.dim() != 1) throw ValidationError("poisson_extension: data must live on a 1D grid");
    const std::size_t n = g.size();
    if ((n - 1) % 2 != 0) throw ValidationError("poisson_extension: Simpson needs an even number of intervals");
    for (double v : f.values())
        if (!std::isfinite(v)) throw ValidationError("poisson_extension: data must be finite");
    const double h = g.spacing(0);
    const double lo = g.extent(0).lo;
    const double hi = g.extent(0).hi;

    std::vector<double> out;
    out.reserve(points.size());
    for (const Point& p : points) {
        if (!(p.y > 0.0)) throw DomainError("poisson_extension: evaluation point must have y > 0");
        double sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double w = (k == 0 || k + 1 == n) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
            const double z = g.position(k).x;
            sum += w * f[k] * poisson_kernel_halfplane(p.x - z, p.y);
        }
        double value = sum * h / 3.0;
        if (opts.tail_correction) {
            // mass of P(p.x - z, p.y) for z < lo and z > hi
            const double left = 0.5 + std::atan((lo - p.x) / p.y) / std::numbers::pi;
            const double right = 0.5 - std::atan((hi - p.x) / p.y) / std::numbers::pi;
            value += f[0] * left + f[n - 1] * right;
        }
        out.push_back(value);
    }
    return out;
}

} // namespace semilinear
