#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "semilinear/error.hpp"
#include "semilinear/expr.hpp"
#include "semilinear/grid.hpp"

namespace semilinear {

using SparseMatrix = Eigen::SparseMatrix<double>;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using CoefficientFn = std::function<double(const Point&)>;

enum class ZeroOrderMode { c_nonpos, c_zero };

inline CoefficientFn constant_coefficient(double v) {
    return [v](const Point&) { return v; };
}

inline CoefficientFn expr_coefficient(Expr e) {
    return [e = std::move(e)](const Point& p) { return e.eval(Bindings{p.x, p.y, std::nullopt}); };
}

/// Coefficient fields of L = sum a_ij d_i d_j + sum b_i d_i + c.
/// In 1D only a11, b1 and c are read.
struct EllipticCoefficients {
    CoefficientFn a11 = constant_coefficient(1.0);
    CoefficientFn a12 = constant_coefficient(0.0);
    CoefficientFn a22 = constant_coefficient(1.0);
    CoefficientFn b1 = constant_coefficient(0.0);
    CoefficientFn b2 = constant_coefficient(0.0);
    CoefficientFn c = constant_coefficient(0.0);
    ZeroOrderMode zero_order_mode = ZeroOrderMode::c_zero;
    double ellipticity_eps = 1e-10;

    static EllipticCoefficients laplacian() { return {}; }
};

/// L discretized on the interior nodes of a Grid.
///
/// For interior values u_I and boundary values u_B, (L u)_I = A u_I + B u_B.
/// `full` holds both blocks with columns indexed by global node number.
struct DiscreteOperator {
    Grid grid;
    SparseMatrix interior;       // A: interior x interior
    SparseRowMatrix coupling;    // B: interior x all nodes, nonzero only in boundary columns
    SparseRowMatrix full;        // [A | B] by global node index
    ZeroOrderMode zero_order_mode = ZeroOrderMode::c_zero;
    bool m_matrix = false;
    std::string m_matrix_note;   // first violated sign condition, empty when m_matrix
};

/// Assemble L on `grid`: central second differences (4-point cross stencil
/// for a12), first-order upwind differences for b chosen per node by the
/// sign of b_i.
///
/// Throws ValidationError on a non-elliptic node (reporting the worst one),
/// on c > 0, or on c != 0 in c_zero mode. A cross term that breaks the sign
/// structure does not throw; the result then has m_matrix == false.
inline DiscreteOperator assemble(const Grid& grid, const EllipticCoefficients& coeffs) {
    const int d = grid.dim();
    const double hx = grid.spacing(0);
    const double hy = grid.spacing(1);
    const std::size_t n_int = grid.interior_count();

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(n_int * (d == 2 ? 9 : 3));

    double worst_eig = std::numeric_limits<double>::infinity();
    std::size_t worst_eig_node = 0;
    double worst_c = -std::numeric_limits<double>::infinity();
    std::size_t worst_c_node = 0;
    std::optional<std::size_t> nonzero_c_node;

    for (std::size_t row = 0; row < n_int; ++row) {
        const std::size_t k = grid.interior_nodes()[row];
        const Point p = grid.position(k);
        const auto [i, j] = grid.ij(k);
        const auto r = static_cast<int>(row);
        auto put = [&](std::size_t ii, std::size_t jj, double v) {
            if (v != 0.0) trips.emplace_back(r, static_cast<int>(grid.index(ii, jj)), v);
        };

        const double a11 = coeffs.a11(p);
        const double a12 = d == 2 ? coeffs.a12(p) : 0.0;
        const double a22 = d == 2 ? coeffs.a22(p) : 0.0;
        const double b1 = coeffs.b1(p);
        const double b2 = d == 2 ? coeffs.b2(p) : 0.0;
        const double c = coeffs.c(p);
        for (double v : {a11, a12, a22, b1, b2, c})
            if (!std::isfinite(v))
                throw ValidationError("operator: non-finite coefficient at node " + std::to_string(k));

        // smallest eigenvalue of the symmetric matrix a(x)
        double eig = a11;
        if (d == 2) {
            const double mean = 0.5 * (a11 + a22);
            const double rad = std::hypot(0.5 * (a11 - a22), a12);
            eig = mean - rad;
        }
        if (eig < worst_eig) {
            worst_eig = eig;
            worst_eig_node = k;
        }
        if (c != 0.0 && !nonzero_c_node) nonzero_c_node = k;
        if (c > worst_c) {
            worst_c = c;
            worst_c_node = k;
        }

        double diag = c;
        // x direction
        {
            const double cx = a11 / (hx * hx);
            double west = cx, east = cx;
            diag -= 2.0 * cx;
            if (b1 > 0.0) {
                east += b1 / hx;
                diag -= b1 / hx;
            } else if (b1 < 0.0) {
                west -= b1 / hx;
                diag += b1 / hx;
            }
            put(i - 1, j, west);
            put(i + 1, j, east);
        }
        if (d == 2) {
            const double cy = a22 / (hy * hy);
            double south = cy, north = cy;
            diag -= 2.0 * cy;
            if (b2 > 0.0) {
                north += b2 / hy;
                diag -= b2 / hy;
            } else if (b2 < 0.0) {
                south -= b2 / hy;
                diag += b2 / hy;
            }
            put(i, j - 1, south);
            put(i, j + 1, north);
            if (a12 != 0.0) {
                // (a12 + a21) u_xy with the 4-point cross stencil
                const double cross = 2.0 * a12 / (4.0 * hx * hy);
                put(i + 1, j + 1, cross);
                put(i - 1, j - 1, cross);
                put(i + 1, j - 1, -cross);
                put(i - 1, j + 1, -cross);
            }
        }
        put(i, j, diag);
    }

    if (!(worst_eig > coeffs.ellipticity_eps)) {
        const Point p = grid.position(worst_eig_node);
        throw ValidationError("operator: ellipticity violated, min eigenvalue " + std::to_string(worst_eig) +
                              " at node " + std::to_string(worst_eig_node) + " (" + std::to_string(p.x) + ", " +
                              std::to_string(p.y) + ")");
    }
    if (worst_c > 0.0)
        throw ValidationError("operator: c > 0 at node " + std::to_string(worst_c_node) +
                              " (c = " + std::to_string(worst_c) + ")");
    if (coeffs.zero_order_mode == ZeroOrderMode::c_zero && nonzero_c_node)
        throw ValidationError("operator: zero_order_mode c_zero but c != 0 at node " +
                              std::to_string(*nonzero_c_node));

    DiscreteOperator op;
    op.grid = grid;
    op.zero_order_mode = coeffs.zero_order_mode;
    op.full.resize(static_cast<int>(n_int), static_cast<int>(grid.size()));
    op.full.setFromTriplets(trips.begin(), trips.end());
    op.full.makeCompressed();

    std::vector<Eigen::Triplet<double>> a_trips, b_trips;
    a_trips.reserve(trips.size());
    for (const auto& t : trips) {
        const auto col = static_cast<std::size_t>(t.col());
        const std::ptrdiff_t u = grid.unknown_index(col);
        if (u >= 0)
            a_trips.emplace_back(t.row(), static_cast<int>(u), t.value());
        else
            b_trips.emplace_back(t.row(), t.col(), t.value());
    }
    op.interior.resize(static_cast<int>(n_int), static_cast<int>(n_int));
    op.interior.setFromTriplets(a_trips.begin(), a_trips.end());
    op.interior.makeCompressed();
    op.coupling.resize(static_cast<int>(n_int), static_cast<int>(grid.size()));
    op.coupling.setFromTriplets(b_trips.begin(), b_trips.end());
    op.coupling.makeCompressed();

    // Sign structure of -[A | B]: positive diagonal, nonpositive
    // off-diagonals, nonnegative row sums.
    op.m_matrix = true;
    for (int row = 0; row < op.full.outerSize() && op.m_matrix; ++row) {
        const std::size_t k = grid.interior_nodes()[static_cast<std::size_t>(row)];
        double sum = 0.0, diag = 0.0, scale = 0.0;
        for (SparseRowMatrix::InnerIterator it(op.full, row); it; ++it) {
            sum += it.value();
            scale = std::max(scale, std::abs(it.value()));
            if (static_cast<std::size_t>(it.col()) == k) {
                diag = it.value();
            } else if (it.value() < 0.0) {
                op.m_matrix = false;
                op.m_matrix_note = "negative off-diagonal of L at node " + std::to_string(k);
            }
        }
        if (op.m_matrix && !(diag < 0.0)) {
            op.m_matrix = false;
            op.m_matrix_note = "nonnegative diagonal of L at node " + std::to_string(k);
        }
        if (op.m_matrix && sum > 1e-12 * scale) {
            op.m_matrix = false;
            op.m_matrix_note = "positive row sum of L at node " + std::to_string(k);
        }
    }
    return op;
}

/// (L u) at interior nodes; boundary entries of the result are zero.
inline ScalarField apply(const DiscreteOperator& op, const ScalarField& u) {
    require_same_grid(u, op.grid, "apply");
    const Eigen::Map<const Eigen::VectorXd> uv(u.values().data(), static_cast<Eigen::Index>(u.size()));
    const Eigen::VectorXd lu = op.full * uv;
    ScalarField out(op.grid);
    const auto& interior = op.grid.interior_nodes();
    for (std::size_t r = 0; r < interior.size(); ++r) out[interior[r]] = lu[static_cast<Eigen::Index>(r)];
    return out;
}

/// As apply(op, u) with the boundary values of u replaced by those of `boundary`.
inline ScalarField apply(const DiscreteOperator& op, const ScalarField& u, const ScalarField& boundary) {
    require_same_grid(boundary, op.grid, "apply");
    ScalarField merged = u;
    for (std::size_t k : op.grid.boundary_nodes()) merged[k] = boundary[k];
    return apply(op, merged);
}

struct SuperharmonicReport {
    double max_residual = -std::numeric_limits<double>::infinity();  // max over interior of L s
    std::size_t worst_node = 0;
    double min_value = std::numeric_limits<double>::infinity();
    bool nonnegative = true;
    bool pass = false;
};

/// Discrete L-superharmonicity test: pass iff max_interior (L s) <= tol.
/// `s` carries its own boundary values.
inline SuperharmonicReport check_superharmonic(const DiscreteOperator& op, const ScalarField& s, double tol) {
    const ScalarField ls = apply(op, s);
    SuperharmonicReport rep;
    for (std::size_t k : op.grid.interior_nodes()) {
        if (ls[k] > rep.max_residual) {
            rep.max_residual = ls[k];
            rep.worst_node = k;
        }
    }
    for (double v : s.values()) rep.min_value = std::min(rep.min_value, v);
    rep.nonnegative = rep.min_value >= 0.0;
    rep.pass = rep.max_residual <= tol;
    return rep;
}

} // namespace semilinear
