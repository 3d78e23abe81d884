#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "semilinear/error.hpp"

namespace semilinear {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }
    bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Relative tolerance used when deciding whether a spacing divides an axis.
inline constexpr double kCommensurateTol = 1e-9;

/// Rectilinear lattice over an axis-aligned box in dimension 1 or 2.
///
/// Nodes are numbered x-fastest: k = i + nx * j. Nodes strictly inside the
/// box are interior; nodes on the faces (corners included) are boundary.
/// A Grid is immutable; copies share the node tables.
class Grid {
public:
    Grid() = default;

    int dim() const { return dim_; }
    const Interval& extent(int axis) const { return bbox_[axis]; }
    double spacing(int axis) const { return spacing_[axis]; }
    std::size_t count(int axis) const { return counts_[axis]; }
    std::size_t size() const { return counts_[0] * counts_[1]; }

    std::size_t index(std::size_t i, std::size_t j = 0) const { return i + counts_[0] * j; }
    std::pair<std::size_t, std::size_t> ij(std::size_t k) const {
        return {k % counts_[0], k / counts_[0]};
    }

    Point position(std::size_t k) const {
        auto [i, j] = ij(k);
        Point p;
        p.x = bbox_[0].lo + static_cast<double>(i) * spacing_[0];
        p.y = dim_ == 2 ? bbox_[1].lo + static_cast<double>(j) * spacing_[1] : 0.0;
        return p;
    }

    bool is_interior(std::size_t k) const { return tables_->unknown[k] >= 0; }

    /// Position of node k in the interior unknown vector, or -1 for boundary nodes.
    std::ptrdiff_t unknown_index(std::size_t k) const { return tables_->unknown[k]; }

    const std::vector<std::size_t>& interior_nodes() const { return tables_->interior; }
    const std::vector<std::size_t>& boundary_nodes() const { return tables_->boundary; }
    std::size_t interior_count() const { return tables_->interior.size(); }

    /// h^d, the volume carried by one node.
    double cell_volume() const { return dim_ == 2 ? spacing_[0] * spacing_[1] : spacing_[0]; }

    /// Node nearest to p (clamped to the lattice).
    std::size_t nearest_node(const Point& p) const {
        auto snap = [&](double v, int axis) {
            double r = std::round((v - bbox_[axis].lo) / spacing_[axis]);
            r = std::clamp(r, 0.0, static_cast<double>(counts_[axis] - 1));
            return static_cast<std::size_t>(r);
        };
        return index(snap(p.x, 0), dim_ == 2 ? snap(p.y, 1) : 0);
    }

    /// True when p coincides with a lattice node (within rounding).
    bool is_node(const Point& p) const {
        const Point q = position(nearest_node(p));
        const double tol = 1e-9 * std::max(spacing_[0], spacing_[1]);
        return std::abs(q.x - p.x) <= tol && (dim_ == 1 || std::abs(q.y - p.y) <= tol);
    }

    bool contains(const Point& p) const {
        return bbox_[0].contains(p.x) && (dim_ == 1 || bbox_[1].contains(p.y));
    }

    friend bool operator==(const Grid& a, const Grid& b) {
        if (a.dim_ != b.dim_ || a.counts_ != b.counts_) return false;
        for (int ax = 0; ax < a.dim_; ++ax) {
            const double tol = 1e-12 * std::max(1.0, std::abs(a.spacing_[ax]));
            if (std::abs(a.bbox_[ax].lo - b.bbox_[ax].lo) > tol ||
                std::abs(a.spacing_[ax] - b.spacing_[ax]) > tol)
                return false;
        }
        return true;
    }

    std::string describe() const {
        std::string s = std::to_string(dim_) + "D grid " + std::to_string(counts_[0]);
        if (dim_ == 2) s += "x" + std::to_string(counts_[1]);
        return s + " nodes";
    }

private:
    struct Tables {
        std::vector<std::ptrdiff_t> unknown;
        std::vector<std::size_t> interior;
        std::vector<std::size_t> boundary;
    };

    friend Grid build_box_grid(std::span<const Interval>, std::span<const double>);

    int dim_ = 0;
    std::array<Interval, 2> bbox_{};
    std::array<double, 2> spacing_{1.0, 1.0};
    std::array<std::size_t, 2> counts_{0, 1};
    std::shared_ptr<const Tables> tables_;
};

/// Lattice over bbox with the given per-axis spacing (a single value is
/// broadcast to every axis).
inline Grid build_box_grid(std::span<const Interval> bbox, std::span<const double> spacing) {
    if (bbox.size() != 1 && bbox.size() != 2)
        throw ValidationError("grid: dim must be 1 or 2, got " + std::to_string(bbox.size()));
    if (spacing.size() != 1 && spacing.size() != bbox.size())
        throw ValidationError("grid: spacing needs 1 or dim entries");

    Grid g;
    g.dim_ = static_cast<int>(bbox.size());
    for (int ax = 0; ax < g.dim_; ++ax) {
        const Interval iv = bbox[ax];
        const double h = spacing.size() == 1 ? spacing[0] : spacing[ax];
        if (!(iv.hi > iv.lo) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi))
            throw ValidationError("grid: degenerate bbox on axis " + std::to_string(ax));
        if (!(h > 0.0) || !std::isfinite(h))
            throw ValidationError("grid: spacing must be positive on axis " + std::to_string(ax));
        const double cells = iv.length() / h;
        const double rounded = std::round(cells);
        if (std::abs(cells - rounded) > kCommensurateTol * std::max(1.0, rounded))
            throw ValidationError("grid: spacing " + std::to_string(h) +
                                  " does not divide axis " + std::to_string(ax) + " of length " +
                                  std::to_string(iv.length()));
        if (rounded < 2.0)
            throw ValidationError("grid: fewer than 3 nodes on axis " + std::to_string(ax));
        g.bbox_[ax] = iv;
        g.counts_[ax] = static_cast<std::size_t>(rounded) + 1;
        g.spacing_[ax] = iv.length() / rounded;
    }

    auto tables = std::make_shared<Grid::Tables>();
    const std::size_t nx = g.counts_[0], ny = g.counts_[1];
    tables->unknown.assign(nx * ny, -1);
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t k = i + nx * j;
            const bool inside_x = i > 0 && i + 1 < nx;
            const bool inside_y = g.dim_ == 1 || (j > 0 && j + 1 < ny);
            if (inside_x && inside_y) {
                tables->unknown[k] = static_cast<std::ptrdiff_t>(tables->interior.size());
                tables->interior.push_back(k);
            } else {
                tables->boundary.push_back(k);
            }
        }
    }
    g.tables_ = std::move(tables);
    return g;
}

inline Grid build_box_grid(std::span<const Interval> bbox, double spacing) {
    const double s[1] = {spacing};
    return build_box_grid(bbox, std::span<const double>(s, 1));
}

inline Grid build_box_grid(std::initializer_list<Interval> bbox, double spacing) {
    return build_box_grid(std::span<const Interval>(bbox.begin(), bbox.size()), spacing);
}

/// Node-indexed real values on a Grid (interior and boundary nodes alike).
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(Grid grid, double value = 0.0)
        : grid_(std::move(grid)), values_(grid_.size(), value) {}
    ScalarField(Grid grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_.size())
            throw ValidationError("field: value count does not match grid size");
    }

    template <class F>
    static ScalarField sample(const Grid& grid, F&& f) {
        ScalarField out(grid);
        for (std::size_t k = 0; k < grid.size(); ++k) out.values_[k] = f(grid.position(k));
        return out;
    }

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    double operator[](std::size_t k) const { return values_[k]; }
    double& operator[](std::size_t k) { return values_[k]; }

    double at(const Point& p) const { return values_[grid_.nearest_node(p)]; }

private:
    Grid grid_;
    std::vector<double> values_;
};

inline void require_same_grid(const ScalarField& a, const Grid& g, const char* what) {
    if (!(a.grid() == g)) throw ValidationError(std::string(what) + ": field lives on a different grid");
}

/// max_k |a_k - b_k| over all nodes.
inline double max_abs_diff(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a, b.grid(), "max_abs_diff");
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

inline double sup_norm(const ScalarField& a) {
    double m = 0.0;
    for (double v : a.values()) m = std::max(m, std::abs(v));
    return m;
}

/// Offsets (in nodes) that place `inner` inside `outer`'s lattice. Throws if
/// the lattices do not nest exactly.
inline std::array<std::size_t, 2> lattice_offset(const Grid& inner, const Grid& outer) {
    if (inner.dim() != outer.dim()) throw ValidationError("restrict: dimension mismatch");
    std::array<std::size_t, 2> off{0, 0};
    for (int ax = 0; ax < inner.dim(); ++ax) {
        const double h = outer.spacing(ax);
        if (std::abs(inner.spacing(ax) - h) > 1e-12 * h)
            throw ValidationError("restrict: spacing mismatch on axis " + std::to_string(ax));
        const double shift = (inner.extent(ax).lo - outer.extent(ax).lo) / h;
        const double rounded = std::round(shift);
        if (std::abs(shift - rounded) > kCommensurateTol * std::max(1.0, std::abs(rounded)) || rounded < 0.0)
            throw ValidationError("restrict: lattices do not nest on axis " + std::to_string(ax));
        const auto o = static_cast<std::size_t>(rounded);
        if (o + inner.count(ax) > outer.count(ax))
            throw ValidationError("restrict: inner grid exceeds outer grid on axis " + std::to_string(ax));
        off[ax] = o;
    }
    return off;
}

/// Exact copy of `field` at the nodes of the nested grid `to`.
inline ScalarField restrict(const ScalarField& field, const Grid& to) {
    const Grid& from = field.grid();
    const auto off = lattice_offset(to, from);
    ScalarField out(to);
    for (std::size_t j = 0; j < to.count(1); ++j)
        for (std::size_t i = 0; i < to.count(0); ++i)
            out[to.index(i, j)] = field[from.index(i + off[0], j + off[1])];
    return out;
}

/// Nested stages D_0 ⊂ D_1 ⊂ ... sharing one lattice, with an anchor node
/// present in every stage.
struct Exhaustion {
    std::vector<Grid> stages;
    Point anchor;
};

struct SpacingRule {
    double spacing = 0.0;
};

namespace detail {

inline void check_nested(const std::vector<Grid>& stages) {
    for (std::size_t n = 0; n + 1 < stages.size(); ++n) {
        const Grid& a = stages[n];
        const Grid& b = stages[n + 1];
        lattice_offset(a, b);
        for (int ax = 0; ax < a.dim(); ++ax)
            if (a.extent(ax).lo < b.extent(ax).lo || a.extent(ax).hi > b.extent(ax).hi)
                throw ValidationError("exhaustion: stage " + std::to_string(n) + " not inside stage " +
                                      std::to_string(n + 1));
        if (b.interior_count() <= a.interior_count())
            throw ValidationError("exhaustion: interior node count does not grow at stage " +
                                  std::to_string(n + 1));
    }
}

} // namespace detail

/// Boxes grown geometrically about the centre of `base_bbox`. The anchor is
/// the stage-0 node nearest to the centre.
inline Exhaustion build_exhaustion(std::span<const Interval> base_bbox, double growth_factor, int n_stages,
                                   SpacingRule rule) {
    if (!(growth_factor > 1.0)) throw ValidationError("exhaustion: growth factor must exceed 1");
    if (n_stages < 2) throw ValidationError("exhaustion: need at least 2 stages");
    Exhaustion exh;
    double scale = 1.0;
    for (int n = 0; n < n_stages; ++n, scale *= growth_factor) {
        std::vector<Interval> box;
        for (const Interval& iv : base_bbox) {
            const double mid = 0.5 * (iv.lo + iv.hi);
            const double half = 0.5 * iv.length() * scale;
            box.push_back({mid - half, mid + half});
        }
        try {
            exh.stages.push_back(build_box_grid(box, rule.spacing));
        } catch (const ValidationError& e) {
            throw ValidationError("exhaustion: stage " + std::to_string(n) + ": " + e.what());
        }
    }
    detail::check_nested(exh.stages);
    const Grid& g0 = exh.stages.front();
    Point centre{0.5 * (g0.extent(0).lo + g0.extent(0).hi),
                 g0.dim() == 2 ? 0.5 * (g0.extent(1).lo + g0.extent(1).hi) : 0.0};
    exh.anchor = g0.position(g0.nearest_node(centre));
    return exh;
}

inline Exhaustion build_exhaustion(std::initializer_list<Interval> base_bbox, double growth_factor, int n_stages,
                                   SpacingRule rule) {
    return build_exhaustion(std::span<const Interval>(base_bbox.begin(), base_bbox.size()), growth_factor,
                            n_stages, rule);
}

/// Truncations [-R_n, R_n] x [delta, R_n] of the upper half-plane with
/// R_n = base_radius * growth_factor^n. `anchor` must be an interior node of
/// stage 0.
inline Exhaustion build_halfplane_exhaustion(double base_radius, double growth_factor, int n_stages,
                                             SpacingRule rule, double delta, Point anchor) {
    if (!(growth_factor > 1.0)) throw ValidationError("exhaustion: growth factor must exceed 1");
    if (n_stages < 2) throw ValidationError("exhaustion: need at least 2 stages");
    if (!(delta > 0.0)) throw ValidationError("exhaustion: delta must be positive");
    if (!(base_radius > delta)) throw ValidationError("exhaustion: base radius must exceed delta");
    Exhaustion exh;
    double radius = base_radius;
    for (int n = 0; n < n_stages; ++n, radius *= growth_factor) {
        const Interval box[2] = {{-radius, radius}, {delta, radius}};
        try {
            exh.stages.push_back(build_box_grid(box, rule.spacing));
        } catch (const ValidationError& e) {
            throw ValidationError("exhaustion: stage " + std::to_string(n) + ": " + e.what());
        }
    }
    detail::check_nested(exh.stages);
    const Grid& g0 = exh.stages.front();
    if (!g0.is_node(anchor) || !g0.is_interior(g0.nearest_node(anchor)))
        throw ValidationError("exhaustion: anchor is not an interior node of stage 0");
    exh.anchor = g0.position(g0.nearest_node(anchor));
    return exh;
}

} // namespace semilinear
