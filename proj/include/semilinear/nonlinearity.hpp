#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "semilinear/error.hpp"
#include "semilinear/expr.hpp"
#include "semilinear/grid.hpp"

namespace semilinear {

using PhiFn = std::function<double(const Point&, double)>;

/// The absorption term phi(x, t) of L u = phi(., u).
///
/// Contract: phi >= 0, t -> phi(x, t) nondecreasing (H2) and phi(x, t) = 0
/// for t <= 0 (H3). Evaluation enforces nonnegativity and finiteness;
/// validate() samples the monotonicity and vanishing conditions.
class Nonlinearity {
public:
    Nonlinearity() : Nonlinearity(zero()) {}
    Nonlinearity(PhiFn phi, bool differentiable, std::string label)
        : phi_(std::move(phi)), differentiable_(differentiable), label_(std::move(label)) {}

    static Nonlinearity zero() {
        return Nonlinearity([](const Point&, double) { return 0.0; }, true, "0");
    }

    static Nonlinearity from_expr(const Expr& e, bool differentiable) {
        return Nonlinearity([e](const Point& p, double t) { return e.eval(p.x, p.y, t); }, differentiable,
                            e.source());
    }

    double operator()(const Point& p, double t) const {
        const double v = phi_(p, t);
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ValidationError("phi: value " + std::to_string(v) + " at (" + std::to_string(p.x) + ", " +
                                  std::to_string(p.y) + "), t = " + std::to_string(t) +
                                  " violates phi >= 0 [" + label_ + "]");
        return v;
    }

    /// Forward difference in t with step 1e-6 (1 + |t|).
    double derivative(const Point& p, double t) const {
        const double step = 1e-6 * (1.0 + std::abs(t));
        return ((*this)(p, t + step) - (*this)(p, t)) / step;
    }

    bool differentiable() const { return differentiable_; }
    const std::string& label() const { return label_; }

    /// phi restricted to the points where `keep` is true (1_A phi).
    Nonlinearity masked(std::function<bool(const Point&)> keep, std::string label) const {
        return Nonlinearity([phi = phi_, keep = std::move(keep)](const Point& p, double t) {
            return keep(p) ? phi(p, t) : 0.0;
        }, differentiable_, std::move(label));
    }

    Nonlinearity scaled(double factor) const {
        if (!(factor >= 0.0)) throw ValidationError("phi: scale factor must be nonnegative");
        return Nonlinearity([phi = phi_, factor](const Point& p, double t) { return factor * phi(p, t); },
                            differentiable_, std::to_string(factor) + "*(" + label_ + ")");
    }

    friend Nonlinearity operator+(const Nonlinearity& a, const Nonlinearity& b) {
        return Nonlinearity([pa = a.phi_, pb = b.phi_](const Point& p, double t) { return pa(p, t) + pb(p, t); },
                            a.differentiable_ && b.differentiable_, "(" + a.label_ + ") + (" + b.label_ + ")");
    }

private:
    PhiFn phi_;
    bool differentiable_ = false;
    std::string label_;
};

struct NonlinearityCheck {
    bool ok = true;
    std::string message;
};

/// Sample (H2), (H3) and nonnegativity on up to `max_nodes` interior nodes
/// of `grid`, with `samples` values of t spread over [0, t_max] and the same
/// number over [-t_max, 0].
inline NonlinearityCheck validate(const Nonlinearity& phi, const Grid& grid, double t_max, int samples = 32,
                                  std::size_t max_nodes = 2048) {
    NonlinearityCheck out;
    if (!(t_max > 0.0)) t_max = 1.0;
    const auto& nodes = grid.interior_nodes();
    const std::size_t stride = std::max<std::size_t>(1, nodes.size() / max_nodes);
    auto fail = [&](std::size_t k, const std::string& what) {
        out.ok = false;
        const Point p = grid.position(k);
        out.message = what + " at node " + std::to_string(k) + " (" + std::to_string(p.x) + ", " +
                      std::to_string(p.y) + ")";
    };
    try {
        for (std::size_t idx = 0; idx < nodes.size() && out.ok; idx += stride) {
            const std::size_t k = nodes[idx];
            const Point p = grid.position(k);
            for (int s = 0; s <= samples && out.ok; ++s) {
                const double t = -t_max * s / samples;
                if (phi(p, t) != 0.0) fail(k, "phi(x, t) != 0 for t = " + std::to_string(t) + " <= 0 (H3)");
            }
            double prev = 0.0;
            for (int s = 1; s <= samples && out.ok; ++s) {
                const double t = t_max * s / samples;
                const double v = phi(p, t);
                if (v < prev) fail(k, "phi(x, .) decreasing near t = " + std::to_string(t) + " (H2)");
                prev = v;
            }
        }
    } catch (const Error& e) {
        out.ok = false;
        out.message = e.what();
    }
    return out;
}

} // namespace semilinear
