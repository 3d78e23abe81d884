#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "semilinear/error.hpp"
#include "semilinear/exhaustion.hpp"
#include "semilinear/grid.hpp"
#include "semilinear/nonlinearity.hpp"
#include "semilinear/operator.hpp"
#include "semilinear/potential.hpp"

namespace semilinear {

using PointPredicate = std::function<bool(const Point&)>;

/// A set A (node mask) with a witness s >= 0, s >= 1 on A, min s <= 1 - margin.
struct ThinnessCertificate {
    Grid grid;
    std::vector<char> set_A;
    ScalarField witness;
    double margin = 0.01;
    std::string label;
};

inline ThinnessCertificate make_certificate(const Grid& grid, const PointPredicate& in_A,
                                            const std::function<double(const Point&)>& s, double margin,
                                            std::string label = {}) {
    if (!(margin > 0.0)) throw ValidationError("certificate: margin must be positive");
    ThinnessCertificate c;
    c.grid = grid;
    c.set_A.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) c.set_A[k] = in_A(grid.position(k)) ? 1 : 0;
    c.witness = ScalarField::sample(grid, s);
    c.margin = margin;
    c.label = std::move(label);
    return c;
}

struct CertificateVerdict {
    bool nonnegative = false;
    bool dominates_on_A = false;      // s >= 1 - tol on A
    bool inf_below_one = false;       // min s <= 1 - margin
    bool superharmonic = false;
    bool pass = false;
    double min_over_grid = 0.0;
    double min_on_A = std::numeric_limits<double>::infinity();
    double superharmonic_residual = 0.0;
    std::size_t worst_node = 0;
    std::size_t nodes_in_A = 0;
    std::string reason;
};

inline CertificateVerdict verify_certificate(const DiscreteOperator& op, const ThinnessCertificate& cert, double tol) {
    require_same_grid(cert.witness, op.grid, "verify_certificate");
    if (cert.set_A.size() != op.grid.size()) throw ValidationError("verify_certificate: mask size mismatch");
    CertificateVerdict v;
    const SuperharmonicReport sr = check_superharmonic(op, cert.witness, tol);
    v.superharmonic_residual = sr.max_residual;
    v.worst_node = sr.worst_node;
    v.superharmonic = sr.pass;
    v.min_over_grid = sr.min_value;
    v.nonnegative = sr.min_value >= 0.0;
    for (std::size_t k = 0; k < cert.set_A.size(); ++k)
        if (cert.set_A[k]) {
            ++v.nodes_in_A;
            v.min_on_A = std::min(v.min_on_A, cert.witness[k]);
        }
    v.dominates_on_A = v.min_on_A >= 1.0 - tol;
    v.inf_below_one = v.min_over_grid <= 1.0 - cert.margin;
    v.pass = v.nonnegative && v.dominates_on_A && v.inf_below_one && v.superharmonic;
    if (!v.superharmonic)
        v.reason = "L s = " + std::to_string(sr.max_residual) + " > tol at node " + std::to_string(sr.worst_node);
    else if (!v.nonnegative)
        v.reason = "s < 0 somewhere (min " + std::to_string(v.min_over_grid) + ")";
    else if (!v.dominates_on_A)
        v.reason = "s < 1 on A (min " + std::to_string(v.min_on_A) + ")";
    else if (!v.inf_below_one)
        v.reason = "min s = " + std::to_string(v.min_over_grid) + " > 1 - margin";
    return v;
}

inline CertificateVerdict verify_certificate(const Grid& grid, const EllipticCoefficients& coeffs,
                                             const ThinnessCertificate& cert, double tol) {
    return verify_certificate(assemble(grid, coeffs), cert, tol);
}

/// Point predicate for the certificate's node mask: the nearest node decides;
/// points outside the grid are not in A.
inline PointPredicate mask_predicate(const ThinnessCertificate& cert) {
    return [grid = cert.grid, mask = cert.set_A](const Point& p) {
        if (!grid.contains(p)) return false;
        return mask[grid.nearest_node(p)] != 0;
    };
}

struct ProbeResult {
    ThinnessCertificate certificate;
    CertificateVerdict verdict;
    double c = 0.0;
    double c0 = 0.0;
    Point x0, x1;   // 0 < v(x0) <= c0 < v(x1) <= c
};

/// From a bounded nontrivial solution v <= c build A = {v <= c0} and
/// s = (c - v)/(c - c0). c0 defaults to the midpoint of range(v).
inline ProbeResult necessary_direction_probe(const ExhaustionRun& run, const EllipticCoefficients& coeffs, double c,
                                             std::optional<double> c0 = std::nullopt, double margin = 0.01,
                                             double tol = 1e-8) {
    const ScalarField& v = run.limit_estimate;
    const Grid& grid = v.grid();
    if (grid.size() == 0) throw ValidationError("probe: run has no limit estimate");
    const auto [lo_it, hi_it] = std::minmax_element(v.values().begin(), v.values().end());
    const double vmin = *lo_it, vmax = *hi_it;
    if (vmax > c + tol) throw ValidationError("probe: v exceeds c = " + std::to_string(c));
    ProbeResult out;
    out.c = c;
    out.c0 = c0.value_or(0.5 * (vmin + vmax));
    if (!(out.c0 < c) || !(vmax - vmin > tol))
        throw ValidationError("probe: no split 0 < v(x0) <= c0 < v(x1) <= c exists (solution too flat)");
    std::optional<std::size_t> k0, k1;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!k0 && v[k] > 0.0 && v[k] <= out.c0) k0 = k;
        if (!k1 && v[k] > out.c0) k1 = k;
    }
    if (!k0 || !k1) throw ValidationError("probe: no split 0 < v(x0) <= c0 < v(x1) <= c exists (solution too flat)");
    out.x0 = grid.position(*k0);
    out.x1 = grid.position(*k1);

    ThinnessCertificate cert;
    cert.grid = grid;
    cert.margin = margin;
    cert.label = "A = {v <= " + std::to_string(out.c0) + "}";
    cert.set_A.resize(grid.size());
    cert.witness = ScalarField(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        cert.set_A[k] = v[k] <= out.c0 ? 1 : 0;
        cert.witness[k] = (c - v[k]) / (c - out.c0);
    }
    out.verdict = verify_certificate(grid, coeffs, cert, tol);
    out.certificate = std::move(cert);
    return out;
}

enum class GreenKernel { halfplane, interval };

inline const char* to_string(GreenKernel k) { return k == GreenKernel::halfplane ? "halfplane" : "interval"; }

enum class TrendVerdict { bounded_trend, diverging_trend, undecided };

inline const char* to_string(TrendVerdict t) {
    switch (t) {
    case TrendVerdict::bounded_trend: return "bounded_trend";
    case TrendVerdict::diverging_trend: return "diverging_trend";
    case TrendVerdict::undecided: return "undecided";
    }
    return "?";
}

struct CriterionOptions {
    Point anchor{0.0, 1.0};
    double cell = 0.25;            // h_q; also the radius of the excluded disk
    bool singular_correction = true;
    double interval_lo = 0.0;      // interval kernel only
    double interval_hi = 1.0;
    double bounded_ratio = 0.6;
    double diverging_ratio = 0.9;
};

struct CriterionResult {
    std::vector<double> radii;
    std::vector<double> values;      // I_R, cumulative over shells
    std::vector<double> increments;  // I_{R_k} - I_{R_{k-1}}, k >= 1
    std::vector<double> ratios;      // increments[k] / increments[k-1]
    TrendVerdict verdict = TrendVerdict::undecided;
};

namespace detail {

inline constexpr std::array<double, 4> kGaussNodes = {-0.8611363115940526, -0.3399810435848563,
                                                      0.3399810435848563, 0.8611363115940526};
inline constexpr std::array<double, 4> kGaussWeights = {0.3478548451374538, 0.6521451548625461,
                                                        0.6521451548625461, 0.3478548451374538};

inline TrendVerdict classify_increments(const std::vector<double>& ratios, double bounded, double diverging) {
    if (ratios.empty()) return TrendVerdict::undecided;
    const double r = ratios.back();
    if (r <= bounded) return TrendVerdict::bounded_trend;
    if (r >= diverging) return TrendVerdict::diverging_trend;
    return TrendVerdict::undecided;
}

inline double increment_ratio(double prev, double cur) {
    if (prev > 0.0) return cur / prev;
    return cur > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

} // namespace detail

/// I_R(x0) = int over (Omega \ A) cap truncation_R of G_Omega(x0, .) phi(., c0).
///
/// halfplane: Omega = {y > 0}, truncation [-R, R] x (0, R]; cells of size
/// h_q with 4x4 Gauss points; the disk of radius h_q about x0 is done on
/// polar rings with the log term integrated exactly in r.
/// interval: Omega = (a, b), truncation {|y - x0| <= R}.
/// Radii must be increasing multiples of h_q; shells are summed in order.
inline CriterionResult criterion_integral(GreenKernel kernel, const Nonlinearity& phi, double c0,
                                          const PointPredicate& in_A, const std::vector<double>& radii,
                                          const CriterionOptions& opt = {}) {
    if (radii.empty()) throw ValidationError("criterion: no truncation radii");
    const double hq = opt.cell;
    if (!(hq > 0.0)) throw ValidationError("criterion: cell size must be positive");
    std::vector<long> steps;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        const double m = radii[k] / hq;
        if (std::abs(m - std::round(m)) > 1e-9 * std::max(1.0, m) || m < 1.0)
            throw ValidationError("criterion: radius " + std::to_string(radii[k]) + " is not a multiple of the cell size");
        steps.push_back(std::lround(m));
        if (k > 0 && steps[k] <= steps[k - 1]) throw ValidationError("criterion: radii must be increasing");
    }
    const Point x0 = opt.anchor;
    auto integrand = [&](const Point& p) {
        if (in_A(p)) return 0.0;
        return phi(p, c0);
    };

    std::vector<double> shell(radii.size(), 0.0);
    // shell index of a cell given its outer extent in units of h_q
    auto shell_of = [&](long extent) -> std::ptrdiff_t {
        for (std::size_t k = 0; k < steps.size(); ++k)
            if (extent <= steps[k]) return static_cast<std::ptrdiff_t>(k);
        return -1;
    };

    if (kernel == GreenKernel::halfplane) {
        if (!(x0.y > 0.0)) throw DomainError("criterion: anchor must satisfy y > 0");
        const double rho = hq;
        const bool anchor_in_region = x0.y <= radii.back() + rho && std::abs(x0.x) <= radii.back() + rho;
        if (!opt.singular_correction && anchor_in_region)
            throw DomainError("criterion: anchor lies in the closure of the integration region; enable singular correction");
        const long nmax = steps.back();
        // cells [i hq, (i+1) hq] x [j hq, (j+1) hq], i in [-nmax, nmax), j in [0, nmax)
        for (long j = 0; j < nmax; ++j) {
            for (long i = -nmax; i < nmax; ++i) {
                const long extent = std::max({j + 1, i + 1, -i});
                const std::ptrdiff_t sh = shell_of(extent);
                if (sh < 0) continue;
                const double x_lo = i * hq, y_lo = j * hq;
                // nearest distance from x0 to the cell
                const double dx = std::max({x_lo - x0.x, 0.0, x0.x - (x_lo + hq)});
                const double dy = std::max({y_lo - x0.y, 0.0, x0.y - (y_lo + hq)});
                const bool touches_disk = opt.singular_correction && dx * dx + dy * dy < rho * rho;
                const int sub = touches_disk ? 8 : 1;
                const double hs = hq / sub;
                double sum = 0.0;
                for (int sj = 0; sj < sub; ++sj)
                    for (int si = 0; si < sub; ++si)
                        for (int a = 0; a < 4; ++a)
                            for (int b = 0; b < 4; ++b) {
                                const Point p{x_lo + (si + 0.5 * (1 + detail::kGaussNodes[a])) * hs,
                                              y_lo + (sj + 0.5 * (1 + detail::kGaussNodes[b])) * hs};
                                const double ddx = p.x - x0.x, ddy = p.y - x0.y;
                                if (touches_disk && ddx * ddx + ddy * ddy < rho * rho) continue;
                                const double f = integrand(p);
                                if (f == 0.0) continue;
                                sum += detail::kGaussWeights[a] * detail::kGaussWeights[b] * f * halfplane_green(x0, p);
                            }
                shell[static_cast<std::size_t>(sh)] += sum * 0.25 * hs * hs;
            }
        }
        if (opt.singular_correction) {
            // Polar rings about x0. G = (1/2pi) ln(1/r) + (1/2pi) ln|z - conj(x0)|; the log
            // term is integrated exactly in r per ring, F(r) = r^2/4 - (r^2/2) ln r.
            auto F = [](double r) { return r > 0.0 ? 0.25 * r * r - 0.5 * r * r * std::log(r) : 0.0; };
            const int rings = 32, angles = 64;
            double disk = 0.0;
            for (int ir = 0; ir < rings; ++ir) {
                const double ra = rho * ir / rings, rb = rho * (ir + 1) / rings, rm = 0.5 * (ra + rb);
                const double log_weight = (F(rb) - F(ra)) / angles;
                for (int t = 0; t < angles; ++t) {
                    const double th = 2.0 * std::numbers::pi * (t + 0.5) / angles;
                    const Point p{x0.x + rm * std::cos(th), x0.y + rm * std::sin(th)};
                    if (p.y <= 0.0) continue;
                    const long extent_p = static_cast<long>(std::ceil(std::max(std::abs(p.x), p.y) / hq - 1e-12));
                    if (extent_p > steps.back()) continue;
                    const double w = integrand(p);
                    if (w == 0.0) continue;
                    const double far = std::hypot(p.x - x0.x, p.y + x0.y);
                    const double smooth = std::log(far) / (2.0 * std::numbers::pi) * rm * (rb - ra) *
                                          (2.0 * std::numbers::pi / angles);
                    disk += w * (log_weight + smooth);
                }
            }
            // the disk is booked to the shell holding x0
            const long extent = std::max<long>(1, static_cast<long>(std::ceil(std::max(std::abs(x0.x), x0.y) / hq - 1e-12)));
            const std::ptrdiff_t sh = shell_of(extent);
            if (sh >= 0) shell[static_cast<std::size_t>(sh)] += disk;
        }
    } else {
        const double a = opt.interval_lo, b = opt.interval_hi;
        if (!(b > a)) throw ValidationError("criterion: empty interval");
        if (!(x0.x > a && x0.x < b)) throw DomainError("criterion: anchor must lie inside the interval");
        const long nmax = steps.back();
        for (long i = -nmax; i < nmax; ++i) {
            const double lo = x0.x + i * hq;
            const double c_lo = std::max(lo, a), c_hi = std::min(lo + hq, b);
            if (!(c_hi > c_lo)) continue;
            const std::ptrdiff_t sh = shell_of(std::max(i + 1, -i));
            if (sh < 0) continue;
            double sum = 0.0;
            for (int q = 0; q < 4; ++q) {
                const double y = c_lo + 0.5 * (1 + detail::kGaussNodes[q]) * (c_hi - c_lo);
                const double f = integrand({y, 0.0});
                if (f != 0.0) sum += detail::kGaussWeights[q] * f * interval_green(x0.x, y, a, b);
            }
            shell[static_cast<std::size_t>(sh)] += 0.5 * (c_hi - c_lo) * sum;
        }
    }

    CriterionResult out;
    out.radii = radii;
    double acc = 0.0;
    for (std::size_t k = 0; k < shell.size(); ++k) {
        acc += shell[k];
        out.values.push_back(acc);
        if (k > 0) out.increments.push_back(shell[k]);
        if (k > 1) out.ratios.push_back(detail::increment_ratio(shell[k - 1], shell[k]));
    }
    out.verdict = detail::classify_increments(out.ratios, opt.bounded_ratio, opt.diverging_ratio);
    return out;
}

} // namespace semilinear
