#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "semilinear/error.hpp"
#include "semilinear/exhaustion.hpp"
#include "semilinear/expr.hpp"
#include "semilinear/grid.hpp"
#include "semilinear/nonlinearity.hpp"
#include "semilinear/operator.hpp"
#include "semilinear/solver.hpp"
#include "semilinear/thinness.hpp"

namespace semilinear {

enum class Experiment { solve, exhaust, thin_check, criterion, green, verify };

inline const char* to_string(Experiment e) {
    switch (e) {
    case Experiment::solve: return "solve";
    case Experiment::exhaust: return "exhaust";
    case Experiment::thin_check: return "thin-check";
    case Experiment::criterion: return "criterion";
    case Experiment::green: return "green";
    case Experiment::verify: return "verify";
    }
    return "?";
}

inline Experiment parse_experiment(const std::string& s) {
    if (s == "solve") return Experiment::solve;
    if (s == "exhaust") return Experiment::exhaust;
    if (s == "thin-check") return Experiment::thin_check;
    if (s == "criterion") return Experiment::criterion;
    if (s == "green") return Experiment::green;
    if (s == "verify") return Experiment::verify;
    throw ValidationError("config: [experiment] kind: unknown experiment '" + s + "'");
}

struct DomainConfig {
    int dim = 1;
    std::vector<Interval> bbox{{0.0, 1.0}};
    double spacing = 1.0 / 32;
};

struct ExhaustionConfig {
    bool present = false;
    std::string kind = "box";   // box | halfplane
    double factor = 2.0;
    int stages = 4;
    double radius = 4.0;        // halfplane base radius
    double delta = 0.0;         // halfplane near-boundary strip; 0 means one spacing
    std::optional<Point> anchor;
};

struct OperatorConfig {
    Expr a11 = Expr::constant(1.0), a12 = Expr::constant(0.0), a22 = Expr::constant(1.0);
    Expr b1 = Expr::constant(0.0), b2 = Expr::constant(0.0), c = Expr::constant(0.0);
    ZeroOrderMode zero_order_mode = ZeroOrderMode::c_zero;

    EllipticCoefficients coefficients() const {
        EllipticCoefficients k;
        k.a11 = expr_coefficient(a11);
        k.a12 = expr_coefficient(a12);
        k.a22 = expr_coefficient(a22);
        k.b1 = expr_coefficient(b1);
        k.b2 = expr_coefficient(b2);
        k.c = expr_coefficient(c);
        k.zero_order_mode = zero_order_mode;
        return k;
    }
};

struct NonlinearityConfig {
    Expr phi = Expr::constant(0.0);
    bool differentiable = false;
    std::optional<Expr> phi2;                  // split experiments
    SplitMode split_mode = SplitMode::domination;
    int monotone_check_samples = 32;
};

struct SupersolutionConfig {
    std::optional<double> constant;            // "constant c"
    std::optional<Expr> expr;

    Supersolution build() const {
        if (constant) return Supersolution::constant_value(*constant);
        const Expr e = *expr;
        return Supersolution::function([e](const Point& p) { return e.eval(Bindings{p.x, p.y, std::nullopt}); },
                                       e.source());
    }
};

struct ThinnessConfig {
    Expr set_A = Expr::constant(0.0);
    Expr super_s = Expr::constant(1.0);
    double margin = 0.01;
    double tol = 1e-9;
};

struct CriterionConfig {
    GreenKernel kernel = GreenKernel::halfplane;
    double c0 = 1.0;
    Expr set_A = Expr::constant(0.0);
    std::vector<double> radii{4, 8, 16, 32};
    CriterionOptions options;
};

struct GreenConfig {
    std::string oracle = "interval";  // interval | halfplane
    Point pole{0.5, 0.0};
};

struct OutputConfig {
    std::string dir = "out";
    int precision = 17;
};

struct RunConfig {
    Experiment experiment = Experiment::solve;
    DomainConfig domain;
    ExhaustionConfig exhaustion;
    OperatorConfig op;
    NonlinearityConfig nonlinearity;
    Expr boundary_f = Expr::constant(1.0);
    SupersolutionConfig supersolution;
    SolveOptions solver;
    ThinnessConfig thinness;
    CriterionConfig criterion;
    GreenConfig green;
    OutputConfig output;
    unsigned seed = 12345;

    Grid grid() const { return build_box_grid(std::span<const Interval>(domain.bbox), domain.spacing); }
    Nonlinearity phi() const { return Nonlinearity::from_expr(nonlinearity.phi, nonlinearity.differentiable); }
    Exhaustion build_exhaustion_stages() const;
};

namespace detail {

using boost::property_tree::ptree;

inline std::string field_name(const std::string& key) {
    const auto dot = key.find('.');
    return "[" + key.substr(0, dot) + "] " + key.substr(dot + 1);
}

inline std::optional<std::string> get_string(const ptree& pt, const std::string& key) {
    if (auto v = pt.get_optional<std::string>(key)) {
        std::string s = *v;
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    }
    return std::nullopt;
}

inline std::vector<double> parse_numbers(const std::string& text, const std::string& key) {
    std::vector<double> out;
    std::string buf = text;
    for (char& ch : buf)
        if (ch == ',') ch = ' ';
    std::istringstream in(buf);
    std::string tok;
    while (in >> tok) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size() || !std::isfinite(v))
            throw ValidationError("config: " + field_name(key) + ": '" + tok + "' is not a number");
        out.push_back(v);
    }
    return out;
}

inline double get_number(const ptree& pt, const std::string& key, double fallback) {
    const auto s = get_string(pt, key);
    if (!s) return fallback;
    const auto v = parse_numbers(*s, key);
    if (v.size() != 1) throw ValidationError("config: " + field_name(key) + ": expected one number");
    return v[0];
}

inline int get_int(const ptree& pt, const std::string& key, int fallback) {
    const double v = get_number(pt, key, fallback);
    if (v != std::floor(v)) throw ValidationError("config: " + field_name(key) + ": expected an integer");
    return static_cast<int>(v);
}

inline bool get_bool(const ptree& pt, const std::string& key, bool fallback) {
    const auto s = get_string(pt, key);
    if (!s) return fallback;
    if (*s == "true" || *s == "1" || *s == "yes") return true;
    if (*s == "false" || *s == "0" || *s == "no") return false;
    throw ValidationError("config: " + field_name(key) + ": expected true or false");
}

inline std::optional<Point> get_point(const ptree& pt, const std::string& key) {
    const auto s = get_string(pt, key);
    if (!s) return std::nullopt;
    const auto v = parse_numbers(*s, key);
    if (v.empty() || v.size() > 2) throw ValidationError("config: " + field_name(key) + ": expected 1 or 2 coordinates");
    return Point{v[0], v.size() > 1 ? v[1] : 0.0};
}

/// Parse an expression field; `allow_t` controls whether t may appear.
inline std::optional<Expr> get_expr(const ptree& pt, const std::string& key, bool allow_t) {
    const auto s = get_string(pt, key);
    if (!s) return std::nullopt;
    try {
        Expr e = Expr::parse(*s);
        if (!allow_t && e.uses(Expr::Var::t))
            throw ValidationError("config: " + field_name(key) + ": t is not allowed here");
        return e;
    } catch (const ParseError& e) {
        throw ParseError("config: " + field_name(key) + ": " + e.what(), e.offset());
    }
}

} // namespace detail

/// Parse a run configuration (sectioned key = value text; ';' starts a
/// comment line). Every expression is parsed and every cross-reference
/// resolved here, before any computation.
inline RunConfig parse_config(std::istream& in) {
    using detail::ptree;
    ptree pt;
    try {
        boost::property_tree::ini_parser::read_ini(in, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    static const std::vector<std::pair<std::string, std::vector<std::string>>> sections = {
        {"experiment", {"kind", "seed"}},
        {"domain", {"dim", "bbox", "spacing"}},
        {"exhaustion", {"kind", "factor", "stages", "radius", "delta", "anchor"}},
        {"operator", {"a11", "a12", "a22", "b1", "b2", "c", "zero_order_mode"}},
        {"nonlinearity", {"phi", "differentiable", "phi2", "split_mode", "monotone_check_samples"}},
        {"boundary", {"boundary_f"}},
        {"supersolution", {"s"}},
        {"solver", {"scheme", "tol", "max_iter", "omega"}},
        {"thinness", {"set_A", "super_s", "margin", "tol"}},
        {"criterion", {"kernel", "c0", "set_A", "radii", "anchor", "cell", "singular_correction", "interval"}},
        {"green", {"oracle", "pole"}},
        {"output", {"dir", "precision"}}};
    for (const auto& [name, sub] : pt) {
        const auto sec = std::find_if(sections.begin(), sections.end(), [&](const auto& e) { return e.first == name; });
        if (sec == sections.end()) throw ValidationError("config: unknown section [" + name + "]");
        for (const auto& [key, value] : sub) {
            if (std::find(sec->second.begin(), sec->second.end(), key) == sec->second.end())
                throw ValidationError("config: [" + name + "] " + key + ": unknown key");
            (void)value;
        }
    }

    RunConfig cfg;
    if (auto k = detail::get_string(pt, "experiment.kind")) cfg.experiment = parse_experiment(*k);
    cfg.seed = static_cast<unsigned>(detail::get_int(pt, "experiment.seed", static_cast<int>(cfg.seed)));

    cfg.domain.dim = detail::get_int(pt, "domain.dim", 1);
    if (cfg.domain.dim != 1 && cfg.domain.dim != 2) throw ValidationError("config: [domain] dim: must be 1 or 2");
    if (auto s = detail::get_string(pt, "domain.bbox")) {
        const auto v = detail::parse_numbers(*s, "domain.bbox");
        if (v.size() != 2 * static_cast<std::size_t>(cfg.domain.dim))
            throw ValidationError("config: [domain] bbox: expected " + std::to_string(2 * cfg.domain.dim) + " numbers");
        cfg.domain.bbox.clear();
        for (int ax = 0; ax < cfg.domain.dim; ++ax) cfg.domain.bbox.push_back({v[2 * ax], v[2 * ax + 1]});
    } else if (cfg.domain.dim == 2) {
        cfg.domain.bbox = {{0.0, 1.0}, {0.0, 1.0}};
    }
    cfg.domain.spacing = detail::get_number(pt, "domain.spacing", cfg.domain.spacing);

    if (pt.get_child_optional("exhaustion")) {
        auto& ex = cfg.exhaustion;
        ex.present = true;
        ex.kind = detail::get_string(pt, "exhaustion.kind").value_or("box");
        if (ex.kind != "box" && ex.kind != "halfplane")
            throw ValidationError("config: [exhaustion] kind: expected box or halfplane");
        ex.factor = detail::get_number(pt, "exhaustion.factor", ex.factor);
        ex.stages = detail::get_int(pt, "exhaustion.stages", ex.stages);
        ex.radius = detail::get_number(pt, "exhaustion.radius", ex.radius);
        ex.delta = detail::get_number(pt, "exhaustion.delta", 0.0);
        ex.anchor = detail::get_point(pt, "exhaustion.anchor");
        if (ex.kind == "halfplane" && cfg.domain.dim != 2)
            throw ValidationError("config: [exhaustion] kind: halfplane needs [domain] dim = 2");
    }

    auto& op = cfg.op;
    for (auto [key, slot] : {std::pair{"operator.a11", &op.a11}, std::pair{"operator.a12", &op.a12},
                             std::pair{"operator.a22", &op.a22}, std::pair{"operator.b1", &op.b1},
                             std::pair{"operator.b2", &op.b2}, std::pair{"operator.c", &op.c}})
        if (auto e = detail::get_expr(pt, key, false)) *slot = *e;
    if (auto m = detail::get_string(pt, "operator.zero_order_mode")) {
        if (*m == "c_zero") op.zero_order_mode = ZeroOrderMode::c_zero;
        else if (*m == "c_nonpos") op.zero_order_mode = ZeroOrderMode::c_nonpos;
        else throw ValidationError("config: [operator] zero_order_mode: expected c_zero or c_nonpos");
    }

    auto& nl = cfg.nonlinearity;
    if (auto e = detail::get_expr(pt, "nonlinearity.phi", true)) nl.phi = *e;
    nl.differentiable = detail::get_bool(pt, "nonlinearity.differentiable", false);
    nl.phi2 = detail::get_expr(pt, "nonlinearity.phi2", true);
    if (auto m = detail::get_string(pt, "nonlinearity.split_mode")) {
        if (*m == "domination") nl.split_mode = SplitMode::domination;
        else if (*m == "sum") nl.split_mode = SplitMode::sum;
        else throw ValidationError("config: [nonlinearity] split_mode: expected domination or sum");
    }
    nl.monotone_check_samples = detail::get_int(pt, "nonlinearity.monotone_check_samples", nl.monotone_check_samples);

    if (auto e = detail::get_expr(pt, "boundary.boundary_f", false)) cfg.boundary_f = *e;

    if (auto s = detail::get_string(pt, "supersolution.s")) {
        if (s->rfind("constant", 0) == 0) {
            const auto v = detail::parse_numbers(s->substr(8), "supersolution.s");
            if (v.size() != 1) throw ValidationError("config: [supersolution] s: expected 'constant <c>'");
            cfg.supersolution.constant = v[0];
        } else {
            cfg.supersolution.expr = detail::get_expr(pt, "supersolution.s", false);
        }
    } else {
        cfg.supersolution.constant = 1.0;
    }
    if (cfg.supersolution.constant && op.zero_order_mode != ZeroOrderMode::c_zero)
        throw ValidationError("config: [supersolution] s: a constant supersolution needs zero_order_mode = c_zero");

    if (auto s = detail::get_string(pt, "solver.scheme")) cfg.solver.scheme = parse_scheme(*s);
    cfg.solver.tol = detail::get_number(pt, "solver.tol", cfg.solver.tol);
    cfg.solver.max_iter = detail::get_int(pt, "solver.max_iter", cfg.solver.max_iter);
    cfg.solver.omega = detail::get_number(pt, "solver.omega", cfg.solver.omega);
    if (!(cfg.solver.tol > 0.0)) throw ValidationError("config: [solver] tol: must be positive");
    if (cfg.solver.max_iter < 1) throw ValidationError("config: [solver] max_iter: must be >= 1");
    if (cfg.solver.scheme == Scheme::newton && !nl.differentiable)
        throw ValidationError("config: [solver] scheme: newton needs [nonlinearity] differentiable = true");

    if (auto e = detail::get_expr(pt, "thinness.set_A", false)) cfg.thinness.set_A = *e;
    if (auto e = detail::get_expr(pt, "thinness.super_s", false)) cfg.thinness.super_s = *e;
    cfg.thinness.margin = detail::get_number(pt, "thinness.margin", cfg.thinness.margin);
    cfg.thinness.tol = detail::get_number(pt, "thinness.tol", cfg.thinness.tol);
    if (!(cfg.thinness.margin > 0.0)) throw ValidationError("config: [thinness] margin: must be positive");

    auto& cr = cfg.criterion;
    if (auto k = detail::get_string(pt, "criterion.kernel")) {
        if (*k == "halfplane") cr.kernel = GreenKernel::halfplane;
        else if (*k == "interval") cr.kernel = GreenKernel::interval;
        else throw ValidationError("config: [criterion] kernel: expected halfplane or interval");
    } else if (cfg.experiment == Experiment::criterion) {
        throw ValidationError("config: [criterion] kernel: required for the criterion experiment");
    }
    cr.c0 = detail::get_number(pt, "criterion.c0", cr.c0);
    if (auto e = detail::get_expr(pt, "criterion.set_A", false)) cr.set_A = *e;
    if (auto s = detail::get_string(pt, "criterion.radii")) cr.radii = detail::parse_numbers(*s, "criterion.radii");
    if (auto p = detail::get_point(pt, "criterion.anchor")) cr.options.anchor = *p;
    cr.options.cell = detail::get_number(pt, "criterion.cell", cr.options.cell);
    cr.options.singular_correction = detail::get_bool(pt, "criterion.singular_correction", true);
    if (auto s = detail::get_string(pt, "criterion.interval")) {
        const auto v = detail::parse_numbers(*s, "criterion.interval");
        if (v.size() != 2) throw ValidationError("config: [criterion] interval: expected two numbers");
        cr.options.interval_lo = v[0];
        cr.options.interval_hi = v[1];
    }
    if (cr.radii.size() < 4 && cfg.experiment == Experiment::criterion)
        throw ValidationError("config: [criterion] radii: need at least 4 truncations for a trend verdict");

    if (auto o = detail::get_string(pt, "green.oracle")) {
        if (*o != "interval" && *o != "halfplane")
            throw ValidationError("config: [green] oracle: expected interval or halfplane");
        cfg.green.oracle = *o;
    }
    if (auto p = detail::get_point(pt, "green.pole")) cfg.green.pole = *p;

    cfg.output.dir = detail::get_string(pt, "output.dir").value_or(cfg.output.dir);
    cfg.output.precision = detail::get_int(pt, "output.precision", cfg.output.precision);
    if (cfg.output.precision < 1 || cfg.output.precision > 17)
        throw ValidationError("config: [output] precision: must lie in [1, 17]");

    // cross-references needed by each experiment
    if (cfg.experiment == Experiment::exhaust && !cfg.exhaustion.present)
        throw ValidationError("config: [exhaustion]: required for the exhaust experiment");
    if (cfg.nonlinearity.phi2 && !cfg.exhaustion.present)
        throw ValidationError("config: [nonlinearity] phi2: split experiments need an [exhaustion] section");
    if (cfg.experiment == Experiment::green && cfg.green.oracle == "interval" && cfg.domain.dim != 1)
        throw ValidationError("config: [green] oracle: interval oracle needs [domain] dim = 1");
    if (cfg.experiment == Experiment::green && cfg.green.oracle == "halfplane" && cfg.domain.dim != 2)
        throw ValidationError("config: [green] oracle: halfplane oracle needs [domain] dim = 2");
    return cfg;
}

inline RunConfig parse_config_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot read '" + path + "'");
    return parse_config(in);
}

inline Exhaustion RunConfig::build_exhaustion_stages() const {
    if (!exhaustion.present) throw ValidationError("config: [exhaustion]: section missing");
    const SpacingRule rule{domain.spacing};
    if (exhaustion.kind == "halfplane") {
        const double delta = exhaustion.delta > 0.0 ? exhaustion.delta : domain.spacing;
        const Point anchor = exhaustion.anchor.value_or(Point{0.0, 2.0 * delta});
        return build_halfplane_exhaustion(exhaustion.radius, exhaustion.factor, exhaustion.stages, rule, delta, anchor);
    }
    Exhaustion exh = build_exhaustion(std::span<const Interval>(domain.bbox), exhaustion.factor, exhaustion.stages, rule);
    if (exhaustion.anchor) {
        const Grid& g0 = exh.stages.front();
        if (!g0.is_node(*exhaustion.anchor) || !g0.is_interior(g0.nearest_node(*exhaustion.anchor)))
            throw ValidationError("config: [exhaustion] anchor: not an interior node of stage 0");
        exh.anchor = *exhaustion.anchor;
    }
    return exh;
}

/// Predicate x -> expr(x, y) != 0.
inline PointPredicate expr_predicate(const Expr& e) {
    return [e](const Point& p) { return e.eval(Bindings{p.x, p.y, std::nullopt}) != 0.0; };
}

} // namespace semilinear
