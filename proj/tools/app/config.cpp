#include "config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace hypofbi::app {

namespace fs = std::filesystem;

const json& require(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing required field '") + key + "'");
    return j.at(key);
}

namespace {

double number(const json& j, const char* what) {
    if (!j.is_number()) throw ConfigError(std::string(what) + " must be a number");
    return j.get<double>();
}

double number_or(const json& j, const char* key, double fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return number(j.at(key), key);
}

int integer_or(const json& j, const char* key, int fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer()) throw ConfigError(std::string(key) + " must be an integer");
    return j.at(key).get<int>();
}

std::vector<double> vector_of(const json& j, const char* what) {
    if (j.is_number()) return {j.get<double>()};
    if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of numbers");
    std::vector<double> v;
    for (const auto& e : j) v.push_back(number(e, what));
    return v;
}

Box box_from_json(const json& j, int dim, const char* what) {
    if (!j.is_array() || static_cast<int>(j.size()) != dim)
        throw ConfigError(std::string(what) + " must list " + std::to_string(dim) + " [lo, hi] pairs");
    Box b;
    for (const auto& r : j) {
        const auto v = vector_of(r, what);
        if (v.size() != 2) throw ConfigError(std::string(what) + " entries must be [lo, hi]");
        b.ranges.emplace_back(v[0], v[1]);
    }
    return b;
}

int axis_from_json(const json& j, int m) {
    const int axis = integer_or(j, "axis", 1);
    if (axis < 1 || axis > m) throw ConfigError("solution axis must be in 1..m");
    return axis - 1;
}

} // namespace

Job job_from_string(const std::string& text, const fs::path& base_dir) {
    Job job;
    try {
        job.cfg = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!job.cfg.is_object()) throw ConfigError("config must be a JSON object");
    job.base_dir = base_dir;
    return job;
}

Job load_job(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return job_from_string(ss.str(), path.has_parent_path() ? path.parent_path() : fs::path("."));
}

Chart chart_from_json(const json& j, const fs::path& base_dir) {
    if (j.is_string()) {
        const fs::path p = base_dir / j.get<std::string>();
        const Job sub = load_job(p);
        return chart_from_json(sub.cfg, sub.base_dir);
    }
    if (!j.is_object()) throw ConfigError("chart must be an object or a path");
    const int m = require(j, "m").get<int>();
    const int n = require(j, "n").get<int>();
    if (m < 1 || n < 1) throw ConfigError("chart needs m >= 1 and n >= 1");
    const bool tube = j.value("tube", false);
    const json& phi = require(j, "phi");
    if (!phi.is_array()) throw ConfigError("phi must be an array of expressions");
    std::vector<Expr> exprs;
    for (const auto& p : phi) {
        if (!p.is_string()) throw ConfigError("phi entries must be strings");
        exprs.push_back(parse(p.get<std::string>()));
    }
    return Chart(m, n, std::move(exprs), tube, box_from_json(require(j, "V"), m, "V"), box_from_json(require(j, "W"), n, "W"));
}

Chart job_chart(const Job& job) { return chart_from_json(require(job.cfg, "chart"), job.base_dir); }

Cutoff cutoff_from_json(const json& j, const Chart& chart) {
    Cutoff c;
    c.center = j.contains("center") ? vector_of(j.at("center"), "cutoff.center") : std::vector<double>(chart.m(), 0.0);
    c.rho_inner = number_or(j, "rho_inner", 0.5);
    c.rho_outer = number_or(j, "rho_outer", 1.0);
    c.validate(chart);
    return c;
}

TestSolution solution_from_json(const json& j, const Chart& chart, const Cutoff& chi) {
    const std::string kind = require(j, "kind").get<std::string>();
    if (kind == "holomorphic_composite") {
        const int axis = axis_from_json(j, chart.m());
        if (j.contains("series")) {
            if (j.at("series") != "exp") throw ConfigError("only the 'exp' series is built in");
            return make_holomorphic_exp(chart, integer_or(j, "degree", 20), axis);
        }
        std::vector<cplx> coef;
        for (const auto& c : require(j, "coefficients")) {
            if (c.is_number()) coef.emplace_back(c.get<double>(), 0.0);
            else {
                const auto v = vector_of(c, "coefficients");
                if (v.size() != 2) throw ConfigError("complex coefficients are [re, im]");
                coef.emplace_back(v[0], v[1]);
            }
        }
        return make_holomorphic_composite(chart, std::move(coef), axis);
    }
    if (kind == "gevrey_flat") {
        std::optional<Expr> drift;
        if (j.contains("drift")) drift = parse(j.at("drift").get<std::string>());
        return make_gevrey_flat(chart, number(require(j, "s"), "s"), axis_from_json(j, chart.m()),
                                integer_or(j, "sign", 1), drift);
    }
    if (kind == "step") {
        return make_step(chart, axis_from_json(j, chart.m()), number_or(j, "x0", 0.0), chi.rho_outer);
    }
    if (kind == "expr") {
        std::optional<Expr> im;
        if (j.contains("im")) im = parse(j.at("im").get<std::string>());
        RegularityLabel label;
        const std::string l = j.value("label", "analytic-vector");
        if (l == "analytic-vector") label = {RegularityLabel::Type::AnalyticVector, 1.0};
        else if (l == "gevrey") label = {RegularityLabel::Type::Gevrey, number(require(j, "s"), "s")};
        else if (l == "non-smooth") label = {RegularityLabel::Type::NonSmooth, 0.0};
        else throw ConfigError("unknown label '" + l + "'");
        TestSolution sol = make_expr_solution(chart, parse(require(j, "re").get<std::string>()), im, label);
        // "homogeneous": claim L u = 0 instead of the symbolic forcing
        if (j.value("homogeneous", false))
            sol.forcing = [](int, std::span<const double>, std::span<const double>) { return cplx(0.0); };
        return sol;
    }
    throw ConfigError("unknown solution kind '" + kind + "'");
}

QuadratureGrid grid_from_json(const json& j, const Cutoff& chi, double fallback_xi_max) {
    const int nodes = integer_or(j, "nodes", 8);
    if (nodes < 1 || nodes > 64) throw ConfigError("quadrature.nodes must be in 1..64");
    if (j.is_object() && j.contains("panels")) {
        const int panels = integer_or(j, "panels", 1);
        if (panels < 1) throw ConfigError("quadrature.panels must be positive");
        return QuadratureGrid::cube(chi.center, chi.rho_outer, panels, nodes);
    }
    const double xi_max = number_or(j, "xi_max", fallback_xi_max);
    if (!(xi_max > 0.0)) throw ConfigError("quadrature.xi_max must be positive");
    return support_grid(chi, xi_max, nodes);
}

std::vector<double> magnitudes_from_json(const json& j) {
    if (j.is_array()) return vector_of(j, "magnitudes");
    if (!j.is_object()) throw ConfigError("magnitudes must be a list or {min, max, count}");
    const double lo = number(require(j, "min"), "magnitudes.min");
    const double hi = number(require(j, "max"), "magnitudes.max");
    const int count = integer_or(j, "count", 20);
    if (!(lo > 0.0 && hi > lo) || count < 2) throw ConfigError("magnitudes need 0 < min < max and count >= 2");
    return log_ladder(lo, hi, count);
}

FitOptions fit_options_from_json(const json& j) {
    FitOptions o;
    if (j.is_null()) return o;
    o.s_min = number_or(j, "s_min", o.s_min);
    o.s_max = number_or(j, "s_max", o.s_max);
    o.s_step = number_or(j, "s_step", o.s_step);
    o.r2_stretched = number_or(j, "r2_stretched", o.r2_stretched);
    o.expression_min = number_or(j, "expression_min", o.expression_min);
    o.r2_polynomial = number_or(j, "r2_polynomial", o.r2_polynomial);
    o.smooth_order = number_or(j, "smooth_order", o.smooth_order);
    o.min_points = integer_or(j, "min_points", o.min_points);
    o.min_magnitudes = integer_or(j, "min_magnitudes", o.min_magnitudes);
    o.min_decades = number_or(j, "min_decades", o.min_decades);
    if (!(o.s_min >= 1.0 && o.s_max > o.s_min && o.s_step > 0.0)) throw ConfigError("fit s-grid is invalid");
    return o;
}

std::vector<std::vector<double>> points_from_json(const json& j, int dim, const char* what) {
    if (!j.is_array() || j.empty()) throw ConfigError(std::string(what) + " must be a nonempty list of points");
    std::vector<std::vector<double>> out;
    for (const auto& p : j) {
        auto v = vector_of(p, what);
        if (static_cast<int>(v.size()) != dim)
            throw ConfigError(std::string(what) + " points must have dimension " + std::to_string(dim));
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<std::vector<double>> directions_from_json(const json& j, int m) {
    std::vector<std::vector<double>> dirs;
    if (j.is_null()) {
        for (int k = 0; k < m; ++k)
            for (double s : {1.0, -1.0}) {
                std::vector<double> d(m, 0.0);
                d[k] = s;
                dirs.push_back(d);
            }
        return dirs;
    }
    for (auto d : points_from_json(j, m, "directions")) {
        const double nrm = norm(d);
        if (nrm == 0.0) throw ConfigError("directions must be nonzero");
        for (double& v : d) v /= nrm;
        dirs.push_back(std::move(d));
    }
    return dirs;
}

} // namespace hypofbi::app
