#include "hypofbi/corpus.hpp"

#include "hypofbi/error.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <memory>

namespace hypofbi {

namespace {

constexpr cplx I(0.0, 1.0);

void require_tube(const Chart& chart, const char* what) {
    if (!chart.tube()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " needs a tube chart");
}

void require_axis(const Chart& chart, int axis) {
    if (axis < 0 || axis >= chart.m()) throw Error(ErrorCode::InvalidArgument, "axis outside 0..m-1");
}

cplx z_component(const Chart& chart, int axis, std::span<const double> x, std::span<const double> t) {
    if (chart.tube()) return cplx(x[axis], chart.phi()[axis].eval(x, t));
    return z_eval(chart, x, t)[axis];
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

} // namespace

std::string RegularityLabel::str() const {
    switch (type) {
    case Type::AnalyticVector: return "analytic-vector";
    case Type::Gevrey: return "gevrey(" + format_number(s) + ")";
    case Type::NonSmooth: return "non-smooth";
    }
    return "unknown";
}

TestSolution make_holomorphic_composite(const Chart& chart, std::vector<cplx> coefficients, int axis) {
    require_axis(chart, axis);
    if (coefficients.empty()) coefficients.push_back(0.0);
    auto coef = std::make_shared<const std::vector<cplx>>(std::move(coefficients));
    TestSolution s;
    s.kind = SolutionKind::HolomorphicComposite;
    s.label = {RegularityLabel::Type::AnalyticVector, 1.0};
    s.field.eval = [chart, coef, axis](std::span<const double> x, std::span<const double> t) {
        const cplx z = z_component(chart, axis, x, t);
        cplx acc = 0.0;
        for (std::size_t k = coef->size(); k-- > 0;) acc = acc * z + (*coef)[k];
        return acc;
    };
    s.forcing = [](int, std::span<const double>, std::span<const double>) { return cplx(0.0); };
    s.description = "F(Z_" + std::to_string(axis + 1) + "), polynomial of degree " + std::to_string(coef->size() - 1);
    return s;
}

TestSolution make_holomorphic_exp(const Chart& chart, int degree, int axis) {
    if (degree < 0) throw Error(ErrorCode::InvalidArgument, "series degree must be non-negative");
    std::vector<cplx> c(degree + 1);
    double f = 1.0;
    for (int k = 0; k <= degree; ++k) {
        if (k > 0) f /= k;
        c[k] = f;
    }
    TestSolution s = make_holomorphic_composite(chart, std::move(c), axis);
    s.description = "exp(Z_" + std::to_string(axis + 1) + ") truncated at degree " + std::to_string(degree);
    return s;
}

double gevrey_flat_profile(double s, double y) {
    if (y <= 0.0) return 0.0;
    return std::exp(-std::pow(y, -1.0 / (s - 1.0)));
}

double gevrey_flat_profile_derivative(double s, double y) {
    if (y <= 0.0) return 0.0;
    const double p = 1.0 / (s - 1.0);
    return gevrey_flat_profile(s, y) * p * std::pow(y, -p - 1.0);
}

TestSolution make_gevrey_flat(const Chart& chart, double s, int axis, int sign, std::optional<Expr> drift) {
    if (!(s > 1.0)) throw Error(ErrorCode::InvalidArgument, "gevrey_flat needs s > 1");
    require_axis(chart, axis);
    if (sign != 1 && sign != -1) throw Error(ErrorCode::InvalidArgument, "sign must be +1 or -1");
    if (drift && (drift->x_arity() > chart.m() || drift->t_arity() > chart.n()))
        throw Error(ErrorCode::InvalidArgument, "drift references variables beyond (m, n)");
    TestSolution out;
    out.kind = SolutionKind::GevreyFlat;
    out.label = {RegularityLabel::Type::Gevrey, s};
    const double sg = sign;
    out.field.eval = [s, axis, sg, drift](std::span<const double> x, std::span<const double> t) {
        double v = gevrey_flat_profile(s, sg * x[axis]);
        if (drift) v += drift->eval(x, t);
        return cplx(v, 0.0);
    };
    if (chart.tube()) {
        const int m = chart.m(), n = chart.n();
        std::vector<Expr> ddt, ddx;
        if (drift) {
            for (int j = 0; j < n; ++j) ddt.push_back(drift->diff_t(j));
            for (int k = 0; k < m; ++k) ddx.push_back(drift->diff_x(k));
        }
        out.forcing = [chart, s, axis, sg, ddt, ddx](int j, std::span<const double> x, std::span<const double> t) {
            const int m = chart.m();
            cplx f = 0.0;
            if (!ddt.empty()) f += ddt[j].eval(x, t);
            for (int k = 0; k < m; ++k) {
                double dxk = k == axis ? sg * gevrey_flat_profile_derivative(s, sg * x[axis]) : 0.0;
                if (!ddx.empty()) dxk += ddx[k].eval(x, t);
                f -= I * chart.dphi_dt(k, j, x, t) * dxk;
            }
            return f;
        };
    }
    out.description = "g_" + format_number(s) + "(" + (sign > 0 ? "" : "-") + "x" + std::to_string(axis + 1) + ")" +
                      (drift ? " + " + drift->print() : "");
    return out;
}

TestSolution make_step(const Chart& chart, int axis, double x0, double rho_outer) {
    require_axis(chart, axis);
    const auto [lo, hi] = chart.V().ranges[axis];
    const double margin = rho_outer * 1e-3;
    if (!(x0 > lo + margin && x0 < hi - margin))
        throw Error(ErrorCode::InvalidArgument, "step position too close to the boundary of V");
    TestSolution out;
    out.kind = SolutionKind::Step;
    out.label = {RegularityLabel::Type::NonSmooth, 0.0};
    out.field.eval = [axis, x0](std::span<const double> x, std::span<const double>) {
        return cplx(x[axis] >= x0 ? 1.0 : 0.0, 0.0);
    };
    out.field.jumps.push_back({axis, x0});
    out.description = "indicator of x" + std::to_string(axis + 1) + " >= " + format_number(x0);
    return out;
}

TestSolution make_expr_solution(const Chart& chart, Expr re, std::optional<Expr> im, RegularityLabel label) {
    auto check = [&](const Expr& e) {
        if (e.x_arity() > chart.m() || e.t_arity() > chart.n())
            throw Error(ErrorCode::InvalidArgument, "solution expression references variables beyond (m, n)");
    };
    check(re);
    if (im) check(*im);
    TestSolution out;
    out.kind = SolutionKind::Expression;
    out.label = label;
    out.field.eval = [re, im](std::span<const double> x, std::span<const double> t) {
        return cplx(re.eval(x, t), im ? im->eval(x, t) : 0.0);
    };
    if (chart.tube()) {
        const int m = chart.m(), n = chart.n();
        std::vector<Expr> rt, it, rx, ix;
        for (int j = 0; j < n; ++j) {
            rt.push_back(re.diff_t(j));
            it.push_back(im ? im->diff_t(j) : Expr());
        }
        for (int k = 0; k < m; ++k) {
            rx.push_back(re.diff_x(k));
            ix.push_back(im ? im->diff_x(k) : Expr());
        }
        out.forcing = [chart, rt, it, rx, ix](int j, std::span<const double> x, std::span<const double> t) {
            cplx f(rt[j].eval(x, t), it[j].eval(x, t));
            for (int k = 0; k < chart.m(); ++k)
                f -= I * chart.dphi_dt(k, j, x, t) * cplx(rx[k].eval(x, t), ix[k].eval(x, t));
            return f;
        };
    }
    out.description = re.print() + (im ? " + i*" + im->print() : "");
    return out;
}

cplx apply_L(const Chart& chart, const TestSolution& u, int j, std::span<const double> x,
             std::span<const double> t, double h) {
    require_tube(chart, "apply_L");
    if (j < 0 || j >= chart.n()) throw Error(ErrorCode::InvalidArgument, "L index outside 0..n-1");
    if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "finite-difference step must be positive");
    std::vector<double> xp(x.begin(), x.end()), tp(t.begin(), t.end());
    auto central = [&](std::vector<double>& v, int idx, const Box& box, const char* name) {
        const double c = v[idx];
        const auto [lo, hi] = box.ranges[idx];
        if (c - h < lo - 1e-12 || c + h > hi + 1e-12)
            throw Error(ErrorCode::Domain, std::string("finite-difference stencil leaves ") + name);
        v[idx] = c + h;
        const cplx up = u(xp, tp);
        v[idx] = c - h;
        const cplx dn = u(xp, tp);
        v[idx] = c;
        return (up - dn) / (2.0 * h);
    };
    cplx r = central(tp, j, chart.W(), "W");
    for (int k = 0; k < chart.m(); ++k) {
        const double dphi = chart.dphi_dt(k, j, x, t);
        if (dphi == 0.0) continue;
        r -= I * dphi * central(xp, k, chart.V(), "V");
    }
    return r;
}

GevreyEstimate gevrey_oracle(const std::function<double(double)>& u, int max_order, double a, double b,
                             int points) {
    if (max_order < 4 || max_order > 12)
        throw Error(ErrorCode::InvalidArgument, "gevrey_oracle needs 4 <= max_order <= 12");
    if (!(a < b) || points < 2) throw Error(ErrorCode::InvalidArgument, "bad oracle segment");
    std::vector<double> ys(points);
    for (int i = 0; i < points; ++i) ys[i] = a + (b - a) * i / (points - 1);

    GevreyEstimate est;
    double m0 = 0.0;
    for (double y : ys) m0 = std::max(m0, std::abs(u(y)));
    est.sup_norms.push_back(m0);
    std::vector<double> binom{1.0};
    int last_valid = -1;
    for (int k = 1; k <= max_order; ++k) {
        std::vector<double> next(k + 1, 1.0);
        for (int j = 1; j < k; ++j) next[j] = binom[j - 1] + binom[j];
        binom = next;
        const double h = 0.5 / k;
        double mk = 0.0;
        for (double y : ys) {
            double acc = 0.0;
            for (int j = 0; j <= k; ++j) {
                const double term = binom[j] * u(y + (0.5 * k - j) * h);
                acc += (j % 2 == 0) ? term : -term;
            }
            mk = std::max(mk, std::abs(acc));
        }
        mk /= std::pow(h, k);
        est.sup_norms.push_back(mk);
        const double noise = DBL_EPSILON * std::pow(2.0, k) * m0 / std::pow(h, k);
        const double prev = est.sup_norms[k - 1];
        if (prev > 0.0 && mk < 1e-6 * prev) {
            est.entire = true;
            break;
        }
        if (mk <= 100.0 * noise) {
            est.truncated = true;
            break;
        }
        last_valid = k;
    }
    if (est.entire || m0 == 0.0) {
        est.entire = true;
        est.s_hat = 1.0;
        est.s_raw = 1.0;
        est.fit_quality = 1.0;
        est.orders_used = 0;
        return est;
    }
    if (last_valid < 4) throw Error(ErrorCode::FitFailure, "too few derivative orders above round-off");
    // least squares in (k+1, log k!) for k = 3..last_valid
    double s11 = 0, s12 = 0, s22 = 0, r1 = 0, r2 = 0;
    std::vector<double> A1, A2, L;
    for (int k = 3; k <= last_valid; ++k) {
        const double a1 = k + 1.0, a2 = std::lgamma(k + 1.0), l = std::log(est.sup_norms[k]);
        A1.push_back(a1);
        A2.push_back(a2);
        L.push_back(l);
        s11 += a1 * a1;
        s12 += a1 * a2;
        s22 += a2 * a2;
        r1 += a1 * l;
        r2 += a2 * l;
    }
    const double det = s11 * s22 - s12 * s12;
    const double ca = (r1 * s22 - r2 * s12) / det;
    const double cs = (s11 * r2 - s12 * r1) / det;
    double sse = 0.0, mean = 0.0, sst = 0.0;
    for (double l : L) mean += l;
    mean /= static_cast<double>(L.size());
    for (std::size_t i = 0; i < L.size(); ++i) {
        const double r = L[i] - ca * A1[i] - cs * A2[i];
        sse += r * r;
        sst += (L[i] - mean) * (L[i] - mean);
    }
    est.orders_used = static_cast<int>(L.size());
    est.fit_quality = sst > 0.0 ? 1.0 - sse / sst : 1.0;
    est.s_raw = cs;
    est.s_hat = std::max(1.0, cs);
    return est;
}

} // namespace hypofbi
