#include "selftest.hpp"

#include "fixtures.hpp"

#include "hypofbi/hypofbi.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>

namespace hypofbi::app {

namespace {

std::string fmt(const char* f, ...) {
    char buf[256];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

class Suite {
public:
    explicit Suite(std::string name) { r_.name = std::move(name); }

    void check(bool ok, const std::function<std::string()>& what) {
        ++r_.checks;
        if (!ok && r_.passed) {
            r_.passed = false;
            r_.detail = what();
        }
    }

    SuiteResult done(std::string summary = {}) {
        if (r_.passed) r_.detail = std::move(summary);
        return r_;
    }

private:
    SuiteResult r_;
};

std::vector<double> uniform_point(std::mt19937_64& rng, int dim, double lo, double hi) {
    std::uniform_real_distribution<double> U(lo, hi);
    std::vector<double> p(dim);
    for (double& v : p) v = U(rng);
    return p;
}

CVec cone_vector(std::mt19937_64& rng, int m, double kappa) {
    std::normal_distribution<double> N;
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<double> re(m), im(m);
    for (int k = 0; k < m; ++k) re[k] = N(rng), im[k] = N(rng);
    const double nre = norm(re), nim = norm(im);
    const double target = kappa * nre * U(rng);
    CVec z(m);
    for (int k = 0; k < m; ++k) z[k] = {re[k], nim > 0 ? im[k] * target / nim : 0.0};
    return z;
}

SuiteResult expr_suite(std::mt19937_64& rng) {
    Suite s("expr");
    const int m = 2, n = 2;
    double worst_rel = 0.0;
    for (int i = 0; i < 200; ++i) {
        const Expr e = random_expr(rng, 6, m, n);
        const std::string text = e.print();
        s.check(parse(text) == e, [&] { return "parse(print(e)) differs for " + text; });
        const auto x = uniform_point(rng, m, -1.0, 1.0), t = uniform_point(rng, n, -1.0, 1.0);
        const Jet j1 = jet(e, x, t, 1);
        const double h = 1e-5;
        for (int v = 0; v < m + n; ++v) {
            auto xp = x, xm = x, tp = t, tm = t;
            if (v < m) xp[v] += h, xm[v] -= h;
            else tp[v - m] += h, tm[v - m] -= h;
            const double fd = (e.eval(xp, tp) - e.eval(xm, tm)) / (2.0 * h);
            const double d = v < m ? j1.dx(v) : j1.dt(v - m);
            const double rel = std::abs(d - fd) / std::max({std::abs(d), std::abs(j1.value), 1.0});
            worst_rel = std::max(worst_rel, rel);
            s.check(rel <= 1e-6, [&] { return fmt("jet vs finite difference rel %.2e on ", rel) + text; });
        }
        const Jet j3 = jet(e, x, t, 3), j2 = jet(e, x, t, 2);
        const Jet cut = j3.truncated(2);
        s.check(cut.value == j2.value && cut.partials == j2.partials,
                [&] { return "jet truncation differs from the lower-order jet for " + text; });
    }
    return s.done(fmt("200 expressions, worst jet/FD rel %.1e", worst_rel));
}

SuiteResult structure_suite(std::mt19937_64& rng, int threads) {
    Suite s("structure");
    for (const auto& nc : shipped_charts()) {
        const Chart& c = nc.chart;
        for (int i = 0; i < 20; ++i) {
            const auto x = uniform_point(rng, c.m(), -1, 1), xp = uniform_point(rng, c.m(), -1, 1);
            const auto t = uniform_point(rng, c.n(), -1, 1), xi = uniform_point(rng, c.m(), -5, 5);
            const Covector cov = rt_covector(c, x, t, xi);
            bool same = true;
            for (int k = 0; k < c.m(); ++k) same = same && cov.zeta[k] == cplx(xi[k], 0.0);
            s.check(same, [&] { return "rt_covector is not the identity on " + nc.name; });
            const CVec z = z_eval(c, x, t), zp = z_eval(c, xp, t);
            bool sep = true;
            for (int k = 0; k < c.m(); ++k) sep = sep && (z[k] - zp[k]) == cplx(x[k] - xp[k], 0.0);
            s.check(sep, [&] { return "Z(x,t) - Z(x',t) != x - x' on " + nc.name; });
        }
    }
    std::uniform_real_distribution<double> L(0.1, 10.0);
    std::uniform_int_distribution<int> M(1, 3);
    for (int i = 0; i < 1000; ++i) {
        const CVec z = cone_vector(rng, M(rng), 0.9);
        const double lam = L(rng);
        CVec zl = z;
        for (auto& v : zl) v *= lam;
        const cplx b = bracket(z), bl = bracket(zl);
        s.check(std::abs(bl - lam * b) <= 1e-12 * std::abs(lam * b), [&] { return std::string("bracket not homogeneous"); });
        const cplx sq = bilinear_square(z);
        s.check(std::abs(b * b - sq) <= 1e-12 * std::abs(sq), [&] { return std::string("bracket^2 != zeta.zeta"); });
    }
    int violations = 0;
    for (double kappa : {0.25, 0.5, 0.9})
        for (int i = 0; i < 10000; ++i)
            if (!bracket_bound_check(cone_vector(rng, M(rng), kappa), kappa).ok) ++violations;
    s.check(violations == 0, [&] { return fmt("%d bracket-bound violations", violations); });
    for (const auto& nc : shipped_charts()) {
        std::vector<std::vector<double>> ts{std::vector<double>(nc.chart.n(), 0.3)}, xs, dirs{{1.0}, {-1.0}};
        for (int i = 0; i < 7; ++i) xs.push_back({-0.9 + 0.3 * i});
        const PositionDiagnostics d = well_positioned_scan(nc.chart, 0.9, ts, xs, dirs, threads);
        s.check(std::abs(d.c_hat - 1.0) <= 1e-12, [&] { return fmt("c_hat = %.15g on ", d.c_hat) + nc.name; });
    }
    return s.done("tube identities, 3x10^4 cone samples, c_hat = 1 on every tube");
}

SuiteResult fbi_suite(std::mt19937_64& rng) {
    Suite s("fbi");
    std::normal_distribution<double> N;
    double worst_delta = 0.0;
    for (int m = 1; m <= 3; ++m)
        for (int i = 0; i < 1000; ++i) {
            CVec z(m);
            for (auto& v : z) v = {N(rng), N(rng)};
            const CVec zeta = cone_vector(rng, m, 0.9);
            const cplx a = delta_factor(z, zeta), b = delta_factor_dense(z, zeta);
            const double rel = std::abs(a - b) / std::abs(b);
            worst_delta = std::max(worst_delta, rel);
            s.check(rel < 1e-12, [&] { return fmt("delta closed form vs determinant rel %.2e (m=%d)", rel, m); });
        }
    for (int m = 1; m <= 3; ++m)
        for (double lam : {0.5, 1.0, 3.0}) {
            Expr sum;
            for (int k = 0; k < m; ++k) sum = sum + Expr::x(k) * Expr::x(k);
            const Expr g = exp(Expr::constant(-lam) * sum);
            for (const auto& alpha : multi_indices(m, 4)) {
                Expr d = g;
                for (int k = 0; k < m; ++k)
                    for (int r = 0; r < alpha[k]; ++r) d = d.diff_x(k);
                for (int i = 0; i < 5; ++i) {
                    const auto x = uniform_point(rng, m, -1.5, 1.5);
                    const double sym = d.eval(x, {}), closed = gaussian_derivative(alpha, lam, x);
                    const double rel = std::abs(sym - closed) / std::max(std::abs(sym), 1e-12);
                    s.check(rel < 1e-8, [&] { return fmt("gaussian derivative rel %.2e (m=%d, lambda=%g)", rel, m, lam); });
                }
            }
        }
    double worst_identity = 0.0;
    for (const auto& nc : shipped_charts())
        for (int i = 0; i < 100; ++i) {
            const auto t = uniform_point(rng, nc.chart.n(), -1, 1);
            const auto x = uniform_point(rng, 1, -1, 1), xp = uniform_point(rng, 1, -1, 1),
                       xpp = uniform_point(rng, 1, -1, 1);
            const SumIdentity r = gaussian_sum_identity_residual(nc.chart, t, x, xp, xpp);
            worst_identity = std::max(worst_identity, r.residual / (1.0 + r.lhs_abs));
            s.check(r.residual < 1e-12 * (1.0 + r.lhs_abs),
                    [&] { return fmt("two-Gaussian identity residual %.2e on ", r.residual) + nc.name; });
        }

    // linearity and conjugate symmetry on the t^2 tube
    const Chart& tube = shipped_chart("tube_t2");
    const Cutoff chi{{0.0}, 0.5, 1.0};
    const QuadratureGrid grid = support_grid(chi, 40.0, 8);
    const TestSolution u = make_expr_solution(tube, parse("exp(-x^2)*cos(3*x)"), std::nullopt, {});
    const TestSolution v = make_expr_solution(tube, parse("x^3 - t*x"), parse("sin(x+t)"), {});
    const cplx a(0.7, -1.3), b(-2.1, 0.4);
    Field w{[&](std::span<const double> x, std::span<const double> t) { return a * u(x, t) + b * v(x, t); }, {}};
    for (double xi : {3.0, -11.0, 37.0}) {
        const double x0[1] = {0.2}, t0[1] = {0.4}, xiv[1] = {xi};
        const Covector cov = rt_covector(tube, x0, t0, xiv);
        const FBIValue fu = fbi_transform(tube, u.field, chi, t0, cov.z, cov.zeta, 1.0, grid);
        const FBIValue fv = fbi_transform(tube, v.field, chi, t0, cov.z, cov.zeta, 1.0, grid);
        const FBIValue fw = fbi_transform(tube, w, chi, t0, cov.z, cov.zeta, 1.0, grid);
        const double scale = std::abs(a) * fu.abs_sum + std::abs(b) * fv.abs_sum;
        s.check(std::abs(fw.value - (a * fu.value + b * fv.value)) <= 1e-13 * scale,
                [&] { return fmt("transform not linear at xi = %g", xi); });
        const double mxi[1] = {-xi};
        const Covector cm = rt_covector(tube, x0, t0, mxi);
        const FBIValue fm = fbi_transform(tube, u.field, chi, t0, cm.z, cm.zeta, 1.0, grid);
        s.check(std::abs(fm.value - std::conj(fu.value)) <= 1e-13 * fu.abs_sum,
                [&] { return fmt("conjugate symmetry fails at xi = %g", xi); });
    }

    // u = 1 on the flat chart with a wide plateau: 1/2 sqrt(pi/xi) e^{-xi/4}
    const Chart wide(1, 1, {parse("0")}, true, Box{{{-8.0, 8.0}}}, Box{{{-1.0, 1.0}}});
    const Cutoff big{{0.0}, 6.0, 7.0};
    const QuadratureGrid wgrid = support_grid(big, 12.0, 8);
    const TestSolution one = make_holomorphic_composite(wide, {1.0});
    for (double xi : {1.0, 4.0, 10.0}) {
        const double x0[1] = {0.0}, t0[1] = {0.0}, xiv[1] = {xi};
        const Covector cov = rt_covector(wide, x0, t0, xiv);
        const cplx f = fbi_transform(wide, one.field, big, t0, cov.z, cov.zeta, 1.0, wgrid).value;
        const double exact = 0.5 * std::sqrt(std::numbers::pi / xi) * std::exp(-xi / 4.0);
        s.check(std::abs(f - exact) <= 1e-8 * exact, [&] { return fmt("u = 1 transform rel error %.2e at xi = %g",
                                                                      std::abs(f - exact) / exact, xi); });
    }
    return s.done(fmt("delta worst rel %.1e, identity worst %.1e", worst_delta, worst_identity));
}

SuiteResult moment_suite() {
    Suite s("gaussian-moments");
    const Chart& t2 = shipped_chart("tube_t2");
    const Chart t2m2(2, 1, {parse("t^2"), parse("t")}, true, Box{{{-1, 1}, {-1, 1}}}, Box{{{-1, 1}}});
    for (cplx omega : {cplx(1.0, 0.0), cplx(4.0, 1.5)}) {
        const double t[1] = {0.5};
        const CVec z1 = z_eval(t2, std::vector<double>{0.1}, t);
        const MomentResidual r1 = gaussian_moment_check(t2, t, omega, z1, {1});
        s.check(r1.mass < 1e-8 && r1.odd < 1e-8, [&] { return fmt("m=1 moments %.2e / %.2e", r1.mass, r1.odd); });
        const CVec z2 = z_eval(t2m2, std::vector<double>{0.1, -0.2}, t);
        for (std::vector<int> poly : {std::vector<int>{1, 0}, std::vector<int>{0, 1}, std::vector<int>{1, 1}}) {
            const MomentResidual r2 = gaussian_moment_check(t2m2, t, omega, z2, poly);
            s.check(r2.mass < 1e-8 && r2.odd < 1e-8, [&] { return fmt("m=2 moments %.2e / %.2e", r2.mass, r2.odd); });
        }
    }
    return s.done("unit mass and odd moments below 1e-8, m = 1, 2");
}

SuiteResult corpus_suite() {
    Suite s("corpus");
    double worst_order = 10.0;
    for (const auto& nc : shipped_charts()) {
        const Chart& c = nc.chart;
        const TestSolution u = make_holomorphic_composite(c, {cplx(0.3, 0.1), 1.0, cplx(0.0, -0.5), 0.25, cplx(0.1, 0.2)});
        auto max_residual = [&](double h) {
            double e = 0.0;
            for (int i = 0; i < 20; ++i)
                for (int j = 0; j < 20; ++j) {
                    const double x[1] = {-0.9 + 1.8 * i / 19.0};
                    std::vector<double> t{-0.9 + 1.8 * j / 19.0};
                    if (c.n() == 2) t.push_back(0.9 - 1.8 * ((7 * j) % 20) / 19.0);
                    for (int k = 0; k < c.n(); ++k) e = std::max(e, std::abs(apply_L(c, u, k, x, t, h)));
                }
            return e;
        };
        const double e1 = max_residual(2e-3), e2 = max_residual(1e-3);
        if (e1 < 1e-13) continue;  // L u vanishes identically in floating point (flat chart)
        const double order = std::log2(e1 / e2);
        worst_order = std::min(worst_order, order);
        s.check(order >= 1.9, [&] { return fmt("apply_L convergence order %.2f on ", order) + nc.name; });
    }
    for (double sv : {1.5, 2.0, 3.0}) {
        double prev = 0.0;
        bool mono = true, zero = true;
        for (int i = 1; i <= 400; ++i) {
            const double g = gevrey_flat_profile(sv, 2.0 * i / 400.0);
            mono = mono && g >= prev;
            prev = g;
            zero = zero && gevrey_flat_profile(sv, -2.0 * i / 400.0) == 0.0;
        }
        zero = zero && gevrey_flat_profile(sv, 0.0) == 0.0;
        s.check(mono && zero, [&] { return fmt("gevrey_flat(%g) profile not monotone / not zero on y <= 0", sv); });
    }
    // t-independent u: L_j u = -i sum_k phi_{k,t_j} u_x
    for (const auto& nc : shipped_charts()) {
        const Chart& c = nc.chart;
        const Expr ue = parse("sin(2*x) + x^3");
        const Expr ux = ue.diff_x(0);
        const TestSolution u = make_expr_solution(c, ue, std::nullopt, {});
        for (int i = 0; i < 10; ++i) {
            const double x[1] = {-0.8 + 0.16 * i};
            const std::vector<double> t(c.n(), 0.35 - 0.07 * i);
            for (int j = 0; j < c.n(); ++j) {
                const cplx closed = cplx(0.0, -1.0) * c.dphi_dt(0, j, x, t) * ux.eval(x, t);
                const cplx fd = apply_L(c, u, j, x, t, 1e-4);
                s.check(std::abs(fd - closed) <= 1e-6, [&] { return "apply_L closed form mismatch on " + nc.name; });
            }
        }
    }
    return s.done(fmt("worst apply_L order %.2f", worst_order));
}

SuiteResult classify_suite(std::mt19937_64& rng) {
    Suite s("classify");
    const auto mags = log_ladder(4.0, 400.0, 20);
    auto series = [&](const std::function<double(double)>& f) {
        std::vector<double> v;
        for (double x : mags) v.push_back(f(x));
        return v;
    };
    for (double sv : {1.0, 1.5, 2.0, 2.5, 3.0, 3.5}) {
        const double eps = 0.8;
        const DecayFit f = fit_decay(mags, series([&](double x) { return 5.0 * std::exp(-eps * std::pow(x, 1.0 / sv)); }));
        s.check(f.model == DecayModel::StretchedExp && std::abs(f.s_hat - sv) <= 0.05 && std::abs(f.eps_hat - eps) <= 0.05,
                [&] { return fmt("noiseless recovery s=%g gave %s s_hat=%.3f eps=%.3f", sv, to_string(f.model).c_str(),
                                 f.s_hat, f.eps_hat); });
    }
    const DecayFit p = fit_decay(mags, series([](double x) { return 3.0 * std::pow(1.0 + x, -4.0); }));
    s.check(p.model == DecayModel::Polynomial && std::abs(p.k_hat - 4.0) <= 0.2,
            [&] { return fmt("polynomial recovery gave %s k=%.3f", to_string(p.model).c_str(), p.k_hat); });

    std::uniform_real_distribution<double> noise(-0.01, 0.01), scale(-5.0, 5.0);
    for (double sv : {1.0, 1.5, 2.0, 3.0}) {
        auto v = series([&](double x) { return std::exp(-1.2 * std::pow(x, 1.0 / sv)); });
        for (double& y : v) y *= 1.0 + noise(rng);
        const DecayFit f = fit_decay(mags, v);
        s.check(f.model == DecayModel::StretchedExp && std::abs(f.s_hat - sv) <= 0.1,
                [&] { return fmt("1%% noise recovery s=%g gave s_hat=%.3f", sv, f.s_hat); });
        const double a = std::exp(scale(rng));
        auto w = v;
        for (double& y : w) y *= a;
        const DecayFit g = fit_decay(mags, w);
        s.check(g.model == f.model && g.s_hat == f.s_hat && std::abs(g.eps_hat - f.eps_hat) <= 1e-9 * f.eps_hat &&
                    std::abs(g.logC_hat - f.logC_hat - std::log(a)) <= 1e-9 * (1.0 + std::abs(f.logC_hat)),
                [&] { return fmt("fit is not scale-equivariant (a = %g)", a); });
    }

    std::vector<SeriesFit> fits;
    const double ss[4] = {1.0, 1.3, 2.2, 1.7};
    for (int d = 0; d < 4; ++d)
        fits.push_back({0, d, fit_decay(mags, series([&](double x) { return std::exp(-std::pow(x, 1.0 / ss[d])); }))});
    const RegularityReport r = classify(fits);
    s.check(r.label == RegularityReport::Label::Gevrey && std::abs(r.s_hat - 2.2) <= 0.05,
            [&] { return "max rule gave " + r.label_string(); });
    auto perm = fits;
    std::shuffle(perm.begin(), perm.end(), rng);
    const RegularityReport rp = classify(perm);
    s.check(rp.label == r.label && rp.s_hat == r.s_hat, [&] { return std::string("classifier depends on direction order"); });
    fits[2].fit = fit_decay(mags, series([](double x) { return std::pow(1.0 + x, -3.0); }));
    s.check(classify(fits).label == RegularityReport::Label::NonSmooth,
            [&] { return std::string("one polynomial direction must make the verdict non-smooth"); });
    return s.done("model recovery, noise, scaling and ordering properties");
}

SuiteResult inversion_suite() {
    Suite s("inversion");
    const Chart& tube = shipped_chart("tube_t2");
    const Cutoff chi{{0.0}, 0.5, 1.0};
    const QuadratureGrid grid = QuadratureGrid::cube(chi.center, chi.rho_outer, 16, 4);
    const TestSolution zero = make_holomorphic_composite(tube, {0.0});
    const double t[1] = {0.0};
    const InversionField f(tube, zero.field, chi, t, grid, symmetric_xi_grid(grid.xi_cap(), 8, 4), {}, 1);
    const double eps[2] = {0.1, 0.01};
    for (double x : {-0.2, 0.0, 0.2})
        for (cplx v : f.invert(x, eps)) s.check(v == 0.0, [&] { return std::string("u = 0 does not invert to 0"); });
    return s.done("u = 0 reconstructs to 0");
}

SuiteResult propagate_suite() {
    Suite s("propagate");
    const double lo[2] = {-1.0, -1.0}, hi[2] = {1.0, 1.0};
    const TGrid grid = TGrid::uniform(lo, hi, 0.05);
    const double x0[1] = {0.0}, t0[2] = {0.0, 0.0};
    std::string sizes;
    for (const auto& nc : shipped_charts()) {
        if (nc.defining.empty()) continue;
        const Chart& c = nc.chart;
        const char* name = nc.name.c_str();
        const FiberComponent base = fiber_component(c, x0, t0, grid);
        std::set<std::vector<int>> ref(base.indices.begin(), base.indices.end());
        sizes += fmt(" %s=%zu", name, base.points.size());
        for (std::size_t i = 0; i < base.points.size(); i += 7) {
            const FiberComponent other = fiber_component(c, x0, base.points[i], grid, {}, base.level);
            const std::set<std::vector<int>> got(other.indices.begin(), other.indices.end());
            s.check(got == ref, [&] { return std::string("fiber depends on the seed on ") + name; });
        }
        const std::vector<Expr> f{parse(nc.defining)};
        for (const auto& p : zero_set_points(nc.name, 25)) {
            s.check(characteristic_member(f, p, 1e-9) && characteristic_member(c.phi(), p, 1e-9),
                    [&] { return std::string("zero-set point not characteristic on ") + name; });
        }
    }
    const Chart& tube = shipped_chart("tube_t2");
    const Cutoff chi{{0.0}, 0.5, 1.0};
    const QuadratureGrid qg = support_grid(chi, 100.0, 8);
    const TestSolution u = make_holomorphic_exp(tube, 20);
    const double t[1] = {0.2}, dir[1] = {1.0};
    const DifferenceFit d = decay_difference(tube, u.field, chi, qg, t, t, x0, dir, log_ladder(4.0, 100.0, 12));
    s.check(d.identical && std::isinf(d.rate), [&] { return std::string("t = t' must give the identical sentinel"); });
    return s.done("seed-invariant fibers:" + sizes);
}

} // namespace

std::vector<SuiteResult> run_suites(std::uint64_t seed, int threads) {
    std::mt19937_64 rng(seed);
    std::vector<SuiteResult> out;
    auto guarded = [&](const char* name, const std::function<SuiteResult()>& f) {
        try {
            out.push_back(f());
        } catch (const std::exception& e) {
            out.push_back({name, false, 0, std::string("threw: ") + e.what()});
        }
    };
    guarded("expr", [&] { return expr_suite(rng); });
    guarded("structure", [&] { return structure_suite(rng, threads); });
    guarded("fbi", [&] { return fbi_suite(rng); });
    guarded("gaussian-moments", [&] { return moment_suite(); });
    guarded("corpus", [&] { return corpus_suite(); });
    guarded("classify", [&] { return classify_suite(rng); });
    guarded("inversion", [&] { return inversion_suite(); });
    guarded("propagate", [&] { return propagate_suite(); });
    return out;
}

} // namespace hypofbi::app
