#include "hypofbi/propagate.hpp"

#include "hypofbi/error.hpp"
#include "hypofbi/parallel.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>

namespace hypofbi {

TGrid TGrid::uniform(std::span<const double> lo, std::span<const double> hi, double step) {
    if (lo.size() != hi.size() || lo.empty()) throw Error(ErrorCode::InvalidArgument, "t-grid bounds differ in dimension");
    if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "t-grid step must be positive");
    TGrid g;
    g.step = step;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (!(hi[i] > lo[i])) throw Error(ErrorCode::InvalidArgument, "t-grid box is empty");
        g.lo.push_back(lo[i]);
        g.count.push_back(static_cast<int>(std::floor((hi[i] - lo[i]) / step + 1e-9)) + 1);
    }
    return g;
}

std::size_t TGrid::size() const {
    std::size_t n = 1;
    for (int c : count) n *= static_cast<std::size_t>(c);
    return n;
}

std::vector<double> TGrid::point(std::span<const int> index) const {
    std::vector<double> t(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) t[i] = lo[i] + step * index[i];
    return t;
}

std::size_t TGrid::flat(std::span<const int> index) const {
    std::size_t f = 0;
    for (std::size_t i = 0; i < count.size(); ++i) f = f * count[i] + index[i];
    return f;
}

std::vector<int> TGrid::unflat(std::size_t f) const {
    std::vector<int> idx(count.size());
    for (std::size_t i = count.size(); i-- > 0;) {
        idx[i] = static_cast<int>(f % count[i]);
        f /= count[i];
    }
    return idx;
}

FiberComponent fiber_component(const Chart& chart, std::span<const double> x0, std::span<const double> t0,
                               const TGrid& grid, const FiberOptions& opts,
                               std::optional<std::vector<double>> level) {
    if (!chart.tube()) throw Error(ErrorCode::InvalidArgument, "fiber enumeration needs a tube chart");
    const int n = chart.n(), m = chart.m();
    if (grid.dim() != n || static_cast<int>(t0.size()) != n)
        throw Error(ErrorCode::InvalidArgument, "t-grid dimension differs from n");
    std::vector<int> seed(n);
    for (int i = 0; i < n; ++i) {
        const double r = (t0[i] - grid.lo[i]) / grid.step;
        seed[i] = static_cast<int>(std::lround(r));
        if (seed[i] < 0 || seed[i] >= grid.count[i] || std::abs(r - seed[i]) * grid.step > 1e-9)
            throw Error(ErrorCode::InvalidArgument, "seed t0 is not a grid point");
    }
    FiberComponent fc;
    fc.step = grid.step;
    fc.adaptive = !(opts.tol > 0.0);
    fc.level = level ? *level : chart.phi_eval(x0, grid.point(seed));
    if (static_cast<int>(fc.level.size()) != m) throw Error(ErrorCode::InvalidArgument, "fiber level has wrong dimension");

    auto member = [&](const std::vector<int>& idx) {
        const std::vector<double> t = grid.point(idx);
        if (!chart.W().contains(t)) return false;
        for (int k = 0; k < m; ++k) {
            const double v = chart.phi()[k].eval(x0, t);
            double tol = opts.tol;
            if (fc.adaptive) {
                double g = 0.0;
                for (int j = 0; j < n; ++j) g += std::pow(chart.dphi_dt(k, j, x0, t), 2);
                tol = std::max(opts.tol_abs, opts.tol_factor * grid.step * std::sqrt(g));
            }
            if (std::abs(v - fc.level[k]) > tol) return false;
        }
        return true;
    };
    if (!member(seed)) throw Error(ErrorCode::EmptyFiber, "seed does not satisfy the fiber tolerance");

    std::vector<int> depth(grid.size(), -1);
    std::vector<char> tested(grid.size(), 0);
    std::deque<std::vector<int>> queue{seed};
    depth[grid.flat(seed)] = 0;
    tested[grid.flat(seed)] = 1;
    // neighbour offsets in {-1,0,1}^n minus the origin, in lexicographic order
    std::vector<std::vector<int>> offsets;
    {
        std::size_t total = 1;
        for (int i = 0; i < n; ++i) total *= 3;
        for (std::size_t c = 0; c < total; ++c) {
            std::vector<int> off(n);
            std::size_t r = c;
            bool zero = true;
            for (int i = n - 1; i >= 0; --i) {
                off[i] = static_cast<int>(r % 3) - 1;
                r /= 3;
                if (off[i] != 0) zero = false;
            }
            if (!zero) offsets.push_back(off);
        }
    }
    while (!queue.empty()) {
        const std::vector<int> cur = queue.front();
        queue.pop_front();
        const int d = depth[grid.flat(cur)];
        fc.path_length = std::max(fc.path_length, d);
        for (const auto& off : offsets) {
            std::vector<int> nb(n);
            bool inside = true;
            for (int i = 0; i < n; ++i) {
                nb[i] = cur[i] + off[i];
                if (nb[i] < 0 || nb[i] >= grid.count[i]) inside = false;
            }
            if (!inside) continue;
            const std::size_t f = grid.flat(nb);
            if (tested[f]) continue;
            tested[f] = 1;
            if (!member(nb)) continue;
            depth[f] = d + 1;
            queue.push_back(nb);
        }
    }
    for (std::size_t f = 0; f < grid.size(); ++f) {
        if (depth[f] < 0) continue;
        fc.indices.push_back(grid.unflat(f));
        fc.points.push_back(grid.point(fc.indices.back()));
    }
    if (fc.indices.size() <= 1)
        throw Error(ErrorCode::EmptyFiber, "fiber component has no grid neighbours (tolerance too small for the grid)");
    return fc;
}

namespace {

struct Line {
    double intercept = 0.0, slope = 0.0, sse = 0.0, r2 = 0.0;
};

Line least_squares(const std::vector<double>& X, const std::vector<double>& L) {
    const double n = static_cast<double>(X.size());
    double mx = 0.0, ml = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        mx += X[i];
        ml += L[i];
    }
    mx /= n;
    ml /= n;
    double sxx = 0.0, sxl = 0.0, sst = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        sxx += (X[i] - mx) * (X[i] - mx);
        sxl += (X[i] - mx) * (L[i] - ml);
        sst += (L[i] - ml) * (L[i] - ml);
    }
    Line l;
    l.slope = sxx > 0.0 ? sxl / sxx : 0.0;
    l.intercept = ml - l.slope * mx;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double r = L[i] - l.intercept - l.slope * X[i];
        l.sse += r * r;
    }
    l.r2 = sst > 0.0 ? std::clamp(1.0 - l.sse / sst, 0.0, 1.0) : 1.0;
    return l;
}

std::size_t leading_above(const std::vector<double>& v, const std::vector<double>& floor) {
    std::size_t k = 0;
    while (k < v.size() && v[k] > std::max(floor[k], kSampleFloor)) ++k;
    return k;
}

CVec scaled(std::span<const double> dir, double mag) {
    CVec z(dir.size());
    for (std::size_t i = 0; i < dir.size(); ++i) z[i] = mag * dir[i];
    return z;
}

} // namespace

double effective_rate(const DecayFit& fit, double xi) {
    switch (fit.model) {
    case DecayModel::StretchedExp: return fit.eps_hat / fit.s_hat * std::pow(xi, 1.0 / fit.s_hat - 1.0);
    case DecayModel::Polynomial: return fit.k_hat / (1.0 + xi);
    case DecayModel::Bounded: return 0.0;
    }
    return 0.0;
}

DifferenceFit decay_difference(const Chart& chart, const Field& u, const Cutoff& chi, const QuadratureGrid& grid,
                               std::span<const double> t, std::span<const double> tprime, std::span<const double> x,
                               std::span<const double> direction, std::span<const double> ladder,
                               const FitOptions& opts) {
    if (!chart.tube()) throw Error(ErrorCode::InvalidArgument, "decay_difference needs a tube chart");
    chi.validate(chart);
    if (chi(x) != 1.0) throw Error(ErrorCode::InvalidArgument, "x must lie in the cutoff plateau");
    if (ladder.size() < 3) throw Error(ErrorCode::InvalidArgument, "ladder needs at least 3 magnitudes");
    if (ladder.back() > grid.xi_cap() * (1.0 + 1e-12))
        throw Error(ErrorCode::Undersampled, "ladder exceeds the quadrature cap |xi|_max");
    const Slice st(chart, u, chi, t, grid);
    const Slice stp(chart, u, chi, tprime, grid);
    const CVec z = z_eval(chart, x, t);
    DifferenceFit out;
    const double half_m = 0.5 * chart.m();
    std::vector<double> scaled_t, scaled_tp, floor_t, floor_tp;
    for (double mag : ladder) {
        const CVec zeta = scaled(direction, mag);
        const FBIValue a = st.transform(z, zeta);
        const FBIValue b = stp.transform(z, zeta);
        out.magnitudes.push_back(mag);
        out.difference.push_back(std::abs(a.value - b.value));
        out.floor.push_back(100.0 * DBL_EPSILON * (a.abs_sum + b.abs_sum));
        out.abs_t.push_back(std::abs(a.value));
        out.abs_tprime.push_back(std::abs(b.value));
        const double sc = std::pow(norm(zeta), half_m);
        scaled_t.push_back(std::abs(a.value) * sc);
        scaled_tp.push_back(std::abs(b.value) * sc);
        floor_t.push_back(100.0 * DBL_EPSILON * a.abs_sum * sc);
        floor_tp.push_back(100.0 * DBL_EPSILON * b.abs_sum * sc);
    }
    const std::size_t k = leading_above(out.difference, out.floor);
    out.points_used = static_cast<int>(k);
    if (k < 3) {
        out.identical = true;
        out.rate = std::numeric_limits<double>::infinity();
    } else {
        std::vector<double> X(out.magnitudes.begin(), out.magnitudes.begin() + k), L;
        for (std::size_t i = 0; i < k; ++i) L.push_back(std::log(out.difference[i]));
        const Line l = least_squares(X, L);
        out.slope = l.slope;
        out.intercept = l.intercept;
        out.r2 = l.r2;
        out.rate = -l.slope;
    }
    try {
        out.fit_t = fit_decay(ladder, scaled_t, opts, floor_t);
        out.fit_tprime = fit_decay(ladder, scaled_tp, opts, floor_tp);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::FitFailure) throw;
    }
    return out;
}

Field annulus_field(const Field& g, std::span<const double> center, double rho, double transition) {
    if (!(rho > 0.0 && transition > 0.0)) throw Error(ErrorCode::InvalidArgument, "annulus needs rho, transition > 0");
    Cutoff inner{{center.begin(), center.end()}, rho, rho + transition};
    Field f;
    f.jumps = g.jumps;
    f.eval = [g, inner](std::span<const double> x, std::span<const double> t) {
        const double c = 1.0 - inner(x);
        if (c == 0.0) return cplx(0.0);
        return c * g.eval(x, t);
    };
    return f;
}

AnnulusFit annulus_decay_check(const Chart& chart, const Field& f, const Cutoff& chi, const QuadratureGrid& grid,
                               double rho, std::span<const double> t, std::span<const double> x,
                               std::span<const double> direction, std::span<const double> ladder, double c0) {
    chi.validate(chart);
    if (!(rho > 0.0)) throw Error(ErrorCode::InvalidArgument, "rho must be positive");
    if (norm(std::vector<double>(direction.begin(), direction.end())) == 0.0)
        throw Error(ErrorCode::InvalidArgument, "direction must be nonzero");
    double dx = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) dx += std::pow(x[k] - chi.center[k], 2);
    if (std::sqrt(dx) > 0.5 * rho + 1e-12) throw Error(ErrorCode::InvalidArgument, "x must lie in B_{rho/2}");
    if (ladder.size() < 3) throw Error(ErrorCode::InvalidArgument, "ladder needs at least 3 magnitudes");
    if (ladder.back() > grid.xi_cap() * (1.0 + 1e-12))
        throw Error(ErrorCode::Undersampled, "ladder exceeds the quadrature cap |xi|_max");

    const Slice slice(chart, f, chi, t, grid);
    const std::size_t m = static_cast<std::size_t>(chart.m());
    for (std::size_t i = 0; i < slice.active_nodes(); ++i) {
        double r2 = 0.0;
        for (std::size_t k = 0; k < m; ++k) r2 += std::pow(slice.nodes()[i * m + k] - chi.center[k], 2);
        if (std::sqrt(r2) < rho && slice.density()[i] != 0.0)
            throw Error(ErrorCode::InvalidArgument, "support leakage: f is nonzero inside B_rho");
    }
    AnnulusFit out;
    out.bound = -c0 * rho * rho / 16.0;
    const Covector base = rt_covector(chart, x, t, direction);
    std::vector<double> floor;
    for (double mag : ladder) {
        std::vector<double> xi(direction.begin(), direction.end());
        for (double& v : xi) v *= mag;
        const Covector cov = rt_covector(chart, x, t, xi);
        const FBIValue v = slice.transform(base.z, cov.zeta);
        out.magnitudes.push_back(mag);
        out.values.push_back(std::abs(v.value));
        floor.push_back(100.0 * DBL_EPSILON * v.abs_sum);
    }
    const std::size_t k = leading_above(out.values, floor);
    out.points_used = static_cast<int>(k);
    if (k < 3) {
        out.vacuous = true;
        out.pass = true;
        out.exponential_preferred = true;
        return out;
    }
    std::vector<double> X(out.magnitudes.begin(), out.magnitudes.begin() + k), P, L;
    for (std::size_t i = 0; i < k; ++i) {
        L.push_back(std::log(out.values[i]));
        P.push_back(std::log1p(out.magnitudes[i]));
    }
    const Line e = least_squares(X, L);
    const Line p = least_squares(P, L);
    out.slope = e.slope;
    out.r2 = e.r2;
    out.sse_exponential = e.sse;
    out.sse_polynomial = p.sse;
    out.exponential_preferred = e.sse <= p.sse;
    out.pass = out.exponential_preferred && out.slope <= out.bound;
    return out;
}

GateReport solution_gate(const Chart& chart, const TestSolution& u, const SigmaSetup& sigma,
                         const FiberComponent& fiber, const Cutoff& chi, double threshold, double h) {
    GateReport g;
    g.threshold = threshold;
    g.h = h;
    g.declared = static_cast<bool>(u.forcing);
    g.check = "max_j |L_j u (central differences) - f_j| / max(1, |f_j|) over fiber points x {x0, x0 +- rho_inner/2 e_k}";
    std::vector<std::vector<double>> xs{sigma.x0};
    for (int k = 0; k < chart.m(); ++k)
        for (double sgn : {-1.0, 1.0}) {
            std::vector<double> x = sigma.x0;
            x[k] += sgn * 0.5 * chi.rho_inner;
            xs.push_back(x);
        }
    for (const auto& t : fiber.points) {
        for (const auto& x : xs) {
            for (int j = 0; j < chart.n(); ++j) {
                // skip stencils leaving W at the box edge
                const auto [lo, hi] = chart.W().ranges[j];
                if (t[j] - h < lo || t[j] + h > hi) continue;
                const cplx fd = apply_L(chart, u, j, x, t, h);
                const cplx f = g.declared ? u.forcing(j, x, t) : cplx(0.0);
                g.max_residual = std::max(g.max_residual, std::abs(fd - f) / std::max(1.0, std::abs(f)));
                ++g.points;
            }
        }
    }
    g.passed = g.declared && g.points > 0 && g.max_residual <= threshold;
    return g;
}

ExperimentReport propagation_experiment(const Chart& chart, const TestSolution& u, const SigmaSetup& sigma,
                                        const SweepPlan& plan, const FitOptions& opts, double s_target,
                                        int threads) {
    ExperimentReport rep;
    rep.s_target = s_target;
    rep.fiber = fiber_component(chart, sigma.x0, sigma.t0, sigma.grid, sigma.fiber, sigma.level);
    rep.seed_z = z_eval(chart, sigma.x0, sigma.t0);
    rep.gate = solution_gate(chart, u, sigma, rep.fiber, plan.cutoff);
    if (!rep.gate.declared) {
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "input carries no Gevrey forcing (residual against zero forcing %.3e); refusing to treat it as a "
                      "solution of L u = f", rep.gate.max_residual);
        throw Error(ErrorCode::NotASolution, buf);
    }
    if (!rep.gate.passed) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "residual of L u against the declared forcing is %.3e (threshold %.1e)",
                      rep.gate.max_residual, rep.gate.threshold);
        throw Error(ErrorCode::NotASolution, buf);
    }
    std::vector<std::vector<double>> ts{sigma.t0};
    ts.insert(ts.end(), rep.fiber.points.begin(), rep.fiber.points.end());
    rep.verdicts.resize(ts.size());
    std::vector<std::vector<DecaySample>> samples(ts.size());
    parallel_for(ts.size(), [&](std::size_t i) {
        SweepPlan p = plan;
        p.base_points = {{sigma.x0, ts[i]}};
        ClassifyResult r = classify_solution(chart, u.field, p, opts, 1);
        PointVerdict& v = rep.verdicts[i];
        v.t = ts[i];
        v.report = std::move(r.report);
        v.regular = v.report.label == RegularityReport::Label::Gevrey && v.report.s_hat <= s_target + 1e-9;
        samples[i] = std::move(r.samples);
    }, threads);
    std::size_t regular = 0;
    for (const auto& v : rep.verdicts) regular += v.regular ? 1 : 0;
    rep.all_regular = regular == rep.verdicts.size();
    rep.consistent = rep.all_regular || regular == 0;
    if (!rep.consistent)
        for (auto& s : samples) rep.samples.insert(rep.samples.end(), s.begin(), s.end());
    return rep;
}

} // namespace hypofbi
