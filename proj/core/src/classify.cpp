#include "hypofbi/classify.hpp"

#include "hypofbi/error.hpp"
#include "hypofbi/parallel.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>

namespace hypofbi {

std::vector<double> log_ladder(double lo, double hi, int count) {
    if (!(lo > 0.0 && hi > lo) || count < 2) throw Error(ErrorCode::InvalidArgument, "bad magnitude ladder");
    std::vector<double> out(count);
    const double r = std::log(hi / lo);
    for (int i = 0; i < count; ++i) out[i] = lo * std::exp(r * i / (count - 1));
    out.back() = hi;
    return out;
}

void validate_plan(const Chart& chart, const SweepPlan& plan) {
    const int m = chart.m();
    plan.cutoff.validate(chart);
    if (plan.base_points.empty() || plan.directions.empty() || plan.magnitudes.empty())
        throw Error(ErrorCode::InvalidArgument, "sweep plan needs base points, directions and magnitudes");
    if (!(plan.lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
    for (std::size_t i = 0; i < plan.magnitudes.size(); ++i) {
        if (!(plan.magnitudes[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "magnitudes must be positive");
        if (i > 0 && !(plan.magnitudes[i] > plan.magnitudes[i - 1]))
            throw Error(ErrorCode::InvalidArgument, "magnitudes must be strictly increasing");
    }
    for (const auto& d : plan.directions) {
        if (static_cast<int>(d.size()) != m) throw Error(ErrorCode::InvalidArgument, "direction has wrong dimension");
        if (std::abs(norm(d) - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "directions must be unit vectors");
    }
    for (const auto& b : plan.base_points) {
        chart.check_domain(b.x, b.t);
        if (plan.cutoff(b.x) != 1.0)
            throw Error(ErrorCode::InvalidArgument, "base point outside the cutoff plateau");
    }
    if (plan.grid.dim() != m) throw Error(ErrorCode::InvalidArgument, "quadrature grid dimension differs from m");
    const double cap = plan.grid.xi_cap();
    if (plan.magnitudes.back() > cap * (1.0 + 1e-12)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "largest magnitude %.6g exceeds the quadrature cap |xi|_max = %.6g",
                      plan.magnitudes.back(), cap);
        throw Error(ErrorCode::Undersampled, buf);
    }
}

std::vector<DecaySample> sweep(const Chart& chart, const Field& u, const SweepPlan& plan, int threads) {
    validate_plan(chart, plan);
    const std::size_t B = plan.base_points.size(), D = plan.directions.size(), M = plan.magnitudes.size();
    std::vector<std::unique_ptr<Slice>> slices(B);
    parallel_for(B, [&](std::size_t b) {
        slices[b] = std::make_unique<Slice>(chart, u, plan.cutoff, plan.base_points[b].t, plan.grid);
    }, threads);
    std::vector<DecaySample> out(B * D * M);
    parallel_for(B * D, [&](std::size_t task) {
        const std::size_t b = task / D, d = task % D;
        const BasePoint& bp = plan.base_points[b];
        std::vector<double> xi(chart.m());
        for (std::size_t k = 0; k < M; ++k) {
            const double mag = plan.magnitudes[k];
            for (int i = 0; i < chart.m(); ++i) xi[i] = mag * plan.directions[d][i];
            const Covector cov = rt_covector(chart, bp.x, bp.t, xi);
            const FBIValue v = slices[b]->transform(cov.z, cov.zeta, plan.lambda);
            DecaySample& s = out[task * M + k];
            s.base = static_cast<int>(b);
            s.dir = static_cast<int>(d);
            s.xi_mag = mag;
            s.t = bp.t;
            s.x = bp.x;
            s.value = v.value;
            s.abs_value = std::abs(v.value);
            s.floor = 100.0 * DBL_EPSILON * v.abs_sum;
            s.zeta_norm = norm(cov.zeta);
        }
    }, threads);
    return out;
}

std::string to_string(DecayModel model) {
    switch (model) {
    case DecayModel::StretchedExp: return "stretched_exp";
    case DecayModel::Polynomial: return "polynomial";
    case DecayModel::Bounded: return "bounded";
    }
    return "unknown";
}

namespace {

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double sse = 0.0;
    double r2 = 0.0;
};

// Least squares L ~ a + b X; with nonpositive=true a positive slope is
// replaced by the best constant.
LineFit fit_line(const std::vector<double>& X, const std::vector<double>& L, bool nonpositive) {
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
    LineFit f;
    f.slope = sxx > 0.0 ? sxl / sxx : 0.0;
    if (nonpositive && f.slope > 0.0) f.slope = 0.0;
    f.intercept = ml - f.slope * mx;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double r = L[i] - f.intercept - f.slope * X[i];
        f.sse += r * r;
    }
    f.r2 = sst > 0.0 ? std::clamp(1.0 - f.sse / sst, 0.0, 1.0) : 1.0;
    return f;
}

} // namespace

DecayFit fit_decay(std::span<const double> magnitudes, std::span<const double> values, const FitOptions& opts,
                   std::span<const double> floors) {
    const std::size_t N = magnitudes.size();
    if (values.size() != N || (!floors.empty() && floors.size() != N))
        throw Error(ErrorCode::InvalidArgument, "magnitudes, values and floors differ in length");
    if (static_cast<int>(N) < opts.min_magnitudes)
        throw Error(ErrorCode::FitFailure, "too few magnitudes for a decay fit");
    for (std::size_t i = 0; i < N; ++i) {
        if (!(magnitudes[i] > 0.0) || (i > 0 && !(magnitudes[i] > magnitudes[i - 1])))
            throw Error(ErrorCode::FitFailure, "magnitudes must be positive and strictly increasing");
    }
    if (std::log10(magnitudes.back() / magnitudes.front()) < opts.min_decades - 1e-12)
        throw Error(ErrorCode::FitFailure, "magnitudes span too few decades");

    DecayFit fit;
    std::size_t usable = 0;
    bool run = true;
    for (std::size_t i = 0; i < N; ++i) {
        const double fl = std::max(kSampleFloor, floors.empty() ? 0.0 : floors[i]);
        const bool above = values[i] > fl;
        if (!above) ++fit.floored;
        if (run && above) ++usable;
        else run = false;
    }

    if (static_cast<int>(usable) < opts.min_points) {
        // Decay reached the floor almost immediately.
        fit.model = DecayModel::StretchedExp;
        fit.s_hat = 1.0;
        fit.r2 = 1.0;
        fit.early_floor = usable > 0;
        fit.zero_window = usable == 0;
        if (usable >= 2) {
            std::vector<double> X(magnitudes.begin(), magnitudes.begin() + usable), L;
            for (std::size_t i = 0; i < usable; ++i) L.push_back(std::log(values[i]));
            const LineFit lf = fit_line(X, L, true);
            fit.eps_hat = -lf.slope;
            fit.logC_hat = lf.intercept;
            fit.r2 = lf.r2;
            fit.points_used = static_cast<int>(usable);
            fit.xi_max_used = magnitudes[usable - 1];
        }
        if (!(fit.eps_hat > 0.0)) {
            // decays at least as fast as reaching the floor at the first magnitude
            const double v0 = usable > 0 ? values[0] : 1.0;
            fit.eps_hat = std::max(std::log(v0 / kSampleFloor), 1.0) / magnitudes[usable > 0 ? usable - 1 : 0];
            fit.logC_hat = usable > 0 ? std::log(v0) : 0.0;
        }
        return fit;
    }

    std::vector<double> xs(magnitudes.begin(), magnitudes.begin() + usable), L(usable), X(usable);
    for (std::size_t i = 0; i < usable; ++i) L[i] = std::log(values[i]);
    fit.points_used = static_cast<int>(usable);
    fit.xi_max_used = xs.back();

    LineFit best;
    double best_s = opts.s_min;
    bool have = false;
    const int steps = static_cast<int>(std::floor((opts.s_max - opts.s_min) / opts.s_step + 1e-9));
    for (int i = 0; i <= steps; ++i) {
        const double s = opts.s_min + i * opts.s_step;
        for (std::size_t k = 0; k < usable; ++k) X[k] = std::pow(xs[k], 1.0 / s);
        const LineFit lf = fit_line(X, L, true);
        if (!have || lf.sse < best.sse) {
            best = lf;
            best_s = s;
            have = true;
        }
    }
    fit.s_hat = best_s;
    fit.eps_hat = -best.slope;
    fit.logC_hat = best.intercept;
    fit.r2 = best.r2;
    fit.sse_stretched = best.sse;

    for (std::size_t k = 0; k < usable; ++k) X[k] = std::log1p(xs[k]);
    const LineFit poly = fit_line(X, L, false);
    fit.k_hat = -poly.slope;
    fit.r2_polynomial = poly.r2;
    fit.sse_polynomial = poly.sse;

    const bool expressed = fit.eps_hat * std::pow(fit.xi_max_used, 1.0 / fit.s_hat) >= opts.expression_min;
    if (fit.r2 >= opts.r2_stretched && fit.eps_hat > 0.0 && expressed && fit.sse_stretched <= fit.sse_polynomial) {
        fit.model = DecayModel::StretchedExp;
    } else if (fit.k_hat > 0.0 && fit.r2_polynomial >= opts.r2_polynomial) {
        fit.model = DecayModel::Polynomial;
        fit.logC_hat = poly.intercept;
    } else {
        fit.model = DecayModel::Bounded;
        fit.logC_hat = *std::max_element(L.begin(), L.end());
    }
    return fit;
}

std::string RegularityReport::label_string() const {
    switch (label) {
    case Label::Gevrey: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "gevrey(%.2f)", s_hat);
        return buf;
    }
    case Label::SmoothOnly: return "smooth-only";
    case Label::NonSmooth: return "non-smooth";
    }
    return "unknown";
}

RegularityReport classify(const std::vector<SeriesFit>& fits, const FitOptions& opts) {
    if (fits.empty()) throw Error(ErrorCode::InvalidArgument, "nothing to classify");
    std::map<int, int> dirs_per_base;
    for (const auto& f : fits) ++dirs_per_base[f.base];
    for (const auto& [b, n] : dirs_per_base)
        if (n != dirs_per_base.begin()->second)
            throw Error(ErrorCode::InvalidArgument, "base points were swept with different direction sets");

    RegularityReport r;
    r.fits = fits;
    bool all_stretched = true, all_smooth = true;
    for (const auto& f : fits) {
        if (f.fit.zero_window) r.zero_window = true;
        if (f.fit.model != DecayModel::StretchedExp) all_stretched = false;
        const bool smooth = f.fit.model == DecayModel::StretchedExp ||
                            (f.fit.model == DecayModel::Polynomial && f.fit.k_hat >= opts.smooth_order);
        if (!smooth) all_smooth = false;
    }
    if (all_stretched) {
        r.label = RegularityReport::Label::Gevrey;
        r.s_hat = -1.0;
        for (std::size_t i = 0; i < fits.size(); ++i)
            if (fits[i].fit.s_hat > r.s_hat) {
                r.s_hat = fits[i].fit.s_hat;
                r.worst = static_cast<int>(i);
            }
        return r;
    }
    r.label = all_smooth ? RegularityReport::Label::SmoothOnly : RegularityReport::Label::NonSmooth;
    // worst series: bounded first, then the smallest polynomial exponent
    double worst_score = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < fits.size(); ++i) {
        const DecayFit& f = fits[i].fit;
        if (f.model == DecayModel::StretchedExp) continue;
        const double score = f.model == DecayModel::Bounded ? -1.0 : f.k_hat;
        if (score < worst_score) {
            worst_score = score;
            r.worst = static_cast<int>(i);
        }
    }
    r.s_hat = std::numeric_limits<double>::infinity();
    return r;
}

ClassifyResult classify_solution(const Chart& chart, const Field& u, const SweepPlan& plan, const FitOptions& opts,
                                 int threads) {
    ClassifyResult res;
    res.samples = sweep(chart, u, plan, threads);
    const std::size_t B = plan.base_points.size(), D = plan.directions.size(), M = plan.magnitudes.size();
    const double half_m = 0.5 * chart.m();
    std::vector<SeriesFit> fits(B * D);
    parallel_for(B * D, [&](std::size_t task) {
        std::vector<double> v(M), fl(M);
        for (std::size_t k = 0; k < M; ++k) {
            const DecaySample& s = res.samples[task * M + k];
            const double scale = std::pow(s.zeta_norm, half_m);
            v[k] = s.abs_value * scale;
            fl[k] = s.floor * scale;
        }
        fits[task] = {static_cast<int>(task / D), static_cast<int>(task % D), fit_decay(plan.magnitudes, v, opts, fl)};
    }, threads);
    res.report = classify(fits, opts);
    for (const auto& b : plan.base_points) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < b.x.size(); ++k) d2 += std::pow(b.x[k] - plan.cutoff.center[k], 2);
        if (std::sqrt(d2) > 0.5 * plan.cutoff.rho_inner) res.report.near_plateau_edge = true;
    }
    return res;
}

} // namespace hypofbi
