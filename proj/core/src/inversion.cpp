#include "hypofbi/inversion.hpp"

#include "hypofbi/error.hpp"
#include "hypofbi/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hypofbi {

namespace {
constexpr cplx I(0.0, 1.0);

const Chart& require_tube_1d(const Chart& chart) {
    if (!chart.tube()) throw Error(ErrorCode::InvalidArgument, "inversion is implemented for tube charts only");
    if (chart.m() != 1) throw Error(ErrorCode::InvalidArgument, "inversion is implemented for m = 1 only");
    return chart;
}
} // namespace

XiGrid symmetric_xi_grid(double xi_max, int panels_per_half, int nodes) {
    if (!(xi_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "xi_max must be positive");
    const Axis half = composite_axis(0.0, xi_max, panels_per_half, nodes);
    XiGrid g;
    g.xi_max = xi_max;
    for (std::size_t i = half.x.size(); i-- > 0;) {
        g.xi.push_back(-half.x[i]);
        g.w.push_back(half.w[i]);
    }
    g.xi.insert(g.xi.end(), half.x.begin(), half.x.end());
    g.w.insert(g.w.end(), half.w.begin(), half.w.end());
    return g;
}

InversionField::InversionField(const Chart& chart, const Field& u, const Cutoff& chi, std::span<const double> t,
                               const QuadratureGrid& xgrid, XiGrid xi_grid, InversionOptions opts, int threads)
    : slice_(require_tube_1d(chart), u, chi, t, xgrid), xi_(std::move(xi_grid)) {
    const std::vector<double> x0(1, 0.0);
    phi_t_ = chart.phi_eval(x0, t)[0];
    const std::size_t K = xi_.xi.size();
    y_.resize(K);
    yw_.resize(K);
    F_.resize(K);
    const double c = chi.center[0];
    parallel_for(K, [&](std::size_t j) {
        const double a = std::abs(xi_.xi[j]);
        const double half = chi.rho_outer + opts.width_sigmas / std::sqrt(a);
        const double hp = std::min(opts.panel_scale / std::sqrt(a), opts.panel_max);
        const int panels = std::max(1, static_cast<int>(std::ceil(2.0 * half / hp)));
        const Axis ax = composite_axis(c - half, c + half, panels, opts.nodes);
        y_[j] = ax.x;
        yw_[j] = ax.w;
        F_[j].resize(ax.x.size());
        const cplx zeta[1] = {cplx(xi_.xi[j], 0.0)};
        for (std::size_t i = 0; i < ax.x.size(); ++i) {
            const cplx z[1] = {cplx(ax.x[i], phi_t_)};
            F_[j][i] = slice_.transform(z, zeta, 1.0).value;
        }
    }, threads);
}

std::vector<cplx> InversionField::inner(double x) const {
    std::vector<cplx> G(xi_.xi.size());
    for (std::size_t j = 0; j < G.size(); ++j) {
        const double xi = xi_.xi[j];
        const double a = std::abs(xi);
        cplx s = 0.0;
        for (std::size_t i = 0; i < y_[j].size(); ++i) {
            // Z(x,t) - z' = x - y on a tube slice
            const double d = x - y_[j][i];
            s += std::exp(cplx(-a * d * d, xi * d)) * F_[j][i] * yw_[j][i];
        }
        G[j] = s * std::sqrt(a);
    }
    return G;
}

std::vector<cplx> InversionField::invert(double x, std::span<const double> eps) const {
    const std::vector<cplx> G = inner(x);
    const double pref = 1.0 / std::sqrt(2.0 * std::pow(std::numbers::pi, 3));
    std::vector<cplx> out;
    for (double e : eps) {
        if (!(e > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
        cplx s = 0.0;
        for (std::size_t j = 0; j < G.size(); ++j) s += std::exp(-e * xi_.xi[j] * xi_.xi[j]) * xi_.w[j] * G[j];
        out.push_back(pref * s);
    }
    return out;
}

cplx InversionField::invert(double x, double eps) const {
    const double e[1] = {eps};
    return invert(x, e)[0];
}

cplx InversionField::intermediate(double x, double eps) const {
    const cplx z[1] = {cplx(x, phi_t_)};
    cplx s = 0.0;
    for (std::size_t j = 0; j < xi_.xi.size(); ++j) {
        const cplx zeta[1] = {cplx(xi_.xi[j], 0.0)};
        s += std::exp(-eps * xi_.xi[j] * xi_.xi[j]) * xi_.w[j] * slice_.transform(z, zeta, 0.5).value;
    }
    return s / (2.0 * std::numbers::pi);
}

bool InversionField::tail_warning(double eps) const { return std::exp(-eps * xi_.xi_max * xi_.xi_max) > 1e-8; }

std::size_t InversionField::field_size() const {
    std::size_t n = 0;
    for (const auto& f : F_) n += f.size();
    return n;
}

cplx inversion_epsilon(const InversionField& field, double x, double eps) { return field.invert(x, eps); }

} // namespace hypofbi
