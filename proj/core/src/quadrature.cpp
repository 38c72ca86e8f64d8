#include "hypofbi/quadrature.hpp"

#include "hypofbi/error.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace hypofbi {

namespace {

GaussRule compute_rule(int n) {
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.nodes[n / 2] = 0.0;
    return r;
}

} // namespace

const GaussRule& gauss_legendre(int n) {
    if (n < 1 || n > 64) throw Error(ErrorCode::InvalidArgument, "Gauss-Legendre order must be in [1, 64]");
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
    return it->second;
}

Axis composite_axis(double lo, double hi, int panels, int nodes) {
    if (!(lo < hi) || panels < 1) throw Error(ErrorCode::InvalidArgument, "bad quadrature axis");
    const GaussRule& g = gauss_legendre(nodes);
    Axis a{lo, hi, panels, nodes, {}, {}};
    a.x.reserve(static_cast<std::size_t>(panels) * nodes);
    a.w.reserve(a.x.capacity());
    const double h = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
        const double l = lo + p * h;
        for (int i = 0; i < nodes; ++i) {
            a.x.push_back(l + 0.5 * h * (g.nodes[i] + 1.0));
            a.w.push_back(0.5 * h * g.weights[i]);
        }
    }
    return a;
}

int panels_for(double length, double xi_max) {
    if (!(length > 0.0) || !(xi_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "bad panel sizing request");
    return std::max(1, static_cast<int>(std::ceil(xi_max * length / (0.5 * std::numbers::pi))));
}

QuadratureGrid::QuadratureGrid(std::vector<Axis> axes) : axes_(std::move(axes)) {
    size_ = axes_.empty() ? 0 : 1;
    for (const Axis& a : axes_) size_ *= a.x.size();
}

QuadratureGrid QuadratureGrid::cube(std::span<const double> center, double radius, int panels, int nodes) {
    std::vector<Axis> axes;
    for (double c : center) axes.push_back(composite_axis(c - radius, c + radius, panels, nodes));
    return QuadratureGrid(std::move(axes));
}

void QuadratureGrid::point(std::size_t i, std::span<double> out) const {
    for (int d = dim() - 1; d >= 0; --d) {
        const std::size_t n = axes_[d].x.size();
        out[d] = axes_[d].x[i % n];
        i /= n;
    }
}

double QuadratureGrid::weight(std::size_t i) const {
    double w = 1.0;
    for (int d = dim() - 1; d >= 0; --d) {
        const std::size_t n = axes_[d].x.size();
        w *= axes_[d].w[i % n];
        i /= n;
    }
    return w;
}

double QuadratureGrid::volume() const {
    double v = 1.0;
    for (const Axis& a : axes_) v *= a.hi - a.lo;
    return v;
}

double QuadratureGrid::max_panel_width() const {
    double h = 0.0;
    for (const Axis& a : axes_) h = std::max(h, a.panel_width());
    return h;
}

double QuadratureGrid::xi_cap() const { return 0.5 * std::numbers::pi / max_panel_width(); }

} // namespace hypofbi
