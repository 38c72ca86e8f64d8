#include "hypofbi/fbi.hpp"

#include "hypofbi/error.hpp"

#include <atomic>
#include <cmath>
#include <numbers>

namespace hypofbi {

namespace {

constexpr cplx I(0.0, 1.0);

double bump_g(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }

double bump_h(double u) {
    const double a = bump_g(u);
    const double b = bump_g(1.0 - u);
    return a / (a + b);
}

std::atomic<bool> g_mutation{false};

} // namespace

double Cutoff::operator()(std::span<const double> x) const {
    double d2 = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double d = x[k] - center[k];
        d2 += d * d;
    }
    const double r = (std::sqrt(d2) - rho_inner) / (rho_outer - rho_inner);
    if (r <= 0.0) return 1.0;
    if (r >= 1.0) return 0.0;
    return bump_h(1.0 - r);
}

void Cutoff::validate(const Chart& chart) const {
    if (static_cast<int>(center.size()) != chart.m())
        throw Error(ErrorCode::InvalidArgument, "cutoff center has wrong dimension");
    if (!(rho_inner > 0.0 && rho_inner < rho_outer))
        throw Error(ErrorCode::InvalidArgument, "cutoff needs 0 < rho_inner < rho_outer");
    for (int k = 0; k < chart.m(); ++k) {
        const auto [lo, hi] = chart.V().ranges[k];
        if (center[k] - rho_outer < lo - 1e-12 || center[k] + rho_outer > hi + 1e-12)
            throw Error(ErrorCode::InvalidArgument, "cutoff support leaves V");
    }
}

double cutoff_eval(const Cutoff& chi, std::span<const double> x) { return chi(x); }

QuadratureGrid support_grid(const Cutoff& chi, double xi_max, int nodes) {
    const int panels = panels_for(2.0 * chi.rho_outer, xi_max);
    return QuadratureGrid::cube(chi.center, chi.rho_outer, panels, nodes);
}

cplx delta_factor(std::span<const cplx> z, std::span<const cplx> zeta) {
    return 1.0 + I * dot(z, zeta) / bracket(zeta);
}

cplx delta_factor_dense(std::span<const cplx> z, std::span<const cplx> zeta) {
    const int m = static_cast<int>(z.size());
    const cplx br = bracket(zeta);
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) A(i, j) += I * z[i] * zeta[j] / br;
    return A.determinant();
}

cplx fbi_kernel(std::span<const cplx> z, std::span<const cplx> zprime, std::span<const cplx> zeta, double lambda) {
    if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
    const cplx br = bracket(zeta);
    CVec d(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) d[k] = z[k] - zprime[k];
    const cplx e = I * dot(zeta, d) - lambda * br * bilinear_square(d);
    if (e.real() > kExponentLimit) throw Error(ErrorCode::Overflow, "FBI kernel exponent exceeds 700");
    return std::exp(e) * (1.0 + I * lambda * dot(d, zeta) / br);
}

Slice::Slice(const Chart& chart, const Field& u, const Cutoff& chi, std::span<const double> t,
             const QuadratureGrid& grid)
    : m_(chart.m()), t_(t.begin(), t.end()), panel_width_(grid.max_panel_width()) {
    if (grid.dim() != m_) throw Error(ErrorCode::InvalidArgument, "grid dimension differs from chart m");
    for (int k = 0; k < m_; ++k) {
        const Axis& a = grid.axes()[k];
        if (a.lo > chi.center[k] - chi.rho_outer + 1e-12 || a.hi < chi.center[k] + chi.rho_outer - 1e-12)
            throw Error(ErrorCode::InvalidArgument, "quadrature box does not cover the cutoff support");
    }
    std::vector<double> x(m_), xe(m_);
    std::vector<double> phi_t;
    if (chart.tube()) phi_t = chart.phi_eval(x, t);
    chart.check_domain(x, t);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid.point(i, x);
        const double c = chi(x);
        if (c == 0.0) continue;
        xe = x;
        for (const Jump& j : u.jumps)
            if (std::abs(xe[j.axis] - j.position) <= 1e-12) xe[j.axis] += 1e-6 * grid.axes()[j.axis].panel_width();
        const cplx val = u.eval(xe, t);
        cplx det = 1.0;
        if (chart.tube()) {
            for (int k = 0; k < m_; ++k) Z_.emplace_back(x[k], phi_t[k]);
        } else {
            const CVec z = z_eval(chart, x, t);
            Z_.insert(Z_.end(), z.begin(), z.end());
            det = zx_jacobian(chart, x, t).determinant();
        }
        x_.insert(x_.end(), x.begin(), x.end());
        density_.push_back(c * val * det * grid.weight(i));
    }
}

FBIValue Slice::transform(std::span<const cplx> z, std::span<const cplx> zeta, double lambda) const {
    if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
    if (static_cast<int>(z.size()) != m_ || static_cast<int>(zeta.size()) != m_)
        throw Error(ErrorCode::InvalidArgument, "z/zeta dimension differs from chart m");
    const cplx br = bracket(zeta);
    FBIValue out{t_, {z.begin(), z.end()}, {zeta.begin(), zeta.end()}, lambda, 0.0, 0.0, false};
    out.undersampled = norm(zeta) * panel_width_ > std::numbers::pi;
    const std::size_t N = density_.size();
    cplx sum = 0.0;
    double abs_sum = 0.0;
    if (m_ == 1) {
        const cplx z0 = z[0], ze = zeta[0];
        for (std::size_t i = 0; i < N; ++i) {
            const cplx d = z0 - Z_[i];
            const cplx e = I * ze * d - lambda * br * d * d;
            if (e.real() > kExponentLimit) throw Error(ErrorCode::Overflow, "FBI kernel exponent exceeds 700");
            const cplx term = std::exp(e) * (1.0 + I * lambda * d * ze / br) * density_[i];
            sum += term;
            abs_sum += std::abs(term);
        }
    } else {
        CVec d(m_);
        for (std::size_t i = 0; i < N; ++i) {
            for (int k = 0; k < m_; ++k) d[k] = z[k] - Z_[i * m_ + k];
            const cplx e = I * dot(zeta, d) - lambda * br * bilinear_square(d);
            if (e.real() > kExponentLimit) throw Error(ErrorCode::Overflow, "FBI kernel exponent exceeds 700");
            const cplx term = std::exp(e) * (1.0 + I * lambda * dot(d, zeta) / br) * density_[i];
            sum += term;
            abs_sum += std::abs(term);
        }
    }
    out.value = sum;
    out.abs_sum = abs_sum;
    return out;
}

FBIValue fbi_transform(const Chart& chart, const Field& u, const Cutoff& chi, std::span<const double> t,
                       std::span<const cplx> z, std::span<const cplx> zeta, double lambda,
                       const QuadratureGrid& grid) {
    return Slice(chart, u, chi, t, grid).transform(z, zeta, lambda);
}

MomentResidual gaussian_moment_check(const Chart& chart, std::span<const double> t, cplx omega,
                                     std::span<const cplx> z, std::vector<int> poly, double radius, int nodes) {
    if (!chart.tube()) throw Error(ErrorCode::InvalidArgument, "moment identities need a tube chart");
    if (!(omega.real() > 0.0)) throw Error(ErrorCode::InvalidArgument, "moment identities need Re omega > 0");
    const int m = chart.m();
    if (static_cast<int>(z.size()) != m) throw Error(ErrorCode::InvalidArgument, "z has wrong dimension");
    if (poly.empty()) {
        poly.assign(m, 0);
        poly[0] = 1;
    }
    const std::vector<double> x0(m, 0.0);
    const std::vector<double> phi = chart.phi_eval(x0, t);
    // Z(x', t) - z = x' - c with c = z - i phi(t)
    CVec c(m);
    for (int k = 0; k < m; ++k) c[k] = z[k] - I * phi[k];

    MomentResidual r;
    std::vector<Axis> axes;
    const double wr = omega.real(), wi = omega.imag();
    const double width = 0.25 / std::sqrt(std::abs(omega));
    for (int k = 0; k < m; ++k) {
        const double b = c[k].imag();
        const double need = (std::abs(wi * b) + std::sqrt(wi * wi * b * b + wr * (wr * b * b + 40.0))) / wr;
        r.required_radius = std::max(r.required_radius, need);
    }
    r.radius = radius > 0.0 ? radius : r.required_radius;
    r.truncation_warning = r.radius < r.required_radius;
    const int panels = std::max(1, static_cast<int>(std::ceil(2.0 * r.radius / width)));
    for (int k = 0; k < m; ++k)
        axes.push_back(composite_axis(c[k].real() - r.radius, c[k].real() + r.radius, panels, nodes));
    const QuadratureGrid grid(std::move(axes));

    cplx mass = 0.0, odd = 0.0;
    std::vector<double> x(m);
    CVec w(m);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid.point(i, x);
        for (int k = 0; k < m; ++k) w[k] = x[k] - c[k];
        const cplx g = std::exp(-omega * bilinear_square(w)) * grid.weight(i);
        cplx p = 1.0;
        for (int k = 0; k < m; ++k)
            if (poly[k]) p *= w[k];
        mass += g;
        odd += p * g;
    }
    const cplx norm_factor = std::pow(omega / std::numbers::pi, 0.5 * m);
    r.mass = std::abs(norm_factor * mass - 1.0);
    r.odd = std::abs(norm_factor * odd);
    return r;
}

SumIdentity gaussian_sum_identity_residual(const Chart& chart, std::span<const double> t, std::span<const double> x,
                                           std::span<const double> xp, std::span<const double> xpp) {
    const CVec Z = z_eval(chart, x, t);
    const CVec Zp = z_eval(chart, xp, t);
    const CVec Zpp = z_eval(chart, xpp, t);
    const std::size_t m = Z.size();
    CVec a(m), b(m), mid(m), e(m);
    for (std::size_t k = 0; k < m; ++k) {
        a[k] = Zp[k] - Z[k];
        b[k] = Zp[k] - Zpp[k];
        mid[k] = Zp[k] - 0.5 * (Z[k] + Zpp[k]);
        e[k] = Z[k] - Zpp[k];
    }
    const cplx lhs = bilinear_square(a) + bilinear_square(b);
    cplx rhs = 2.0 * bilinear_square(mid) + 0.5 * bilinear_square(e);
    if (g_mutation.load()) rhs *= 1.0 + 1e-6;
    return {std::abs(lhs - rhs), std::abs(lhs)};
}

double gaussian_derivative(std::span<const int> alpha, double lambda, std::span<const double> x) {
    if (alpha.size() != x.size()) throw Error(ErrorCode::InvalidArgument, "alpha and x differ in dimension");
    int total = 0;
    for (int a : alpha) {
        if (a < 0) throw Error(ErrorCode::InvalidArgument, "negative multi-index entry");
        total += a;
    }
    if (total > kGaussianDerivativeMaxOrder)
        throw Error(ErrorCode::InvalidArgument, "Gaussian derivative order above 12");
    double r2 = 0.0;
    double prod = 1.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        r2 += x[j] * x[j];
        const int a = alpha[j];
        double s = 0.0;
        for (int l2 = 0; 2 * l2 <= a; ++l2) {
            const int l1 = a - 2 * l2;
            const double log_coef = std::lgamma(a + 1.0) - std::lgamma(l1 + 1.0) - std::lgamma(l2 + 1.0) +
                                    (l1 + l2) * std::log(lambda);
            double term = std::exp(log_coef);
            if ((l1 + l2) % 2 == 1) term = -term;
            s += term * std::pow(2.0 * x[j], l1);
        }
        prod *= s;
    }
    return prod * std::exp(-lambda * r2);
}

void set_identity_mutation(bool on) { g_mutation.store(on); }
bool identity_mutation() { return g_mutation.load(); }

} // namespace hypofbi
