#include "hypofbi/structure.hpp"

#include "hypofbi/error.hpp"
#include "hypofbi/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hypofbi {

bool Box::contains(std::span<const double> p, double slack) const {
    if (p.size() != ranges.size()) return false;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto [lo, hi] = ranges[i];
        const double pad = slack * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
        if (!(p[i] >= lo - pad && p[i] <= hi + pad)) return false;
    }
    return true;
}

namespace {

void check_box(const Box& b, int dim, const char* name) {
    if (b.dim() != dim)
        throw Error(ErrorCode::InvalidArgument, std::string(name) + " has wrong dimension");
    for (const auto& [lo, hi] : b.ranges) {
        if (!(lo < hi)) throw Error(ErrorCode::InvalidArgument, std::string(name) + " is empty");
        if (lo > 0.0 || hi < 0.0)
            throw Error(ErrorCode::InvalidArgument, std::string(name) + " must contain the origin");
    }
}

} // namespace

Chart::Chart(int m, int n, std::vector<Expr> phi, bool tube, Box V, Box W)
    : m_(m), n_(n), tube_(tube), V_(std::move(V)), W_(std::move(W)), phi_(std::move(phi)) {
    if (m < 1 || n < 1) throw Error(ErrorCode::InvalidArgument, "chart needs m >= 1 and n >= 1");
    if (static_cast<int>(phi_.size()) != m)
        throw Error(ErrorCode::InvalidArgument, "chart needs exactly m phi components");
    check_box(V_, m, "V");
    check_box(W_, n, "W");
    for (int k = 0; k < m; ++k) {
        if (phi_[k].x_arity() > m || phi_[k].t_arity() > n)
            throw Error(ErrorCode::InvalidArgument,
                        "phi" + std::to_string(k + 1) + " references a variable beyond (m, n)");
        if (tube && phi_[k].x_arity() > 0)
            throw Error(ErrorCode::InvalidArgument,
                        "tube chart: phi" + std::to_string(k + 1) + " must not depend on x");
    }
    const std::vector<double> x0(m, 0.0), t0(n, 0.0);
    shift_.assign(m, 0.0);
    for (int k = 0; k < m; ++k) {
        const double c = phi_[k].eval(x0, t0);
        if (c != 0.0) {
            shift_[k] = c;
            phi_[k] = phi_[k] - Expr::constant(c);
        }
    }
    dx_.resize(m);
    dt_.resize(m);
    for (int k = 0; k < m; ++k) {
        for (int l = 0; l < m; ++l) dx_[k].push_back(phi_[k].diff_x(l));
        for (int j = 0; j < n; ++j) dt_[k].push_back(phi_[k].diff_t(j));
    }
    if (!tube) {
        for (int k = 0; k < m; ++k)
            for (int l = 0; l < m; ++l)
                if (std::abs(dx_[k][l].eval(x0, t0)) > 1e-12)
                    throw Error(ErrorCode::InvalidArgument, "chart must satisfy d_x phi(0,0) = 0");
    }
}

std::vector<double> Chart::phi_eval(std::span<const double> x, std::span<const double> t) const {
    std::vector<double> out(m_);
    for (int k = 0; k < m_; ++k) out[k] = phi_[k].eval(x, t);
    return out;
}

double Chart::dphi_dx(int k, int l, std::span<const double> x, std::span<const double> t) const {
    return dx_.at(k).at(l).eval(x, t);
}

double Chart::dphi_dt(int k, int j, std::span<const double> x, std::span<const double> t) const {
    return dt_.at(k).at(j).eval(x, t);
}

void Chart::check_domain(std::span<const double> x, std::span<const double> t) const {
    if (static_cast<int>(x.size()) != m_ || static_cast<int>(t.size()) != n_)
        throw Error(ErrorCode::InvalidArgument, "point has wrong dimension");
    if (!W_.contains(t)) throw Error(ErrorCode::Domain, "t outside W");
    if (!tube_ && !V_.contains(x)) throw Error(ErrorCode::Domain, "x outside V");
}

CVec z_eval(const Chart& chart, std::span<const double> x, std::span<const double> t) {
    chart.check_domain(x, t);
    CVec z(chart.m());
    for (int k = 0; k < chart.m(); ++k) z[k] = cplx(x[k], chart.phi()[k].eval(x, t));
    return z;
}

Eigen::MatrixXcd zx_jacobian(const Chart& chart, std::span<const double> x, std::span<const double> t) {
    chart.check_domain(x, t);
    const int m = chart.m();
    Eigen::MatrixXcd J = Eigen::MatrixXcd::Identity(m, m);
    if (chart.tube()) return J;
    for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) J(k, l) += cplx(0.0, chart.dphi_dx(k, l, x, t));
    return J;
}

Covector rt_covector(const Chart& chart, std::span<const double> x, std::span<const double> t,
                     std::span<const double> xi) {
    const int m = chart.m();
    if (static_cast<int>(xi.size()) != m) throw Error(ErrorCode::InvalidArgument, "xi has wrong dimension");
    if (norm(xi) == 0.0) throw Error(ErrorCode::InvalidArgument, "xi must be nonzero");
    Covector c{{x.begin(), x.end()}, {t.begin(), t.end()}, {xi.begin(), xi.end()}, z_eval(chart, x, t), {}};
    if (chart.tube()) {
        c.zeta.assign(xi.begin(), xi.end());
        return c;
    }
    const Eigen::MatrixXcd Jt = zx_jacobian(chart, x, t).transpose();
    if (std::abs(Jt.determinant()) <= kSingularThreshold)
        throw Error(ErrorCode::Singular, "tZ_x is singular at the requested point");
    Eigen::VectorXcd rhs(m);
    for (int k = 0; k < m; ++k) rhs(k) = xi[k];
    const Eigen::VectorXcd zeta = Jt.partialPivLu().solve(rhs);
    c.zeta.assign(zeta.data(), zeta.data() + m);
    return c;
}

cplx bilinear_square(std::span<const cplx> w) {
    cplx s = 0.0;
    for (const cplx& v : w) s += v * v;
    return s;
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const cplx> v) {
    double s = 0.0;
    for (const cplx& c : v) s += std::norm(c);
    return std::sqrt(s);
}

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

cplx bracket(std::span<const cplx> zeta) {
    const cplx s = bilinear_square(zeta);
    if (s.imag() == 0.0 && s.real() <= 0.0)
        throw Error(ErrorCode::BranchCut, "zeta.zeta lies on the closed negative real axis");
    return std::sqrt(s);
}

bool cone_member(std::span<const cplx> zeta, double kappa) {
    double re = 0.0, im = 0.0;
    for (const cplx& c : zeta) {
        re += c.real() * c.real();
        im += c.imag() * c.imag();
    }
    return std::sqrt(im) < kappa * std::sqrt(re);
}

BracketBound bracket_bound_check(std::span<const cplx> zeta, double kappa) {
    const cplx b = bracket(zeta);
    const double nz = norm(zeta);
    BracketBound r{b.real(), std::sqrt((1.0 - kappa * kappa) / (1.0 + kappa * kappa)) * nz, b.imag(), nz, false};
    r.ok = r.re_bracket >= r.lower && r.im_bracket <= r.norm;
    return r;
}

PositionDiagnostics well_positioned_scan(const Chart& chart, double kappa,
                                         const std::vector<std::vector<double>>& t_grid,
                                         const std::vector<std::vector<double>>& x_grid,
                                         const std::vector<std::vector<double>>& xi_dirs, int threads) {
    if (t_grid.empty() || x_grid.empty() || xi_dirs.empty())
        throw Error(ErrorCode::InvalidArgument, "scan grids must be nonempty");
    std::vector<PositionDiagnostics> per_t(t_grid.size());
    parallel_for(t_grid.size(), [&](std::size_t it) {
        const auto& t = t_grid[it];
        PositionDiagnostics d;
        d.c_hat = std::numeric_limits<double>::infinity();
        std::vector<CVec> Z;
        std::vector<std::vector<double>> phis;
        for (const auto& x : x_grid) {
            Z.push_back(z_eval(chart, x, t));
            phis.push_back(chart.phi_eval(x, t));
        }
        CVec diff(chart.m());
        for (std::size_t a = 0; a < x_grid.size(); ++a) {
            std::vector<Covector> covs;
            for (const auto& xi : xi_dirs) {
                covs.push_back(rt_covector(chart, x_grid[a], t, xi));
                const auto& zeta = covs.back().zeta;
                double re = 0.0, im = 0.0;
                for (const cplx& c : zeta) {
                    re += c.real() * c.real();
                    im += c.imag() * c.imag();
                }
                const double ratio = re > 0.0 ? std::sqrt(im / re) : std::numeric_limits<double>::infinity();
                d.kappa_hat = std::max(d.kappa_hat, ratio);
                if (!cone_member(zeta, kappa)) d.cone_ok = false;
            }
            for (std::size_t b = 0; b < x_grid.size(); ++b) {
                if (a == b) continue;
                double dx2 = 0.0, dphi2 = 0.0;
                for (int k = 0; k < chart.m(); ++k) {
                    const double dxk = x_grid[a][k] - x_grid[b][k];
                    const double dpk = phis[a][k] - phis[b][k];
                    dx2 += dxk * dxk;
                    dphi2 += dpk * dpk;
                }
                if (dx2 == 0.0) continue;
                d.mu_hat = std::max(d.mu_hat, std::sqrt(dphi2 / dx2));
                for (int k = 0; k < chart.m(); ++k) diff[k] = Z[a][k] - Z[b][k];
                const double dz = norm(diff);
                for (const auto& cov : covs) {
                    const cplx br = bracket(cov.zeta);
                    const cplx q = dot(cov.zeta, diff) + cplx(0.0, 1.0) * br * bilinear_square(diff);
                    const double c = q.imag() / (norm(cov.zeta) * dz * dz);
                    d.c_hat = std::min(d.c_hat, c);
                    ++d.pairs;
                }
            }
        }
        per_t[it] = d;
    }, threads);
    PositionDiagnostics out;
    out.c_hat = std::numeric_limits<double>::infinity();
    for (const auto& d : per_t) {
        out.mu_hat = std::max(out.mu_hat, d.mu_hat);
        out.c_hat = std::min(out.c_hat, d.c_hat);
        out.kappa_hat = std::max(out.kappa_hat, d.kappa_hat);
        out.cone_ok = out.cone_ok && d.cone_ok;
        out.pairs += d.pairs;
    }
    return out;
}

bool characteristic_member(const std::vector<Expr>& phi, std::span<const double> t, double tol) {
    double vmax = 0.0, gmax = 0.0;
    const std::vector<double> x;
    for (const Expr& p : phi) {
        vmax = std::max(vmax, std::abs(p.eval(x, t)));
        double g = 0.0;
        for (std::size_t j = 0; j < t.size(); ++j) {
            const double d = p.diff_t(static_cast<int>(j)).eval(x, t);
            g += d * d;
        }
        gmax = std::max(gmax, std::sqrt(g));
    }
    return vmax <= tol || gmax <= tol;
}

} // namespace hypofbi
