#pragma once

#include "hypofbi/expr.hpp"

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <utility>
#include <vector>

namespace hypofbi {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

/// Axis-aligned box, one closed interval per coordinate.
struct Box {
    std::vector<std::pair<double, double>> ranges;

    int dim() const { return static_cast<int>(ranges.size()); }
    bool contains(std::span<const double> p, double slack = 1e-12) const;
};

/// Chart Z(x,t) = x + i phi(x,t) of a locally integrable structure.
class Chart {
public:
    Chart(int m, int n, std::vector<Expr> phi, bool tube, Box V, Box W);

    int m() const { return m_; }
    int n() const { return n_; }
    bool tube() const { return tube_; }
    const Box& V() const { return V_; }
    const Box& W() const { return W_; }
    const std::vector<Expr>& phi() const { return phi_; }
    /// Constant subtracted from the user's phi so that phi(0,0) = 0.
    const std::vector<double>& phi_shift() const { return shift_; }

    std::vector<double> phi_eval(std::span<const double> x, std::span<const double> t) const;
    double dphi_dx(int k, int l, std::span<const double> x, std::span<const double> t) const;
    double dphi_dt(int k, int j, std::span<const double> x, std::span<const double> t) const;

    /// Throws Domain when (x,t) is outside V x W. Tubes only check t.
    void check_domain(std::span<const double> x, std::span<const double> t) const;

private:
    int m_;
    int n_;
    bool tube_;
    Box V_;
    Box W_;
    std::vector<Expr> phi_;
    std::vector<double> shift_;
    std::vector<std::vector<Expr>> dx_;  // dx_[k][l] = d phi_k / d x_l
    std::vector<std::vector<Expr>> dt_;  // dt_[k][j] = d phi_k / d t_j
};

CVec z_eval(const Chart& chart, std::span<const double> x, std::span<const double> t);

/// Id + i d_x phi; the identity for tubes.
Eigen::MatrixXcd zx_jacobian(const Chart& chart, std::span<const double> x, std::span<const double> t);

struct Covector {
    std::vector<double> x;
    std::vector<double> t;
    std::vector<double> xi;
    CVec z;
    CVec zeta;
};

inline constexpr double kSingularThreshold = 1e-10;

Covector rt_covector(const Chart& chart, std::span<const double> x, std::span<const double> t,
                     std::span<const double> xi);

/// Complex bilinear square w.w (no conjugation).
cplx bilinear_square(std::span<const cplx> w);
cplx dot(std::span<const cplx> a, std::span<const cplx> b);
/// Euclidean norm of the 2m real vector.
double norm(std::span<const cplx> v);
double norm(std::span<const double> v);

/// Principal square root of zeta.zeta; throws BranchCut on the closed
/// negative real axis.
cplx bracket(std::span<const cplx> zeta);

bool cone_member(std::span<const cplx> zeta, double kappa);

struct BracketBound {
    double re_bracket;   // Re<zeta>
    double lower;        // sqrt((1-k^2)/(1+k^2)) |zeta|
    double im_bracket;   // Im<zeta>
    double norm;         // |zeta|
    bool ok;
};

BracketBound bracket_bound_check(std::span<const cplx> zeta, double kappa);

struct PositionDiagnostics {
    double mu_hat = 0.0;
    double c_hat = 0.0;
    double kappa_hat = 0.0;
    bool cone_ok = true;  // every sampled zeta inside the requested cone
    std::size_t pairs = 0;
};

/// Scans every (t, x, x', xi) on the given grids; c_hat is the minimum of
/// Im{zeta.(Z - Z') + i<zeta><Z - Z'>^2} / (|zeta||Z - Z'|^2).
PositionDiagnostics well_positioned_scan(const Chart& chart, double kappa,
                                         const std::vector<std::vector<double>>& t_grid,
                                         const std::vector<std::vector<double>>& x_grid,
                                         const std::vector<std::vector<double>>& xi_dirs, int threads = 0);

/// True iff max|phi_k(t)| <= tol or max|grad phi_k(t)| <= tol.
bool characteristic_member(const std::vector<Expr>& phi, std::span<const double> t, double tol);

} // namespace hypofbi
