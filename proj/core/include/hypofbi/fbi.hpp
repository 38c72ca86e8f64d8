#pragma once

#include "hypofbi/quadrature.hpp"
#include "hypofbi/structure.hpp"

#include <functional>
#include <span>
#include <vector>

namespace hypofbi {

/// Smooth radial bump: 1 on the ball of radius rho_inner, 0 outside rho_outer.
struct Cutoff {
    std::vector<double> center;
    double rho_inner = 0.5;
    double rho_outer = 1.0;

    double operator()(std::span<const double> x) const;
    /// Throws unless 0 < rho_inner < rho_outer and the outer ball lies in V.
    void validate(const Chart& chart) const;
};

double cutoff_eval(const Cutoff& chi, std::span<const double> x);

/// Grid on the cube enclosing supp chi, panels sized for frequencies up to xi_max.
QuadratureGrid support_grid(const Cutoff& chi, double xi_max, int nodes = 8);

/// Hyperplane {x_axis = position} across which a field is discontinuous.
struct Jump {
    int axis = 0;
    double position = 0.0;
};

/// Pointwise-evaluable u(x,t).
struct Field {
    std::function<cplx(std::span<const double> x, std::span<const double> t)> eval;
    std::vector<Jump> jumps;
};

struct FBIValue {
    std::vector<double> t;
    CVec z;
    CVec zeta;
    double lambda = 1.0;
    cplx value;
    double abs_sum = 0.0;       // sum of |integrand * weight|, sets the round-off floor
    bool undersampled = false;  // |zeta| * panel width > pi
};

/// 1 + i (z.zeta) / <zeta>
cplx delta_factor(std::span<const cplx> z, std::span<const cplx> zeta);
/// det(Id + i (z zeta^T) / <zeta>) evaluated as a dense determinant.
cplx delta_factor_dense(std::span<const cplx> z, std::span<const cplx> zeta);

inline constexpr double kExponentLimit = 700.0;

/// exp(i zeta.(z - z') - lambda <zeta> <z - z'>^2) * Delta(lambda (z - z'), zeta).
cplx fbi_kernel(std::span<const cplx> z, std::span<const cplx> zprime, std::span<const cplx> zeta, double lambda);

/// chi u det Z_x * weight at every grid node of one time slice, so many
/// (z, zeta) pairs can be transformed without re-evaluating u.
class Slice {
public:
    Slice(const Chart& chart, const Field& u, const Cutoff& chi, std::span<const double> t,
          const QuadratureGrid& grid);

    FBIValue transform(std::span<const cplx> z, std::span<const cplx> zeta, double lambda = 1.0) const;

    const std::vector<double>& t() const { return t_; }
    std::size_t active_nodes() const { return density_.size(); }
    int m() const { return m_; }
    /// Node coordinates and Z values of active nodes, flattened with stride m.
    const std::vector<double>& nodes() const { return x_; }
    const CVec& z_nodes() const { return Z_; }
    const CVec& density() const { return density_; }
    double panel_width() const { return panel_width_; }

private:
    int m_;
    std::vector<double> t_;
    std::vector<double> x_;
    CVec Z_;
    CVec density_;
    double panel_width_;
};

FBIValue fbi_transform(const Chart& chart, const Field& u, const Cutoff& chi, std::span<const double> t,
                       std::span<const cplx> z, std::span<const cplx> zeta, double lambda,
                       const QuadratureGrid& grid);

struct MomentResidual {
    double mass = 0.0;     // |normalised integral of the Gaussian - 1|
    double odd = 0.0;      // |normalised integral of P times the Gaussian|
    double radius = 0.0;   // truncation half-width used
    double required_radius = 0.0;
    bool truncation_warning = false;
};

/// Unit-mass and degree-one-per-variable moment identities of the complex
/// Gaussian over the maximally real slice {Z(x', t)} of a tube chart.
/// `poly` flags the variables present in P(w) = prod w_k; an empty vector
/// means P(w) = w_1. radius <= 0 picks one with Gaussian tail below 1e-14.
MomentResidual gaussian_moment_check(const Chart& chart, std::span<const double> t, cplx omega,
                                     std::span<const cplx> z, std::vector<int> poly = {},
                                     double radius = 0.0, int nodes = 8);

/// |LHS - RHS| of <Z'-Z>^2 + <Z'-Z''>^2 = 2<Z'-(Z+Z'')/2>^2 + <Z-Z''>^2 / 2
/// with Z = Z(x,t), Z' = Z(xp,t), Z'' = Z(xpp,t). Also reports |LHS|.
struct SumIdentity {
    double residual;
    double lhs_abs;
};
SumIdentity gaussian_sum_identity_residual(const Chart& chart, std::span<const double> t, std::span<const double> x,
                                           std::span<const double> xp, std::span<const double> xpp);

/// d^alpha exp(-lambda |x|^2) by the closed-form sum over l1 + 2 l2 = alpha_j.
double gaussian_derivative(std::span<const int> alpha, double lambda, std::span<const double> x);

inline constexpr int kGaussianDerivativeMaxOrder = 12;

/// Deliberately perturbs the two-Gaussian identity; used to check that the
/// self-test suites are sensitive. Off by default.
void set_identity_mutation(bool on);
bool identity_mutation();

} // namespace hypofbi
