#pragma once

#include "hypofbi/fbi.hpp"

#include <span>
#include <vector>

namespace hypofbi {

/// Frequency rule on [-xi_max, 0] and [0, xi_max], composite Gauss-Legendre
/// on each half so xi = 0 is never a node.
struct XiGrid {
    std::vector<double> xi;
    std::vector<double> w;
    double xi_max = 0.0;
};

XiGrid symmetric_xi_grid(double xi_max, int panels_per_half, int nodes);

/// Resolution of the z' integral at frequency xi: Gauss-Legendre panels over
/// the cutoff support widened by width_sigmas / sqrt|xi|, panel width
/// min(panel_scale / sqrt|xi|, panel_max).
struct InversionOptions {
    double width_sigmas = 6.0;
    double panel_scale = 0.5;
    double panel_max = 0.05;
    int nodes = 4;
};

/// FBI field F[chi u](t; z', xi) at lambda = 1 on a tube chart with m = 1,
/// stored on (z'-grid x xi-grid) and reused for every reconstruction point.
class InversionField {
public:
    InversionField(const Chart& chart, const Field& u, const Cutoff& chi, std::span<const double> t,
                   const QuadratureGrid& xgrid, XiGrid xi_grid, InversionOptions opts = {}, int threads = 0);

    /// (2 pi^3)^{-1/2} sum_xi e^{-eps xi^2} |xi|^{1/2} sum_z' e^{i xi (Z(x,t)-z') - |xi| (Z(x,t)-z')^2} F(z', xi)
    cplx invert(double x, double eps) const;
    /// Same integral for several eps, inner sums computed once.
    std::vector<cplx> invert(double x, std::span<const double> eps) const;
    /// (2 pi)^{-1} sum_xi e^{-eps xi^2} F^{1/2}[chi u](t; Z(x,t), xi)
    cplx intermediate(double x, double eps) const;

    /// e^{-eps xi_max^2} > 1e-8: the frequency truncation dominates.
    bool tail_warning(double eps) const;
    const XiGrid& xi_grid() const { return xi_; }
    std::size_t field_size() const;

private:
    std::vector<cplx> inner(double x) const;

    Slice slice_;
    double phi_t_;
    XiGrid xi_;
    std::vector<std::vector<double>> y_;
    std::vector<std::vector<double>> yw_;
    std::vector<CVec> F_;
};

/// Convenience wrapper evaluating one reconstruction point.
cplx inversion_epsilon(const InversionField& field, double x, double eps);

} // namespace hypofbi
