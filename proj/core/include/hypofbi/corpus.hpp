#pragma once

#include "hypofbi/fbi.hpp"
#include "hypofbi/structure.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hypofbi {

enum class SolutionKind { HolomorphicComposite, GevreyFlat, Step, Expression };

struct RegularityLabel {
    enum class Type { AnalyticVector, Gevrey, NonSmooth };
    Type type = Type::AnalyticVector;
    double s = 1.0;

    std::string str() const;
};

/// An evaluable u(x,t) with its ground-truth label. `forcing(j, x, t)` is
/// the exact L_j u when the construction knows it; it is empty for inputs
/// that are not solutions with Gevrey forcing (the step).
struct TestSolution {
    SolutionKind kind = SolutionKind::Expression;
    RegularityLabel label;
    Field field;
    std::function<cplx(int j, std::span<const double> x, std::span<const double> t)> forcing;
    std::string description;

    cplx operator()(std::span<const double> x, std::span<const double> t) const { return field.eval(x, t); }
};

/// u = sum_k c_k Z_axis(x,t)^k.
TestSolution make_holomorphic_composite(const Chart& chart, std::vector<cplx> coefficients, int axis = 0);
/// u = exp(Z_axis) truncated after z^degree / degree!.
TestSolution make_holomorphic_exp(const Chart& chart, int degree, int axis = 0);

/// g_s(y) = exp(-y^{-1/(s-1)}) for y > 0 and 0 otherwise.
double gevrey_flat_profile(double s, double y);
double gevrey_flat_profile_derivative(double s, double y);

/// u = g_s(sign * x_axis) + drift(x,t). The optional analytic drift lets the
/// solution vary along fibers; forcing is exact for tube charts.
TestSolution make_gevrey_flat(const Chart& chart, double s, int axis = 0, int sign = 1,
                              std::optional<Expr> drift = std::nullopt);

/// Indicator of {x_axis >= x0} (right-closed). x0 must sit inside V with a
/// margin of rho_outer * 1e-3.
TestSolution make_step(const Chart& chart, int axis, double x0, double rho_outer);

/// u = re + i im from expressions; forcing by symbolic differentiation on tubes.
TestSolution make_expr_solution(const Chart& chart, Expr re, std::optional<Expr> im, RegularityLabel label);

/// Central-difference L_j u = D_t_j u - i sum_k d phi_k/d t_j D_x_k u on a tube chart.
cplx apply_L(const Chart& chart, const TestSolution& u, int j, std::span<const double> x,
             std::span<const double> t, double h = 1e-4);

struct GevreyEstimate {
    double s_hat = 1.0;
    int orders_used = 0;
    double fit_quality = 0.0;   // r^2 of the log-derivative fit
    bool entire = false;        // derivatives vanished (polynomial input)
    bool truncated = false;     // high orders dropped as round-off dominated
    double s_raw = 1.0;         // before the s >= 1 clamp
    std::vector<double> sup_norms;
};

/// Sup norms M_k of k-th central differences (step 0.5/k) on a uniform grid
/// over [a, b], then least squares log M_k = a (k+1) + s log k! on orders
/// 3..max_order.
GevreyEstimate gevrey_oracle(const std::function<double(double)>& u, int max_order, double a, double b,
                             int points = 401);

} // namespace hypofbi
