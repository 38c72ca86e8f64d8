#pragma once

#include "hypofbi/classify.hpp"
#include "hypofbi/corpus.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hypofbi {

/// Uniform grid over a box in t-space; flat indices run with the last axis fastest.
struct TGrid {
    std::vector<double> lo;
    std::vector<int> count;
    double step = 0.05;

    static TGrid uniform(std::span<const double> lo, std::span<const double> hi, double step);
    int dim() const { return static_cast<int>(lo.size()); }
    std::size_t size() const;
    std::vector<double> point(std::span<const int> index) const;
    std::size_t flat(std::span<const int> index) const;
    std::vector<int> unflat(std::size_t i) const;
};

struct FiberOptions {
    double tol = 0.0;          // > 0: fixed tolerance; otherwise adaptive
    double tol_abs = 1e-12;    // adaptive floor
    double tol_factor = 0.5;   // adaptive: tol_factor * step * |grad_t Im Z_k|
};

struct FiberComponent {
    std::vector<std::vector<int>> indices;    // sorted by flat index
    std::vector<std::vector<double>> points;
    std::vector<double> level;                // Im Z(x0, .) value defining the fiber
    double step = 0.0;
    int path_length = 0;                      // largest grid-path distance from the seed
    bool adaptive = true;
};

/// Flood fill (all 3^n - 1 neighbours) from t0 over grid points with
/// |Im Z_k(x0,t) - level_k| <= tol_k(t). The level defaults to Im Z(x0,t0);
/// passing it explicitly makes the result independent of which member seeds it.
FiberComponent fiber_component(const Chart& chart, std::span<const double> x0, std::span<const double> t0,
                               const TGrid& grid, const FiberOptions& opts = {},
                               std::optional<std::vector<double>> level = std::nullopt);

struct DifferenceFit {
    double slope = 0.0;       // d log|F(t) - F(t')| / d|xi|
    double intercept = 0.0;
    double r2 = 0.0;
    double rate = 0.0;        // -slope; +infinity when identical within precision
    bool identical = false;
    int points_used = 0;
    std::vector<double> magnitudes;
    std::vector<double> difference;
    std::vector<double> floor;
    std::vector<double> abs_t;
    std::vector<double> abs_tprime;
    std::optional<DecayFit> fit_t;       // individual transforms, |xi|^{m/2} scaled
    std::optional<DecayFit> fit_tprime;
};

/// Effective exponential rate -d log|F| / d|xi| of a decay fit at |xi| = xi.
double effective_rate(const DecayFit& fit, double xi);

/// |F[chi u](t; z, xi) - F[chi u](t'; z, xi)| along a ladder at fixed z = Z(x,t).
DifferenceFit decay_difference(const Chart& chart, const Field& u, const Cutoff& chi, const QuadratureGrid& grid,
                               std::span<const double> t, std::span<const double> tprime, std::span<const double> x,
                               std::span<const double> direction, std::span<const double> ladder,
                               const FitOptions& opts = {});

/// f = (1 - chi_rho) g with chi_rho = 1 on B_rho(center), 0 outside rho + transition.
Field annulus_field(const Field& g, std::span<const double> center, double rho, double transition);

struct AnnulusFit {
    double slope = 0.0;          // exponential fit log|F| vs |xi|
    double r2 = 0.0;
    double sse_exponential = 0.0;
    double sse_polynomial = 0.0;
    bool exponential_preferred = false;
    bool vacuous = false;        // every sample at the floor
    double bound = 0.0;          // -c0 rho^2 / 16
    bool pass = false;
    int points_used = 0;
    std::vector<double> magnitudes;
    std::vector<double> values;
};

/// Decay of F[chi f](t; Z(x,t), xi) for f vanishing on B_rho(center) and
/// |x - center| <= rho / 2. Throws InvalidArgument on support leakage.
AnnulusFit annulus_decay_check(const Chart& chart, const Field& f, const Cutoff& chi, const QuadratureGrid& grid,
                               double rho, std::span<const double> t, std::span<const double> x,
                               std::span<const double> direction, std::span<const double> ladder, double c0 = 1.0);

struct SigmaSetup {
    std::vector<double> x0;
    std::vector<double> t0;
    TGrid grid;
    FiberOptions fiber;
    std::optional<std::vector<double>> level;
};

struct GateReport {
    bool declared = false;     // the solution carries exact Gevrey forcing
    double max_residual = 0.0; // max |apply_L u - f_j| / max(1, |f_j|)
    double threshold = 1e-6;
    double h = 1e-4;
    std::size_t points = 0;
    bool passed = false;
    std::string check;
};

/// Compares finite-difference L_j u with the declared forcing (zero when none
/// is declared) on the fiber points crossed with x0 and x0 +- rho_inner/2
/// along each axis. Undeclared forcing never passes.
GateReport solution_gate(const Chart& chart, const TestSolution& u, const SigmaSetup& sigma,
                         const FiberComponent& fiber, const Cutoff& chi, double threshold = 1e-6,
                         double h = 1e-4);

struct PointVerdict {
    std::vector<double> t;
    RegularityReport report;
    bool regular = false;
};

struct ExperimentReport {
    GateReport gate;
    FiberComponent fiber;
    CVec seed_z;
    std::vector<PointVerdict> verdicts;  // seed first, then fiber points in grid order
    double s_target = 1.0;
    bool consistent = false;
    bool all_regular = false;
    std::vector<DecaySample> samples;    // kept only for mixed verdicts
};

/// Classifies u at the seed and at every fiber point (base x = x0). Throws
/// NotASolution when the gate fails and EmptyFiber when the fiber is trivial.
/// `plan` supplies cutoff, grid, directions, magnitudes; its base points are ignored.
ExperimentReport propagation_experiment(const Chart& chart, const TestSolution& u, const SigmaSetup& sigma,
                                        const SweepPlan& plan, const FitOptions& opts, double s_target,
                                        int threads = 0);

} // namespace hypofbi
