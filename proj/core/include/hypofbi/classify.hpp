#pragma once

#include "hypofbi/fbi.hpp"
#include "hypofbi/structure.hpp"

#include <span>
#include <string>
#include <vector>

namespace hypofbi {

struct BasePoint {
    std::vector<double> x;
    std::vector<double> t;
};

struct SweepPlan {
    std::vector<BasePoint> base_points;
    std::vector<std::vector<double>> directions;  // unit vectors in R^m
    std::vector<double> magnitudes;               // strictly increasing
    Cutoff cutoff;
    double lambda = 1.0;
    QuadratureGrid grid;
};

/// Geometric ladder of `count` values from lo to hi inclusive.
std::vector<double> log_ladder(double lo, double hi, int count);

/// Throws on an invalid plan; magnitudes above the grid's xi cap raise
/// Undersampled (refused rather than warned).
void validate_plan(const Chart& chart, const SweepPlan& plan);

struct DecaySample {
    int base = 0;
    int dir = 0;
    double xi_mag = 0.0;
    std::vector<double> t;
    std::vector<double> x;
    cplx value;
    double abs_value = 0.0;
    double floor = 0.0;       // round-off level of the quadrature sum
    double zeta_norm = 0.0;
};

/// One sample per (base point, direction, magnitude), ordered in that
/// nesting: |F[chi u](t; Z(x,t), tZ_x^{-1}(mag dir))|.
std::vector<DecaySample> sweep(const Chart& chart, const Field& u, const SweepPlan& plan, int threads = 0);

enum class DecayModel { StretchedExp, Polynomial, Bounded };
std::string to_string(DecayModel model);

struct FitOptions {
    double s_min = 1.0;
    double s_max = 4.0;
    double s_step = 0.05;
    double r2_stretched = 0.98;
    double expression_min = 3.0;  // eps * xi_max^{1/s} needed to call decay expressed
    double r2_polynomial = 0.9;
    double smooth_order = 6.0;    // k_hat needed for smooth-only
    int min_points = 5;
    int min_magnitudes = 8;
    double min_decades = 1.5;
};

struct DecayFit {
    double s_hat = 1.0;
    double eps_hat = 0.0;
    double logC_hat = 0.0;
    double r2 = 0.0;
    DecayModel model = DecayModel::Bounded;
    double k_hat = 0.0;          // polynomial exponent from the log-log fit
    double r2_polynomial = 0.0;
    double sse_stretched = 0.0;
    double sse_polynomial = 0.0;
    int points_used = 0;
    int floored = 0;             // samples at or below the floor
    double xi_max_used = 0.0;
    bool zero_window = false;    // every sample at the floor
    bool early_floor = false;    // fewer than min_points above the floor
};

inline constexpr double kSampleFloor = 1e-300;

/// Fits C e^{-eps |xi|^{1/s}} over the leading run of samples above their
/// floor, falling back to C (1+|xi|)^{-k}, then to bounded.
DecayFit fit_decay(std::span<const double> magnitudes, std::span<const double> values,
                   const FitOptions& opts = {}, std::span<const double> floors = {});

struct SeriesFit {
    int base = 0;
    int dir = 0;
    DecayFit fit;
};

struct RegularityReport {
    enum class Label { Gevrey, SmoothOnly, NonSmooth };
    Label label = Label::NonSmooth;
    double s_hat = 1.0;
    std::vector<SeriesFit> fits;
    int worst = -1;               // index into fits driving the verdict
    bool zero_window = false;
    bool near_plateau_edge = false;

    std::string label_string() const;
};

RegularityReport classify(const std::vector<SeriesFit>& fits, const FitOptions& opts = {});

/// Samples scaled by |zeta|^{m/2} (the Gaussian window mass) before fitting.
struct ClassifyResult {
    std::vector<DecaySample> samples;
    RegularityReport report;
};

ClassifyResult classify_solution(const Chart& chart, const Field& u, const SweepPlan& plan,
                                 const FitOptions& opts = {}, int threads = 0);

} // namespace hypofbi
