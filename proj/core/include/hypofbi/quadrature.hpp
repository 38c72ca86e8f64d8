#pragma once

#include <span>
#include <vector>

namespace hypofbi {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussRule& gauss_legendre(int n);

/// Composite Gauss-Legendre rule on [lo, hi] with equal panels.
struct Axis {
    double lo = 0.0;
    double hi = 0.0;
    int panels = 0;
    int nodes = 0;
    std::vector<double> x;
    std::vector<double> w;

    double panel_width() const { return (hi - lo) / panels; }
};

Axis composite_axis(double lo, double hi, int panels, int nodes);

/// Panels needed so the phase xi * panel_width stays below pi/2 at xi_max.
int panels_for(double length, double xi_max);

/// Tensor product of per-axis composite rules. Points are enumerated with
/// the last axis fastest.
class QuadratureGrid {
public:
    QuadratureGrid() = default;
    explicit QuadratureGrid(std::vector<Axis> axes);

    /// Cube [center - r, center + r]^m with the given panel count per axis.
    static QuadratureGrid cube(std::span<const double> center, double radius, int panels, int nodes);

    int dim() const { return static_cast<int>(axes_.size()); }
    std::size_t size() const { return size_; }
    const std::vector<Axis>& axes() const { return axes_; }

    void point(std::size_t i, std::span<double> out) const;
    double weight(std::size_t i) const;
    double volume() const;

    /// Largest |xi| for which every panel keeps phase change <= pi/2.
    double xi_cap() const;
    /// Largest panel width over all axes.
    double max_panel_width() const;

private:
    std::vector<Axis> axes_;
    std::size_t size_ = 0;
};

} // namespace hypofbi
