#pragma once

#include "hypofbi/hypofbi.hpp"

#include <random>
#include <string>
#include <vector>

namespace hypofbi::app {

struct NamedChart {
    std::string name;
    Chart chart;
    /// Defining function whose zero set is the characteristic fiber (empty for flat/t^2).
    std::string defining;
};

/// flat, tube t^2, and the three tubes Z = x + i f(t)^2 with f a circle through
/// the origin, the diagonal t1 = t2, and the hyperbola (t1+1)(t2+1) = 1.
std::vector<NamedChart> shipped_charts();
const Chart& shipped_chart(const std::string& name);

/// Random expression over x1..xm, t1..tn of depth <= depth. Division is
/// always by 1 + (something)^2 and exp arguments are wrapped in sin, so the
/// values stay finite on [-1, 1]^(m+n).
Expr random_expr(std::mt19937_64& rng, int depth, int m, int n);

/// Points on the zero set of a named fiber chart's defining function,
/// inside W; `count` of them, spread along the curve.
std::vector<std::vector<double>> zero_set_points(const std::string& name, int count);

} // namespace hypofbi::app
