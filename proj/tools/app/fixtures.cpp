#include "fixtures.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hypofbi::app {

std::vector<NamedChart> shipped_charts() {
    const Box V{{{-1.0, 1.0}}};
    const Box W1{{{-1.0, 1.0}}};
    const Box W2{{{-1.0, 1.0}, {-1.0, 1.0}}};
    std::vector<NamedChart> out;
    out.push_back({"flat", Chart(1, 1, {parse("0")}, true, V, W1), ""});
    out.push_back({"tube_t2", Chart(1, 1, {parse("t^2")}, true, V, W1), ""});
    const char* defs[3][2] = {{"circle", "(t1-1)^2+(t2-1)^2-2"}, {"diagonal", "t1-t2"}, {"hyperbola", "(t1+1)*(t2+1)-1"}};
    for (const auto& d : defs)
        out.push_back({d[0], Chart(1, 2, {parse(std::string("(") + d[1] + ")^2")}, true, V, W2), d[1]});
    return out;
}

const Chart& shipped_chart(const std::string& name) {
    static const std::vector<NamedChart> charts = shipped_charts();
    for (const auto& c : charts)
        if (c.name == name) return c.chart;
    throw std::invalid_argument("no shipped chart named " + name);
}

Expr random_expr(std::mt19937_64& rng, int depth, int m, int n) {
    std::uniform_int_distribution<int> pick(0, 9);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    auto leaf = [&]() -> Expr {
        const int r = pick(rng) % 3;
        if (r == 0) return Expr::constant(std::round(coef(rng) * 100.0) / 100.0);
        if (r == 1) return Expr::x(std::uniform_int_distribution<int>(0, m - 1)(rng));
        return Expr::t(std::uniform_int_distribution<int>(0, n - 1)(rng));
    };
    if (depth <= 1) return leaf();
    const int d = depth - 1;
    switch (pick(rng)) {
    case 0: return leaf();
    case 1: return random_expr(rng, d, m, n) + random_expr(rng, d, m, n);
    case 2: return random_expr(rng, d, m, n) - random_expr(rng, d, m, n);
    case 3:
    case 4: return random_expr(rng, d, m, n) * random_expr(rng, d, m, n);
    case 5: {
        const Expr den = random_expr(rng, d - 1, m, n);
        return random_expr(rng, d, m, n) / (Expr::constant(1.0) + den * den);
    }
    case 6: return -random_expr(rng, d, m, n);
    case 7: return exp(sin(random_expr(rng, d - 1, m, n)));
    case 8: return sin(random_expr(rng, d, m, n));
    default: return cos(random_expr(rng, d, m, n)).pow(std::uniform_int_distribution<int>(1, 3)(rng));
    }
}

std::vector<std::vector<double>> zero_set_points(const std::string& name, int count) {
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < count; ++i) {
        const double u = count == 1 ? 0.5 : static_cast<double>(i) / (count - 1);
        if (name == "circle") {
            const double th = std::numbers::pi * (1.0 + 0.5 * u);
            pts.push_back({1.0 + std::sqrt(2.0) * std::cos(th), 1.0 + std::sqrt(2.0) * std::sin(th)});
        } else if (name == "diagonal") {
            pts.push_back({-1.0 + 2.0 * u, -1.0 + 2.0 * u});
        } else if (name == "hyperbola") {
            const double t1 = -0.5 + 1.5 * u;
            pts.push_back({t1, 1.0 / (t1 + 1.0) - 1.0});
        } else {
            throw std::invalid_argument("no zero set for chart " + name);
        }
    }
    return pts;
}

} // namespace hypofbi::app
