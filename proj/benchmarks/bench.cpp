#include "hypofbi/hypofbi.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

using namespace hypofbi;

namespace {

const Chart& tube_t2() {
    static const Chart c(1, 1, {parse("t^2")}, true, Box{{{-1.0, 1.0}}}, Box{{{-1.0, 1.0}}});
    return c;
}

void BM_Transform(benchmark::State& state) {
    const Chart& c = tube_t2();
    const Cutoff chi{{0.0}, 0.5, 1.0};
    const double xi_max = static_cast<double>(state.range(0));
    const QuadratureGrid grid = support_grid(chi, xi_max, 8);
    const TestSolution u = make_holomorphic_exp(c, 20);
    const double x[1] = {0.0}, t[1] = {0.3}, xi[1] = {xi_max};
    const Covector cov = rt_covector(c, x, t, xi);
    for (auto _ : state) benchmark::DoNotOptimize(fbi_transform(c, u.field, chi, t, cov.z, cov.zeta, 1.0, grid));
    state.counters["nodes"] = static_cast<double>(grid.size());
}
BENCHMARK(BM_Transform)->Arg(50)->Arg(200)->Arg(800);

void BM_SliceReuse(benchmark::State& state) {
    const Chart& c = tube_t2();
    const Cutoff chi{{0.0}, 0.5, 1.0};
    const QuadratureGrid grid = support_grid(chi, 400.0, 8);
    const TestSolution u = make_gevrey_flat(c, 2.0);
    const double x[1] = {0.0}, t[1] = {0.0};
    const Slice slice(c, u.field, chi, t, grid);
    const auto ladder = log_ladder(4.0, 400.0, 20);
    for (auto _ : state)
        for (double m : ladder) {
            const double xi[1] = {m};
            const Covector cov = rt_covector(c, x, t, xi);
            benchmark::DoNotOptimize(slice.transform(cov.z, cov.zeta));
        }
}
BENCHMARK(BM_SliceReuse);

void BM_Jet(benchmark::State& state) {
    const Expr e = parse("exp(sin(x1*t1))*cos(x1+t2)^2/(1+t1^2)");
    const std::vector<double> x{0.3}, t{0.2, -0.4};
    const int order = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(jet(e, x, t, order));
}
BENCHMARK(BM_Jet)->DenseRange(1, 4);

void BM_FitDecay(benchmark::State& state) {
    const auto mags = log_ladder(4.0, 400.0, static_cast<int>(state.range(0)));
    std::vector<double> v;
    for (double m : mags) v.push_back(std::exp(-0.8 * std::sqrt(m)));
    for (auto _ : state) benchmark::DoNotOptimize(fit_decay(mags, v));
}
BENCHMARK(BM_FitDecay)->Arg(20)->Arg(80);

} // namespace

BENCHMARK_MAIN();
