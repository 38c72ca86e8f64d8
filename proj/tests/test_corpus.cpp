#include "doctest.h"

#include "fixtures.hpp"
#include "hypofbi/corpus.hpp"
#include "hypofbi/error.hpp"

#include <cmath>

using namespace hypofbi;

namespace {

double max_L(const Chart& c, const TestSolution& u, double h) {
    double e = 0.0;
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            const double x[1] = {-0.9 + 1.8 * i / 19.0};
            std::vector<double> t{-0.9 + 1.8 * j / 19.0};
            if (c.n() == 2) t.push_back(0.85 - 1.7 * ((3 * j) % 20) / 19.0);
            for (int k = 0; k < c.n(); ++k) e = std::max(e, std::abs(apply_L(c, u, k, x, t, h)));
        }
    return e;
}

} // namespace

TEST_CASE("constant and linear composites solve L u = 0") {
    const Chart& c = app::shipped_chart("tube_t2");
    const TestSolution one = make_holomorphic_composite(c, {1.0});
    const double x[1] = {0.3}, t[1] = {0.4};
    CHECK(one(x, t) == cplx(1.0));
    CHECK(apply_L(c, one, 0, x, t) == cplx(0.0));
    const TestSolution z = make_holomorphic_composite(c, {0.0, 1.0});
    CHECK(z(x, t).real() == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(z(x, t).imag() == doctest::Approx(0.16).epsilon(1e-15));
    CHECK(std::abs(apply_L(c, z, 0, x, t)) < 1e-10);
    CHECK(z.forcing(0, x, t) == cplx(0.0));
}

TEST_CASE("truncated exponential composite has a tiny residual") {
    const Chart& c = app::shipped_chart("tube_t2");
    const TestSolution e = make_holomorphic_exp(c, 20);
    double worst = 0.0;
    for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
            const double x[1] = {-0.5 + 0.1 * i}, t[1] = {-0.5 + 0.1 * j};
            // |Z| <= 1 on this grid
            worst = std::max(worst, std::abs(apply_L(c, e, 0, x, t, 1e-3)));
        }
    CHECK(worst < 1e-5);  // O(h^2) stencil error at h = 1e-3; the series truncation itself is ~1e-19
    const double x[1] = {0.2}, t[1] = {0.3};
    CHECK(std::abs(e(x, t) - std::exp(cplx(0.2, 0.09))) < 1e-15);
}

TEST_CASE("apply_L on composites converges at second order on every shipped chart") {
    for (const auto& nc : app::shipped_charts()) {
        const TestSolution u = make_holomorphic_composite(nc.chart, {cplx(0.2, 0.1), 1.0, cplx(0.0, -0.5), 0.3});
        const double e1 = max_L(nc.chart, u, 2e-3), e2 = max_L(nc.chart, u, 1e-3);
        if (e1 < 1e-13) continue;  // flat chart: exact
        CHECK(std::log2(e1 / e2) >= 1.9);
    }
}

TEST_CASE("apply_L on t-independent u is the closed form") {
    for (const auto& nc : app::shipped_charts()) {
        const TestSolution g = make_gevrey_flat(nc.chart, 2.0);
        for (int i = 0; i < 8; ++i) {
            const double x[1] = {0.1 + 0.1 * i};
            const std::vector<double> t(nc.chart.n(), -0.4 + 0.1 * i);
            for (int j = 0; j < nc.chart.n(); ++j) {
                const cplx closed = cplx(0.0, -1.0) * nc.chart.dphi_dt(0, j, x, t) * gevrey_flat_profile_derivative(2.0, x[0]);
                CHECK(std::abs(apply_L(nc.chart, g, j, x, t, 1e-4) - closed) < 1e-6);
                CHECK(std::abs(g.forcing(j, x, t) - closed) < 1e-14);
            }
        }
    }
}

TEST_CASE("gevrey-flat profile") {
    CHECK(gevrey_flat_profile(2.0, 1.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(gevrey_flat_profile(3.0, 0.0) == 0.0);
    CHECK(gevrey_flat_profile(3.0, -0.5) == 0.0);
    double prev = 0.0;
    for (int i = 1; i <= 1000; ++i) {
        const double g = gevrey_flat_profile(1.5, i / 500.0);
        CHECK(g >= prev);
        prev = g;
    }
    CHECK_THROWS_AS(make_gevrey_flat(app::shipped_chart("flat"), 1.0), Error);
    const TestSolution neg = make_gevrey_flat(app::shipped_chart("flat"), 2.0, 0, -1);
    const double t[1] = {0.0};
    CHECK(neg(std::vector<double>{-0.5}, t).real() == doctest::Approx(std::exp(-2.0)));
    CHECK(neg(std::vector<double>{0.5}, t) == cplx(0.0));
}

TEST_CASE("gevrey-flat with drift has exact forcing") {
    const Chart& c = app::shipped_chart("diagonal");
    const TestSolution g = make_gevrey_flat(c, 2.0, 0, 1, parse("0.05*(t1+t2)*exp(-x1^2)"));
    for (int i = 0; i < 5; ++i) {
        const double x[1] = {-0.3 + 0.15 * i};
        const double t[2] = {0.1 * i, -0.05 * i};
        for (int j = 0; j < 2; ++j) CHECK(std::abs(apply_L(c, g, j, x, t) - g.forcing(j, x, t)) < 1e-7);
    }
}

TEST_CASE("step solution") {
    const Chart& c = app::shipped_chart("flat");
    const TestSolution s = make_step(c, 0, 0.2, 1.0);
    const double t[1] = {0.0};
    CHECK(s(std::vector<double>{0.1}, t) == cplx(0.0));
    CHECK(s(std::vector<double>{0.2}, t) == cplx(1.0));
    CHECK(s(std::vector<double>{0.7}, t) == cplx(1.0));
    CHECK_FALSE(static_cast<bool>(s.forcing));
    CHECK(s.label.type == RegularityLabel::Type::NonSmooth);
    CHECK_THROWS_AS(make_step(c, 0, 0.9995, 1.0), Error);
}

TEST_CASE("stencil leaving the domain is an error") {
    const Chart& c = app::shipped_chart("tube_t2");
    const TestSolution z = make_holomorphic_composite(c, {0.0, 1.0});
    const double x[1] = {0.0}, t[1] = {1.0};
    try {
        apply_L(c, z, 0, x, t);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Domain);
    }
}

TEST_CASE("Gevrey oracle") {
    const GevreyEstimate ex = gevrey_oracle([](double y) { return std::exp(y); }, 8, -1.0, 1.0);
    CHECK(ex.s_hat <= 1.1);
    CHECK(ex.s_raw < 1.0);
    const GevreyEstimate g2 = gevrey_oracle([](double y) { return gevrey_flat_profile(2.0, y); }, 10, -1.0, 1.0);
    CHECK(g2.s_hat >= 1.7);
    CHECK(g2.s_hat <= 2.3);
    const GevreyEstimate p = gevrey_oracle([](double y) { return 1.0 + y - 3.0 * y * y; }, 8, -1.0, 1.0);
    CHECK(p.entire);
    CHECK(p.s_hat == 1.0);
}
