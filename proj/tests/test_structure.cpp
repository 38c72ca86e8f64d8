#include "doctest.h"

#include "fixtures.hpp"
#include "hypofbi/error.hpp"
#include "hypofbi/structure.hpp"

#include <cmath>
#include <random>

using namespace hypofbi;

namespace {

const Box unit1{{{-1.0, 1.0}}};
const Box unit2{{{-1.0, 1.0}, {-1.0, 1.0}}};

Chart tube_t2() { return Chart(1, 1, {parse("t^2")}, true, unit1, unit1); }

CVec cone_sample(std::mt19937_64& rng, int m, double kappa) {
    std::normal_distribution<double> N;
    std::uniform_real_distribution<double> U;
    std::vector<double> re(m), im(m);
    for (int k = 0; k < m; ++k) re[k] = N(rng), im[k] = N(rng);
    const double s = kappa * norm(re) * U(rng) / norm(im);
    CVec z(m);
    for (int k = 0; k < m; ++k) z[k] = {re[k], im[k] * s};
    return z;
}

} // namespace

TEST_CASE("z_eval on the t^2 tube") {
    const Chart c(1, 1, {parse("t^2")}, true, unit1, Box{{{-3.0, 3.0}}});
    const double x[1] = {0.5}, t[1] = {2.0};
    const CVec z = z_eval(c, x, t);
    CHECK(z[0] == cplx(0.5, 4.0));
    const double o[1] = {0.0};
    CHECK(z_eval(c, o, o)[0] == cplx(0.0, 0.0));
}

TEST_CASE("phi is shifted so that phi(0,0) = 0") {
    const Chart c(1, 1, {parse("t + 3")}, true, unit1, unit1);
    CHECK(c.phi_shift()[0] == 3.0);
    const double o[1] = {0.0};
    CHECK(z_eval(c, o, o)[0] == cplx(0.0, 0.0));
}

TEST_CASE("chart invariants are enforced") {
    CHECK_THROWS_AS(Chart(1, 1, {parse("x*t")}, true, unit1, unit1), Error);                  // tube depends on x
    CHECK_THROWS_AS(Chart(1, 1, {parse("t")}, true, Box{{{0.5, 1.0}}}, unit1), Error);        // V misses origin
    CHECK_THROWS_AS(Chart(1, 1, {parse("x + t")}, false, unit1, unit1), Error);               // d_x phi(0) != 0
    CHECK_THROWS_AS(Chart(2, 1, {parse("t")}, true, unit2, unit1), Error);                    // wrong phi count
    const Chart c = tube_t2();
    const double x[1] = {0.0}, t[1] = {1.5};
    try {
        c.check_domain(x, t);
        FAIL("no domain error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Domain);
    }
}

TEST_CASE("zx_jacobian") {
    const Chart c = tube_t2();
    const double x[1] = {0.7}, t[1] = {0.3};
    CHECK(zx_jacobian(c, x, t)(0, 0) == cplx(1.0, 0.0));
    const Chart q(1, 1, {parse("x1^2")}, false, unit1, unit1);
    const double x3[1] = {0.3}, o[1] = {0.0};
    CHECK(std::abs(zx_jacobian(q, x3, t)(0, 0) - cplx(1.0, 0.6)) < 1e-15);
    CHECK(zx_jacobian(q, o, o)(0, 0) == cplx(1.0, 0.0));
    const Chart q2(2, 1, {parse("x1*x2"), parse("x2^2 + t*x1^2")}, false, unit2, unit1);
    const double o2[2] = {0.0, 0.0};
    CHECK((zx_jacobian(q2, o2, o) - Eigen::MatrixXcd::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("rt_covector") {
    const Chart c(2, 1, {parse("t"), parse("t^2")}, true, unit2, unit1);
    const double x[2] = {0.1, 0.2}, t[1] = {0.5}, xi[2] = {1.0, 0.0};
    const Covector cv = rt_covector(c, x, t, xi);
    CHECK(cv.zeta[0] == cplx(1.0, 0.0));
    CHECK(cv.zeta[1] == cplx(0.0, 0.0));

    const Chart q(1, 1, {parse("x1^2")}, false, unit1, unit1);
    const double x3[1] = {0.3}, t0[1] = {0.0}, one[1] = {1.0};
    const Covector cq = rt_covector(q, x3, t0, one);
    CHECK(std::abs(cq.zeta[0] - cplx(1.0, -0.6) / 1.36) < 1e-15);

    const double zero[2] = {0.0, 0.0};
    CHECK_THROWS_AS(rt_covector(c, x, t, zero), Error);
}

TEST_CASE("singular Jacobian is reported") {
    const Chart c(2, 1, {parse("x2^2*t"), parse("x1^2*t")}, false, unit2, unit1);
    // Id + i [[0, 2 x2 t], [2 x1 t, 0]] has det 1 + 4 x1 x2 t^2, zero at x1 x2 t^2 = -1/4
    const double x[2] = {0.5, -0.5}, t[1] = {1.0}, xi[2] = {1.0, 0.0};
    try {
        rt_covector(c, x, t, xi);
        FAIL("no singular error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Singular);
    }
}

TEST_CASE("bracket values and branch cut") {
    const CVec a{cplx(3.0), cplx(4.0)};
    CHECK(bracket(a) == cplx(5.0, 0.0));
    const CVec b{cplx(1.0), cplx(0.0, 0.5)};
    CHECK(std::abs(bracket(b) - std::sqrt(0.75)) < 1e-15);
    const CVec r{cplx(-2.0), cplx(0.0)};
    CHECK(bracket(r) == cplx(2.0, 0.0));
    const CVec cut{cplx(0.0, 1.0)};
    CHECK_THROWS_AS(bracket(cut), Error);
    const CVec zero{cplx(0.0), cplx(0.0)};
    CHECK_THROWS_AS(bracket(zero), Error);
}

TEST_CASE("cone membership") {
    CHECK(cone_member(CVec{cplx(-2.0)}, 0.1));
    CHECK_FALSE(cone_member(CVec{cplx(0.0, 1.0)}, 0.9));
    CHECK(cone_member(CVec{cplx(1.0, 0.4)}, 0.5));
}

TEST_CASE("bracket bound examples") {
    const BracketBound r = bracket_bound_check(CVec{cplx(2.0), cplx(-1.0)}, 0.5);
    CHECK(r.ok);
    CHECK(r.re_bracket == doctest::Approx(std::sqrt(5.0)));
    CHECK(r.lower == doctest::Approx(std::sqrt(0.75 / 1.25) * std::sqrt(5.0)));
    CHECK(bracket_bound_check(CVec{cplx(1.0, 0.4)}, 0.5).ok);
    CHECK(bracket_bound_check(CVec{cplx(1.0), cplx(0.0, 0.3)}, 0.4).ok);
}

TEST_CASE("bracket homogeneity, square root and bounds on cone samples") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> L(0.1, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const CVec z = cone_sample(rng, 1 + i % 3, 0.9);
        const double lam = L(rng);
        CVec zl = z;
        for (auto& v : zl) v *= lam;
        CHECK(std::abs(bracket(zl) - lam * bracket(z)) <= 1e-12 * lam * std::abs(bracket(z)));
        CHECK(std::abs(bracket(z) * bracket(z) - bilinear_square(z)) <= 1e-12 * std::abs(bilinear_square(z)));
    }
    int bad = 0;
    for (double kappa : {0.25, 0.5, 0.9})
        for (int i = 0; i < 10000; ++i) bad += bracket_bound_check(cone_sample(rng, 1 + i % 3, kappa), kappa).ok ? 0 : 1;
    CHECK(bad == 0);
}

TEST_CASE("well-positioned scan") {
    std::vector<std::vector<double>> xs, ts{{0.0}, {0.4}}, dirs{{1.0}, {-1.0}};
    for (int i = 0; i <= 20; ++i) xs.push_back({-0.5 + 0.05 * i});
    const Chart flat(1, 1, {parse("0")}, true, unit1, unit1);
    CHECK(well_positioned_scan(flat, 0.9, ts, xs, dirs).c_hat == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& nc : app::shipped_charts()) {
        std::vector<std::vector<double>> tn{std::vector<double>(nc.chart.n(), 0.25)};
        CHECK(std::abs(well_positioned_scan(nc.chart, 0.9, tn, xs, dirs).c_hat - 1.0) <= 1e-12);
    }
    const Chart q(1, 1, {parse("0.1*x1^2")}, false, unit1, unit1);
    const PositionDiagnostics d = well_positioned_scan(q, 0.9, ts, xs, dirs);
    CHECK(d.c_hat > 0.0);
    CHECK(d.mu_hat == doctest::Approx(0.1).epsilon(0.05));
    CHECK(d.cone_ok);
}

TEST_CASE("tube separation is exact") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (const auto& nc : app::shipped_charts())
        for (int i = 0; i < 50; ++i) {
            const double x[1] = {U(rng)}, xp[1] = {U(rng)};
            std::vector<double> t(nc.chart.n());
            for (double& v : t) v = U(rng);
            const cplx d = z_eval(nc.chart, x, t)[0] - z_eval(nc.chart, xp, t)[0];
            CHECK(d == cplx(x[0] - xp[0], 0.0));
        }
}

TEST_CASE("characteristic set membership") {
    const std::vector<Expr> circle{parse("(t1-1)^2+(t2-1)^2-2")}, diag{parse("t1-t2")};
    CHECK(characteristic_member(circle, std::vector<double>{1.0, 1.0}, 1e-9));
    CHECK(characteristic_member(diag, std::vector<double>{3.0, 3.0}, 1e-9));
    CHECK_FALSE(characteristic_member(diag, std::vector<double>{1.0, 0.0}, 1e-9));
    for (const auto& nc : app::shipped_charts()) {
        if (nc.defining.empty()) continue;
        const std::vector<Expr> f{parse(nc.defining)};
        for (const auto& p : app::zero_set_points(nc.name, 40)) {
            CHECK(characteristic_member(f, p, 1e-9));
            CHECK(characteristic_member(nc.chart.phi(), p, 1e-9));
        }
    }
}
