#include "doctest.h"

#include "fixtures.hpp"
#include "hypofbi/error.hpp"
#include "hypofbi/fbi.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace hypofbi;

namespace {

const Box unit1{{{-1.0, 1.0}}};

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

} // namespace

TEST_CASE("cutoff plateau, edge and midpoint") {
    const Cutoff chi{{0.0}, 0.5, 1.0};
    CHECK(chi(std::vector<double>{0.0}) == 1.0);
    CHECK(chi(std::vector<double>{0.5}) == 1.0);
    CHECK(chi(std::vector<double>{1.0}) == 0.0);
    CHECK(chi(std::vector<double>{-0.75}) == doctest::Approx(0.5).epsilon(1e-15));
    const Chart c(1, 1, {parse("t")}, true, unit1, unit1);
    CHECK_THROWS_AS((Cutoff{{0.0}, 0.5, 1.5}.validate(c)), Error);
    CHECK_THROWS_AS((Cutoff{{0.0}, 0.6, 0.5}.validate(c)), Error);
}

TEST_CASE("delta factor examples") {
    const CVec zeta{cplx(2.0)};
    CHECK(delta_factor(CVec{cplx(0.0)}, zeta) == cplx(1.0));
    const cplx z(0.3, -0.2);
    CHECK(std::abs(delta_factor(CVec{z}, zeta) - (1.0 + cplx(0, 1) * z)) < 1e-15);
    CHECK(delta_factor(CVec{cplx(1.0), cplx(0.0)}, CVec{cplx(0.0), cplx(3.0)}) == cplx(1.0));
}

TEST_CASE("delta factor closed form equals the dense determinant") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> N;
    for (int m = 1; m <= 3; ++m)
        for (int i = 0; i < 1000; ++i) {
            CVec z(m), zeta(m);
            for (int k = 0; k < m; ++k) z[k] = {N(rng), N(rng)}, zeta[k] = {N(rng), 0.3 * N(rng)};
            if (!cone_member(zeta, 0.9)) continue;
            CHECK(rel(delta_factor(z, zeta), delta_factor_dense(z, zeta)) < 1e-12);
        }
}

TEST_CASE("kernel examples and overflow guard") {
    const CVec zero{cplx(0.0)}, one{cplx(1.0)};
    CHECK(fbi_kernel(zero, zero, one, 1.0) == cplx(1.0));
    CHECK(std::abs(fbi_kernel(one, zero, one, 1.0) - std::exp(cplx(-1.0, 1.0)) * cplx(1.0, 1.0)) < 1e-15);
    CHECK(std::abs(fbi_kernel(CVec{cplx(0.0, 1.0)}, zero, one, 1.0)) < 1e-15);
    try {
        fbi_kernel(CVec{cplx(0.0, 30.0)}, zero, one, 1.0);
        FAIL("no overflow");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Overflow);
    }
}

TEST_CASE("transform of zero is zero") {
    const Chart& c = app::shipped_chart("tube_t2");
    const Cutoff chi{{0.0}, 0.5, 1.0};
    const Field zero{[](std::span<const double>, std::span<const double>) { return cplx(0.0); }, {}};
    const double t[1] = {0.3};
    const FBIValue v = fbi_transform(c, zero, chi, t, CVec{cplx(0.0, 0.09)}, CVec{cplx(10.0)}, 1.0, support_grid(chi, 50));
    CHECK(v.value == cplx(0.0));
}

TEST_CASE("u = 1 on the t^2 tube against an adaptive Gauss-Kronrod oracle") {
    const Chart& c = app::shipped_chart("tube_t2");
    const Cutoff chi{{0.0}, 0.5, 1.0};
    const Field one{[](std::span<const double>, std::span<const double>) { return cplx(1.0); }, {}};
    const double xi = 4.0;
    // at t = 0, z = 0: integrand chi(y) e^{-i xi y - xi y^2} (1 - i y)
    auto part = [&](bool imag) {
        auto f = [&](double y) {
            const double c0 = chi(std::vector<double>{y});
            const cplx v = c0 * std::exp(cplx(-xi * y * y, -xi * y)) * cplx(1.0, -y);
            return imag ? v.imag() : v.real();
        };
        using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
        double sum = 0.0;
        for (auto [a, b] : {std::pair{-1.0, -0.5}, std::pair{-0.5, 0.5}, std::pair{0.5, 1.0}})
            sum += GK::integrate(f, a, b, 15, 1e-15);
        return sum;
    };
    const cplx oracle(part(false), part(true));
    const double t0[1] = {0.0};
    const FBIValue v = fbi_transform(c, one, chi, t0, CVec{cplx(0.0)}, CVec{cplx(xi)}, 1.0, support_grid(chi, 40));
    CHECK(rel(v.value, oracle) < 1e-6);
    CHECK(rel(v.value, oracle) < 1e-12);
    // on a tube the value at z = Z(x,t) does not depend on t
    const double t1[1] = {0.6};
    const FBIValue w = fbi_transform(c, one, chi, t1, CVec{cplx(0.0, 0.36)}, CVec{cplx(xi)}, 1.0, support_grid(chi, 40));
    CHECK(rel(w.value, v.value) < 1e-12);
}

TEST_CASE("u = 1 on a wide flat plateau matches the Gaussian integral") {
    const Chart wide(1, 1, {parse("0")}, true, Box{{{-8.0, 8.0}}}, unit1);
    const Cutoff big{{0.0}, 6.0, 7.0};
    const Field one{[](std::span<const double>, std::span<const double>) { return cplx(1.0); }, {}};
    const double t0[1] = {0.0};
    for (double xi : {1.0, 3.0, 10.0}) {
        const FBIValue v = fbi_transform(wide, one, big, t0, CVec{cplx(0.0)}, CVec{cplx(xi)}, 1.0, support_grid(big, 12));
        const double exact = 0.5 * std::sqrt(std::numbers::pi / xi) * std::exp(-xi / 4.0);
        CHECK(rel(v.value, exact) < 1e-8);
    }
}

TEST_CASE("linearity, conjugate symmetry and the undersampling flag") {
    const Chart& c = app::shipped_chart("circle");
    const Cutoff chi{{0.0}, 0.5, 1.0};
    const QuadratureGrid grid = support_grid(chi, 60);
    const Field u{[](std::span<const double> x, std::span<const double> t) { return cplx(std::cos(3 * x[0]) + t[0]); }, {}};
    const Field v{[](std::span<const double> x, std::span<const double> t) { return cplx(x[0] * x[0], t[1]); }, {}};
    const cplx a(1.5, -0.5), b(-0.25, 2.0);
    const Field w{[&](std::span<const double> x, std::span<const double> t) { return a * u.eval(x, t) + b * v.eval(x, t); }, {}};
    const std::vector<double> t{0.2, -0.3}, x{0.1};
    const Slice su(c, u, chi, t, grid), sv(c, v, chi, t, grid), sw(c, w, chi, t, grid);
    for (double xi : {5.0, -17.0, 55.0}) {
        const Covector cov = rt_covector(c, x, t, std::vector<double>{xi});
        const FBIValue fu = su.transform(cov.z, cov.zeta), fv = sv.transform(cov.z, cov.zeta);
        const FBIValue fw = sw.transform(cov.z, cov.zeta);
        CHECK(std::abs(fw.value - a * fu.value - b * fv.value) <= 1e-14 * (std::abs(a) * fu.abs_sum + std::abs(b) * fv.abs_sum));
        const Covector cm = rt_covector(c, x, t, std::vector<double>{-xi});
        CHECK(std::abs(su.transform(cm.z, cm.zeta).value - std::conj(fu.value)) <= 1e-14 * fu.abs_sum);
        CHECK_FALSE(fu.undersampled);
    }
    const Covector far = rt_covector(c, x, t, std::vector<double>{300.0});
    CHECK(su.transform(far.z, far.zeta).undersampled);
}

TEST_CASE("Gaussian moment identities") {
    const Chart flat(1, 1, {parse("0")}, true, unit1, unit1);
    const double t0[1] = {0.0}, t5[1] = {0.5};
    const MomentResidual a = gaussian_moment_check(flat, t0, 1.0, CVec{cplx(0.0)});
    CHECK(a.mass < 1e-12);
    CHECK(a.odd < 1e-12);
    const MomentResidual b = gaussian_moment_check(app::shipped_chart("tube_t2"), t5, cplx(2.0, 1.0), CVec{cplx(0.3, 0.1)});
    CHECK(b.mass < 1e-8);
    CHECK(b.odd < 1e-8);
    CHECK_FALSE(b.truncation_warning);
    const MomentResidual c = gaussian_moment_check(flat, t0, 1.0, CVec{cplx(0.0)}, {}, 1.0);
    CHECK(c.truncation_warning);
    CHECK(c.mass > 1e-3);
}

TEST_CASE("two-Gaussian identity") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (const auto& nc : app::shipped_charts())
        for (int i = 0; i < 100; ++i) {
            std::vector<double> t(nc.chart.n());
            for (double& v : t) v = U(rng);
            const double x[1] = {U(rng)}, xp[1] = {U(rng)}, xpp[1] = {U(rng)};
            const SumIdentity r = gaussian_sum_identity_residual(nc.chart, t, x, xp, xpp);
            CHECK(r.residual < 1e-12 * (1.0 + r.lhs_abs));
            const SumIdentity d = gaussian_sum_identity_residual(nc.chart, t, x, xp, x);
            CHECK(d.residual < 1e-15 * (1.0 + d.lhs_abs));
        }
    const Box b2{{{-1.0, 1.0}, {-1.0, 1.0}}};
    const Chart m2(2, 1, {parse("t^2"), parse("sin(t)")}, true, b2, unit1);
    for (int i = 0; i < 100; ++i) {
        const double t[1] = {U(rng)};
        const double x[2] = {U(rng), U(rng)}, xp[2] = {U(rng), U(rng)}, xpp[2] = {U(rng), U(rng)};
        const SumIdentity r = gaussian_sum_identity_residual(m2, t, x, xp, xpp);
        CHECK(r.residual < 1e-12 * (1.0 + r.lhs_abs));
    }
}

TEST_CASE("Gaussian derivative closed forms") {
    const double lam = 1.7, x = 0.4;
    const double g = std::exp(-lam * x * x);
    CHECK(gaussian_derivative(std::vector<int>{1}, lam, std::vector<double>{x}) == doctest::Approx(-2 * lam * x * g));
    CHECK(gaussian_derivative(std::vector<int>{2}, lam, std::vector<double>{x}) ==
          doctest::Approx((-2 * lam + 4 * lam * lam * x * x) * g));
    CHECK(gaussian_derivative(std::vector<int>{0, 0}, lam, std::vector<double>{x, -x}) == doctest::Approx(g * g));
    CHECK_THROWS_AS(gaussian_derivative(std::vector<int>{13}, lam, std::vector<double>{x}), Error);
}
