#include "commands.hpp"
#include "config.hpp"
#include "fixtures.hpp"

#include "hypofbi/hypofbi.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

using namespace hypofbi;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = HYPOFBI_CONFIG_DIR;
constexpr std::uint64_t kSeed = 20240611;

struct Outcome {
    bool pass = true;
    std::string detail;
    std::map<std::string, std::string> files;  // deterministic artefacts, compared by criterion 11
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<double> uniform_point(std::mt19937_64& rng, int dim, double lo, double hi) {
    std::uniform_real_distribution<double> U(lo, hi);
    std::vector<double> p(dim);
    for (double& v : p) v = U(rng);
    return p;
}

// zeta = a + ib with |b| <= kappa |a| sampled uniformly in the ratio
CVec cone_vector(std::mt19937_64& rng, int m, double kappa) {
    std::normal_distribution<double> N;
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<double> re(m), im(m);
    for (int k = 0; k < m; ++k) re[k] = N(rng), im[k] = N(rng);
    const double nre = norm(re), nim = norm(im), target = kappa * nre * U(rng);
    CVec z(m);
    for (int k = 0; k < m; ++k) z[k] = {re[k], nim > 0 ? im[k] * target / nim : 0.0};
    return z;
}

void multi_indices(int m, int order, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == m) {
        out.push_back(cur);
        return;
    }
    for (int a = 0; a <= order; ++a) {
        cur.push_back(a);
        multi_indices(m, order - a, cur, out);
        cur.pop_back();
    }
}

app::Output run_config(const std::string& name, int threads,
                       app::Output (*cmd)(const app::Job&, const app::RunOptions&)) {
    app::RunOptions o;
    o.threads = threads;
    o.seed = kSeed;
    return cmd(app::load_job(kConfigs / name), o);
}

void keep(Outcome& out, const std::string& prefix, const app::Output& o) {
    for (const auto& [k, v] : o.files) out.files[prefix + "/" + k] = v;
}

Outcome criterion1(int) {
    Outcome o;
    std::mt19937_64 rng(kSeed + 1);
    double worst = 0.0;
    for (const auto& nc : app::shipped_charts())
        for (int i = 0; i < 100; ++i) {
            const auto t = uniform_point(rng, nc.chart.n(), -1, 1);
            const auto x = uniform_point(rng, nc.chart.m(), -1, 1), xp = uniform_point(rng, nc.chart.m(), -1, 1),
                       xpp = uniform_point(rng, nc.chart.m(), -1, 1);
            const SumIdentity r = gaussian_sum_identity_residual(nc.chart, t, x, xp, xpp);
            const double rel = r.residual / (1.0 + r.lhs_abs);
            worst = std::max(worst, rel);
            if (!(rel < 1e-12)) o.pass = false;
        }
    o.detail = fmt("500 triples on 5 charts, worst residual/(1+|LHS|) %.2e (tol 1e-12)", worst);
    return o;
}

Outcome criterion2(int) {
    Outcome o;
    std::mt19937_64 rng(kSeed + 2);
    double worst = 0.0;
    int cases = 0;
    for (int m = 1; m <= 3; ++m) {
        std::vector<std::vector<int>> alphas;
        std::vector<int> cur;
        multi_indices(m, 4, cur, alphas);
        for (double lam : {0.5, 1.0, 3.0}) {
            Expr sum = Expr::constant(0.0);
            for (int k = 0; k < m; ++k) sum = sum + Expr::x(k) * Expr::x(k);
            const Expr g = exp(Expr::constant(-lam) * sum);
            for (const auto& alpha : alphas) {
                Expr d = g;
                for (int k = 0; k < m; ++k)
                    for (int r = 0; r < alpha[k]; ++r) d = d.diff_x(k);
                for (int i = 0; i < 20; ++i) {
                    const auto x = uniform_point(rng, m, -1.5, 1.5);
                    const double sym = d.eval(x, {}), closed = gaussian_derivative(alpha, lam, x);
                    const double rel = std::abs(sym - closed) / std::max(std::abs(sym), 1e-12);
                    worst = std::max(worst, rel);
                    ++cases;
                    if (!(rel < 1e-8)) o.pass = false;
                }
            }
        }
    }
    o.detail = fmt("%d evaluations, |alpha| <= 4, m <= 3, worst rel %.2e (tol 1e-8)", cases, worst);
    return o;
}

Outcome criterion3(int) {
    Outcome o;
    std::mt19937_64 rng(kSeed + 3);
    std::normal_distribution<double> N;
    double worst = 0.0;
    for (int m = 1; m <= 3; ++m)
        for (int i = 0; i < 1000; ++i) {
            CVec z(m);
            for (auto& v : z) v = {N(rng), N(rng)};
            const CVec zeta = cone_vector(rng, m, 0.9);
            const cplx a = delta_factor(z, zeta), b = delta_factor_dense(z, zeta);
            const double rel = std::abs(a - b) / std::abs(b);
            worst = std::max(worst, rel);
            if (!(rel < 1e-12)) o.pass = false;
        }
    o.detail = fmt("3000 samples, m = 1..3, worst rel %.2e (tol 1e-12)", worst);
    return o;
}

Outcome criterion4(int) {
    Outcome o;
    std::mt19937_64 rng(kSeed + 4);
    std::uniform_int_distribution<int> M(1, 3);
    int violations = 0, samples = 0;
    for (double kappa : {0.25, 0.5, 0.9})
        for (int i = 0; i < 10000; ++i) {
            const CVec z = cone_vector(rng, M(rng), kappa);
            if (!cone_member(z, kappa)) continue;
            ++samples;
            const BracketBound b = bracket_bound_check(z, kappa);
            const bool ok = b.re_bracket >= b.lower && b.im_bracket <= b.norm;
            if (!ok || !b.ok) ++violations;
        }
    o.pass = violations == 0 && samples == 30000;
    o.detail = fmt("%d cone samples, %d violations", samples, violations);
    return o;
}

Outcome criterion5(int) {
    Outcome o;
    const Chart& t2 = app::shipped_chart("tube_t2");
    const Chart t2m2(2, 1, {parse("t^2"), parse("t")}, true, Box{{{-1, 1}, {-1, 1}}}, Box{{{-1, 1}}});
    double worst = 0.0;
    int cases = 0;
    auto record = [&](const MomentResidual& r) {
        worst = std::max({worst, r.mass, r.odd});
        ++cases;
        if (!(r.mass < 1e-8 && r.odd < 1e-8) || r.truncation_warning) o.pass = false;
    };
    for (cplx omega : {cplx(1.0, 0.0), cplx(4.0, 1.5), cplx(20.0, -8.0)})
        for (double tv : {0.0, 0.5, -0.8}) {
            const double t[1] = {tv};
            record(gaussian_moment_check(t2, t, omega, z_eval(t2, std::vector<double>{0.1}, t), {1}));
            const CVec z2 = z_eval(t2m2, std::vector<double>{0.1, -0.2}, t);
            for (std::vector<int> poly : {std::vector<int>{1, 0}, std::vector<int>{0, 1}, std::vector<int>{1, 1}})
                record(gaussian_moment_check(t2m2, t, omega, z2, poly));
        }
    o.detail = fmt("%d moment checks, m = 1, 2, worst residual %.2e (tol 1e-8)", cases, worst);
    return o;
}

Outcome criterion6(int) {
    Outcome o;
    const app::Job job = app::load_job(kConfigs / "invert_demo.json");
    const json& inv = job.cfg.at("invert");
    const bool shape = job.cfg.at("cutoff").at("rho_inner").get<double>() == 0.5 &&
                       job.cfg.at("quadrature").at("panels").get<int>() == 64 &&
                       job.cfg.at("quadrature").at("nodes").get<int>() == 4 &&
                       inv.at("epsilon").front().get<double>() == 1e-1 && inv.at("epsilon").back().get<double>() == 1e-3;
    app::RunOptions ro;
    ro.threads = 1;
    ro.seed = kSeed;
    const app::Output out = app::cmd_invert(job, ro);
    keep(o, "invert_demo", out);
    const json r = json::parse(out.files.at("inversion.json"));
    const auto sup = r.at("sup_error").get<std::vector<double>>();
    const int points = r.at("xi_points").get<int>();
    bool decreasing = sup.size() >= 3;
    for (std::size_t i = 1; i < sup.size(); ++i) decreasing = decreasing && sup[i] < sup[i - 1];
    o.pass = shape && points == 256 && decreasing && sup.back() < 1e-2;
    std::ostringstream ladder;
    for (double s : sup) ladder << fmt(" %.3e", s);
    o.detail = fmt("sup error over eps ladder:%s; %d xi points", ladder.str().c_str(), points) +
               (decreasing ? "" : "; not strictly decreasing") + (shape ? "" : "; config does not match");
    return o;
}

Outcome criterion7(int threads) {
    Outcome o;
    auto classify_cfg = [&](const std::string& name) {
        const app::Output out = run_config(name, threads, app::cmd_classify);
        keep(o, name, out);
        return json::parse(out.files.at("report.json"));
    };
    const json h = classify_cfg("classify_holomorphic.json"), g2 = classify_cfg("classify_gevrey2.json"),
               g3 = classify_cfg("classify_gevrey3.json"), st = classify_cfg("classify_step.json");
    const GevreyEstimate oracle =
        gevrey_oracle([](double y) { return gevrey_flat_profile(2.0, y); }, 10, -1.0, 1.0);
    const double s2 = g2.at("s_hat").get<double>(), s3 = g3.at("s_hat").get<double>();
    const bool labels = h.at("label") == "gevrey(1.00)" && st.at("label") == "non-smooth" &&
                        g2.at("label").get<std::string>().starts_with("gevrey(") &&
                        g3.at("label").get<std::string>().starts_with("gevrey(");
    const bool ranges = s2 >= 1.6 && s2 <= 2.5 && s3 >= 2.4 && s3 <= 3.8 && std::abs(s2 - oracle.s_hat) <= 0.4;

    // noiseless synthetic series: C e^{-eps |xi|^{1/s}}
    const auto mags = log_ladder(4.0, 400.0, 20);
    double worst = 0.0;
    bool models = true;
    for (double s : {1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0})
        for (double eps : {0.8, 2.0}) {
            std::vector<double> v;
            for (double x : mags) v.push_back(3.0 * std::exp(-eps * std::pow(x, 1.0 / s)));
            const DecayFit f = fit_decay(mags, v);
            models = models && f.model == DecayModel::StretchedExp;
            worst = std::max(worst, std::abs(f.s_hat - s));
        }
    o.pass = labels && ranges && models && worst <= 0.05;
    o.detail = fmt("holomorphic %s, gevrey_flat(2) %.2f (oracle %.2f), gevrey_flat(3) %.2f, step %s; "
                   "synthetic worst |ds| %.3f (tol 0.05)",
                   h.at("label").get<std::string>().c_str(), s2, oracle.s_hat, s3,
                   st.at("label").get<std::string>().c_str(), worst);
    return o;
}

Outcome criterion8(int threads) {
    Outcome o;
    const app::Output out = run_config("propagate_diagonal_gevrey2.json", threads, app::cmd_propagate);
    keep(o, "propagate_diagonal_gevrey2", out);
    const json d = json::parse(out.files.at("report.json")).at("decay_difference");
    const json ft = d.at("fit_t"), fp = d.at("fit_t_prime");
    const double rate = d.at("rate").get<double>(), r2 = d.at("r2").get<double>();
    const double rt = d.at("rate_t_at_xi_max").get<double>(), rp = d.at("rate_t_prime_at_xi_max").get<double>();
    auto near2 = [](const json& f) {
        return f.at("model") == "stretched_exp" && std::abs(f.at("s_hat").get<double>() - 2.0) <= 0.4;
    };
    o.pass = !d.at("identical").get<bool>() && d.at("slope").get<double>() < 0.0 && r2 >= 0.9 && near2(ft) &&
             near2(fp) && rate > rt && rate > rp;
    o.detail = fmt("difference rate %.4f (r2 %.4f) vs individual rates %.4f, %.4f; s_hat %.2f, %.2f (|s-2| <= 0.4)",
                   rate, r2, rt, rp, ft.at("s_hat").get<double>(), fp.at("s_hat").get<double>());
    return o;
}

Outcome criterion9(int) {
    Outcome o;
    const Cutoff chi{{0.0}, 0.5, 1.0};
    const QuadratureGrid grid = support_grid(chi, 200.0, 8);
    const auto ladder = log_ladder(4.0, 200.0, 12);
    const double rho = 0.4, c0 = 1.0;
    const std::vector<double> center{0.0}, x{0.1}, dir{1.0};
    std::ostringstream log;
    int cases = 0;
    double worst = -1e300;
    for (const char* name : {"flat", "tube_t2"}) {
        const Chart& c = app::shipped_chart(name);
        const std::vector<std::pair<std::string, Field>> inputs{
            {"one", annulus_field(make_holomorphic_composite(c, {1.0}).field, center, rho, 0.2)},
            {"exp", annulus_field(make_holomorphic_exp(c, 20).field, center, rho, 0.2)},
            {"step", annulus_field(make_step(c, 0, 0.8, 1.0).field, center, rho, 0.2)}};
        for (double tv : {0.0, 0.3}) {
            const std::vector<double> t{tv};
            for (const auto& [label, f] : inputs) {
                const AnnulusFit a = annulus_decay_check(c, f, chi, grid, rho, t, x, dir, ladder, c0);
                ++cases;
                worst = std::max(worst, a.slope);
                if (!a.pass || a.vacuous || !a.exponential_preferred || a.slope > -c0 * rho * rho / 16.0)
                    o.pass = false;
                log << fmt("%s %s t=%.1f slope %.17g r2 %.17g\n", name, label.c_str(), tv, a.slope, a.r2);
            }
        }
    }
    o.files["annulus.txt"] = log.str();
    o.detail = fmt("%d cases on flat and t^2, worst slope %.4f vs bound %.4f", cases, worst, -c0 * rho * rho / 16.0);
    return o;
}

Outcome criterion10(int threads) {
    Outcome o;
    std::string summary;
    for (const char* name : {"propagate_circle_holomorphic.json", "propagate_circle_gevrey2.json",
                             "propagate_diagonal_holomorphic.json", "propagate_diagonal_gevrey2.json"}) {
        const app::Output out = run_config(name, threads, app::cmd_propagate);
        keep(o, name, out);
        const json r = json::parse(out.files.at("report.json"));
        const bool ok = r.at("gate").at("passed").get<bool>() && r.at("consistent").get<bool>() &&
                        r.at("all_regular").get<bool>() && r.at("fiber").at("size").get<int>() > 1;
        o.pass = o.pass && ok;
        summary += fmt("%s %s (%d pts); ", name, r.at("verdict").get<std::string>().c_str(),
                       r.at("fiber").at("size").get<int>());
    }
    std::mt19937_64 rng(kSeed + 10);
    const TGrid grid = TGrid::uniform(std::vector<double>{-1, -1}, std::vector<double>{1, 1}, 0.05);
    const std::vector<double> x0{0.0}, t0{0.0, 0.0};
    int reseeds = 0;
    for (const char* name : {"circle", "diagonal"}) {
        const Chart& c = app::shipped_chart(name);
        const FiberComponent base = fiber_component(c, x0, t0, grid);
        std::uniform_int_distribution<std::size_t> pick(0, base.points.size() - 1);
        for (int k = 0; k < 10; ++k, ++reseeds)
            if (fiber_component(c, x0, base.points[pick(rng)], grid, {}, base.level).indices != base.indices)
                o.pass = false;
    }
    o.detail = summary + fmt("%d reseeded fibers", reseeds);
    return o;
}

using Criterion = Outcome (*)(int);

struct Entry {
    int id;
    Criterion fn;
    double limit_s;
};

} // namespace

int main() {
    const Entry entries[] = {{1, criterion1, 1.0},   {2, criterion2, 5.0},   {3, criterion3, 1.0},
                             {4, criterion4, 1.0},   {5, criterion5, 10.0},  {6, criterion6, 300.0},
                             {7, criterion7, 600.0}, {8, criterion8, 300.0}, {9, criterion9, 120.0},
                             {10, criterion10, 900.0}};
    int failed = 0;
    std::map<int, Outcome> first;
    for (const auto& e : entries) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = e.fn(0);
        } catch (const std::exception& ex) {
            o.pass = false;
            o.detail = std::string("threw: ") + ex.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool pass = o.pass && secs < e.limit_s;
        failed += pass ? 0 : 1;
        std::printf("criterion %2d: %s  %s  [%.2f s, limit %.0f s]\n", e.id, pass ? "PASS" : "FAIL", o.detail.c_str(),
                    secs, e.limit_s);
        std::fflush(stdout);
        if (e.id >= 6) first[e.id] = std::move(o);
    }

    // rerun 6-10 on a different thread count and compare every artefact byte for byte
    int compared = 0, differing = 0;
    std::string first_diff;
    try {
        for (const auto& e : entries) {
            if (e.id < 6) continue;
            const Outcome again = e.fn(3);
            const auto& before = first.at(e.id).files;
            if (again.files.size() != before.size()) ++differing, first_diff = fmt("criterion %d file set", e.id);
            for (const auto& [name, content] : before) {
                ++compared;
                const auto it = again.files.find(name);
                if (it == again.files.end() || it->second != content) {
                    ++differing;
                    if (first_diff.empty()) first_diff = name;
                }
            }
        }
    } catch (const std::exception& ex) {
        ++differing;
        first_diff = std::string("rerun threw: ") + ex.what();
    }
    const bool det = differing == 0 && compared > 0;
    failed += det ? 0 : 1;
    std::printf("criterion 11: %s  %d output files from criteria 6-10 bit-identical on rerun%s\n",
                det ? "PASS" : "FAIL", compared, det ? "" : (", first difference: " + first_diff).c_str());
    std::printf("%s\n", failed == 0 ? "all criteria passed" : fmt("%d criteria failed", failed).c_str());
    return failed == 0 ? 0 : 1;
}
