#include "commands.hpp"

#include "selftest.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace hypofbi::app {

namespace fs = std::filesystem;

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
    }
    line += '\n';
    return line;
}

std::string numbered(const char* prefix, int count) {
    std::string s;
    for (int i = 1; i <= count; ++i) s += std::string(i > 1 ? "," : "") + prefix + std::to_string(i);
    return s;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::uint64_t job_seed(const Job& job, const RunOptions& opts) {
    if (opts.seed_given || !job.cfg.contains("seed")) return opts.seed;
    const json& s = job.cfg.at("seed");
    if (!s.is_number_unsigned() && !s.is_number_integer()) throw ConfigError("seed must be a non-negative integer");
    return s.get<std::uint64_t>();
}

const json& section(const Job& job, const char* key) {
    static const json empty = json::object();
    return job.cfg.contains(key) ? job.cfg.at(key) : empty;
}

const json& optional_key(const Job& job, const char* key) {
    static const json null;
    return job.cfg.contains(key) ? job.cfg.at(key) : null;
}

// Objects shared by the transform-style commands.
struct Setup {
    Chart chart;
    Cutoff chi;
    TestSolution solution;
    std::vector<double> magnitudes;
    QuadratureGrid grid;
    std::vector<std::vector<double>> directions;
    double lambda = 1.0;
};

Setup load_setup(const Job& job, const json& magnitudes) {
    Chart chart = job_chart(job);
    Cutoff chi = cutoff_from_json(section(job, "cutoff"), chart);
    TestSolution sol = solution_from_json(require(job.cfg, "solution"), chart, chi);
    std::vector<double> mags = magnitudes_from_json(magnitudes);
    QuadratureGrid grid = grid_from_json(section(job, "quadrature"), chi, mags.back());
    auto dirs = directions_from_json(optional_key(job, "directions"), chart.m());
    const double lambda = job.cfg.value("lambda", 1.0);
    return {std::move(chart), std::move(chi), std::move(sol), std::move(mags), std::move(grid), std::move(dirs), lambda};
}

std::vector<std::vector<double>> points_or(const Job& job, const char* key, int dim, std::vector<double> fallback) {
    if (!job.cfg.contains(key)) return {std::move(fallback)};
    return points_from_json(job.cfg.at(key), dim, key);
}

std::string quadrature_summary(const QuadratureGrid& grid) {
    std::ostringstream os;
    os << "quadrature: " << grid.size() << " nodes";
    for (const auto& a : grid.axes()) os << ", " << a.panels << "x" << a.nodes << " on [" << a.lo << ", " << a.hi << "]";
    os << "\n|xi|_max = " << g17(grid.xi_cap()) << " (panel width " << grid.max_panel_width() << ")\n";
    return os.str();
}

// Warns when sampled pairs on the t points do not look well positioned.
std::string position_warning(const Chart& chart, const Cutoff& chi, const std::vector<std::vector<double>>& ts,
                             const std::vector<std::vector<double>>& dirs, int threads) {
    std::vector<std::vector<double>> xs;
    const int per_axis = 5;
    std::vector<int> idx(chart.m(), 0);
    while (true) {
        std::vector<double> p(chart.m());
        for (int k = 0; k < chart.m(); ++k)
            p[k] = chi.center[k] + chi.rho_inner * (2.0 * idx[k] / (per_axis - 1) - 1.0) / std::sqrt(chart.m());
        xs.push_back(std::move(p));
        int k = chart.m() - 1;
        while (k >= 0 && ++idx[k] == per_axis) idx[k--] = 0;
        if (k < 0) break;
    }
    const PositionDiagnostics d = well_positioned_scan(chart, 0.9, ts, xs, dirs, threads);
    std::ostringstream os;
    os << "well-positioned scan: c_hat = " << d.c_hat << " over " << d.pairs << " pairs\n";
    if (!(d.c_hat > 0.0)) os << "warning: c_hat <= 0, the chart does not look well positioned\n";
    return os.str();
}

json fit_json(const DecayFit& f) {
    return {{"model", to_string(f.model)},
            {"s_hat", f.s_hat},
            {"eps_hat", f.eps_hat},
            {"logC_hat", f.logC_hat},
            {"r2", f.r2},
            {"k_hat", f.k_hat},
            {"r2_polynomial", f.r2_polynomial},
            {"sse_stretched", f.sse_stretched},
            {"sse_polynomial", f.sse_polynomial},
            {"points_used", f.points_used},
            {"floored", f.floored},
            {"xi_max_used", f.xi_max_used},
            {"effective_rate", effective_rate(f, f.xi_max_used)},
            {"early_floor", f.early_floor},
            {"zero_window", f.zero_window}};
}

json report_json(const RegularityReport& r, const std::vector<std::vector<double>>& dirs) {
    json fits = json::array();
    for (const auto& sf : r.fits) {
        json j = fit_json(sf.fit);
        j["base"] = sf.base;
        j["dir"] = sf.dir;
        j["direction"] = dirs[sf.dir];
        fits.push_back(std::move(j));
    }
    json flags = json::array();
    if (r.zero_window) flags.push_back("identically-zero-window");
    if (r.near_plateau_edge) flags.push_back("near-plateau-edge");
    json out{{"label", r.label_string()},
             {"s_hat", number_or_null(r.s_hat)},
             {"flags", flags},
             {"fits", fits}};
    if (r.worst >= 0) out["worst"] = {{"base", r.fits[r.worst].base}, {"dir", r.fits[r.worst].dir},
                                      {"direction", dirs[r.fits[r.worst].dir]}};
    else out["worst"] = nullptr;
    return out;
}

std::string samples_csv(const Chart& chart, const std::vector<DecaySample>& samples) {
    std::string csv = numbered("t_", chart.n()) + "," + numbered("x_", chart.m()) + ",dir_index,xi_mag,re_F,im_F,abs_F\n";
    for (const auto& s : samples) {
        std::vector<std::string> row;
        for (double v : s.t) row.push_back(g17(v));
        for (double v : s.x) row.push_back(g17(v));
        row.push_back(std::to_string(s.dir));
        row.push_back(g17(s.xi_mag));
        row.push_back(g17(s.value.real()));
        row.push_back(g17(s.value.imag()));
        row.push_back(g17(s.abs_value));
        csv += join(row);
    }
    return csv;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

} // namespace

Output cmd_transform(const Job& job, const RunOptions& opts) {
    job_seed(job, opts);  // validates the field
    Setup s = load_setup(job, require(job.cfg, "magnitudes"));
    const auto ts = points_or(job, "t", s.chart.n(), std::vector<double>(s.chart.n(), 0.0));
    const auto xs = points_or(job, "x", s.chart.m(), s.chi.center);

    SweepPlan plan;
    for (const auto& t : ts)
        for (const auto& x : xs) plan.base_points.push_back({x, t});
    plan.directions = s.directions;
    plan.magnitudes = s.magnitudes;
    plan.cutoff = s.chi;
    plan.lambda = s.lambda;
    plan.grid = s.grid;
    const auto samples = sweep(s.chart, s.solution.field, plan, opts.threads);

    Output out;
    out.files["field.csv"] = samples_csv(s.chart, samples);
    out.summary = quadrature_summary(s.grid) + position_warning(s.chart, s.chi, ts, s.directions, opts.threads) +
                  "wrote " + std::to_string(samples.size()) + " rows to field.csv\n";
    return out;
}

Output cmd_invert(const Job& job, const RunOptions& opts) {
    const std::uint64_t seed = job_seed(job, opts);
    Chart chart = job_chart(job);
    if (!chart.tube() || chart.m() != 1) throw ConfigError("invert needs a tube chart with m = 1");
    const Cutoff chi = cutoff_from_json(section(job, "cutoff"), chart);
    const TestSolution sol = solution_from_json(require(job.cfg, "solution"), chart, chi);
    const QuadratureGrid grid = grid_from_json(section(job, "quadrature"), chi, 64.0);
    const json& inv = require(job.cfg, "invert");

    std::vector<double> t(chart.n(), 0.0);
    if (inv.contains("t")) {
        t = points_from_json(json::array({inv.at("t")}), chart.n(), "invert.t").front();
    }
    std::vector<double> xs;
    const json& xj = require(inv, "x");
    if (xj.is_object()) {
        const double lo = require(xj, "lo").get<double>(), hi = require(xj, "hi").get<double>();
        const double step = require(xj, "step").get<double>();
        if (!(step > 0.0 && hi >= lo)) throw ConfigError("invert.x needs lo <= hi and step > 0");
        const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
        for (int i = 0; i < count; ++i) xs.push_back(lo + i * step);
    } else {
        for (const auto& p : points_from_json(xj, 1, "invert.x")) xs.push_back(p[0]);
    }
    std::vector<double> eps;
    for (const auto& p : points_from_json(require(inv, "epsilon"), 1, "invert.epsilon")) {
        if (!(p[0] > 0.0)) throw ConfigError("epsilon values must be positive");
        eps.push_back(p[0]);
    }
    const int per_half = inv.value("xi_panels_per_half", 32);
    const int xi_nodes = inv.value("xi_nodes", 4);
    const double xi_max = inv.value("xi_max", grid.xi_cap());
    if (per_half < 1 || xi_nodes < 1) throw ConfigError("xi grid needs positive panel and node counts");
    if (xi_max > grid.xi_cap() * (1.0 + 1e-12))
        throw Error(ErrorCode::Undersampled, "invert.xi_max exceeds the quadrature cap |xi|_max = " + g17(grid.xi_cap()));

    const InversionField field(chart, sol.field, chi, t, grid, symmetric_xi_grid(xi_max, per_half, xi_nodes), {},
                               opts.threads);
    std::vector<std::vector<cplx>> values(xs.size());
    std::vector<cplx> exact(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) {
        values[i] = field.invert(xs[i], eps);
        const double x[1] = {xs[i]};
        exact[i] = chi(x) * sol(x, t);
    }, opts.threads);

    std::string csv = "epsilon,x,re_u,im_u,re_exact,im_exact,abs_error\n";
    std::vector<double> sup(eps.size(), 0.0);
    for (std::size_t e = 0; e < eps.size(); ++e)
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double err = std::abs(values[i][e] - exact[i]);
            sup[e] = std::max(sup[e], err);
            csv += join({g17(eps[e]), g17(xs[i]), g17(values[i][e].real()), g17(values[i][e].imag()),
                         g17(exact[i].real()), g17(exact[i].imag()), g17(err)});
        }
    json monotone = nullptr;
    if (eps.size() > 1) {
        bool dec = true;
        for (std::size_t e = 1; e < eps.size(); ++e) dec = dec && sup[e] < sup[e - 1];
        monotone = dec;
    }
    // the two inversion formulas must agree at the smallest epsilon
    double cross = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        cross = std::max(cross, std::abs(values[i].back() - field.intermediate(xs[i], eps.back())));
    json tails = json::array();
    for (double e : eps) tails.push_back(field.tail_warning(e));

    json report{{"seed", seed},
                {"t", t},
                {"epsilon", eps},
                {"sup_error", sup},
                {"strictly_decreasing", monotone},
                {"tail_warning", tails},
                {"xi_max", xi_max},
                {"xi_points", field.xi_grid().xi.size()},
                {"field_size", field.field_size()},
                {"formula_cross_check", cross}};
    Output out;
    out.files["inversion.csv"] = csv;
    out.files["inversion.json"] = dump(report);
    std::ostringstream os;
    os << quadrature_summary(grid);
    for (std::size_t e = 0; e < eps.size(); ++e)
        os << "epsilon " << eps[e] << ": sup error " << sup[e] << (field.tail_warning(eps[e]) ? " (tail warning)" : "")
           << "\n";
    out.summary = os.str();
    return out;
}

Output cmd_classify(const Job& job, const RunOptions& opts) {
    const std::uint64_t seed = job_seed(job, opts);
    Setup s = load_setup(job, require(job.cfg, "magnitudes"));
    const FitOptions fo = fit_options_from_json(optional_key(job, "fit"));
    const auto ts = points_or(job, "t", s.chart.n(), std::vector<double>(s.chart.n(), 0.0));
    const auto xs = points_or(job, "x", s.chart.m(), s.chi.center);

    SweepPlan plan;
    for (const auto& t : ts)
        for (const auto& x : xs) plan.base_points.push_back({x, t});
    plan.directions = s.directions;
    plan.magnitudes = s.magnitudes;
    plan.cutoff = s.chi;
    plan.lambda = s.lambda;
    plan.grid = s.grid;
    const ClassifyResult res = classify_solution(s.chart, s.solution.field, plan, fo, opts.threads);

    json report = report_json(res.report, s.directions);
    json bases = json::array();
    for (const auto& b : plan.base_points) bases.push_back({{"x", b.x}, {"t", b.t}});
    report["seed"] = seed;
    report["solution"] = s.solution.description;
    report["ground_truth"] = s.solution.label.str();
    report["base_points"] = bases;
    report["magnitudes"] = s.magnitudes;
    report["xi_cap"] = s.grid.xi_cap();
    report["lambda"] = s.lambda;

    Output out;
    out.files["report.json"] = dump(report);
    out.files["samples.csv"] = samples_csv(s.chart, res.samples);
    // plot data: |xi|^{1/s_hat} against the log of the fitted (scaled) samples
    const std::size_t M = s.magnitudes.size();
    const double half_m = 0.5 * s.chart.m();
    for (std::size_t f = 0; f < res.report.fits.size(); ++f) {
        const SeriesFit& sf = res.report.fits[f];
        std::string dat = "# xi^(1/s_hat) log|F| (s_hat = " + g17(sf.fit.s_hat) + ", model " + to_string(sf.fit.model) +
                          ")\n";
        for (std::size_t k = 0; k < M; ++k) {
            const DecaySample& d = res.samples[f * M + k];
            const double v = std::max(d.abs_value * std::pow(d.zeta_norm, half_m), kSampleFloor);
            dat += g17(std::pow(d.xi_mag, 1.0 / sf.fit.s_hat)) + " " + g17(std::log(v)) + "\n";
        }
        out.files["series_b" + std::to_string(sf.base) + "_d" + std::to_string(sf.dir) + ".dat"] = dat;
    }
    out.summary = quadrature_summary(s.grid) + "label: " + res.report.label_string() + "\n";
    return out;
}

Output cmd_propagate(const Job& job, const RunOptions& opts) {
    const std::uint64_t seed = job_seed(job, opts);
    Setup s = load_setup(job, require(job.cfg, "magnitudes"));
    if (!s.chart.tube()) throw ConfigError("propagate needs a tube chart");
    const FitOptions fo = fit_options_from_json(optional_key(job, "fit"));
    const json& pj = require(job.cfg, "propagate");

    SigmaSetup sigma;
    sigma.x0 = pj.contains("x0") ? points_from_json(json::array({pj.at("x0")}), s.chart.m(), "propagate.x0").front()
                                 : s.chi.center;
    sigma.t0 = points_from_json(json::array({require(pj, "t0")}), s.chart.n(), "propagate.t0").front();
    const json& tg = require(pj, "t_grid");
    std::vector<double> lo, hi;
    if (tg.contains("lo")) lo = points_from_json(json::array({tg.at("lo")}), s.chart.n(), "t_grid.lo").front();
    else for (const auto& r : s.chart.W().ranges) lo.push_back(r.first);
    if (tg.contains("hi")) hi = points_from_json(json::array({tg.at("hi")}), s.chart.n(), "t_grid.hi").front();
    else for (const auto& r : s.chart.W().ranges) hi.push_back(r.second);
    const double step = require(tg, "step").get<double>();
    if (!(step > 0.0)) throw ConfigError("t_grid.step must be positive");
    sigma.grid = TGrid::uniform(lo, hi, step);
    if (pj.contains("tolerance")) sigma.fiber.tol = pj.at("tolerance").get<double>();
    if (pj.contains("level"))
        sigma.level = points_from_json(json::array({pj.at("level")}), s.chart.m(), "propagate.level").front();
    const double s_target = pj.value("s_target", 1.0);

    SweepPlan plan;
    plan.directions = s.directions;
    plan.magnitudes = s.magnitudes;
    plan.cutoff = s.chi;
    plan.lambda = s.lambda;
    plan.grid = s.grid;
    const ExperimentReport rep = propagation_experiment(s.chart, s.solution, sigma, plan, fo, s_target, opts.threads);

    json verdicts = json::array();
    for (const auto& v : rep.verdicts) {
        json rates = json::array();
        for (const auto& sf : v.report.fits)
            rates.push_back({{"direction", s.directions[sf.dir]},
                             {"model", to_string(sf.fit.model)},
                             {"s_hat", sf.fit.s_hat},
                             {"eps_hat", sf.fit.eps_hat},
                             {"r2", sf.fit.r2},
                             {"k_hat", sf.fit.k_hat},
                             {"effective_rate", effective_rate(sf.fit, sf.fit.xi_max_used)}});
        verdicts.push_back({{"t", v.t},
                            {"label", v.report.label_string()},
                            {"s_hat", number_or_null(v.report.s_hat)},
                            {"regular", v.regular},
                            {"rates", rates}});
    }
    json fiber{{"size", rep.fiber.points.size()},
               {"path_length", rep.fiber.path_length},
               {"step", rep.fiber.step},
               {"level", rep.fiber.level},
               {"adaptive", rep.fiber.adaptive},
               {"points", rep.fiber.points}};
    json gate{{"declared", rep.gate.declared},
              {"max_residual", rep.gate.max_residual},
              {"threshold", rep.gate.threshold},
              {"h", rep.gate.h},
              {"points", rep.gate.points},
              {"passed", rep.gate.passed},
              {"check", rep.gate.check}};
    json report{{"seed", seed},
                {"solution", s.solution.description},
                {"x0", sigma.x0},
                {"t0", sigma.t0},
                {"s_target", s_target},
                {"gate", gate},
                {"fiber", fiber},
                {"consistent", rep.consistent},
                {"all_regular", rep.all_regular},
                {"verdict", rep.consistent ? (rep.all_regular ? "all-regular" : "all-singular")
                                           : "mixed (falsification candidate)"},
                {"verdicts", verdicts}};

    Output out;
    if (pj.contains("t_prime")) {
        const auto tp = points_from_json(json::array({pj.at("t_prime")}), s.chart.n(), "propagate.t_prime").front();
        const DifferenceFit d = decay_difference(s.chart, s.solution.field, s.chi, s.grid, sigma.t0, tp, sigma.x0,
                                                 s.directions.front(), s.magnitudes, fo);
        const double xi_top = s.magnitudes.back();
        json dj{{"t", sigma.t0},
                {"t_prime", tp},
                {"x", sigma.x0},
                {"direction", s.directions.front()},
                {"identical", d.identical},
                {"slope", number_or_null(d.slope)},
                {"r2", d.r2},
                {"rate", number_or_null(d.rate)},
                {"points_used", d.points_used}};
        if (d.fit_t) dj["fit_t"] = fit_json(*d.fit_t), dj["rate_t_at_xi_max"] = effective_rate(*d.fit_t, xi_top);
        if (d.fit_tprime)
            dj["fit_t_prime"] = fit_json(*d.fit_tprime),
            dj["rate_t_prime_at_xi_max"] = effective_rate(*d.fit_tprime, xi_top);
        report["decay_difference"] = dj;
        std::string csv = "xi_mag,abs_difference,floor,abs_F_t,abs_F_t_prime\n";
        for (std::size_t k = 0; k < d.magnitudes.size(); ++k)
            csv += join({g17(d.magnitudes[k]), g17(d.difference[k]), g17(d.floor[k]), g17(d.abs_t[k]),
                         g17(d.abs_tprime[k])});
        out.files["decay_difference.csv"] = csv;
    }
    if (!rep.samples.empty()) out.files["mixed_samples.csv"] = samples_csv(s.chart, rep.samples);
    out.files["report.json"] = dump(report);
    std::ostringstream os;
    os << "fiber: " << rep.fiber.points.size() << " points, path length " << rep.fiber.path_length << "\n"
       << "gate residual: " << rep.gate.max_residual << "\n"
       << "verdict: " << report["verdict"].get<std::string>() << "\n";
    out.summary = os.str();
    return out;
}

int cmd_selftest(std::uint64_t seed, std::ostream& log, int threads) {
    int failed = 0;
    log << "selftest seed " << seed << "\n";
    for (const auto& r : run_suites(seed, threads)) {
        log << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.checks << " checks)";
        if (!r.detail.empty()) log << ": " << r.detail;
        log << "\n";
        failed += r.passed ? 0 : 1;
    }
    log << (failed == 0 ? "all suites passed" : std::to_string(failed) + " suite(s) failed") << "\n";
    return failed;
}

void write_outputs(const Output& out, const fs::path& dir) {
    fs::create_directories(dir);
    for (const auto& [name, content] : out.files) {
        std::ofstream f(dir / name, std::ios::binary);
        f << content;
        if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    }
}

int exit_code(ErrorCode code) {
    switch (code) {
    case ErrorCode::Syntax:
    case ErrorCode::UnknownIdentifier:
    case ErrorCode::BadExponent:
    case ErrorCode::Domain:
    case ErrorCode::InvalidArgument: return 2;
    case ErrorCode::DivisionByZero:
    case ErrorCode::Singular:
    case ErrorCode::BranchCut:
    case ErrorCode::Overflow:
    case ErrorCode::Undersampled:
    case ErrorCode::FitFailure: return 3;
    case ErrorCode::NotASolution: return 4;
    case ErrorCode::EmptyFiber: return 5;
    }
    return 1;
}

namespace {

int report_error(const std::string& kind, const std::string& message, int code, long offset = -1) {
    json j{{"error", kind}, {"message", message}, {"exit_code", code}};
    if (offset >= 0) j["offset"] = offset;
    std::cerr << j.dump() << "\n";
    return code;
}

} // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"FBI transform toolkit: transforms, inversion, Gevrey classification, propagation"};
    app.require_subcommand(1);
    RunOptions opts;
    std::string config, out_dir = ".";
    bool mutation = false;
    app.add_option("--threads", opts.threads, "worker threads (default: logical cores)")->check(CLI::NonNegativeNumber);
    auto* seed_opt = app.add_option("--seed", opts.seed, "seed recorded in reports and used by selftest");

    auto add_job = [&](const char* name, const char* help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config, "job config (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory");
        return sub;
    };
    auto* transform = add_job("transform", "dump the FBI transform along rays");
    auto* invert = add_job("invert", "reconstruct u from its transform over an epsilon ladder");
    auto* classify = add_job("classify", "classify Gevrey regularity from transform decay");
    auto* propagate = add_job("propagate", "run the propagation experiment along a fiber");
    auto* selftest = app.add_subcommand("selftest", "run the built-in property suites");
    selftest->add_flag("--mutation", mutation, "perturb the two-Gaussian identity")->group("");
    for (auto* sub : {transform, invert, classify, propagate, selftest}) {
        sub->add_option("--threads", opts.threads)->group("");
        sub->add_option("--seed", opts.seed)->group("");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("usage", e.what(), 2);
    }
    opts.seed_given = seed_opt->count() > 0;
    for (auto* sub : {transform, invert, classify, propagate, selftest})
        if (sub->get_option("--seed")->count() > 0) opts.seed_given = true;
    if (opts.threads > 0) set_default_threads(opts.threads);

    try {
        if (selftest->parsed()) {
            set_identity_mutation(mutation);
            const int failed = cmd_selftest(opts.seed, std::cout, opts.threads);
            set_identity_mutation(false);
            return failed == 0 ? 0 : 1;
        }
        const Job job = load_job(config);
        Output out;
        if (transform->parsed()) out = cmd_transform(job, opts);
        else if (invert->parsed()) out = cmd_invert(job, opts);
        else if (classify->parsed()) out = cmd_classify(job, opts);
        else out = cmd_propagate(job, opts);
        write_outputs(out, out_dir);
        std::cout << out.summary;
        return 0;
    } catch (const Error& e) {
        return report_error(std::string(to_string(e.code())), e.what(), exit_code(e.code()), e.offset());
    } catch (const ConfigError& e) {
        return report_error("config", e.what(), 2);
    } catch (const json::exception& e) {
        return report_error("config", e.what(), 2);
    } catch (const std::exception& e) {
        return report_error("internal", e.what(), 1);
    }
}

} // namespace hypofbi::app
