#include "kpz/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "kpz/chernoff.hpp"
#include "kpz/errors.hpp"
#include "kpz/manifest.hpp"
#include "kpz/parallel.hpp"
#include "kpz/report.hpp"
#include "kpz/rng.hpp"
#include "kpz/runlog.hpp"
#include "kpz/simulate.hpp"
#include "kpz/stein.hpp"
#include "kpz/transport.hpp"

namespace kpz {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kDomainTransport = 0x54524E53;  // "TRNS"
constexpr std::uint64_t kDomainChernoffRef = 0x43485246;  // "CHRF"
constexpr std::uint64_t kDomainLadder = 0x4C414452;  // "LADR"

std::ostream& log(const CommandOptions& o) {
    static std::ostringstream sink;
    return o.log ? *o.log : sink;
}

std::string fmt(double v, int digits = 6) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::string path_in(const CommandOptions& o, const std::string& name) {
    return (fs::path(o.out_dir) / name).string();
}

std::string fingerprint(const RunConfig& c) { return sha256_hex(result_text(c)); }

void prepare(const RunConfig& c, const CommandOptions& o) {
    std::error_code ec;
    fs::create_directories(o.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + o.out_dir + ": " + ec.message());
    write_text(path_in(o, "config.ini"), result_text(c));
}

void emit_table(const CommandOptions& o, const std::string& name, const Table& t) {
    if (o.csv) write_text(path_in(o, name + ".csv"), to_csv(t));
    if (o.svg) {
        const auto svg = figure_for(name + ".csv", t);
        if (!svg.empty()) write_text(path_in(o, name + ".svg"), svg);
    }
}

json finish(const RunConfig& c, const CommandOptions& o, const std::string& cmd, json section,
            std::chrono::steady_clock::time_point start) {
    if (o.json) write_text(path_in(o, cmd + ".json"), section.dump(2) + "\n");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto m = update_manifest(o.out_dir, cmd, fingerprint(c), section, secs);
    log(o) << cmd << ": done in " << fmt(secs, 3) << " s, manifest " << m["content_hash"].get<std::string>().substr(0, 16)
           << "\n";
    return section;
}

json identity_json(const IdentityReport& r) {
    return {{"name", r.name}, {"max_ratio", r.max_ratio}, {"worst_x", r.worst_x}, {"grid", r.grid},
            {"lhs", r.lhs},   {"rhs", r.rhs},             {"stderr", r.stderr}};
}

double max_ratio_within(const IdentityReport& r, double radius) {
    double m = 0.0;
    for (std::size_t i = 0; i < r.grid.size(); ++i) {
        if (std::abs(r.grid[i]) > radius + 1e-12 || !(r.stderr[i] > 0.0)) continue;
        m = std::max(m, std::abs(r.lhs[i] - r.rhs[i]) / r.stderr[i]);
    }
    return m;
}

std::vector<StepFunction> test_functions(const RunConfig& c) {
    std::vector<StepFunction> out;
    for (const auto& s : c.test_functions) out.push_back(parse_test_function(s).step);
    return out;
}

EnsembleStore load_store(const RunConfig& c, const CommandOptions& o, double beta) {
    auto store = read_run_log(path_in(o, ensemble_file(beta)));
    if (store.fingerprint() != ensemble_fingerprint(c.ensemble(), beta))
        throw DependencyError(ensemble_file(beta) + " was produced by a different configuration; rerun 'simulate'");
    if (store.usable().empty())
        throw StatisticsError("ensemble for beta = " + fmt(beta) + " has no usable records");
    return store;
}

/// beta^2 sum c_j^2 (Z(x_j) - Z(x_{j-1})) per usable record against beta^2 sum c_j^2 (x_j - x_{j-1}).
json isometry_json(const EnsembleStore& s, const StepFunction& phi) {
    const auto bp = phi.breakpoints();
    const auto cs = phi.values();
    std::vector<std::size_t> idx;
    for (double b : bp) idx.push_back(s.index_of(b));
    const double b2 = s.beta() * s.beta();
    double rhs = 0.0;
    for (std::size_t j = 0; j < cs.size(); ++j) rhs += b2 * cs[j] * cs[j] * (bp[j + 1] - bp[j]);
    std::vector<double> v;
    std::vector<std::uint32_t> batch;
    for (std::size_t r : s.usable()) {
        double a = 0.0;
        for (std::size_t j = 0; j < cs.size(); ++j) a += b2 * cs[j] * cs[j] * (s.Z(r, idx[j + 1]) - s.Z(r, idx[j]));
        v.push_back(a);
        batch.push_back(s.batch(r));
    }
    const auto st = batch_mean(v, batch);
    const double ratio = st.stderr > 0.0 ? std::abs(st.mean - rhs) / st.stderr : 0.0;
    return {{"phi", phi.to_string()}, {"lhs", st.mean}, {"lhs_stderr", st.stderr}, {"rhs", rhs}, {"ratio", ratio}};
}

}  // namespace

void parse_formats(const std::string& text, CommandOptions& o) {
    o.csv = o.json = o.svg = false;
    std::stringstream ss(text);
    std::string f;
    while (std::getline(ss, f, ',')) {
        if (f == "csv") {
            o.csv = true;
        } else if (f == "json") {
            o.json = true;
        } else if (f == "svg") {
            o.svg = true;
        } else if (!f.empty()) {
            throw ConfigError("--format: unknown format '" + f + "' (csv, json, svg)");
        }
    }
}

std::string beta_tag(double beta) {
    std::string s = "b" + fmt(beta);
    for (char& ch : s)
        if (ch == '.') ch = 'p';
    return s;
}

std::string ensemble_file(double beta) { return "ensemble_" + beta_tag(beta) + ".bin"; }

// ---------------------------------------------------------------------------

json cmd_simulate(const RunConfig& c, const CommandOptions& o) {
    const auto start = std::chrono::steady_clock::now();
    validate(c);
    prepare(c, o);
    const auto spec = c.ensemble();
    const lpp::LatticeGeometry geo(spec.geometry);
    log(o) << "simulate: N = " << c.N << ", " << c.slices << " slices x " << c.paths_per_slice << " paths, "
           << c.betas.size() << " beta values, " << o.workers << " workers\n";
    const auto stores = simulate_ensembles(spec, o.workers);
    json section;
    section["constants"] = {{"N", c.N},
                            {"c_h", c.c_h},
                            {"c_x", c.c_x},
                            {"steps", geo.steps()},
                            {"window_effective", geo.window_effective()},
                            {"window_lattice", geo.window_lattice()},
                            {"centering", c.centering}};
    section["ensembles"] = json::array();
    for (const auto& s : stores) {
        write_run_log(path_in(o, ensemble_file(s.beta())), s);
        section["ensembles"].push_back({{"beta", s.beta()},
                                        {"file", ensemble_file(s.beta())},
                                        {"records", s.records()},
                                        {"censored", s.censored_count()},
                                        {"batches", s.batches()}});
        log(o) << "  beta = " << fmt(s.beta()) << ": " << s.records() << " records, " << s.censored_count()
               << " censored\n";
    }
    return finish(c, o, "simulate", section, start);
}

json cmd_estimate(const RunConfig& c, const CommandOptions& o) {
    const auto start = std::chrono::steady_clock::now();
    validate(c);
    prepare(c, o);
    const auto tfs = test_functions(c);
    json section;
    section["betas"] = json::array();
    section["checks"] = json::object();
    std::optional<EnsembleStore> flat, quarter, half;

    for (double beta : c.betas) {
        auto s = load_store(c, o, beta);
        const std::string tag = beta_tag(beta);
        json e{{"beta", beta}, {"records", s.records()}, {"usable", s.usable().size()},
               {"censored", s.censored_count()}, {"batches", s.batches()}};
        const auto g = variance_curve(s);
        const std::vector<double> grid(s.x().begin(), s.x().end());
        const auto F = argmax_cdf(s, grid);
        Table gt{{"x", "g", "g_se", "F", "F_se"}, {}};
        for (std::size_t k = 0; k < grid.size(); ++k)
            gt.rows.push_back({grid[k], g.mean[k], g.stderr[k], F.curve.mean[k], F.curve.stderr[k]});
        emit_table(o, "g_" + tag, gt);
        e["g"] = {{"x", grid}, {"mean", g.mean}, {"stderr", g.stderr}};
        e["F"] = {{"mean", F.curve.mean}, {"stderr", F.curve.stderr}, {"dkw", F.dkw}, {"n_eff", F.n_eff},
                  {"design_effect", F.design_effect}};

        if (beta > 0.0 && grid.size() >= 5) {
            const auto gp = gprime_identity_check(s);
            e["gprime"] = {{"stencil", identity_json(gp.stencil)},
                           {"pointwise", identity_json(gp.pointwise)},
                           {"local_fit", identity_json(gp.local_fit)}};
            section["checks"]["gprime_" + tag] = gp.stencil.max_ratio <= 3.0;
        }
        if (beta > 0.0 && grid.size() >= 9) {
            const auto d = density_identity_check(s);
            const double b2x2 = 2.0 * beta * beta;
            Table dt{{"x", "gpp_over_2b2", "se", "kde_stencil", "kde_gauss"}, {}};
            for (std::size_t k = 0; k < d.gpp.grid.size(); ++k)
                dt.rows.push_back({d.gpp.grid[k], d.gpp.mean[k] / b2x2, d.gpp.stderr[k] / b2x2, d.stencil.rhs[k],
                                   d.gaussian_kde.rhs[k]});
            emit_table(o, "density_" + tag, dt);
            std::size_t k0 = 0;
            for (std::size_t k = 0; k < d.gpp.grid.size(); ++k)
                if (std::abs(d.gpp.grid[k]) < std::abs(d.gpp.grid[k0])) k0 = k;
            const double ratio1 = max_ratio_within(d.stencil, 1.0);
            e["density"] = {{"mass", d.mass},
                            {"mass_stderr", d.mass_stderr},
                            {"stencil", identity_json(d.stencil)},
                            {"stencil_ratio_within_1", ratio1},
                            {"gaussian_kde", identity_json(d.gaussian_kde)},
                            {"kde_bandwidth", d.kde_bandwidth},
                            {"max_asymmetry_ratio", d.max_asymmetry_ratio},
                            {"gpp0", d.gpp.mean[k0]},
                            {"gpp0_stderr", d.gpp.stderr[k0]}};
            section["checks"]["mass_" + tag] = std::abs(d.mass - 1.0) <= 0.05;
            section["checks"]["density_" + tag] = ratio1 <= 3.0;
            log(o) << "g''(0) = " << fmt(d.gpp.mean[k0], 5) << " +- " << fmt(d.gpp.stderr[k0], 2)
                   << " (beta = " << fmt(beta) << ", " << s.usable().size() << " records, mass "
                   << fmt(d.mass, 4) << ")\n";

            Table tp{{"z", "t", "C", "C_se"}, {}};
            for (double t : c.times) {
                const double sc = std::cbrt(t * t);
                for (double x : d.gpp.grid)
                    tp.rows.push_back({x * sc, t, two_point_function(d.gpp, x * sc, t), two_point_stderr(d.gpp, x * sc, t)});
            }
            emit_table(o, "two_point_" + tag, tp);

            e["covariance"] = json::array();
            for (const auto& phi2 : tfs) {
                for (double t : c.times) {
                    json cj{{"phi1", tfs.front().to_string()}, {"phi2", phi2.to_string()}, {"t", t}};
                    try {
                        const auto cv = covariance_identity(s, tfs.front(), phi2, t);
                        cj.update({{"lhs", cv.lhs},
                                   {"rhs", cv.rhs},
                                   {"diff_stderr", cv.diff_stderr},
                                   {"ratio", cv.ratio},
                                   {"pairing", two_point_pairing(d.gpp, tfs.front(), phi2, t)}});
                    } catch (const DomainError& err) {
                        cj["skipped"] = err.what();
                    }
                    e["covariance"].push_back(cj);
                }
            }
        }
        if (beta > 0.0) {
            const auto sym = argmax_symmetry(s);
            e["symmetry"] = {{"ks", sym.ks},     {"threshold", sym.threshold}, {"F0", sym.F0},
                             {"dkw", sym.dkw},   {"mean", sym.mean},           {"mean_stderr", sym.mean_stderr},
                             {"pass", sym.pass}};
            section["checks"]["symmetry_" + tag] = sym.pass;
            const auto sup = sup_second_moment(s);
            e["sup_second_moment"] = {{"half", sup.half}, {"full", sup.full}, {"ratio", sup.ratio}};
            e["isometry"] = json::array();
            for (const auto& phi : tfs) {
                try {
                    e["isometry"].push_back(isometry_json(s, phi));
                } catch (const DomainError& err) {
                    e["isometry"].push_back({{"phi", phi.to_string()}, {"skipped", err.what()}});
                }
            }
        }
        section["betas"].push_back(e);
        if (beta == 0.0) flat = std::move(s);
        if (beta == 0.25) quarter = std::move(s);
        if (beta == 0.5) half = std::move(s);
    }

    if (flat) {
        const auto fr = flat_regime_check(*flat, quarter ? &*quarter : nullptr, half ? &*half : nullptr);
        section["flat"] = {{"flatness", identity_json(fr.flatness)},
                           {"F0", fr.F0},
                           {"dkw", fr.dkw},
                           {"flat", fr.flat},
                           {"F0_half", fr.F0_half},
                           {"small_beta_gap", fr.small_beta_gap},
                           {"small_beta_band", fr.small_beta_band},
                           {"beta_derivative_lhs", fr.beta_derivative_lhs},
                           {"beta_derivative_rhs", fr.beta_derivative_rhs}};
        section["checks"]["flat_g0"] = fr.flat;
        section["checks"]["flat_F0_half"] = fr.F0_half;
    }
    return finish(c, o, "estimate", section, start);
}

json cmd_transport(const RunConfig& c, const CommandOptions& o) {
    const auto start = std::chrono::steady_clock::now();
    validate(c);
    prepare(c, o);
    double beta = -1.0;
    for (double b : c.betas)
        if (b > 0.0) {
            beta = b;
            break;
        }
    if (beta < 0.0) throw ConfigError("ensemble.betas: transport needs a positive beta");
    const auto s = load_store(c, o, beta);
    const auto tfs = test_functions(c);
    if (s.batches() < c.transport_n)
        throw StatisticsError("transport: n = " + std::to_string(c.transport_n) + " needs as many slices, the store has " +
                              std::to_string(s.batches()));
    json section{{"beta", beta}, {"phi1", tfs.front().to_string()}, {"phi2", tfs.front().to_string()},
                 {"n", c.transport_n}, {"resamples", c.transport_resamples}};
    section["gaps"] = json::array();
    section["checks"] = json::object();
    Table tt{{"t", "resample", "joint", "floor"}, {}};
    std::vector<GapReport> reps;
    for (std::size_t i = 0; i < c.times.size(); ++i) {
        const double t = c.times[i];
        const auto r = independence_gap(s, tfs.front(), tfs.front(), t, c.transport_n, c.transport_resamples,
                                        derive_seed(c.seed, kDomainTransport, i), o.workers);
        for (std::size_t k = 0; k < r.joint_per_resample.size(); ++k)
            tt.rows.push_back({t, static_cast<double>(k), r.joint_per_resample[k], r.floor_per_resample[k]});
        section["gaps"].push_back({{"t", t},
                                   {"w1_joint", r.w1_joint},
                                   {"w1_floor", r.w1_floor},
                                   {"gap", r.gap},
                                   {"spread", r.spread},
                                   {"bound", r.bound.value},
                                   {"bound_stderr", r.bound.stderr},
                                   {"pass", r.pass}});
        section["checks"]["asyind_t" + fmt(t)] = r.pass;
        log(o) << "transport: t = " << fmt(t) << ", gap " << fmt(r.gap, 4) << " +- " << fmt(r.spread, 2) << ", bound "
               << fmt(r.bound.value, 4) << (r.pass ? " PASS" : " FAIL") << "\n";
        reps.push_back(r);
    }
    if (reps.size() >= 2)
        section["checks"]["gap_decay"] = reps.back().gap <= reps.front().gap + 3.0 * reps.back().spread;
    emit_table(o, "transport", tt);
    return finish(c, o, "transport", section, start);
}

json cmd_stein(const RunConfig& c, const CommandOptions& o) {
    const auto start = std::chrono::steady_clock::now();
    validate(c);
    prepare(c, o);
    std::vector<double> grid;
    for (int i = 0; i < c.stein_points; ++i)
        grid.push_back(-c.stein_box + 2.0 * c.stein_box * i / (c.stein_points - 1));
    json section{{"sigma", c.stein_sigma}, {"grid", grid}, {"functions", json::array()}, {"checks", json::object()}};
    for (const auto& fn : stein_catalog(c.stein_eps)) {
        const int nh = std::max(c.stein_n_hermite, stein_needed_hermite_order(c.stein_sigma, fn.kink_eps));
        const SteinProblem p{c.stein_sigma, fn, c.stein_n_theta, nh};
        const SteinSolver solver(p);
        Table rt{{"x1", "x2", "residual", "f"}, {}};
        double res = 0.0, rep = 0.0;
        for (double a : grid) {
            for (double b : grid) {
                const double r = solver.residual(a, b);
                const double f = solver.f(a, b);
                res = std::max(res, std::abs(r));
                rep = std::max(rep, std::abs(f - solver.f_alt(a, b)));
                rt.rows.push_back({a, b, r, f});
            }
        }
        std::string name = fn.name;
        for (char& ch : name)
            if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
        while (name.back() == '_') name.pop_back();
        emit_table(o, "stein_residual_" + name, rt);
        const auto bounds = derivative_bounds_check(p, grid, grid);
        section["functions"].push_back({{"name", fn.name},
                                        {"n_theta", c.stein_n_theta},
                                        {"n_hermite", nh},
                                        {"max_residual", res},
                                        {"representation_gap", rep},
                                        {"max_f", bounds.max_f},
                                        {"bound_f", bounds.bound_f},
                                        {"max_d1f", bounds.max_d1f},
                                        {"bound_d1f", bounds.bound_d1f},
                                        {"max_d2f", bounds.max_d2f},
                                        {"bound_d2f", bounds.bound_d2f},
                                        {"bounds_pass", bounds.pass()}});
        section["checks"]["residual_" + name] = res <= 1e-6;
        section["checks"]["bounds_" + name] = bounds.pass();
        log(o) << "stein: " << fn.name << " at (" << c.stein_n_theta << ", " << nh << "): residual " << fmt(res, 3)
               << ", bounds " << (bounds.pass() ? "hold" : "violated") << "\n";
    }
    const SteinSolver prod({c.stein_sigma, stein_product(), c.stein_n_theta, c.stein_n_hermite});
    double closed = 0.0;
    for (double a : grid)
        for (double b : grid) closed = std::max(closed, std::abs(prod.f(a, b) + b));
    section["closed_form_x1x2_error"] = closed;
    section["checks"]["closed_form_x1x2"] = closed <= 1e-8;
    return finish(c, o, "stein", section, start);
}

json cmd_chernoff(const RunConfig& c, const CommandOptions& o) {
    const auto start = std::chrono::steady_clock::now();
    validate(c);
    prepare(c, o);
    const auto ref = chernoff_reference(c.reference_samples, c.reference_step, c.reference_window,
                                        derive_seed(c.seed, kDomainChernoffRef, 0), o.workers);
    log(o) << "chernoff: reference law from " << ref.size() << " samples\n";
    std::vector<ArgmaxSample> samples;
    json section{{"reference", {{"samples", ref.size()}, {"censored", ref.censored}, {"step", ref.grid_step},
                                {"window", ref.window}}},
                 {"ladder", json::array()},
                 {"checks", json::object()}};
    json censored = json::array();
    for (std::size_t i = 0; i < c.ladder_betas.size(); ++i) {
        const double beta = c.ladder_betas[i];
        auto base = c.geometry();
        base.N = c.ladder_N;
        const auto spec = ladder_spec(base, beta, c.ladder_slices, c.ladder_paths, derive_seed(c.seed, kDomainLadder, i));
        auto a = simulate_origin_argmax(spec, beta, o.workers);
        censored.push_back({{"beta", beta}, {"censored", a.censored}, {"window", spec.geometry.window}});
        samples.push_back({beta, std::move(a.Z), std::move(a.batch)});
        log(o) << "  beta = " << fmt(beta) << ": " << samples.back().Z.size() << " argmax samples\n";
    }
    const auto r = large_beta_check(samples, ref);
    Table lt{{"beta", "ks", "noise", "n", "n_eff"}, {}};
    for (const auto& e : r.ladder) {
        lt.rows.push_back({e.beta, e.ks, e.noise, static_cast<double>(e.n), e.n_eff});
        section["ladder"].push_back(
            {{"beta", e.beta}, {"ks", e.ks}, {"noise", e.noise}, {"n", e.n}, {"n_eff", e.n_eff}});
        log(o) << "  KS(beta = " << fmt(e.beta) << ") = " << fmt(e.ks, 4) << " (noise " << fmt(e.noise, 3) << ")\n";
    }
    section["censoring"] = censored;
    section["combined_noise"] = r.combined_noise;
    section["checks"]["ladder_decrease"] = r.decrease;
    section["checks"]["ladder_monotone"] = r.monotone;
    emit_table(o, "chernoff_ladder", lt);
    return finish(c, o, "chernoff", section, start);
}

json cmd_report(const RunConfig& c, const CommandOptions& o) {
    const auto start = std::chrono::steady_clock::now();
    const auto figs = render_figures(o.out_dir);
    if (figs.empty()) throw DependencyError("report: no CSV results in " + o.out_dir + "; run estimate first");
    for (const auto& f : figs) log(o) << "report: " << f << "\n";
    return finish(c, o, "report", {{"figures", figs}}, start);
}

// ---------------------------------------------------------------------------

int kpzlab_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"kpzlab: KPZ fixed point with Brownian initial data, lattice experiments"};
    app.fallthrough();
    app.require_subcommand(1);
    std::string config_path, out_dir, formats = "csv,json,svg";
    std::optional<int> workers;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "INI configuration file");
    app.add_option("--out", out_dir, "output directory (overrides run.out)");
    app.add_option("--workers", workers, "worker threads (overrides run.workers and KPZLAB_WORKERS)");
    app.add_option("--seed", seed, "master seed (overrides run.seed)");
    app.add_option("--format", formats, "output formats, any of csv,json,svg");
    const std::vector<std::pair<std::string, std::string>> cmds{
        {"simulate", "simulate the ensembles and write run logs"},
        {"estimate", "estimate g, F, f and check the identities"},
        {"transport", "Wasserstein independence gap against the bound"},
        {"stein", "solve the Stein equation for the catalog"},
        {"chernoff", "large-beta ladder against the Chernoff law"},
        {"report", "rebuild every figure from the CSV outputs"}};
    for (const auto& [name, help] : cmds) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << "\n";
        return ConfigError("").exit_code();
    }

    try {
        RunConfig c;
        if (!config_path.empty()) {
            c = load_config(config_path);
        } else {
            const auto dir = out_dir.empty() ? c.out : out_dir;
            if (fs::exists(fs::path(dir) / "config.ini")) c = load_config((fs::path(dir) / "config.ini").string());
        }
        if (!out_dir.empty()) c.out = out_dir;
        if (seed) c.seed = *seed;
        if (workers) c.workers = *workers;
        validate(c);
        CommandOptions o;
        o.out_dir = c.out;
        o.workers = resolve_workers(c.workers);
        o.log = &out;
        parse_formats(formats, o);
        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "simulate") cmd_simulate(c, o);
        else if (cmd == "estimate") cmd_estimate(c, o);
        else if (cmd == "transport") cmd_transport(c, o);
        else if (cmd == "stein") cmd_stein(c, o);
        else if (cmd == "chernoff") cmd_chernoff(c, o);
        else cmd_report(c, o);
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace kpz
