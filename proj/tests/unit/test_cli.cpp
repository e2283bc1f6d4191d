#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <map>
#include <numbers>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "kpz/commands.hpp"
#include "kpz/config.hpp"
#include "kpz/errors.hpp"
#include "kpz/manifest.hpp"
#include "kpz/parallel.hpp"
#include "kpz/report.hpp"
#include "kpz/runlog.hpp"
#include "kpz/simulate.hpp"

using namespace kpz;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("kpzlab_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string write_config(const fs::path& dir, const RunConfig& c) {
    const auto p = (dir / "run.ini").string();
    write_text(p, to_text(c));
    return p;
}

int run(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
    args.insert(args.begin(), "kpzlab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int rc = kpzlab_main(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return rc;
}

std::string config_error(const std::string& text) {
    try {
        (void)parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
    for (const auto& c : {RunConfig{}, tiny_config()}) {
        const auto text = to_text(c);
        EXPECT_EQ(to_text(parse_config(text)), text);
    }
}

TEST(Config, RandomValuesRoundTripExactly) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        auto c = tiny_config();
        c.seed = rng();
        c.max_tilt = 0.5 + 0.4 * u(rng);
        c.window = 1.0 + u(rng);
        c.betas = {u(rng) * 3.0, std::numbers::sqrt2, 0.0};
        c.times = {1.0, 1.0 + 7.0 * u(rng)};
        c.stein_sigma = 0.1 + u(rng);
        c.stein_eps = 1e-3 + u(rng) * 1e-2;
        const auto back = parse_config(to_text(c));
        EXPECT_EQ(back.seed, c.seed);
        EXPECT_EQ(back.max_tilt, c.max_tilt);
        EXPECT_EQ(back.window, c.window);
        EXPECT_EQ(back.betas, c.betas);
        EXPECT_EQ(back.times, c.times);
        EXPECT_EQ(back.stein_sigma, c.stein_sigma);
        EXPECT_EQ(back.stein_eps, c.stein_eps);
        EXPECT_EQ(to_text(back), to_text(c));
    }
}

TEST(Config, PartialFileKeepsDefaults) {
    const auto c = parse_config("[lattice]\nN = 500\n[ensemble]\nbetas = 1, 2\n");
    EXPECT_EQ(c.N, 500);
    EXPECT_EQ(c.betas, (std::vector<double>{1.0, 2.0}));
    EXPECT_EQ(c.x_step, RunConfig{}.x_step);
}

TEST(Config, ErrorsNameTheField) {
    EXPECT_NE(config_error("[lattice]\nN = many\n").find("lattice.N"), std::string::npos);
    EXPECT_NE(config_error("[lattice]\nN = 2\n").find("lattice.N"), std::string::npos);
    EXPECT_NE(config_error("[lattice]\nwidth = 3\n").find("lattice.width"), std::string::npos);
    EXPECT_NE(config_error("[lattice]\ncentering = tilted\n").find("lattice.centering"), std::string::npos);
    EXPECT_NE(config_error("[grid]\nx_min = 0.5\nx_max = 2\n").find("grid."), std::string::npos);
    EXPECT_NE(config_error("[grid]\nx_min = -1.1\n").find("grid.x_min"), std::string::npos);
    EXPECT_NE(config_error("[ensemble]\nbetas = 1, -2\n").find("ensemble.betas"), std::string::npos);
    EXPECT_NE(config_error("[observables]\ntest_functions = bump(0, 1)\n").find("observables.test_functions"),
              std::string::npos);
    EXPECT_NE(config_error("[observables]\ntest_functions = indicator(1, 0)\n").find("observables"),
              std::string::npos);
    EXPECT_NE(config_error("[transport]\nn = 4096\n").find("transport.n"), std::string::npos);
    EXPECT_NE(config_error("[chernoff]\nreference_step = 0.01\n").find("chernoff.reference_step"),
              std::string::npos);
    EXPECT_NE(config_error("[stein\n").find("config"), std::string::npos);
    EXPECT_THROW(load_config("/nonexistent/run.ini"), IoError);
}

TEST(Config, GridIsBuiltFromIntegerMultiples) {
    RunConfig c;
    const auto g = c.x_grid();
    ASSERT_EQ(g.size(), 21u);
    EXPECT_EQ(g[10], 0.0);
    EXPECT_EQ(g[0], -2.5);
    EXPECT_EQ(g[13], 0.75);
}

TEST(RunLog, RoundTripIsExact) {
    const auto dir = scratch("runlog");
    auto c = tiny_config();
    c.slices = 4;
    c.paths_per_slice = 3;
    const auto stores = simulate_ensembles(c.ensemble(), 1);
    const auto path = (dir / "e.bin").string();
    write_run_log(path, stores[0]);
    const auto back = read_run_log(path);
    const auto& s = stores[0];
    ASSERT_EQ(back.records(), s.records());
    EXPECT_EQ(back.beta(), s.beta());
    EXPECT_EQ(back.fingerprint(), s.fingerprint());
    EXPECT_EQ(back.censored_count(), s.censored_count());
    EXPECT_EQ(back.usable(), s.usable());
    for (std::size_t k = 0; k < s.nx(); ++k) {
        EXPECT_EQ(back.x()[k], s.x()[k]);
        EXPECT_EQ(back.x_eff()[k], s.x_eff()[k]);
    }
    for (std::size_t r = 0; r < s.records(); ++r) {
        EXPECT_EQ(back.batch(r), s.batch(r));
        EXPECT_EQ(back.replica(r), s.replica(r));
        for (std::size_t k = 0; k < s.nx(); ++k) {
            EXPECT_EQ(back.h(r, k), s.h(r, k));
            EXPECT_EQ(back.Z(r, k), s.Z(r, k));
            EXPECT_EQ(back.B(r, k), s.B(r, k));
        }
    }
    // Writing the read-back store reproduces the file byte for byte.
    write_run_log((dir / "f.bin").string(), back);
    EXPECT_EQ(sha256_file(path), sha256_file((dir / "f.bin").string()));
}

TEST(RunLog, MalformedFilesAreRejected) {
    const auto dir = scratch("runlog_bad");
    EXPECT_THROW(read_run_log((dir / "missing.bin").string()), DependencyError);
    auto c = tiny_config();
    c.slices = 2;
    c.paths_per_slice = 2;
    const auto path = (dir / "e.bin").string();
    write_run_log(path, simulate_ensembles(c.ensemble(), 1)[0]);
    const auto bytes = read_text(path);
    write_text(path, bytes.substr(0, bytes.size() - 5));
    EXPECT_THROW(read_run_log(path), IoError);
    write_text(path, bytes + "x");
    EXPECT_THROW(read_run_log(path), IoError);
    auto bad_version = bytes;
    bad_version[4] = 9;
    write_text(path, bad_version);
    EXPECT_THROW(read_run_log(path), IoError);
    write_text(path, "XXXX" + bytes.substr(4));
    EXPECT_THROW(read_run_log(path), IoError);
}

TEST(Report, CsvRoundTripIsExact) {
    Table t{{"x", "y"}, {{0.1, 1.0 / 3.0}, {-2.5e-300, 12345.678901234567}, {0.0, std::nan("")}}};
    const auto back = parse_csv(to_csv(t));
    ASSERT_EQ(back.columns, t.columns);
    ASSERT_EQ(back.rows.size(), 3u);
    EXPECT_EQ(back.rows[0][1], t.rows[0][1]);
    EXPECT_EQ(back.rows[1][0], t.rows[1][0]);
    EXPECT_EQ(back.rows[1][1], t.rows[1][1]);
    EXPECT_TRUE(std::isnan(back.rows[2][1]));
    EXPECT_THROW(parse_csv("a,b\n1,zz\n"), IoError);
    EXPECT_THROW(parse_csv("a,b\n1\n"), IoError);
    EXPECT_THROW(t.column("z"), IoError);
}

TEST(Report, SvgIsWellFormed) {
    Plot p{"title <x>", "x", "y", {{"s", {0, 1, 2}, {1, 4, 9}, {0, 3, 8}, {2, 5, 10}, false}}};
    const auto svg = render_svg(p);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_NE(svg.find("title &lt;x&gt;"), std::string::npos);
    EXPECT_NE(svg.find("<polygon"), std::string::npos);
    Heatmap h{"h", "x1", "x2", "v", {0, 1}, {0, 1, 2}, {1, 2, 3, 4, 5, 6}};
    EXPECT_NE(render_svg(h).find("<rect"), std::string::npos);
    h.values.pop_back();
    EXPECT_THROW(render_svg(h), DomainError);
}

TEST(Manifest, Sha256KnownAnswer) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Manifest, ContentHashIgnoresTiming) {
    nlohmann::json a{{"x", 1}, {"timing", {{"t", 1.0}}}};
    nlohmann::json b{{"x", 1}, {"timing", {{"t", 2.0}}}, {"content_hash", "zz"}};
    EXPECT_EQ(manifest_content_hash(a), manifest_content_hash(b));
    b["x"] = 2;
    EXPECT_NE(manifest_content_hash(a), manifest_content_hash(b));
}

TEST(Cli, BetaTags) {
    EXPECT_EQ(beta_tag(std::numbers::sqrt2), "b1p41421");
    EXPECT_EQ(beta_tag(0.0), "b0");
    EXPECT_EQ(beta_tag(0.25), "b0p25");
}

TEST(Cli, TinyPipelineIsFastAndWorkerInvariant) {
    const auto dir = scratch("pipeline");
    const auto cfg = write_config(dir, tiny_config());
    std::vector<std::string> hashes;
    for (const std::string w : {"1", "3"}) {
        const auto out = (dir / ("w" + w)).string();
        const auto t0 = std::chrono::steady_clock::now();
        for (const std::string cmd : {"simulate", "estimate", "transport", "stein", "chernoff", "report"}) {
            std::string o, e;
            ASSERT_EQ(run({cmd, "--config", cfg, "--out", out, "--workers", w}, &o, &e), 0) << cmd << ": " << e;
            if (cmd == "estimate") {
                EXPECT_NE(o.find("g''(0) = "), std::string::npos);
            }
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        EXPECT_LT(secs, 10.0);
        const auto m = nlohmann::json::parse(read_text(out + "/manifest.json"));
        hashes.push_back(m["content_hash"]);
        // Every file except the manifest is listed with its hash.
        std::size_t files = 0;
        for (const auto& f : fs::directory_iterator(out))
            if (f.path().filename() != "manifest.json") ++files;
        ASSERT_EQ(m["outputs"].size(), files);
        for (const auto& entry : m["outputs"])
            EXPECT_EQ(entry["sha256"], sha256_file(out + "/" + entry["file"].get<std::string>()));
        for (const char* cmd : {"simulate", "estimate", "transport", "stein", "chernoff", "report"})
            EXPECT_TRUE(m["commands"].contains(cmd)) << cmd;
    }
    EXPECT_EQ(hashes[0], hashes[1]);
}

TEST(Cli, ReportRebuildsFiguresFromCsv) {
    const auto dir = scratch("report");
    const auto cfg = write_config(dir, tiny_config());
    const auto out = (dir / "out").string();
    for (const std::string cmd : {"simulate", "estimate", "stein"})
        ASSERT_EQ(run({cmd, "--config", cfg, "--out", out, "--workers", "1"}), 0) << cmd;
    std::map<std::string, std::string> before;
    for (const auto& f : fs::directory_iterator(out))
        if (f.path().extension() == ".svg") before[f.path().filename().string()] = sha256_file(f.path().string());
    ASSERT_GE(before.size(), 5u);
    for (const auto& [name, h] : before) fs::remove(fs::path(out) / name);
    // Run logs are not needed to redraw.
    for (const auto& f : fs::directory_iterator(out))
        if (f.path().extension() == ".bin") fs::remove(f.path());
    ASSERT_EQ(run({"report", "--out", out}), 0);
    for (const auto& [name, h] : before) EXPECT_EQ(sha256_file(out + "/" + name), h) << name;
}

TEST(Cli, FormatSelection) {
    const auto dir = scratch("formats");
    const auto cfg = write_config(dir, tiny_config());
    const auto out = (dir / "out").string();
    ASSERT_EQ(run({"stein", "--config", cfg, "--out", out, "--format", "json"}), 0);
    EXPECT_TRUE(fs::exists(out + "/stein.json"));
    EXPECT_FALSE(fs::exists(out + "/stein_residual_sine.csv"));
    EXPECT_FALSE(fs::exists(out + "/stein_residual_sine.svg"));
    EXPECT_EQ(run({"stein", "--config", cfg, "--out", out, "--format", "pdf"}), 2);
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("exit");
    const auto cfg = write_config(dir, tiny_config());
    const auto out = (dir / "out").string();
    std::string err;
    EXPECT_EQ(run({"bogus"}, nullptr, &err), 2);
    EXPECT_EQ(run({"simulate", "--workers", "two"}), 2);
    EXPECT_EQ(run({}), 2);
    // Invalid configuration.
    write_text((dir / "bad.ini").string(), "[lattice]\nN = 3\n");
    EXPECT_EQ(run({"simulate", "--config", (dir / "bad.ini").string(), "--out", out}, nullptr, &err), 2);
    EXPECT_NE(err.find("lattice.N"), std::string::npos);
    // Missing config file.
    EXPECT_EQ(run({"simulate", "--config", (dir / "none.ini").string(), "--out", out}), 6);
    // Missing artifacts.
    EXPECT_EQ(run({"estimate", "--config", cfg, "--out", out}, nullptr, &err), 5);
    EXPECT_NE(err.find("simulate"), std::string::npos);
    EXPECT_EQ(run({"report", "--out", (dir / "empty").string()}), 5);
    // Too few samples for the distribution estimators.
    auto small = tiny_config();
    small.slices = 5;
    small.paths_per_slice = 4;
    const auto small_cfg = (dir / "small.ini").string();
    write_text(small_cfg, to_text(small));
    ASSERT_EQ(run({"simulate", "--config", small_cfg, "--out", out}), 0);
    EXPECT_EQ(run({"estimate", "--config", small_cfg, "--out", out}), 4);
    // Run logs from another configuration are refused.
    EXPECT_EQ(run({"estimate", "--config", cfg, "--out", out}, nullptr, &err), 5);
    EXPECT_EQ(run({"--help"}), 0);
}

TEST(Cli, ErrorClassesMapToExitCodes) {
    EXPECT_EQ(ConfigError("").exit_code(), 2);
    EXPECT_EQ(DomainError("").exit_code(), 3);
    EXPECT_EQ(AccuracyError("").exit_code(), 3);
    EXPECT_EQ(StatisticsError("").exit_code(), 4);
    EXPECT_EQ(DependencyError("").exit_code(), 5);
    EXPECT_EQ(IoError("").exit_code(), 6);
}

TEST(Cli, WorkersFromEnvironment) {
    ::setenv("KPZLAB_WORKERS", "3", 1);
    EXPECT_EQ(resolve_workers(0), 3u);
    EXPECT_EQ(resolve_workers(2), 2u);
    ::unsetenv("KPZLAB_WORKERS");
}
