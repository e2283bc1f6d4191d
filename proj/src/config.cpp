#include "kpz/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "kpz/errors.hpp"
#include "kpz/initial_data.hpp"

namespace kpz {

namespace pt = boost::property_tree;

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
    return s;
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "; " : "") + v[i];
    return s;
}

std::string trim(std::string s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& field, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size() || !std::isfinite(v))
        throw ConfigError(field + ": expected a finite number, got '" + text + "'");
    return v;
}

long long to_int(const std::string& field, const std::string& text) {
    const std::string t = trim(text);
    long long v = 0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size())
        throw ConfigError(field + ": expected an integer, got '" + text + "'");
    return v;
}

std::uint64_t to_u64(const std::string& field, const std::string& text) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size())
        throw ConfigError(field + ": expected a non-negative 64-bit integer, got '" + text + "'");
    return v;
}

std::vector<double> to_doubles(const std::string& field, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (trim(item).empty()) continue;
        out.push_back(to_double(field, item));
    }
    return out;
}

std::vector<std::string> to_strings(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ';'))
        if (!trim(item).empty()) out.push_back(trim(item));
    return out;
}

/// Reads keys from the tree, remembering which were consumed.
class Reader {
public:
    explicit Reader(const pt::ptree& t) : t_(t) {}

    template <class F>
    void get(const std::string& section, const std::string& key, F&& assign) {
        const std::string path = section + "." + key;
        if (auto v = t_.get_optional<std::string>(pt::ptree::path_type(path, '.'))) {
            seen_.insert(path);
            assign(path, *v);
        }
    }

    void reject_unknown() const {
        for (const auto& [sec, body] : t_) {
            if (body.empty() && !body.data().empty()) throw ConfigError(sec + ": key outside any section");
            for (const auto& [key, v] : body) {
                const std::string path = sec + "." + key;
                if (!seen_.count(path)) throw ConfigError(path + ": unknown key");
            }
        }
    }

private:
    const pt::ptree& t_;
    std::set<std::string> seen_;
};

}  // namespace

std::vector<double> RunConfig::x_grid() const {
    const auto lo = std::llround(x_min / x_step), hi = std::llround(x_max / x_step);
    std::vector<double> g;
    for (long long i = lo; i <= hi; ++i) g.push_back(static_cast<double>(i) * x_step);
    return g;
}

lpp::GeometrySpec RunConfig::geometry() const {
    lpp::GeometrySpec g;
    g.N = N;
    g.x_grid = x_grid();
    g.window = window;
    g.z_stride = z_stride;
    g.max_tilt = max_tilt;
    g.centering = centering == "pair_mean" ? lpp::Centering::pair_mean : lpp::Centering::untilted;
    g.constants.c_h = c_h;
    g.constants.c_x = c_x;
    return g;
}

EnsembleSpec RunConfig::ensemble() const {
    EnsembleSpec e;
    e.geometry = geometry();
    e.betas = betas;
    e.slices = slices;
    e.paths_per_slice = paths_per_slice;
    e.seed = seed;
    return e;
}

void validate(const RunConfig& c) {
    auto need = [](bool ok, const std::string& field, const std::string& what) {
        if (!ok) throw ConfigError(field + ": " + what);
    };
    need(!c.name.empty(), "run.name", "must not be empty");
    need(c.workers >= 0, "run.workers", "must be >= 0");
    need(c.N >= 8, "lattice.N", "must be at least 8");
    need(c.window > 0.0, "lattice.window", "must be positive");
    need(c.z_stride >= 1, "lattice.z_stride", "must be >= 1");
    need(c.max_tilt > 0.0 && c.max_tilt < 1.0, "lattice.max_tilt", "must lie in (0, 1)");
    need(c.centering == "untilted" || c.centering == "pair_mean", "lattice.centering",
         "must be 'untilted' or 'pair_mean'");
    need(c.c_h > 0.0, "lattice.c_h", "must be positive");
    need(c.c_x > 0.0, "lattice.c_x", "must be positive");
    need(c.x_step > 0.0, "grid.x_step", "must be positive");
    need(c.x_min <= 0.0 && c.x_max >= 0.0, "grid.x_min", "grid must contain x = 0");
    need(std::abs(c.x_min / c.x_step - std::round(c.x_min / c.x_step)) < 1e-9, "grid.x_min",
         "must be a multiple of grid.x_step");
    need(std::abs(c.x_max / c.x_step - std::round(c.x_max / c.x_step)) < 1e-9, "grid.x_max",
         "must be a multiple of grid.x_step");
    need(!c.betas.empty(), "ensemble.betas", "must list at least one value");
    for (double b : c.betas) need(b >= 0.0, "ensemble.betas", "values must be >= 0");
    need(c.slices >= 1, "ensemble.slices", "must be positive");
    need(c.paths_per_slice >= 1, "ensemble.paths_per_slice", "must be positive");
    need(!c.test_functions.empty(), "observables.test_functions", "must list at least one function");
    for (const auto& f : c.test_functions) {
        TestFunction tf;
        try {
            tf = parse_test_function(f);
        } catch (const Error& e) {
            throw ConfigError(std::string("observables.test_functions: ") + e.what());
        }
        need(!tf.smooth, "observables.test_functions", "'" + f + "' is not a step function");
    }
    for (double t : c.times) need(t > 0.0, "observables.times", "values must be positive");
    need(c.transport_n >= 2 && c.transport_n <= 2048, "transport.n", "must lie in [2, 2048]");
    need(c.transport_resamples >= 2, "transport.resamples", "must be >= 2");
    need(c.stein_sigma > 0.0, "stein.sigma", "must be positive");
    need(c.stein_n_theta >= 8, "stein.n_theta", "must be >= 8");
    need(c.stein_n_hermite >= 8, "stein.n_hermite", "must be >= 8");
    need(c.stein_eps > 0.0, "stein.eps", "must be positive");
    need(c.stein_box > 0.0, "stein.box", "must be positive");
    need(c.stein_points >= 2, "stein.points", "must be >= 2");
    for (double b : c.ladder_betas) need(b > 0.0, "chernoff.betas", "values must be positive");
    need(c.ladder_N >= 8, "chernoff.N", "must be at least 8");
    need(c.ladder_slices >= 1 && c.ladder_paths >= 1, "chernoff.slices", "slices and paths must be positive");
    need(c.reference_samples >= 1, "chernoff.reference_samples", "must be positive");
    need(c.reference_window > 0.0, "chernoff.reference_window", "must be positive");
    need(c.reference_step > 0.0 && c.reference_step <= 1e-3 * c.reference_window * (1 + 1e-12),
         "chernoff.reference_step", "must be positive and at most 1e-3 of the window");
    // Geometry preconditions (grid snapping, window against the lattice).
    try {
        lpp::LatticeGeometry g(c.geometry());
    } catch (const Error& e) {
        throw ConfigError(std::string("lattice: ") + e.what());
    }
}

RunConfig parse_config(const std::string& text) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config: " + std::string(e.what()));
    }
    RunConfig c;
    Reader r(tree);
    auto str = [](std::string& dst) { return [&dst](const std::string&, const std::string& v) { dst = trim(v); }; };
    auto dbl = [](double& dst) { return [&dst](const std::string& f, const std::string& v) { dst = to_double(f, v); }; };
    auto i32 = [](int& dst) {
        return [&dst](const std::string& f, const std::string& v) { dst = static_cast<int>(to_int(f, v)); };
    };
    auto u64 = [](auto& dst) {
        return [&dst](const std::string& f, const std::string& v) {
            const auto x = to_int(f, v);
            if (x < 0) throw ConfigError(f + ": must be non-negative");
            dst = static_cast<std::remove_reference_t<decltype(dst)>>(x);
        };
    };
    auto dbls = [](std::vector<double>& dst) {
        return [&dst](const std::string& f, const std::string& v) { dst = to_doubles(f, v); };
    };
    r.get("run", "name", str(c.name));
    r.get("run", "seed", [&](const std::string& f, const std::string& v) { c.seed = to_u64(f, v); });
    r.get("run", "workers", i32(c.workers));
    r.get("run", "out", str(c.out));
    r.get("lattice", "N", i32(c.N));
    r.get("lattice", "window", dbl(c.window));
    r.get("lattice", "z_stride", i32(c.z_stride));
    r.get("lattice", "max_tilt", dbl(c.max_tilt));
    r.get("lattice", "centering", str(c.centering));
    r.get("lattice", "c_h", dbl(c.c_h));
    r.get("lattice", "c_x", dbl(c.c_x));
    r.get("grid", "x_min", dbl(c.x_min));
    r.get("grid", "x_max", dbl(c.x_max));
    r.get("grid", "x_step", dbl(c.x_step));
    r.get("ensemble", "betas", dbls(c.betas));
    r.get("ensemble", "slices", u64(c.slices));
    r.get("ensemble", "paths_per_slice", u64(c.paths_per_slice));
    r.get("observables", "test_functions",
          [&](const std::string&, const std::string& v) { c.test_functions = to_strings(v); });
    r.get("observables", "times", dbls(c.times));
    r.get("transport", "n", u64(c.transport_n));
    r.get("transport", "resamples", u64(c.transport_resamples));
    r.get("stein", "sigma", dbl(c.stein_sigma));
    r.get("stein", "n_theta", i32(c.stein_n_theta));
    r.get("stein", "n_hermite", i32(c.stein_n_hermite));
    r.get("stein", "eps", dbl(c.stein_eps));
    r.get("stein", "box", dbl(c.stein_box));
    r.get("stein", "points", i32(c.stein_points));
    r.get("chernoff", "betas", dbls(c.ladder_betas));
    r.get("chernoff", "N", i32(c.ladder_N));
    r.get("chernoff", "slices", u64(c.ladder_slices));
    r.get("chernoff", "paths_per_slice", u64(c.ladder_paths));
    r.get("chernoff", "reference_samples", u64(c.reference_samples));
    r.get("chernoff", "reference_step", dbl(c.reference_step));
    r.get("chernoff", "reference_window", dbl(c.reference_window));
    r.reject_unknown();
    validate(c);
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

std::string body(const RunConfig& c, bool with_run_io) {
    std::ostringstream o;
    o << "[run]\n";
    o << "name = " << c.name << "\n";
    o << "seed = " << c.seed << "\n";
    if (with_run_io) {
        o << "workers = " << c.workers << "\n";
        o << "out = " << c.out << "\n";
    }
    o << "\n[lattice]\n";
    o << "N = " << c.N << "\n";
    o << "window = " << num(c.window) << "\n";
    o << "z_stride = " << c.z_stride << "\n";
    o << "max_tilt = " << num(c.max_tilt) << "\n";
    o << "centering = " << c.centering << "\n";
    o << "c_h = " << num(c.c_h) << "\n";
    o << "c_x = " << num(c.c_x) << "\n";
    o << "\n[grid]\n";
    o << "x_min = " << num(c.x_min) << "\n";
    o << "x_max = " << num(c.x_max) << "\n";
    o << "x_step = " << num(c.x_step) << "\n";
    o << "\n[ensemble]\n";
    o << "betas = " << join(c.betas) << "\n";
    o << "slices = " << c.slices << "\n";
    o << "paths_per_slice = " << c.paths_per_slice << "\n";
    o << "\n[observables]\n";
    o << "test_functions = " << join(c.test_functions) << "\n";
    o << "times = " << join(c.times) << "\n";
    o << "\n[transport]\n";
    o << "n = " << c.transport_n << "\n";
    o << "resamples = " << c.transport_resamples << "\n";
    o << "\n[stein]\n";
    o << "sigma = " << num(c.stein_sigma) << "\n";
    o << "n_theta = " << c.stein_n_theta << "\n";
    o << "n_hermite = " << c.stein_n_hermite << "\n";
    o << "eps = " << num(c.stein_eps) << "\n";
    o << "box = " << num(c.stein_box) << "\n";
    o << "points = " << c.stein_points << "\n";
    o << "\n[chernoff]\n";
    o << "betas = " << join(c.ladder_betas) << "\n";
    o << "N = " << c.ladder_N << "\n";
    o << "slices = " << c.ladder_slices << "\n";
    o << "paths_per_slice = " << c.ladder_paths << "\n";
    o << "reference_samples = " << c.reference_samples << "\n";
    o << "reference_step = " << num(c.reference_step) << "\n";
    o << "reference_window = " << num(c.reference_window) << "\n";
    return o.str();
}

}  // namespace

std::string to_text(const RunConfig& c) { return body(c, true); }
std::string result_text(const RunConfig& c) { return body(c, false); }

RunConfig tiny_config() {
    RunConfig c;
    c.name = "tiny";
    c.N = 64;
    c.window = 2.5;
    c.x_min = -1.0;
    c.x_max = 1.0;
    c.x_step = 0.25;
    c.betas = {std::numbers::sqrt2, 0.0};
    c.slices = 50;
    c.paths_per_slice = 24;
    c.test_functions = {"indicator(0,0.5)", "indicator(-0.5,0)"};
    c.times = {1.0};
    c.transport_n = 40;
    c.transport_resamples = 3;
    c.stein_points = 5;
    c.ladder_betas = {2.0, 4.0};
    c.ladder_N = 256;
    c.ladder_slices = 30;
    c.ladder_paths = 50;
    c.reference_samples = 2000;
    c.reference_step = 0.002;
    c.reference_window = 2.0;
    return c;
}

}  // namespace kpz
