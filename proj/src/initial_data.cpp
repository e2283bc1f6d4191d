#include "kpz/initial_data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include "kpz/errors.hpp"
#include "kpz/quadrature.hpp"
#include "kpz/rng.hpp"

namespace kpz {

namespace {

constexpr std::uint32_t kStreamBridge = 0x42524944u;  // "BRID"

double overlap(double a, double b, double c, double d) noexcept {
    return std::max(0.0, std::min(b, d) - std::max(a, c));
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

std::ptrdiff_t grid_index(std::span<const double> grid, double x, double tol) {
    const auto it = std::lower_bound(grid.begin(), grid.end(), x);
    const double eps = tol * std::max(1.0, std::abs(x));
    if (it != grid.end() && std::abs(*it - x) <= eps) return it - grid.begin();
    if (it != grid.begin() && std::abs(*(it - 1) - x) <= eps) return it - grid.begin() - 1;
    return -1;
}

// ---------------------------------------------------------------------------
// StepFunction

StepFunction::StepFunction(std::vector<double> breakpoints, std::vector<double> values)
    : x_(std::move(breakpoints)), c_(std::move(values)) {
    if (x_.empty() && c_.empty()) return;
    if (x_.size() != c_.size() + 1) {
        throw DomainError("StepFunction: need one more breakpoint than values");
    }
    for (std::size_t i = 1; i < x_.size(); ++i) {
        if (!(x_[i] >= x_[i - 1])) throw DomainError("StepFunction: breakpoints must be sorted");
    }
    for (double v : x_)
        if (!std::isfinite(v)) throw DomainError("StepFunction: non-finite breakpoint");
}

StepFunction StepFunction::indicator(double a, double b, double c) {
    if (!(b > a)) throw DomainError("StepFunction::indicator: need a < b");
    return StepFunction({a, b}, {c});
}

StepFunction StepFunction::from_blocks(std::span<const Block> blocks) {
    std::vector<double> pts;
    for (const auto& bl : blocks) {
        if (bl.a == bl.b || bl.c == 0.0) continue;
        pts.push_back(bl.a);
        pts.push_back(bl.b);
    }
    if (pts.empty()) return {};
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::vector<double> vals(pts.size() - 1, 0.0);
    for (const auto& bl : blocks) {
        if (bl.a == bl.b || bl.c == 0.0) continue;
        const double lo = std::min(bl.a, bl.b), hi = std::max(bl.a, bl.b);
        const double c = bl.a < bl.b ? bl.c : -bl.c;
        const auto i0 = std::lower_bound(pts.begin(), pts.end(), lo) - pts.begin();
        const auto i1 = std::lower_bound(pts.begin(), pts.end(), hi) - pts.begin();
        for (auto i = i0; i < i1; ++i) vals[static_cast<std::size_t>(i)] += c;
    }
    return StepFunction(std::move(pts), std::move(vals));
}

bool StepFunction::is_zero() const noexcept {
    for (std::size_t i = 0; i < c_.size(); ++i)
        if (c_[i] != 0.0 && x_[i + 1] > x_[i]) return false;
    return true;
}

double StepFunction::operator()(double x) const noexcept {
    if (c_.empty() || x <= x_.front() || x > x_.back()) return 0.0;
    // First breakpoint >= x closes the piece containing x.
    const auto it = std::lower_bound(x_.begin(), x_.end(), x);
    return c_[static_cast<std::size_t>(it - x_.begin()) - 1];
}

double StepFunction::integral() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < c_.size(); ++i) s += c_[i] * (x_[i + 1] - x_[i]);
    return s;
}

double StepFunction::l2_norm_sq() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < c_.size(); ++i) s += c_[i] * c_[i] * (x_[i + 1] - x_[i]);
    return s;
}

double StepFunction::antiderivative(double x) const noexcept {
    // int_0^x phi = F(x) - F(0) with F(y) = int_{-inf}^y phi.
    auto cumulative = [&](double y) {
        double s = 0.0;
        for (std::size_t i = 0; i < c_.size(); ++i) {
            if (y <= x_[i]) break;
            s += c_[i] * (std::min(y, x_[i + 1]) - x_[i]);
        }
        return s;
    };
    return cumulative(x) - cumulative(0.0);
}

StepFunction StepFunction::dilate(double s) const {
    if (!(s > 0.0)) throw DomainError("StepFunction::dilate: factor must be positive");
    std::vector<double> x(x_);
    for (double& v : x) v /= s;
    return StepFunction(std::move(x), c_);
}

StepFunction StepFunction::scaled(double k) const {
    std::vector<double> c(c_);
    for (double& v : c) v *= k;
    return StepFunction(x_, std::move(c));
}

std::string StepFunction::to_string() const {
    if (c_.empty()) return "step()";
    std::string s = "step(" + fmt(x_[0]) + ";";
    for (std::size_t i = 0; i < c_.size(); ++i) {
        s += (i ? ", " : " ") + fmt(x_[i + 1]) + ":" + fmt(c_[i]);
    }
    return s + ")";
}

double inner_product(const StepFunction& a, const StepFunction& b) noexcept {
    double s = 0.0;
    const auto xa = a.breakpoints(), xb = b.breakpoints();
    const auto ca = a.values(), cb = b.values();
    for (std::size_t i = 0; i < ca.size(); ++i)
        for (std::size_t j = 0; j < cb.size(); ++j)
            s += ca[i] * cb[j] * overlap(xa[i], xa[i + 1], xb[j], xb[j + 1]);
    return s;
}

// ---------------------------------------------------------------------------
// Cross-correlation

double PiecewiseLinear::operator()(double z) const noexcept {
    if (knots.empty() || z <= knots.front() || z >= knots.back()) return 0.0;
    const auto it = std::upper_bound(knots.begin(), knots.end(), z);
    const auto k = static_cast<std::size_t>(it - knots.begin());
    const double t = (z - knots[k - 1]) / (knots[k] - knots[k - 1]);
    return values[k - 1] + t * (values[k] - values[k - 1]);
}

double PiecewiseLinear::integral() const noexcept {
    double s = 0.0;
    for (std::size_t k = 1; k < knots.size(); ++k)
        s += 0.5 * (values[k] + values[k - 1]) * (knots[k] - knots[k - 1]);
    return s;
}

double cross_correlation(const StepFunction& phi1, const StepFunction& phi2, double z) noexcept {
    const auto x1 = phi1.breakpoints(), x2 = phi2.breakpoints();
    const auto c1 = phi1.values(), c2 = phi2.values();
    double s = 0.0;
    for (std::size_t i = 0; i < c1.size(); ++i)
        for (std::size_t j = 0; j < c2.size(); ++j)
            s += c1[i] * c2[j] * overlap(x1[i], x1[i + 1], x2[j] - z, x2[j + 1] - z);
    return s;
}

PiecewiseLinear cross_correlation_function(const StepFunction& phi1, const StepFunction& phi2) {
    PiecewiseLinear f;
    const auto x1 = phi1.breakpoints(), x2 = phi2.breakpoints();
    if (x1.empty() || x2.empty()) return f;
    for (double b : x2)
        for (double a : x1) f.knots.push_back(b - a);
    std::sort(f.knots.begin(), f.knots.end());
    f.knots.erase(std::unique(f.knots.begin(), f.knots.end()), f.knots.end());
    for (double z : f.knots) f.values.push_back(cross_correlation(phi1, phi2, z));
    return f;
}

double zeta(double x, double u) noexcept {
    if (x > 0.0) return (u > 0.0 && u <= x) ? 1.0 : 0.0;
    if (x < 0.0) return (u > x && u <= 0.0) ? -1.0 : 0.0;
    return 0.0;
}

// ---------------------------------------------------------------------------
// Smooth test functions

double SmoothTestFunction::integral() const {
    const auto q = gauss_legendre(200, a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * value(q.nodes[i]);
    return s;
}

double SmoothTestFunction::l2_norm_sq() const {
    const auto q = gauss_legendre(200, a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        const double v = value(q.nodes[i]);
        s += q.weights[i] * v * v;
    }
    return s;
}

namespace {

double tabulated_bound(const std::function<double(double)>& d, double a, double b) {
    double m = 0.0;
    const int n = 20000;
    for (int i = 0; i <= n; ++i) m = std::max(m, std::abs(d(a + (b - a) * i / n)));
    return m * (1.0 + 1e-6);
}

}  // namespace

SmoothTestFunction bump(double a, double b) {
    if (!(b > a)) throw DomainError("bump: need a < b");
    // int_{-1}^{1} exp(-1/(1-s^2)) ds
    constexpr double kMass = 0.44399381616807943;
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    const double k = 1.0 / (kMass * half);
    SmoothTestFunction f;
    f.name = "bump(" + fmt(a) + ", " + fmt(b) + ")";
    f.a = a;
    f.b = b;
    f.value = [=](double x) {
        const double s = (x - mid) / half;
        if (std::abs(s) >= 1.0) return 0.0;
        return k * std::exp(-1.0 / (1.0 - s * s));
    };
    f.derivative = [=](double x) {
        const double s = (x - mid) / half;
        if (std::abs(s) >= 1.0) return 0.0;
        const double u = 1.0 - s * s;
        return k * std::exp(-1.0 / u) * (-2.0 * s / (u * u)) / half;
    };
    f.derivative_bound = tabulated_bound(f.derivative, a, b);
    return f;
}

SmoothTestFunction cosine_taper(double a, double b, double height) {
    if (!(b > a)) throw DomainError("taper: need a < b");
    const double w = 2.0 * std::numbers::pi / (b - a);
    SmoothTestFunction f;
    f.name = "taper(" + fmt(a) + ", " + fmt(b) + ", " + fmt(height) + ")";
    f.a = a;
    f.b = b;
    f.value = [=](double x) {
        if (x <= a || x >= b) return 0.0;
        return 0.5 * height * (1.0 - std::cos(w * (x - a)));
    };
    f.derivative = [=](double x) {
        if (x <= a || x >= b) return 0.0;
        return 0.5 * height * w * std::sin(w * (x - a));
    };
    f.derivative_bound = 0.5 * std::abs(height) * w;
    return f;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double number(std::string_view s, std::string_view whole) {
    const std::string t(trim(s));
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v)) {
        throw ConfigError("test function '" + std::string(whole) + "': bad number '" + t + "'");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

}  // namespace

TestFunction parse_test_function(std::string_view text) {
    const std::string_view whole = trim(text);
    const auto open = whole.find('(');
    if (open == std::string_view::npos || whole.back() != ')') {
        throw ConfigError("test function '" + std::string(whole) + "': expected name(args)");
    }
    const std::string_view name = trim(whole.substr(0, open));
    const std::string_view args = whole.substr(open + 1, whole.size() - open - 2);
    TestFunction out;
    out.label = std::string(whole);
    try {
        if (name == "indicator") {
            const auto a = split(args, ',');
            if (a.size() != 2) throw ConfigError("indicator takes two arguments");
            out.step = StepFunction::indicator(number(a[0], whole), number(a[1], whole));
        } else if (name == "step") {
            const auto semi = args.find(';');
            if (semi == std::string_view::npos) throw ConfigError("step needs 'x0; x1:c1, ...'");
            std::vector<double> xs{number(args.substr(0, semi), whole)}, cs;
            for (auto piece : split(args.substr(semi + 1), ',')) {
                const auto colon = piece.find(':');
                if (colon == std::string_view::npos) throw ConfigError("step piece needs x:c");
                xs.push_back(number(piece.substr(0, colon), whole));
                cs.push_back(number(piece.substr(colon + 1), whole));
            }
            out.step = StepFunction(std::move(xs), std::move(cs));
        } else if (name == "bump" || name == "taper") {
            const auto a = split(args, ',');
            out.smooth = true;
            if (name == "bump") {
                if (a.size() != 2) throw ConfigError("bump takes two arguments");
                out.fn = bump(number(a[0], whole), number(a[1], whole));
            } else {
                if (a.size() != 2 && a.size() != 3) throw ConfigError("taper takes two or three arguments");
                out.fn = cosine_taper(number(a[0], whole), number(a[1], whole),
                                      a.size() == 3 ? number(a[2], whole) : 1.0);
            }
        } else {
            throw ConfigError("unknown test function '" + std::string(name) + "'");
        }
    } catch (const DomainError& e) {
        throw ConfigError("test function '" + std::string(whole) + "': " + e.what());
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        if (msg.rfind("test function", 0) == 0) throw;
        throw ConfigError("test function '" + std::string(whole) + "': " + msg);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Brownian paths

double BrownianPath::at(double z) const {
    const auto k = grid_index(z_grid, z);
    if (k < 0) throw DomainError("BrownianPath: point " + fmt(z) + " is not on the path grid");
    return values[static_cast<std::size_t>(k)];
}

BrownianPath sample_path(std::span<const double> z_grid, std::uint64_t seed) {
    for (std::size_t j = 1; j < z_grid.size(); ++j) {
        if (!(z_grid[j] > z_grid[j - 1])) throw DomainError("sample_path: grid must be strictly increasing");
    }
    const auto j0 = grid_index(z_grid, 0.0, 1e-12);
    if (j0 < 0) throw DomainError("sample_path: grid does not contain 0");
    BrownianPath p;
    p.z_grid.assign(z_grid.begin(), z_grid.end());
    p.values.assign(z_grid.size(), 0.0);
    p.seed = seed;
    const IndexedStream s(seed, kStreamBrownian);
    const auto z0 = static_cast<std::size_t>(j0);
    for (std::size_t j = z0 + 1; j < z_grid.size(); ++j)
        p.values[j] = p.values[j - 1] + std::sqrt(z_grid[j] - z_grid[j - 1]) * s.normal(j - 1);
    for (std::size_t j = z0; j-- > 0;)
        p.values[j] = p.values[j + 1] + std::sqrt(z_grid[j + 1] - z_grid[j]) * s.normal(j);
    return p;
}

BrownianPath refine(const BrownianPath& path, std::span<const double> points) {
    std::vector<double> add(points.begin(), points.end());
    std::sort(add.begin(), add.end());
    add.erase(std::unique(add.begin(), add.end()), add.end());
    BrownianPath out = path;
    const IndexedStream s(path.seed, kStreamBridge);
    for (double p : add) {
        if (grid_index(out.z_grid, p) >= 0) continue;
        const double xi = s.normal(splitmix64(std::bit_cast<std::uint64_t>(p)));
        const auto it = std::lower_bound(out.z_grid.begin(), out.z_grid.end(), p);
        const auto k = static_cast<std::size_t>(it - out.z_grid.begin());
        double v;
        if (k == 0) {
            v = out.values.front() + std::sqrt(out.z_grid.front() - p) * xi;
        } else if (k == out.z_grid.size()) {
            v = out.values.back() + std::sqrt(p - out.z_grid.back()) * xi;
        } else {
            const double a = out.z_grid[k - 1], b = out.z_grid[k];
            const double va = out.values[k - 1], vb = out.values[k];
            const double r = (p - a) / (b - a);
            v = va + r * (vb - va) + std::sqrt((p - a) * (b - p) / (b - a)) * xi;
        }
        out.z_grid.insert(out.z_grid.begin() + static_cast<std::ptrdiff_t>(k), p);
        out.values.insert(out.values.begin() + static_cast<std::ptrdiff_t>(k), v);
    }
    return out;
}

double wiener_integral(const StepFunction& phi, const BrownianPath& path, double beta) {
    const auto x = phi.breakpoints();
    const auto c = phi.values();
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] == 0.0) continue;
        s += c[i] * (path.at(x[i + 1]) - path.at(x[i]));
    }
    return beta * s;
}

double wiener_integral(const SmoothTestFunction& phi, const BrownianPath& path, double beta) {
    const auto& z = path.z_grid;
    if (z.empty() || phi.a < z.front() || phi.b > z.back()) {
        throw DomainError("wiener_integral: support of " + phi.name + " exceeds the path grid");
    }
    double s = 0.0;
    for (std::size_t j = 1; j < z.size(); ++j) {
        if (z[j] <= phi.a || z[j - 1] >= phi.b) continue;
        s += 0.5 * (z[j] - z[j - 1]) *
             (phi.derivative(z[j]) * path.values[j] + phi.derivative(z[j - 1]) * path.values[j - 1]);
    }
    return -beta * s;
}

BrownianPath perturb(const BrownianPath& path, const StepFunction& phi, double eps) {
    BrownianPath out = path;
    if (eps == 0.0) return out;
    for (std::size_t j = 0; j < out.values.size(); ++j)
        out.values[j] += eps * phi.antiderivative(out.z_grid[j]);
    return out;
}

}  // namespace kpz
