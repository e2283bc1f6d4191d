#include "kpz/process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "kpz/errors.hpp"

namespace kpz {

bool HeightSample::any_censored() const noexcept {
    return std::any_of(censored.begin(), censored.end(), [](unsigned char c) { return c != 0; });
}

std::size_t HeightSample::index_of(double xv) const {
    const auto k = grid_index(x, xv);
    if (k < 0) throw DomainError("point " + std::to_string(xv) + " is not on the x grid");
    return static_cast<std::size_t>(k);
}

RightmostMax rightmost_max(std::span<const double> v, std::size_t first, std::size_t last) {
    if (first > last || last >= v.size()) throw DomainError("rightmost_max: bad index range");
    RightmostMax r{v[first], first};
    for (std::size_t j = first + 1; j <= last; ++j) {
        if (v[j] >= r.value) r = {v[j], j};
    }
    return r;
}

HeightSample compose_height(const lpp::LandscapeSlice& slice, const BrownianPath& path, double beta) {
    if (!(beta >= 0.0)) throw DomainError("compose_height: beta must be >= 0");
    const auto& g = *slice.geometry;
    const auto zs = g.z_grid();
    // Path values on the landscape grid; the path grid may be a superset.
    std::vector<double> b(zs.size());
    std::size_t p = 0;
    for (std::size_t j = 0; j < zs.size(); ++j) {
        while (p < path.z_grid.size() && path.z_grid[p] < zs[j] &&
               std::abs(path.z_grid[p] - zs[j]) > 1e-12 * std::max(1.0, std::abs(zs[j])))
            ++p;
        if (p == path.z_grid.size() ||
            std::abs(path.z_grid[p] - zs[j]) > 1e-12 * std::max(1.0, std::abs(zs[j]))) {
            throw DomainError("compose_height: path grid does not contain landscape point z = " +
                              std::to_string(zs[j]));
        }
        b[j] = beta * path.values[p];
    }

    HeightSample s;
    s.x.assign(g.x_grid().begin(), g.x_grid().end());
    s.x_eff.assign(g.x_effective().begin(), g.x_effective().end());
    s.replica_id = slice.replica_id;
    s.beta = beta;
    const std::size_t nx = g.nx();
    s.h.resize(nx);
    s.Z.resize(nx);
    s.z_index.resize(nx);
    s.censored.resize(nx);
    for (std::size_t k = 0; k < nx; ++k) {
        const auto [a, e] = g.band(k);
        const auto col = slice.column(k);
        double best = -std::numeric_limits<double>::infinity();
        std::size_t arg = a;
        for (std::size_t j = a; j <= e; ++j) {
            const double v = b[j] + col[j];
            if (v >= best) {
                best = v;
                arg = j;
            }
        }
        s.h[k] = best;
        s.Z[k] = zs[arg];
        s.z_index[k] = arg;
        s.censored[k] = (arg == a || arg == e) ? 1 : 0;
    }
    return s;
}

double time_t_argmax(double Z, double x, double t) {
    if (!(t > 0.0)) throw DomainError("time_t_argmax: t must be positive");
    return x + std::cbrt(t * t) * Z;
}

double observable_step(const HeightSample& s, const StepFunction& phi) {
    const auto x = phi.breakpoints();
    const auto c = phi.values();
    double r = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] == 0.0) continue;
        r += c[i] * (s.h[s.index_of(x[i + 1])] - s.h[s.index_of(x[i])]);
    }
    return r;
}

double observable_step(const HeightSample& s, const StepFunction& phi, double t) {
    if (!(t > 0.0)) throw DomainError("observable_step: t must be positive");
    if (t == 1.0) return observable_step(s, phi);
    return std::cbrt(t) * observable_step(s, phi.dilate(std::cbrt(t * t)));
}

double observable_smooth(const HeightSample& s, const SmoothTestFunction& phi) {
    if (s.x.empty() || phi.a < s.x.front() || phi.b > s.x.back()) {
        throw DomainError("observable_smooth: support of " + phi.name + " exceeds the x grid");
    }
    double r = 0.0;
    for (std::size_t k = 1; k < s.size(); ++k) {
        if (s.x[k] <= phi.a || s.x[k - 1] >= phi.b) continue;
        r += 0.5 * (s.x_eff[k] - s.x_eff[k - 1]) *
             (phi.derivative(s.x_eff[k]) * s.h[k] + phi.derivative(s.x_eff[k - 1]) * s.h[k - 1]);
    }
    return -r;
}

namespace {

/// Z_t at the breakpoints of phi, rejecting censored ones.
std::vector<double> argmax_at_breakpoints(const HeightSample& s, const StepFunction& phi, double t) {
    if (!(t > 0.0)) throw DomainError("malliavin: t must be positive");
    const double scale = std::cbrt(t * t);
    std::vector<double> z;
    for (double xb : phi.breakpoints()) {
        const std::size_t k = s.index_of(xb / scale);
        if (s.censored[k]) {
            throw SampleInvalidError("malliavin: argmax at x = " + std::to_string(xb) +
                                     " is censored");
        }
        z.push_back(scale * s.Z[k]);
    }
    return z;
}

}  // namespace

MalliavinField malliavin_field(const HeightSample& s, const StepFunction& phi, double t) {
    const auto z = argmax_at_breakpoints(s, phi, t);
    const auto c = phi.values();
    std::vector<StepFunction::Block> blocks;
    for (std::size_t j = 0; j < c.size(); ++j) blocks.push_back({z[j], z[j + 1], s.beta * c[j]});
    return {StepFunction::from_blocks(blocks), phi, s.beta, t};
}

double malliavin_pairing(const HeightSample& s, const StepFunction& phi_obs,
                         const StepFunction& phi_dir, double t) {
    const auto z = argmax_at_breakpoints(s, phi_obs, t);
    const auto c = phi_obs.values();
    double r = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j)
        r += c[j] * (phi_dir.antiderivative(z[j + 1]) - phi_dir.antiderivative(z[j]));
    return s.beta * r;
}

double malliavin_norm_sq(const HeightSample& s, const StepFunction& phi, double t) {
    const auto z = argmax_at_breakpoints(s, phi, t);
    const auto c = phi.values();
    double r = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) r += c[j] * c[j] * (z[j + 1] - z[j]);
    return s.beta * s.beta * r;
}

DirectionalCheck directional_derivative_check(const lpp::LandscapeSlice& slice,
                                              const BrownianPath& path,
                                              const StepFunction& phi_dir,
                                              const StepFunction& phi_obs, double beta, double eps) {
    if (!(eps > 0.0)) throw DomainError("directional_derivative_check: eps must be positive");
    const auto base = compose_height(slice, path, beta);
    const auto full = compose_height(slice, perturb(path, phi_dir, eps), beta);
    const auto half = compose_height(slice, perturb(path, phi_dir, 0.5 * eps), beta);

    DirectionalCheck r;
    r.exact = inner_product(malliavin_field(base, phi_obs).field, phi_dir);
    r.fd = (observable_step(full, phi_obs) - observable_step(base, phi_obs)) / eps;
    for (double xb : phi_obs.breakpoints()) {
        const std::size_t k = base.index_of(xb);
        if (full.z_index[k] != base.z_index[k] || half.z_index[k] != base.z_index[k] ||
            full.censored[k] || half.censored[k])
            r.stable = false;
    }
    return r;
}

double distinct_argmax_density(const HeightSample& s) {
    std::set<std::size_t> seen;
    for (std::size_t k = 0; k < s.size(); ++k)
        if (!s.censored[k]) seen.insert(s.z_index[k]);
    const double len = s.x.empty() ? 0.0 : s.x.back() - s.x.front();
    return len > 0.0 ? static_cast<double>(seen.size()) / len : 0.0;
}

}  // namespace kpz
