#include "kpz/chernoff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kpz/errors.hpp"
#include "kpz/parallel.hpp"
#include "kpz/rng.hpp"

namespace kpz {

namespace {
constexpr std::uint64_t kDomainChernoff = 0x4348524e;  // "CHRN"
}

double ChernoffReference::cdf(double x) const {
    if (sorted.empty()) return 0.0;
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
    return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

ChernoffReference chernoff_reference(std::size_t n, double grid_step, double window, std::uint64_t seed,
                                     unsigned workers) {
    if (!(window > 0.0) || !(grid_step > 0.0)) throw DomainError("chernoff_reference: window and step must be positive");
    if (grid_step > 1e-3 * window * (1.0 + 1e-12)) {
        throw DomainError("chernoff_reference: grid step must be at most 1e-3 of the window");
    }
    if (n == 0) throw StatisticsError("chernoff_reference: no samples requested");
    const auto half = static_cast<std::int64_t>(std::llround(window / grid_step));
    const double sq = std::sqrt(grid_step);
    // NaN marks a censored sample.
    const auto z = parallel_map<double>(n, workers, [&](std::size_t i) {
        const IndexedStream s(derive_seed(seed, kDomainChernoff, i), kStreamBrownian);
        // Walk from u = 0 outwards; B(0) = 0.
        double best = 0.0;
        std::int64_t arg = 0;
        double b = 0.0;
        for (std::int64_t k = 1; k <= half; ++k) {
            b += sq * s.normal(static_cast<std::uint64_t>(k - 1));
            const double u = static_cast<double>(k) * grid_step, v = b - u * u;
            if (v > best) {
                best = v;
                arg = k;
            }
        }
        b = 0.0;
        for (std::int64_t k = 1; k <= half; ++k) {
            b += sq * s.normal(static_cast<std::uint64_t>(half + k - 1));
            const double u = static_cast<double>(k) * grid_step, v = b - u * u;
            if (v > best) {
                best = v;
                arg = -k;
            }
        }
        if (arg == half || arg == -half) return std::numeric_limits<double>::quiet_NaN();
        return static_cast<double>(arg) * grid_step;
    });
    ChernoffReference r;
    r.grid_step = grid_step;
    r.window = window;
    for (double v : z) {
        if (std::isnan(v)) {
            ++r.censored;
        } else {
            r.sorted.push_back(v);
        }
    }
    if (static_cast<double>(r.censored) > 1e-3 * static_cast<double>(n)) {
        throw DomainError("chernoff_reference: " + std::to_string(r.censored) + " of " + std::to_string(n) +
                          " argmaxes on the window edge; enlarge the window");
    }
    std::sort(r.sorted.begin(), r.sorted.end());
    return r;
}

double ks_to_reference(std::vector<double> sample, const ChernoffReference& ref) {
    return ks_two_sample(std::move(sample), ref.sorted);
}

double sample_design_effect(std::span<const double> Z, std::span<const std::uint32_t> batch) {
    if (Z.size() < 2) return 1.0;
    std::vector<double> tmp(Z.begin(), Z.end());
    std::nth_element(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(tmp.size() / 2), tmp.end());
    const double med = tmp[tmp.size() / 2];
    std::vector<double> ind(Z.size());
    for (std::size_t i = 0; i < Z.size(); ++i) ind[i] = Z[i] <= med ? 1.0 : 0.0;
    const auto st = batch_mean(ind, batch);
    const double iid = st.mean * (1.0 - st.mean) / static_cast<double>(Z.size());
    if (!(iid > 0.0) || st.batches < 2) return 1.0;
    return std::max(1.0, st.stderr * st.stderr / iid);
}

EnsembleSpec ladder_spec(const lpp::GeometrySpec& base, double beta, std::size_t slices, std::size_t paths,
                         std::uint64_t seed) {
    EnsembleSpec spec;
    spec.geometry = base;
    spec.geometry.x_grid = {0.0};
    spec.geometry.window = 2.0 + 1.6 * std::cbrt(beta * beta);
    spec.geometry.centering = lpp::Centering::pair_mean;
    spec.betas = {beta};
    spec.slices = slices;
    spec.paths_per_slice = paths;
    spec.seed = seed;
    return spec;
}

LargeBetaReport large_beta_check(std::vector<ArgmaxSample> samples, const ChernoffReference& ref) {
    if (samples.size() < 2) throw StatisticsError("large_beta_check: need at least two beta values");
    std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.beta < b.beta; });
    LargeBetaReport r;
    for (const auto& s : samples) {
        if (s.Z.size() < 1000) {
            throw StatisticsError("large_beta_check: beta = " + std::to_string(s.beta) + " has " +
                                  std::to_string(s.Z.size()) + " samples, at least 1000 required");
        }
        if (s.batch.size() != s.Z.size()) throw DomainError("large_beta_check: batch ids do not match samples");
        LadderEntry e;
        e.beta = s.beta;
        e.n = s.Z.size();
        e.n_eff = static_cast<double>(e.n) / sample_design_effect(s.Z, s.batch);
        const double scale = std::pow(s.beta, -2.0 / 3.0);
        std::vector<double> u(s.Z.size());
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = scale * s.Z[i];
        e.ks = ks_to_reference(std::move(u), ref);
        e.noise = 0.5 * ks_threshold(e.n_eff, static_cast<double>(ref.size()));
        r.ladder.push_back(e);
    }
    const auto& a = r.ladder.front();
    const auto& b = r.ladder.back();
    r.combined_noise = std::hypot(a.noise, b.noise);
    r.monotone = b.ks <= a.ks + 2.0 * r.combined_noise;
    r.decrease = a.ks - b.ks > 2.0 * r.combined_noise;
    return r;
}

namespace {

/// Central-difference g' on the interior of the grid.
std::vector<double> slope(const CurveEstimate& g) {
    std::vector<double> d;
    for (std::size_t k = 1; k + 1 < g.grid.size(); ++k)
        d.push_back((g.mean[k + 1] - g.mean[k - 1]) / (g.grid[k + 1] - g.grid[k - 1]));
    return d;
}

}  // namespace

FlatReport flat_regime_check(const EnsembleStore& flat, const EnsembleStore* quarter, const EnsembleStore* half) {
    const std::vector<double> grid(flat.x().begin(), flat.x().end());
    const auto usable = flat.usable();
    if (usable.empty()) throw StatisticsError("flat_regime_check: store holds no usable records");
    if (flat.batches() < kMinBatches) {
        throw StatisticsError("flat_regime_check: " + std::to_string(flat.batches()) + " batches, at least " +
                              std::to_string(kMinBatches) + " required");
    }
    FlatReport r;
    r.flatness.name = "g_0(x) against g_0(0)";
    const std::size_t k0 = flat.origin(), n = usable.size();
    std::vector<std::uint32_t> batch;
    for (std::size_t rr : usable) batch.push_back(flat.batch(rr));
    std::vector<double> mean(flat.nx(), 0.0);
    for (std::size_t k = 0; k < flat.nx(); ++k) {
        CompensatedSum s;
        for (std::size_t rr : usable) s.add(flat.h(rr, k));
        mean[k] = s.value() / static_cast<double>(n);
    }
    const double f = static_cast<double>(n) / static_cast<double>(n - 1);
    std::vector<double> a(n), b(n), d(n);
    for (std::size_t k = 0; k < flat.nx(); ++k) {
        if (k == k0) continue;
        for (std::size_t i = 0; i < n; ++i) {
            const double u = flat.h(usable[i], k) - mean[k], v = flat.h(usable[i], k0) - mean[k0];
            a[i] = u * u * f;
            b[i] = v * v * f;
            d[i] = a[i] - b[i];
        }
        const auto sa = batch_mean(a, batch), sb = batch_mean(b, batch), sd = batch_mean(d, batch);
        r.flatness.grid.push_back(grid[k]);
        r.flatness.lhs.push_back(sa.mean);
        r.flatness.rhs.push_back(sb.mean);
        r.flatness.stderr.push_back(sd.stderr);
    }
    r.flatness.finish();
    r.flat = r.flatness.max_ratio <= 3.0;

    const auto F = argmax_cdf(flat, grid);
    r.F0_curve = F.curve;
    r.F0 = F.curve.mean[k0];
    r.dkw = F.dkw;
    r.F0_half = std::abs(r.F0 - 0.5) <= r.dkw;

    if (quarter) {
        const auto Fq = argmax_cdf(*quarter, grid);
        r.small_beta_gap = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k)
            r.small_beta_gap = std::max(r.small_beta_gap, std::abs(Fq.curve.mean[k] - F.curve.mean[k]));
        r.small_beta_band = Fq.dkw + F.dkw;
        if (half) {
            const auto g0 = slope(variance_curve(flat)), gq = slope(variance_curve(*quarter)),
                       gh = slope(variance_curve(*half));
            const double db = quarter->beta();
            for (std::size_t k = 0; k < g0.size(); ++k) {
                r.beta_derivative_lhs.push_back((gh[k] - 2.0 * gq[k] + g0[k]) / (db * db) / 2.0);
                r.beta_derivative_rhs.push_back(2.0 * F.curve.mean[k + 1] - 1.0);
            }
        }
    }
    return r;
}

}  // namespace kpz
