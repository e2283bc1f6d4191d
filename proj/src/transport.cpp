#include "kpz/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

#include "kpz/errors.hpp"
#include "kpz/parallel.hpp"
#include "kpz/rng.hpp"

namespace kpz {

namespace {
constexpr std::uint64_t kDomainPermutation = 0x5045524d;  // "PERM"
constexpr std::uint64_t kDomainPick = 0x5049434b;         // "PICK"
}  // namespace

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    const IndexedStream s(seed, kStreamGeneric);
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(s.uniform(i) * static_cast<double>(i));
        std::swap(p[i - 1], p[std::min(j, i - 1)]);
    }
    return p;
}

PointCloudPair make_cloud_pair(std::span<const double> x0, std::span<const double> xt, std::uint64_t seed) {
    if (x0.size() != xt.size()) throw DomainError("make_cloud_pair: coordinate lists differ in length");
    const auto p = seeded_permutation(x0.size(), seed);
    PointCloudPair c;
    for (std::size_t i = 0; i < x0.size(); ++i) {
        c.joint.push_back({x0[i], xt[i]});
        c.product.push_back({x0[i], xt[p[i]]});
    }
    return c;
}

std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t n) {
    if (cost.size() != n * n) throw DomainError("solve_assignment: cost matrix is not n x n");
    // 1-based potentials u (rows), v (columns); way[] records the augmenting tree.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            const double* row = cost.data() + (i0 - 1) * n;
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = row[j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> match(n);
    for (std::size_t j = 1; j <= n; ++j) match[p[j] - 1] = j - 1;
    return match;
}

double w1_exact(std::span<const Point2> a, std::span<const Point2> b) {
    if (a.size() != b.size()) throw DomainError("w1_exact: clouds must have the same size");
    const std::size_t n = a.size();
    if (n < 2) throw DomainError("w1_exact: need at least 2 points");
    if (n > kMaxCloud) {
        throw DomainError("w1_exact: " + std::to_string(n) + " points exceeds the cap of " +
                          std::to_string(kMaxCloud));
    }
    std::vector<double> c(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) c[i * n + j] = std::hypot(a[i].x - b[j].x, a[i].y - b[j].y);
    const auto m = solve_assignment(c, n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += c[i * n + m[i]];
    return s / static_cast<double>(n);
}

double w1_exact(const PointCloudPair& pair) { return w1_exact(pair.joint, pair.product); }

BoundEstimate asyind_bound(double beta, const StepFunction& phi1, const StepFunction& phi2, double t,
                           std::span<const double> Z, std::span<const std::uint32_t> batch) {
    const double norm = std::sqrt(phi1.l2_norm_sq());
    if (!(norm > 0.0)) throw DomainError("asyind_bound: phi1 has zero L2 norm");
    if (!(t > 0.0)) throw DomainError("asyind_bound: t must be positive");
    if (Z.empty()) throw StatisticsError("asyind_bound: no argmax samples");
    const double sc = std::cbrt(t * t);
    std::vector<double> v(Z.size());
    for (std::size_t i = 0; i < Z.size(); ++i) v[i] = cross_correlation(phi1, phi2, sc * Z[i]);
    std::vector<std::uint32_t> ids;
    if (batch.empty()) {
        ids.resize(Z.size());
        std::iota(ids.begin(), ids.end(), 0u);
        batch = ids;
    }
    const auto st = batch_mean(v, batch);
    const double k = beta / norm * std::sqrt(std::numbers::pi / 2.0);
    return {k * std::abs(st.mean), k * st.stderr, st.mean};
}

std::vector<Point2> joint_sample(const EnsembleStore& store, const StepFunction& phi1,
                                 const StepFunction& phi2, double t, std::size_t n, std::uint64_t seed) {
    if (!(t > 0.0)) throw DomainError("joint_sample: t must be positive");
    std::map<std::uint32_t, std::vector<std::size_t>> by_batch;
    for (std::size_t r : store.usable()) by_batch[store.batch(r)].push_back(r);
    if (by_batch.size() < n) {
        throw StatisticsError("independence_gap: " + std::to_string(by_batch.size()) +
                              " independent batches available, " + std::to_string(n) + " requested");
    }
    const double sc = std::cbrt(t * t), amp = std::cbrt(t);
    const auto p1 = phi1.dilate(sc), p2 = phi2.dilate(sc);
    const IndexedStream pick(derive_seed(seed, kDomainPick, 0), kStreamGeneric);
    std::vector<Point2> out;
    out.reserve(n);
    std::size_t i = 0;
    for (const auto& [b, recs] : by_batch) {
        if (i == n) break;
        const auto j = std::min(recs.size() - 1,
                                static_cast<std::size_t>(pick.uniform(b) * static_cast<double>(recs.size())));
        const std::size_t r = recs[j];
        out.push_back({amp * store.x0(r, p1), amp * store.x1(r, p2)});
        ++i;
    }
    return out;
}

GapReport independence_gap(std::span<const Point2> joint, const BoundEstimate& bound, std::size_t resamples,
                           std::uint64_t seed, unsigned workers) {
    const std::size_t n = joint.size();
    if (n < 2) throw StatisticsError("independence_gap: need at least 2 joint samples");
    if (resamples < 2) throw DomainError("independence_gap: need at least 2 resamples");
    std::vector<double> xt(n);
    for (std::size_t i = 0; i < n; ++i) xt[i] = joint[i].y;
    struct Pair {
        double joint = 0.0, floor = 0.0;
    };
    const auto res = parallel_map<Pair>(resamples, workers, [&](std::size_t k) {
        const auto pa = seeded_permutation(n, derive_seed(seed, kDomainPermutation, 2 * k));
        const auto pb = seeded_permutation(n, derive_seed(seed, kDomainPermutation, 2 * k + 1));
        std::vector<Point2> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = {joint[i].x, xt[pa[i]]};
            b[i] = {joint[i].x, xt[pb[i]]};
        }
        return Pair{w1_exact(joint, a), w1_exact(a, b)};
    });
    GapReport g;
    g.n = n;
    g.bound = bound;
    std::vector<double> d;
    for (const auto& r : res) {
        g.joint_per_resample.push_back(r.joint);
        g.floor_per_resample.push_back(r.floor);
        d.push_back(r.joint - r.floor);
    }
    const double m = static_cast<double>(resamples);
    g.w1_joint = std::accumulate(g.joint_per_resample.begin(), g.joint_per_resample.end(), 0.0) / m;
    g.w1_floor = std::accumulate(g.floor_per_resample.begin(), g.floor_per_resample.end(), 0.0) / m;
    g.gap = g.w1_joint - g.w1_floor;
    double ss = 0.0;
    for (double v : d) ss += (v - g.gap) * (v - g.gap);
    g.spread = std::sqrt(ss / (m - 1.0));
    g.pass = g.gap <= bound.value + 3.0 * g.spread;
    return g;
}

GapReport independence_gap(const EnsembleStore& store, const StepFunction& phi1, const StepFunction& phi2,
                           double t, std::size_t n, std::size_t resamples, std::uint64_t seed,
                           unsigned workers) {
    const auto joint = joint_sample(store, phi1, phi2, t, n, seed);
    std::vector<std::uint32_t> batch;
    for (std::size_t r : store.usable()) batch.push_back(store.batch(r));
    const auto bound = asyind_bound(store.beta(), phi1, phi2, t, store.argmax_at_origin(), batch);
    auto g = independence_gap(joint, bound, resamples, seed, workers);
    g.t = t;
    return g;
}

}  // namespace kpz
