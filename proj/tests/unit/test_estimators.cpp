#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kpz/errors.hpp"
#include "kpz/estimators.hpp"

using namespace kpz;

namespace {

std::vector<double> uniform_grid(double lo, double hi, double d) {
    std::vector<double> g;
    const int n = static_cast<int>(std::lround((hi - lo) / d));
    for (int i = 0; i <= n; ++i) g.push_back(lo + i * d);
    return g;
}

HeightSample sample_on(const std::vector<double>& x, std::vector<double> h, std::vector<double> Z,
                       double beta, std::uint64_t id) {
    HeightSample s;
    s.x = x;
    s.x_eff = x;
    s.h = std::move(h);
    s.Z = std::move(Z);
    s.z_index.assign(x.size(), 0);
    s.censored.assign(x.size(), 0);
    s.replica_id = id;
    s.beta = beta;
    return s;
}

BrownianPath flat_path(const std::vector<double>& x) { return {x, std::vector<double>(x.size(), 0.0), 0}; }

// h(x) = beta W(x - c) with c uniform on {-1, ..., 1} (step d) independent of
// a two-sided Brownian W. Then Var h(x) = beta^2 E|x - c| and Z(0) = c, the
// same relation a variational height obeys.
EnsembleStore shifted_brownian_store(double beta, std::size_t batches, std::size_t per_batch,
                                     std::uint64_t seed, double d = 0.25) {
    const auto x = uniform_grid(-2.0, 2.0, d);
    const auto w_grid = uniform_grid(-3.0, 3.0, d);
    const std::size_t w0 = w_grid.size() / 2;
    const int cmax = static_cast<int>(std::lround(1.0 / d));
    EnsembleStore store(x, x, beta, "synthetic");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, std::sqrt(d));
    std::uniform_int_distribution<int> ud(-cmax, cmax);
    const auto path = flat_path(x);
    std::vector<double> w(w_grid.size());
    for (std::size_t b = 0; b < batches; ++b) {
        for (std::size_t r = 0; r < per_batch; ++r) {
            w[w0] = 0.0;
            for (std::size_t j = w0 + 1; j < w.size(); ++j) w[j] = w[j - 1] + nd(rng);
            for (std::size_t j = w0; j-- > 0;) w[j] = w[j + 1] + nd(rng);
            const int ci = ud(rng);
            const double c = ci * d;
            std::vector<double> h(x.size()), Z(x.size());
            for (std::size_t k = 0; k < x.size(); ++k) {
                const auto j = static_cast<std::ptrdiff_t>(w0) + static_cast<std::ptrdiff_t>(k) -
                               static_cast<std::ptrdiff_t>(x.size() / 2) - ci;
                h[k] = beta * w[static_cast<std::size_t>(j)];
                Z[k] = x[k] + c;
            }
            store.add(sample_on(x, h, Z, beta, b * per_batch + r), path, static_cast<std::uint32_t>(b));
        }
    }
    return store;
}

}  // namespace

TEST(CompensatedSum, RecoversCancelledTerms) {
    CompensatedSum s;
    s.add(1e16);
    s.add(1.0);
    s.add(-1e16);
    EXPECT_EQ(s.value(), 1.0);
}

TEST(BatchMean, HandComputedRatioEstimator) {
    const std::vector<double> v{1, 2, 3, 4};
    const std::vector<std::uint32_t> b{0, 0, 7, 7};
    const auto st = batch_mean(v, b);
    EXPECT_DOUBLE_EQ(st.mean, 2.5);
    // Batch totals 3 and 7 against 2.5 * 2: SE^2 = 2 * (4 + 4) / 16.
    EXPECT_DOUBLE_EQ(st.stderr, 1.0);
    EXPECT_EQ(st.batches, 2u);
    EXPECT_EQ(st.n, 4u);
}

TEST(BatchMean, MatchesIidErrorForIndependentBatches) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    std::vector<double> v;
    std::vector<std::uint32_t> b;
    for (std::uint32_t i = 0; i < 20000; ++i) {
        v.push_back(nd(rng));
        b.push_back(i / 50);
    }
    const auto st = batch_mean(v, b);
    EXPECT_NEAR(st.stderr, 1.0 / std::sqrt(20000.0), 0.15 / std::sqrt(20000.0));
}

TEST(BatchMean, CapturesWithinBatchCorrelation) {
    // Shared batch effect: Var of the mean is 1/B + 1/n, iid formula misses 1/B.
    std::mt19937_64 rng(12);
    std::normal_distribution<double> nd;
    std::vector<double> v;
    std::vector<std::uint32_t> b;
    const int B = 400, m = 25;
    for (int i = 0; i < B; ++i) {
        const double shared = nd(rng);
        for (int j = 0; j < m; ++j) {
            v.push_back(shared + nd(rng));
            b.push_back(static_cast<std::uint32_t>(i));
        }
    }
    const double expected = std::sqrt(1.0 / B + 1.0 / (B * m));
    EXPECT_NEAR(batch_mean(v, b).stderr, expected, 0.12 * expected);
}

TEST(Store, CensoredRecordsAreCountedAndSkipped) {
    const auto x = uniform_grid(-1.0, 1.0, 0.5);
    EnsembleStore s(x, x, 1.0, "f");
    const auto path = flat_path(x);
    auto a = sample_on(x, {0, 1, 2, 3, 4}, {0, 0, 0, 0, 0}, 1.0, 1);
    auto c = a;
    c.censored[4] = 1;
    s.add(a, path, 0);
    s.add(c, path, 1);
    EXPECT_EQ(s.records(), 2u);
    EXPECT_EQ(s.censored_count(), 1u);
    ASSERT_EQ(s.usable().size(), 1u);
    EXPECT_EQ(s.usable()[0], 0u);
    EXPECT_EQ(s.batches(), 1u);
    EXPECT_EQ(s.origin(), 2u);
    EXPECT_DOUBLE_EQ(s.x1(0, StepFunction::indicator(-0.5, 1.0, 2.0)), 2.0 * (4.0 - 1.0));
}

TEST(Store, AppendRequiresSameFingerprint) {
    const auto x = uniform_grid(-1.0, 1.0, 0.5);
    EnsembleStore a(x, x, 1.0, "f"), b(x, x, 1.0, "g"), c(x, x, 1.0, "f");
    const auto path = flat_path(x);
    c.add(sample_on(x, {0, 1, 2, 3, 4}, {0, 0, 0, 0, 0}, 1.0, 1), path, 3);
    EXPECT_THROW(a.append(b), DomainError);
    a.append(c);
    a.append(c);
    EXPECT_EQ(a.records(), 2u);
    EXPECT_EQ(a.usable().size(), 2u);
}

TEST(Store, TimeZeroObservableUsesPath) {
    const auto x = uniform_grid(-1.0, 1.0, 0.5);
    EnsembleStore s(x, x, 2.0, "f");
    BrownianPath p{x, {-1.0, 0.5, 0.0, 3.0, 1.0}, 0};
    s.add(sample_on(x, {0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}, 2.0, 1), p, 0);
    EXPECT_DOUBLE_EQ(s.x0(0, StepFunction::indicator(-1.0, 0.5, 1.0)), 2.0 * (3.0 - (-1.0)));
}

TEST(Estimators, RequireThirtyBatches) {
    const auto s = shifted_brownian_store(1.0, 29, 5, 1);
    EXPECT_THROW(variance_curve(s), StatisticsError);
    EXPECT_THROW(gprime_identity_check(s), StatisticsError);
}

TEST(Estimators, VarianceCurveOracle) {
    const double beta = std::sqrt(2.0);
    const auto s = shifted_brownian_store(beta, 200, 20, 2);
    const auto g = variance_curve(s);
    EXPECT_EQ(g.n_batches, 200u);
    for (std::size_t k = 0; k < g.grid.size(); ++k) {
        double e = 0.0;
        for (int c = -4; c <= 4; ++c) e += std::abs(g.grid[k] - 0.25 * c) / 9.0;
        EXPECT_LT(std::abs(g.mean[k] - beta * beta * e), 4.5 * g.stderr[k]) << g.grid[k];
    }
    const auto inc = increment_variance_curve(s);
    EXPECT_DOUBLE_EQ(inc.mean[s.origin()], 0.0);
}

TEST(Estimators, GprimeIdentityOnSyntheticHeights) {
    const auto s = shifted_brownian_store(1.5, 200, 20, 3);
    const auto r = gprime_identity_check(s);
    EXPECT_EQ(r.stencil.grid.size(), s.nx() - 2);
    EXPECT_EQ(r.local_fit.grid.size(), s.nx() - 4);
    EXPECT_LT(r.stencil.max_ratio, 4.5);
    EXPECT_LT(r.local_fit.max_ratio, 4.5);
    // Far from the support of Z the slope is +-beta^2.
    EXPECT_NEAR(r.stencil.rhs.back(), 2.25, 1e-12);
    EXPECT_NEAR(r.stencil.rhs.front(), -2.25, 1e-12);
}

TEST(Estimators, DensityIdentityOnSyntheticHeights) {
    const auto s = shifted_brownian_store(1.0, 200, 20, 4);
    const auto r = density_identity_check(s);
    EXPECT_LT(r.stencil.max_ratio, 4.5);
    EXPECT_LT(r.central.max_ratio, 4.5);
    EXPECT_LT(std::abs(r.mass - 1.0), 4.5 * r.mass_stderr);
    EXPECT_LT(r.max_asymmetry_ratio, 4.5);
    EXPECT_EQ(r.gpp.grid.size(), s.nx() - 4);
}

TEST(Estimators, GridRequirements) {
    const auto x = uniform_grid(-0.5, 0.5, 0.25);
    EnsembleStore s(x, x, 1.0, "f");
    const auto path = flat_path(x);
    for (std::uint32_t b = 0; b < 40; ++b)
        s.add(sample_on(x, {0, 1, 0, 1, 0}, {0, 0, 0, 0, 0}, 1.0, b), path, b);
    EXPECT_NO_THROW(gprime_identity_check(s));
    EXPECT_THROW(density_identity_check(s), DomainError);
}

TEST(Estimators, ArgmaxCdfAndDensity) {
    const auto s = shifted_brownian_store(1.0, 100, 20, 5);
    const std::vector<double> grid{-1.5, -0.5, 0.0, 0.5, 1.5};
    const auto F = argmax_cdf(s, grid);
    EXPECT_DOUBLE_EQ(F.curve.mean.front(), 0.0);
    EXPECT_DOUBLE_EQ(F.curve.mean.back(), 1.0);
    EXPECT_NEAR(F.curve.mean[2], 5.0 / 9.0, F.dkw);
    EXPECT_GE(F.design_effect, 1.0);
    EXPECT_NEAR(F.dkw, std::sqrt(std::log(40.0) / (2.0 * F.n_eff)), 1e-12);
    const auto f = argmax_density(s, grid);
    EXPECT_GT(f.bandwidth, 0.0);
    EXPECT_NEAR(f.curve.mean[2], 1.0 / 2.25, 0.1);
    EXPECT_THROW(argmax_cdf(shifted_brownian_store(1.0, 40, 20, 6), grid), StatisticsError);
}

TEST(Distribution, KsTwoSample) {
    EXPECT_DOUBLE_EQ(ks_two_sample({1, 2, 3}, {4, 5}), 1.0);
    EXPECT_DOUBLE_EQ(ks_two_sample({1, 2}, {1, 2}), 0.0);
    EXPECT_DOUBLE_EQ(ks_two_sample({1, 3}, {2, 4}), 0.5);
    EXPECT_NEAR(ks_threshold(100, 100), 1.3581 * std::sqrt(0.02), 1e-3);
}

TEST(Distribution, KsReflection) {
    const std::vector<double> a{1, 2}, b{-1, 1}, c{-2, 1};
    EXPECT_DOUBLE_EQ(ks_reflection(a), 1.0);
    EXPECT_DOUBLE_EQ(ks_reflection(b), 0.0);
    EXPECT_DOUBLE_EQ(ks_reflection(c), 0.5);
    // 5% point of sup_[0,1] |W|.
    EXPECT_NEAR(ks_reflection_threshold(1.0), 2.2414, 1e-3);
    EXPECT_NEAR(ks_reflection_threshold(100.0), 0.22414, 1e-4);
}

TEST(Distribution, KsReflectionNullLevel) {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> nd;
    const int reps = 400, n = 1000;
    int rejected = 0;
    std::vector<double> z(n);
    for (int r = 0; r < reps; ++r) {
        for (auto& v : z) v = nd(rng);
        if (ks_reflection(z) > ks_reflection_threshold(n)) ++rejected;
    }
    // Discrete walk is slightly conservative; the level should be near 5%.
    EXPECT_GE(rejected, 6);
    EXPECT_LE(rejected, 36);
}

TEST(Distribution, SymmetryOfSyntheticArgmax) {
    const auto s = shifted_brownian_store(1.0, 100, 20, 7);
    const auto r = argmax_symmetry(s);
    EXPECT_LE(r.ks, r.threshold);
    EXPECT_LE(std::abs(r.mean), 3.0 * r.mean_stderr);
    // The atom of Z at 0 puts F(0) at 5/9, which the median test must catch.
    EXPECT_NEAR(r.F0, 5.0 / 9.0, 4.0 * r.F0_stderr);
    EXPECT_FALSE(r.pass);
}

TEST(TwoPoint, ScalingAndPairing) {
    CurveEstimate gpp;
    gpp.grid = uniform_grid(-2.0, 2.0, 0.5);
    for (double x : gpp.grid) {
        gpp.mean.push_back(2.0 * (1.0 + x));
        gpp.stderr.push_back(0.2);
    }
    EXPECT_DOUBLE_EQ(two_point_function(gpp, 0.5, 1.0), 1.5);
    EXPECT_NEAR(two_point_function(gpp, 2.0, 8.0), 2.0 * 1.5 / 8.0, 1e-12);
    EXPECT_NEAR(two_point_stderr(gpp, 2.0, 8.0), 0.2 / 8.0, 1e-12);
    EXPECT_THROW(two_point_function(gpp, 3.0, 1.0), DomainError);
    // Cross-correlation of 1_(0,1] with itself is the triangle on [-1, 1]:
    // int (1 - |z|)(1 + z) dz = 1.
    const auto phi = StepFunction::indicator(0.0, 1.0, 1.0);
    EXPECT_NEAR(two_point_pairing(gpp, phi, phi, 1.0), 1.0, 1e-6);
}

TEST(SupMoment, HalfAndFull) {
    const auto x = uniform_grid(-1.0, 1.0, 0.5);
    EnsembleStore s(x, x, 1.0, "f");
    const auto path = flat_path(x);
    s.add(sample_on(x, {0, -3, 1, 0, 0}, {0, 0, 0, 0, 0}, 1.0, 1), path, 0);
    s.add(sample_on(x, {0, 1, 1, 0, 0}, {0, 0, 0, 0, 0}, 1.0, 2), path, 1);
    const auto r = sup_second_moment(s);
    EXPECT_DOUBLE_EQ(r.half, 9.0);
    EXPECT_DOUBLE_EQ(r.full, 5.0);
    EXPECT_DOUBLE_EQ(r.ratio, 1.8);
}
