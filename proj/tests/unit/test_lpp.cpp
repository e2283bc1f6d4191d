#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>

#include "kpz/errors.hpp"
#include "kpz/lpp.hpp"
#include "kpz/rng.hpp"

using namespace kpz;
using namespace kpz::lpp;

namespace {

// Maximum over every up-right path, by explicit enumeration.
double brute_force(const ExplicitWeights& w, LatticePoint a, LatticePoint b) {
    std::function<double(std::int64_t, std::int64_t)> rec = [&](std::int64_t i, std::int64_t j) {
        const double here = w.weight(i, j);
        if (i == b.i && j == b.j) return here;
        double best = -std::numeric_limits<double>::infinity();
        if (i < b.i) best = std::max(best, rec(i + 1, j));
        if (j < b.j) best = std::max(best, rec(i, j + 1));
        return here + best;
    };
    return rec(a.i, a.j);
}

std::size_t count_paths(std::int64_t m, std::int64_t n) {
    std::vector<std::size_t> c(static_cast<std::size_t>(n), 1);
    for (std::int64_t i = 1; i < m; ++i)
        for (std::int64_t j = 1; j < n; ++j) c[j] += c[j - 1];
    return c.back();
}

ExplicitWeights random_weights(std::int64_t rows, std::int64_t cols, std::uint64_t seed) {
    IndexedStream s(seed, kStreamGeneric);
    std::vector<double> v(static_cast<std::size_t>(rows * cols));
    for (std::size_t q = 0; q < v.size(); ++q) v[q] = -std::log(s.uniform(q));
    return ExplicitWeights(rows, cols, std::move(v));
}

std::size_t rightmost_argmax(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < v.size(); ++j)
        if (v[j] >= v[best]) best = j;
    return best;
}

}  // namespace

TEST(Lpp, SingleSite) {
    ExplicitWeights w(1, 1, {0.73});
    EXPECT_EQ(passage_time(w, {1, 1}, {1, 1}), 0.73);
}

TEST(Lpp, TwoByTwo) {
    ExplicitWeights w(2, 2, {0.5, 2.0, 1.25, 0.1});
    EXPECT_DOUBLE_EQ(passage_time(w, {1, 1}, {2, 2}), 0.5 + std::max(2.0, 1.25) + 0.1);
}

TEST(Lpp, SixBySixMatchesAllPaths) {
    EXPECT_EQ(count_paths(6, 6), 252u);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto w = random_weights(6, 6, seed);
        EXPECT_DOUBLE_EQ(passage_time(w, {1, 1}, {6, 6}), brute_force(w, {1, 1}, {6, 6}));
    }
}

TEST(Lpp, AllSmallLatticesMatchBruteForce) {
    std::uint64_t seed = 100;
    for (std::int64_t m = 1; m <= 36; ++m) {
        for (std::int64_t n = 1; m * n <= 36; ++n) {
            const auto w = random_weights(m, n, seed++);
            // Every source / sink pair of the lattice.
            for (std::int64_t ai = 1; ai <= m; ++ai)
                for (std::int64_t aj = 1; aj <= n; ++aj)
                    for (std::int64_t bi = ai; bi <= m; ++bi)
                        for (std::int64_t bj = aj; bj <= n; ++bj)
                            ASSERT_DOUBLE_EQ(passage_time(w, {ai, aj}, {bi, bj}),
                                             brute_force(w, {ai, aj}, {bi, bj}))
                                << m << "x" << n;
        }
    }
}

TEST(Lpp, ValueTableMatchesPointToPoint) {
    const auto w = random_weights(9, 9, 5);
    const SourceLine line{7, 1, 6};
    const auto t = lpp_value_table(w, {9, 8}, line);
    ASSERT_EQ(t.values.size(), 6u);
    for (std::int64_t i = 1; i <= 6; ++i)
        EXPECT_DOUBLE_EQ(t.values[static_cast<std::size_t>(i - 1)],
                         brute_force(w, line.at(i), {9, 8}));
}

TEST(Lpp, SinkOutsideFieldThrows) {
    WeightField f(10, 1);
    EXPECT_THROW(passage_time(f, {1, 1}, {11, 3}), DomainError);
    EXPECT_THROW(passage_time(f, {4, 4}, {3, 9}), DomainError);
}

TEST(Lpp, FieldIsPureAndPositive) {
    WeightField a(64, 99), b(64, 99), c(64, 100);
    int differ = 0;
    for (int i = 1; i <= 64; ++i)
        for (int j = 1; j <= 64; ++j) {
            EXPECT_GT(a.weight(i, j), 0.0);
            EXPECT_EQ(a.weight(i, j), b.weight(i, j));
            differ += a.weight(i, j) != c.weight(i, j);
        }
    EXPECT_EQ(differ, 64 * 64);
}

TEST(Lpp, FieldSitesUseDistinctCounters) {
    // Two sites share a Philox block only if they share (i+j, i/4), and then
    // occupy different lanes.
    WeightField f(40, 3);
    std::vector<double> v;
    for (int i = 1; i <= 40; ++i)
        for (int j = 1; j <= 40; ++j) v.push_back(f.weight(i, j));
    std::sort(v.begin(), v.end());
    EXPECT_EQ(std::adjacent_find(v.begin(), v.end()), v.end());
}

TEST(Lpp, BlockMatchesField) {
    WeightField f(50, 11);
    WeightBlock blk(f, {3, 5}, {40, 44}, 20);
    std::vector<double> scratch(64);
    for (std::int64_t d = 20; d <= 84; ++d) {
        const std::int64_t a = std::max<std::int64_t>(3, d - 44), b = std::min<std::int64_t>(40, d - 5);
        if (a > b) continue;
        const double* p = blk.antidiagonal(d, a, b, nullptr);
        const double* q = f.antidiagonal(d, a, b, scratch.data());
        for (std::int64_t i = a; i <= b; ++i) {
            EXPECT_EQ(p[i - a], q[i - a]);
            EXPECT_EQ(p[i - a], f.weight(i, d - i));
        }
    }
    EXPECT_DOUBLE_EQ(passage_time(blk, {10, 12}, {40, 44}), passage_time(f, {10, 12}, {40, 44}));
}

TEST(Lpp, Superadditivity) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        WeightField f(30, seed);
        const LatticePoint a{2, 3}, c{28, 25};
        const double g = passage_time(f, a, c);
        for (std::int64_t i = a.i; i <= c.i; i += 3)
            for (std::int64_t j = a.j; j <= c.j; j += 4) {
                const double lhs = passage_time(f, a, {i, j}) + passage_time(f, {i, j}, c) -
                                   f.weight(i, j);
                EXPECT_GE(g, lhs - 1e-12);
            }
    }
}

TEST(Lpp, RowShiftNeverDecreases) {
    auto w = random_weights(8, 8, 77);
    const auto before = lpp_value_table(w, {8, 8}, {6, 1, 5});
    for (std::int64_t j = 1; j <= 8; ++j) w.set(4, j, w.weight(4, j) + 0.3);
    const auto after = lpp_value_table(w, {8, 8}, {6, 1, 5});
    for (std::size_t q = 0; q < before.values.size(); ++q)
        EXPECT_GE(after.values[q], before.values[q]);
}

TEST(Geometry, UnitSiteSlice) {
    GeometrySpec s;
    s.N = 1;
    s.x_grid = {0.0};
    auto g = std::make_shared<LatticeGeometry>(s);
    EXPECT_EQ(g->nz(), 1u);
    EXPECT_EQ(g->source(0), g->sink(0));
    WeightField f(g->field_extent(), 5);
    const auto slice = landscape_slice(f, g);
    const auto p = g->sink(0);
    // One site: the rectangle holds a single site on each side.
    EXPECT_DOUBLE_EQ(slice.at(0, 0), (f.weight(p.i, p.j) - mean_surrogate(1, 1)) / s.constants.c_h);
}

TEST(Geometry, PointsArePositiveAndMonotone) {
    GeometrySpec s;
    s.N = 200;
    s.x_grid = {-1.0, -0.5, 0.0, 0.5, 1.0};
    s.window = 2.0;
    LatticeGeometry g(s);
    for (std::size_t j = 0; j < g.nz(); ++j) {
        EXPECT_GE(g.source(j).i, 1);
        EXPECT_GE(g.source(j).j, 1);
        if (j) {
            EXPECT_GT(g.source(j).i, g.source(j - 1).i);
            EXPECT_LT(g.source(j).j, g.source(j - 1).j);
        }
    }
    for (std::size_t k = 1; k < g.nx(); ++k) EXPECT_GT(g.sink(k).i, g.sink(k - 1).i);
    const auto zs = g.z_grid();
    EXPECT_NE(std::find(zs.begin(), zs.end(), 0.0), zs.end());
}

TEST(Geometry, RejectsBadGrids) {
    GeometrySpec s;
    s.N = 100;
    s.x_grid = {0.0, -1.0};
    EXPECT_THROW(LatticeGeometry{s}, DomainError);
    s.x_grid = {0.0, 1e-6};
    EXPECT_THROW(LatticeGeometry{s}, DomainError);
    s.x_grid = {0.0};
    s.time = 0.0;
    EXPECT_THROW(LatticeGeometry{s}, DomainError);
}

TEST(Slice, BandAndParabola) {
    GeometrySpec s;
    s.N = 150;
    s.x_grid = {-0.5, 0.0, 0.5};
    s.window = 1.0;
    s.z_stride = 2;
    s.centering = Centering::pair_mean;
    auto g = std::make_shared<LatticeGeometry>(s);
    WeightField f(g->field_extent(), 8);
    const auto slice = landscape_slice(f, g);
    for (std::size_t k = 0; k < g->nx(); ++k) {
        const auto [a, b] = g->band(k);
        for (std::size_t j = 0; j < g->nz(); ++j) {
            if (j < a || j > b) {
                EXPECT_TRUE(std::isinf(slice.at(j, k)));
                continue;
            }
            const auto src = g->source(j), snk = g->sink(k);
            const double raw = passage_time(f, src, snk);
            const double dx = g->x_effective()[k] - g->z_grid()[j];
            const double want = (raw - mean_surrogate(snk.i - src.i + 1, snk.j - src.j + 1)) /
                                    g->height_unit() - dx * dx;
            EXPECT_NEAR(slice.at(j, k), want, 1e-12);
        }
    }
}

TEST(Slice, UntiltedCentering) {
    GeometrySpec s;
    s.N = 150;
    s.x_grid = {0.0, 0.5};
    s.window = 1.0;
    auto g = std::make_shared<LatticeGeometry>(s);
    WeightField f(g->field_extent(), 9);
    const auto slice = landscape_slice(f, g);
    const double mu0 = mean_surrogate(g->steps(), g->steps());
    for (std::size_t k = 0; k < g->nx(); ++k) {
        const auto [a, b] = g->band(k);
        for (std::size_t j = a; j <= b; j += 7)
            EXPECT_NEAR(slice.at(j, k),
                        (passage_time(f, g->source(j), g->sink(k)) - mu0) / g->height_unit(), 1e-12);
    }
}

TEST(Slice, DeterministicAndBlockFree) {
    GeometrySpec s;
    s.N = 120;
    s.x_grid = {-0.5, 0.0, 0.5};
    auto g = std::make_shared<LatticeGeometry>(s);
    WeightField f(g->field_extent(), 21);
    const auto a = landscape_slice(f, g);
    const auto b = landscape_slice(f, g);
    const auto c = landscape_slice_from(f, g);
    for (std::size_t q = 0; q < a.values.size(); ++q) {
        EXPECT_EQ(std::bit_cast<std::uint64_t>(a.values[q]), std::bit_cast<std::uint64_t>(b.values[q]));
        EXPECT_EQ(std::bit_cast<std::uint64_t>(a.values[q]), std::bit_cast<std::uint64_t>(c.values[q]));
    }
}

TEST(Slice, RightmostArgmaxOrderedAcrossSinks) {
    GeometrySpec s;
    s.N = 100;
    s.x_grid = {-1.0, -0.6, -0.3, 0.0, 0.2, 0.5, 0.9};
    s.window = 1.5;
    auto g = std::make_shared<LatticeGeometry>(s);
    for (std::uint64_t r = 0; r < 40; ++r) {
        WeightField f(g->field_extent(), replica_field_seed(5, r));
        const auto slice = landscape_slice(f, g);
        std::size_t prev = 0;
        for (std::size_t k = 0; k < g->nx(); ++k) {
            const std::size_t z = rightmost_argmax(slice.column(k));
            EXPECT_GE(z, prev);
            prev = z;
        }
    }
}

TEST(Calibration, FixedPoint) {
    const LatticeConstants c{3.0, 1.7};
    std::vector<double> z, v;
    for (int q = 1; q <= 10; ++q) {
        z.push_back(0.05 * q);
        v.push_back(2.0 * 0.05 * q);
    }
    const auto r = calibrate_from_moments(c, kTracyWidomGueVariance, z, v, 1000);
    EXPECT_NEAR(r.constants.c_h, 3.0, 1e-12);
    EXPECT_NEAR(r.constants.c_x, 1.7, 1e-12);
    EXPECT_NEAR(r.measured_slope, 2.0, 1e-12);
}

TEST(Calibration, HeightScaleCompensation) {
    // Doubling c_h divides every rescaled value by 2 and the variances by 4;
    // the calibrated c_h comes out the same either way.
    const LatticeConstants c1{2.0, 1.5}, c2{4.0, 1.5};
    std::vector<double> z{0.1, 0.2, 0.3, 0.4}, v1, v2;
    for (double u : z) {
        v1.push_back(2.6 * u + 0.3 * u * u);
        v2.push_back((2.6 * u + 0.3 * u * u) / 4.0);
    }
    const auto r1 = calibrate_from_moments(c1, 1.1, z, v1, 2000);
    const auto r2 = calibrate_from_moments(c2, 1.1 / 4.0, z, v2, 2000);
    EXPECT_NEAR(r1.constants.c_h, r2.constants.c_h, 1e-12);
    EXPECT_NEAR(r1.constants.c_x, r2.constants.c_x, 1e-12);
    EXPECT_NEAR(r2.constants.c_h / c2.c_h, 0.5 * r1.constants.c_h / c1.c_h, 1e-12);
}

TEST(Calibration, SmallEnsembleRejected) {
    std::vector<double> z{0.1, 0.2}, v{0.2, 0.4};
    try {
        (void)calibrate_from_moments({}, 0.8, z, v, 999);
        FAIL();
    } catch (const CalibrationError& e) {
        EXPECT_NE(std::string(e.what()).find("1000"), std::string::npos);
    }
}
