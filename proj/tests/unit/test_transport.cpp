#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "kpz/errors.hpp"
#include "kpz/transport.hpp"

using namespace kpz;

namespace {

std::vector<Point2> random_cloud(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<Point2> c(n);
    for (auto& p : c) p = {nd(rng), nd(rng)};
    return c;
}

double brute_force_w1(const std::vector<Point2>& a, const std::vector<Point2>& b) {
    std::vector<std::size_t> p(a.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = i;
    double best = INFINITY;
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) s += std::hypot(a[i].x - b[p[i]].x, a[i].y - b[p[i]].y);
        best = std::min(best, s / static_cast<double>(a.size()));
    } while (std::next_permutation(p.begin(), p.end()));
    return best;
}

}  // namespace

TEST(W1, IdenticalAndTranslated) {
    const auto a = random_cloud(40, 1);
    EXPECT_NEAR(w1_exact(a, a), 0.0, 1e-12);
    auto b = a;
    for (auto& p : b) p.x += 1.0;
    EXPECT_NEAR(w1_exact(a, b), 1.0, 1e-12);
}

TEST(W1, FivePointBruteForce) {
    for (std::uint64_t s = 0; s < 25; ++s) {
        const auto a = random_cloud(5, 100 + s), b = random_cloud(5, 200 + s);
        EXPECT_NEAR(w1_exact(a, b), brute_force_w1(a, b), 1e-12) << s;
    }
}

TEST(W1, SymmetryAndTriangleInequality) {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto a = random_cloud(30, 300 + s), b = random_cloud(30, 400 + s), c = random_cloud(30, 500 + s);
        const double ab = w1_exact(a, b), ba = w1_exact(b, a), bc = w1_exact(b, c), ac = w1_exact(a, c);
        EXPECT_NEAR(ab, ba, 1e-10);
        EXPECT_LE(ac, ab + bc + 1e-10);
    }
}

TEST(W1, ScalingOfTranslatedCopies) {
    const auto a = random_cloud(25, 7);
    auto shifted = [&](double s) {
        auto b = a;
        for (auto& p : b) {
            p.x += 0.3 * s;
            p.y -= 0.4 * s;
        }
        return b;
    };
    for (double s : {0.5, 1.0, 2.0, 4.0}) EXPECT_NEAR(w1_exact(a, shifted(s)), 0.5 * s, 1e-12);
}

TEST(W1, Errors) {
    const auto a = random_cloud(1, 1);
    EXPECT_THROW(w1_exact(a, a), DomainError);
    const auto big = random_cloud(kMaxCloud + 1, 2);
    EXPECT_THROW(w1_exact(big, big), DomainError);
    EXPECT_THROW(w1_exact(random_cloud(3, 1), random_cloud(4, 1)), DomainError);
}

TEST(W1, AssignmentOnKnownMatrix) {
    const std::vector<double> c{4, 1, 3, 2, 0, 5, 3, 2, 2};
    const auto m = solve_assignment(c, 3);
    EXPECT_EQ(m, (std::vector<std::size_t>{1, 0, 2}));
}

TEST(Cloud, PermutationKeepsMarginals) {
    std::vector<double> x0{1, 2, 3, 4, 5, 6}, xt{6, 5, 4, 3, 2, 1};
    const auto c = make_cloud_pair(x0, xt, 9);
    std::vector<double> a, b;
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_EQ(c.product[i].x, c.joint[i].x);
        a.push_back(c.joint[i].y);
        b.push_back(c.product[i].y);
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
    EXPECT_EQ(seeded_permutation(100, 5), seeded_permutation(100, 5));
    EXPECT_NE(seeded_permutation(100, 5), seeded_permutation(100, 6));
}

TEST(Bound, ZeroCorrelationAndScaling) {
    const auto phi = StepFunction::indicator(0.0, 1.0, 1.0);
    const auto far = StepFunction::indicator(10.0, 11.0, 1.0);
    const std::vector<double> Z{-0.3, 0.1, 0.2, 0.5, -0.8};
    EXPECT_EQ(asyind_bound(1.0, phi, far, 1.0, Z).value, 0.0);
    // t -> 8t multiplies the argument by 4.
    std::vector<double> Z4;
    for (double z : Z) Z4.push_back(4.0 * z);
    EXPECT_NEAR(asyind_bound(1.0, phi, phi, 8.0, Z).value, asyind_bound(1.0, phi, phi, 1.0, Z4).value, 1e-14);
    double tri = 0.0;
    for (double z : Z) tri += std::max(0.0, 1.0 - std::abs(z)) / 5.0;
    const auto b = asyind_bound(std::sqrt(2.0), phi, phi, 1.0, Z);
    EXPECT_NEAR(b.value, std::sqrt(2.0) * std::sqrt(std::numbers::pi / 2.0) * tri, 1e-14);
    EXPECT_THROW(asyind_bound(1.0, StepFunction({0.0, 1.0}, {0.0}), phi, 1.0, Z), DomainError);
}

TEST(Gap, IndependentCloudSitsAtFloor) {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> nd;
    std::vector<Point2> joint(200);
    for (auto& p : joint) p = {nd(rng), nd(rng)};
    const auto g = independence_gap(joint, BoundEstimate{}, 6, 5);
    EXPECT_LE(std::abs(g.gap), 3.0 * g.spread + 1e-12);
    EXPECT_TRUE(g.pass);
    EXPECT_EQ(g.joint_per_resample.size(), 6u);
}

TEST(Gap, PerfectlyDependentCloudShowsGap) {
    std::mt19937_64 rng(32);
    std::normal_distribution<double> nd;
    std::vector<Point2> joint(200);
    for (auto& p : joint) {
        const double v = nd(rng);
        p = {v, v};
    }
    const auto g = independence_gap(joint, BoundEstimate{0.3, 0.0, 0.2}, 6, 5);
    EXPECT_GT(g.gap, 0.0);
    EXPECT_TRUE(std::isfinite(g.bound.value));
}

TEST(Gap, WorkerCountDoesNotChangeResult) {
    const auto joint = random_cloud(100, 41);
    const auto a = independence_gap(joint, BoundEstimate{}, 5, 3, 1);
    const auto b = independence_gap(joint, BoundEstimate{}, 5, 3, 4);
    EXPECT_EQ(a.joint_per_resample, b.joint_per_resample);
    EXPECT_EQ(a.floor_per_resample, b.floor_per_resample);
}
