#pragma once

// Exact empirical Wasserstein-1 distance in the plane and the
// asymptotic-independence bound for (X_0^{phi1}, X_t^{phi2}).

#include <cstdint>
#include <span>
#include <vector>

#include "kpz/estimators.hpp"
#include "kpz/initial_data.hpp"

namespace kpz {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline constexpr std::size_t kMaxCloud = 2048;

/// Joint cloud (X_0, X_t) and a product cloud pairing the X_0 coordinates
/// with a permutation of the X_t coordinates.
struct PointCloudPair {
    std::vector<Point2> joint;
    std::vector<Point2> product;
};

/// Uniformly random permutation of [0, n), a pure function of the seed.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

PointCloudPair make_cloud_pair(std::span<const double> x0, std::span<const double> xt, std::uint64_t seed);

/// Minimum-cost perfect matching of a square cost matrix (row major),
/// shortest augmenting paths with potentials. Returns row -> column.
std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t n);

/// W1 between the uniform empirical measures of two n-point clouds,
/// Euclidean ground metric. 2 <= n <= kMaxCloud.
double w1_exact(std::span<const Point2> a, std::span<const Point2> b);
double w1_exact(const PointCloudPair& pair);

struct BoundEstimate {
    double value = 0.0;
    double stderr = 0.0;
    double correlation_mean = 0.0;  // E[(phi1 * phi2)(t^{2/3} Z)]
};

/// (beta / |phi1|_2) sqrt(pi/2) |E[(phi1 * phi2)(t^{2/3} Z)]| from argmax
/// samples Z; `batch` (optional) groups correlated samples.
BoundEstimate asyind_bound(double beta, const StepFunction& phi1, const StepFunction& phi2, double t,
                           std::span<const double> Z, std::span<const std::uint32_t> batch = {});

struct GapReport {
    std::size_t n = 0;
    double t = 1.0;
    std::vector<double> joint_per_resample;  // W1(joint, product_k)
    std::vector<double> floor_per_resample;  // W1(product_k, product'_k)
    double w1_joint = 0.0;
    double w1_floor = 0.0;
    double spread = 0.0;  // sample sd of joint_per_resample - floor_per_resample
    double gap = 0.0;     // w1_joint - w1_floor
    BoundEstimate bound;
    bool pass = false;  // gap <= bound + 3 spread
};

/// One record per batch (the first n batches, a seeded record within each),
/// coordinates t^{1/3} X_0^{phi1(t^{2/3} .)} and t^{1/3} X_1^{phi2(t^{2/3} .)}.
std::vector<Point2> joint_sample(const EnsembleStore& store, const StepFunction& phi1,
                                 const StepFunction& phi2, double t, std::size_t n, std::uint64_t seed);

GapReport independence_gap(const EnsembleStore& store, const StepFunction& phi1, const StepFunction& phi2,
                           double t, std::size_t n, std::size_t resamples, std::uint64_t seed,
                           unsigned workers = 1);

/// Gap report for an explicit joint cloud; the bound is taken as given.
GapReport independence_gap(std::span<const Point2> joint, const BoundEstimate& bound, std::size_t resamples,
                           std::uint64_t seed, unsigned workers = 1);

}  // namespace kpz
