#pragma once

// Large-beta (Chernoff) and beta = 0 (flat) regimes of the argmax law.

#include <cstdint>
#include <span>
#include <vector>

#include "kpz/estimators.hpp"
#include "kpz/simulate.hpp"

namespace kpz {

/// Empirical law of argmax_u { B(u) - u^2 } on [-window, window].
struct ChernoffReference {
    std::vector<double> sorted;  // non-censored samples, ascending
    double grid_step = 0.0;
    double window = 0.0;
    std::size_t censored = 0;

    double cdf(double x) const;
    std::size_t size() const noexcept { return sorted.size(); }
};

/// Sample i uses its own counter stream, so the result does not depend on
/// the worker count. Throws DomainError if grid_step > 1e-3 window or if
/// more than 0.1% of the samples sit on the window edge.
ChernoffReference chernoff_reference(std::size_t n, double grid_step, double window, std::uint64_t seed,
                                     unsigned workers = 1);

/// KS distance between a sample and the reference law.
double ks_to_reference(std::vector<double> sample, const ChernoffReference& ref);

struct LadderEntry {
    double beta = 0.0;
    std::size_t n = 0;
    double n_eff = 0.0;
    double ks = 0.0;     // KS(beta^{-2/3} Z, F_Ch)
    double noise = 0.0;  // half the 95% two-sample KS critical value at (n_eff, n_ref)
};

struct LargeBetaReport {
    std::vector<LadderEntry> ladder;  // ascending beta
    double combined_noise = 0.0;      // sqrt(noise_first^2 + noise_last^2)
    bool monotone = false;            // KS(last) <= KS(first) + 2 combined_noise
    bool decrease = false;            // KS(first) - KS(last) > 2 combined_noise
};

struct ArgmaxSample {
    double beta = 0.0;
    std::vector<double> Z;
    std::vector<std::uint32_t> batch;  // landscape slice ids
};

/// Design effect of 1{Z <= median} from batch means (>= 1).
double sample_design_effect(std::span<const double> Z, std::span<const std::uint32_t> batch);

/// Single-sink run for one ladder rung: pair-mean centring (exact parabola)
/// and a window of 2 + 1.6 beta^{2/3}, wide enough for beta^{2/3} Ch.
EnsembleSpec ladder_spec(const lpp::GeometrySpec& base, double beta, std::size_t slices, std::size_t paths,
                         std::uint64_t seed);

LargeBetaReport large_beta_check(std::vector<ArgmaxSample> samples, const ChernoffReference& ref);

struct FlatReport {
    IdentityReport flatness;  // g_0(x) against g_0(0), joint errors
    double F0 = 0.0;
    double dkw = 0.0;
    bool flat = false;         // max ratio <= 3
    bool F0_half = false;      // |F0(0) - 1/2| <= dkw
    CurveEstimate F0_curve;
    /// sup |F_{1/4} - F_0| and the sum of the two DKW half-widths (reported).
    double small_beta_gap = -1.0;
    double small_beta_band = 0.0;
    /// (g'_{1/2} - 2 g'_{1/4} + g'_0) / (1/4)^2 / 2 against 2F_0 - 1 (reported).
    std::vector<double> beta_derivative_lhs;
    std::vector<double> beta_derivative_rhs;
};

/// `quarter` and `half` (beta = 1/4, 1/2 stores on the same grid) are optional.
FlatReport flat_regime_check(const EnsembleStore& flat, const EnsembleStore* quarter = nullptr,
                             const EnsembleStore* half = nullptr);

}  // namespace kpz
