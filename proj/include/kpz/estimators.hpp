#pragma once

// Ensemble storage and batch-means estimators for the variance curve g, the
// argmax law F / f, and the identities that tie them together.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kpz/initial_data.hpp"
#include "kpz/process.hpp"

namespace kpz {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Per-replica records in columnar layout. Records of one landscape slice
/// share a batch id; censored records are kept (and counted) but skipped by
/// every estimator.
class EnsembleStore {
public:
    EnsembleStore() = default;
    EnsembleStore(std::vector<double> x, std::vector<double> x_eff, double beta, std::string fingerprint);

    /// `path` must be defined at every nominal x (see refine()).
    void add(const HeightSample& s, const BrownianPath& path, std::uint32_t batch);
    /// Raw record (h, Z, B at every grid point), as read back from a run log.
    void add_record(std::span<const double> h, std::span<const double> Z, std::span<const double> B,
                    std::uint32_t batch, std::uint64_t replica, bool censored);
    /// Appends another store with the same fingerprint.
    void append(const EnsembleStore& other);

    std::span<const double> x() const noexcept { return x_; }
    std::span<const double> x_eff() const noexcept { return x_eff_; }
    std::size_t nx() const noexcept { return x_.size(); }
    double beta() const noexcept { return beta_; }
    const std::string& fingerprint() const noexcept { return fingerprint_; }

    std::size_t records() const noexcept { return batch_.size(); }
    std::size_t censored_count() const noexcept { return censored_count_; }
    /// Indices of usable (non-censored) records, in insertion order.
    const std::vector<std::size_t>& usable() const noexcept { return usable_; }
    std::size_t batches() const;

    double h(std::size_t r, std::size_t k) const noexcept { return h_[r * nx() + k]; }
    double Z(std::size_t r, std::size_t k) const noexcept { return Z_[r * nx() + k]; }
    double B(std::size_t r, std::size_t k) const noexcept { return B_[r * nx() + k]; }
    std::uint32_t batch(std::size_t r) const noexcept { return batch_[r]; }
    std::uint64_t replica(std::size_t r) const noexcept { return replica_[r]; }
    bool censored(std::size_t r) const noexcept { return censored_[r] != 0; }

    /// Index of x = 0 on the grid.
    std::size_t origin() const;
    std::size_t index_of(double xv) const;
    /// Argmax Z(0) of the usable records.
    std::vector<double> argmax_at_origin() const;
    /// Time-0 observable beta sum c_i (B(x_i) - B(x_{i-1})) for record r.
    double x0(std::size_t r, const StepFunction& phi) const;
    /// Time-1 observable sum c_i (h(x_i) - h(x_{i-1})) for record r.
    double x1(std::size_t r, const StepFunction& phi) const;

private:
    std::vector<double> x_, x_eff_;
    double beta_ = 0.0;
    std::string fingerprint_;
    std::vector<double> h_, Z_, B_;
    std::vector<std::uint32_t> batch_;
    std::vector<std::uint64_t> replica_;
    std::vector<unsigned char> censored_;
    std::vector<std::size_t> usable_;
    std::size_t censored_count_ = 0;
};

inline constexpr std::size_t kMinBatches = 30;

/// Mean of per-record values with a batch-means standard error
/// (ratio estimator, batches of unequal size allowed).
struct BatchStat {
    double mean = 0.0;
    double stderr = 0.0;
    std::size_t batches = 0;
    std::size_t n = 0;
};

BatchStat batch_mean(std::span<const double> values, std::span<const std::uint32_t> batch);

struct CurveEstimate {
    std::vector<double> grid;
    std::vector<double> mean;
    std::vector<double> stderr;
    std::size_t n_batches = 0;
};

/// g(x) = Var h(x) per grid point. Requires >= 30 batches.
CurveEstimate variance_curve(const EnsembleStore& store);
/// Var(h(x) - h(0)) per grid point.
CurveEstimate increment_variance_curve(const EnsembleStore& store);

struct EcdfEstimate {
    CurveEstimate curve;
    double dkw = 0.0;        // half-width of the 95% DKW band at the effective size
    double n_eff = 0.0;      // records / design effect
    double design_effect = 1.0;
};

/// F(x) = P[Z(0) <= x] on `grid`, batch-means errors and a DKW band.
EcdfEstimate argmax_cdf(const EnsembleStore& store, std::span<const double> grid);

struct DensityEstimate {
    CurveEstimate curve;
    double bandwidth = 0.0;
};

/// Gaussian-kernel density of Z(0); bandwidth <= 0 selects Silverman's rule.
DensityEstimate argmax_density(const EnsembleStore& store, std::span<const double> grid,
                               double bandwidth = 0.0);

struct IdentityReport {
    std::string name;
    std::vector<double> grid;
    std::vector<double> lhs;
    std::vector<double> rhs;
    std::vector<double> stderr;  // of lhs - rhs
    double max_ratio = 0.0;      // max |lhs - rhs| / stderr
    double worst_x = 0.0;

    void finish();
};

struct GprimeReport {
    /// Central difference of g against beta^2 times the matching difference
    /// of E|x - Z|, i.e. 2F - 1 averaged over the difference stencil.
    IdentityReport stencil;
    /// Central difference of g against beta^2 (2F(x) - 1) at the node.
    IdentityReport pointwise;
    /// Five-point quadratic fit slope of g against its stencil counterpart.
    IdentityReport local_fit;
};

/// g'(x) = beta^2 (2F(x) - 1). Needs a uniform grid of >= 5 points.
GprimeReport gprime_identity_check(const EnsembleStore& store);

struct DensityReport {
    /// Five-point quadratic-fit g''/(2 beta^2) against the density estimate
    /// with the kernel implied by the same stencil.
    IdentityReport stencil;
    /// Central second difference against its own (triangle) kernel.
    IdentityReport central;
    /// Five-point g''/(2 beta^2) against a Gaussian KDE (Silverman).
    IdentityReport gaussian_kde;
    double kde_bandwidth = 0.0;
    double mass = 0.0;  // int g''/(2 beta^2) over the grid
    double mass_stderr = 0.0;
    double max_asymmetry_ratio = 0.0;  // max |g''(x) - g''(-x)| / stderr
    CurveEstimate gpp;                 // five-point g''
};

/// f(x) = g''(x) / (2 beta^2). Needs a uniform grid of >= 9 points.
DensityReport density_identity_check(const EnsembleStore& store);

struct CovarianceReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double lhs_stderr = 0.0;
    double rhs_stderr = 0.0;
    double diff_stderr = 0.0;  // joint
    double ratio = 0.0;        // |lhs - rhs| / diff_stderr
};

/// E[X_0^{phi1} X_t^{phi2}] against beta^2 E[(phi1 * phi2)(t^{2/3} Z)], both
/// from the same records. phi(t^{2/3} .) must have breakpoints on the grid.
CovarianceReport covariance_identity(const EnsembleStore& store, const StepFunction& phi1,
                                     const StepFunction& phi2, double t);

/// C(z, t) = g''(z t^{-2/3}) / (2 t^{2/3}), linear interpolation in g''.
double two_point_function(const CurveEstimate& gpp, double z, double t);
/// Standard error of the same, interpolated.
double two_point_stderr(const CurveEstimate& gpp, double z, double t);

/// int (phi1 * phi2)(z) C(z, t) dz over the support of the cross-correlation.
double two_point_pairing(const CurveEstimate& gpp, const StepFunction& phi1,
                         const StepFunction& phi2, double t);

// ---------------------------------------------------------------------------
// Distribution tests

double ks_two_sample(std::vector<double> a, std::vector<double> b);
/// Asymptotic two-sample KS critical value at level alpha.
double ks_threshold(double n, double m, double alpha = 0.05);
/// sup_x |F_n(x) + F_n(-x) - 1| of one sample against its reflection.
double ks_reflection(std::span<const double> a);
/// Critical value of ks_reflection under symmetry: a / sqrt(n) with
/// P(sup_[0,1] |W| > a) = alpha (the sign walk over the ordered |Z_i|).
double ks_reflection_threshold(double n, double alpha = 0.05);
double dkw_halfwidth(double n, double alpha = 0.05);

/// Ratio of batch-means to iid variance of 1{Z <= median}: the inflation of
/// distribution-level tests caused by slice reuse. Never below 1.
double design_effect(const EnsembleStore& store);

struct SymmetryReport {
    double ks = 0.0;
    double threshold = 0.0;
    double F0 = 0.0;
    double F0_stderr = 0.0;
    double dkw = 0.0;
    double mean = 0.0;
    double mean_stderr = 0.0;
    bool pass = false;
};

/// Z(0) against -Z(0) (KS), F(0) = 1/2 within DKW and E Z = 0 within 3 SE.
SymmetryReport argmax_symmetry(const EnsembleStore& store);

/// E[sup_x h(x)^2] over the first half and over all usable records.
struct SupMomentReport {
    double half = 0.0;
    double full = 0.0;
    double ratio = 0.0;
};
SupMomentReport sup_second_moment(const EnsembleStore& store);

}  // namespace kpz
