#pragma once

// Variational composition h(x) = max_z { beta B(z) + L(z; x) } on one
// landscape slice, time-t observables by 1:2:3 scaling, and the explicit
// Malliavin derivative of step observables.

#include <cstdint>
#include <span>
#include <vector>

#include "kpz/initial_data.hpp"
#include "kpz/lpp.hpp"

namespace kpz {

struct HeightSample {
    std::vector<double> x;      // nominal sink coordinates
    std::vector<double> x_eff;  // lattice-snapped coordinates
    std::vector<double> h;
    std::vector<double> Z;
    std::vector<std::size_t> z_index;
    std::vector<unsigned char> censored;
    std::uint64_t replica_id = 0;
    double beta = 0.0;

    std::size_t size() const noexcept { return x.size(); }
    bool any_censored() const noexcept;
    /// Index of a nominal grid point; DomainError if off-grid.
    std::size_t index_of(double xv) const;
};

struct RightmostMax {
    double value;
    std::size_t index;
};

/// Maximum of v over [first, last], ties resolved to the largest index.
RightmostMax rightmost_max(std::span<const double> v, std::size_t first, std::size_t last);

/// The path must be defined at every landscape z (it may carry extra points).
/// censored[k] is set when the argmax sits at either end of sink k's band.
HeightSample compose_height(const lpp::LandscapeSlice& slice, const BrownianPath& path, double beta);

/// x + t^{2/3} Z.
double time_t_argmax(double Z, double x, double t);

/// sum_i c_i (h(x_i) - h(x_{i-1})), breakpoints on the nominal x grid.
double observable_step(const HeightSample& s, const StepFunction& phi);
/// Time-t value from a time-1 sample: t^{1/3} X_1 of x -> phi(t^{2/3} x).
double observable_step(const HeightSample& s, const StepFunction& phi, double t);
/// -int phi'(x) h(x) dx, trapezoid on the snapped grid.
double observable_smooth(const HeightSample& s, const SmoothTestFunction& phi);

struct MalliavinField {
    StepFunction field;  // u -> D X_t^phi (u)
    StepFunction source;
    double beta = 0.0;
    double t = 1.0;
};

/// beta sum_j c_j 1_(Z_t(x_{j-1}), Z_t(x_j)], with Z_t(x) = t^{2/3} Z_1(x t^{-2/3}).
/// Throws SampleInvalidError if a needed argmax is censored.
MalliavinField malliavin_field(const HeightSample& s, const StepFunction& phi, double t = 1.0);

/// beta sum_j c_j [psi(Z_t(x_j)) - psi(Z_t(x_{j-1}))], psi = int_0 phi_dir.
double malliavin_pairing(const HeightSample& s, const StepFunction& phi_obs,
                         const StepFunction& phi_dir, double t = 1.0);

/// beta^2 sum_j c_j^2 (Z_t(x_j) - Z_t(x_{j-1})).
double malliavin_norm_sq(const HeightSample& s, const StepFunction& phi, double t = 1.0);

struct DirectionalCheck {
    double fd = 0.0;
    double exact = 0.0;
    /// Argmaxes at phi_obs's breakpoints agree for eps, eps/2 and 0.
    bool stable = true;
};

/// Finite difference of X_1^{phi_obs} along psi = int_0 phi_dir against
/// <D X_1^{phi_obs}, phi_dir>.
DirectionalCheck directional_derivative_check(const lpp::LandscapeSlice& slice,
                                              const BrownianPath& path,
                                              const StepFunction& phi_dir,
                                              const StepFunction& phi_obs, double beta, double eps);

/// Distinct argmax values per unit length of the x grid, non-censored sinks.
double distinct_argmax_density(const HeightSample& s);

}  // namespace kpz
