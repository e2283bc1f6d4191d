#pragma once

// Two-sided Brownian initial profiles and the test-function algebra used by
// observables, Malliavin fields and cross-correlations.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kpz {

/// Finds `x` in a sorted grid up to a relative tolerance; -1 when absent.
std::ptrdiff_t grid_index(std::span<const double> grid, double x, double tol = 1e-9);

// ---------------------------------------------------------------------------
// Step functions

/// phi(x) = c_i on (x_{i-1}, x_i], zero outside [x_0, x_n].
class StepFunction {
public:
    StepFunction() = default;
    StepFunction(std::vector<double> breakpoints, std::vector<double> values);

    static StepFunction indicator(double a, double b, double c = 1.0);
    /// Sum of c * 1_(a, b]; a block with a > b contributes -c * 1_(b, a].
    struct Block {
        double a, b, c;
    };
    static StepFunction from_blocks(std::span<const Block> blocks);

    std::span<const double> breakpoints() const noexcept { return x_; }
    std::span<const double> values() const noexcept { return c_; }
    std::size_t pieces() const noexcept { return c_.size(); }
    bool is_zero() const noexcept;

    double operator()(double x) const noexcept;
    double integral() const noexcept;
    double l2_norm_sq() const noexcept;
    /// psi(x) = int_0^x phi, piecewise linear with psi(0) = 0.
    double antiderivative(double x) const noexcept;
    /// x -> phi(s x) has breakpoints x_i / s.
    StepFunction dilate(double s) const;
    StepFunction scaled(double k) const;

    std::string to_string() const;

private:
    std::vector<double> x_;
    std::vector<double> c_;
};

double inner_product(const StepFunction& a, const StepFunction& b) noexcept;

/// Continuous piecewise-linear function, zero outside its first/last knot.
struct PiecewiseLinear {
    std::vector<double> knots;
    std::vector<double> values;

    double operator()(double z) const noexcept;
    double integral() const noexcept;
};

/// (phi1 * phi2)(z) = int phi1(u) phi2(u + z) du, evaluated exactly.
double cross_correlation(const StepFunction& phi1, const StepFunction& phi2, double z) noexcept;
PiecewiseLinear cross_correlation_function(const StepFunction& phi1, const StepFunction& phi2);

/// 1_(0,x](u) for x > 0, -1_(x,0](u) for x < 0, zero for x = 0.
double zeta(double x, double u) noexcept;

// ---------------------------------------------------------------------------
// Smooth test functions

/// C^1 function supported on [a, b] with closed or tabulated derivative bound.
struct SmoothTestFunction {
    std::string name;
    double a = 0.0;
    double b = 0.0;
    std::function<double(double)> value;
    std::function<double(double)> derivative;
    double derivative_bound = 0.0;

    double integral() const;
    double l2_norm_sq() const;
};

/// exp(-1 / (1 - s^2)) on s in (-1, 1), rescaled to [a, b] with unit integral.
SmoothTestFunction bump(double a, double b);
/// (1 - cos(2 pi (x - a) / (b - a))) / 2 * height on [a, b].
SmoothTestFunction cosine_taper(double a, double b, double height = 1.0);

/// Either kind of test function, as parsed from config text.
struct TestFunction {
    std::string label;
    bool smooth = false;
    StepFunction step;
    SmoothTestFunction fn;
};

/// Syntax:
///   indicator(a, b)             1_(a,b]
///   step(x0; x1:c1, x2:c2, ...) c_i on (x_{i-1}, x_i]
///   bump(a, b)                  unit-mass bump
///   taper(a, b[, h])            raised cosine
/// Throws ConfigError on malformed text.
TestFunction parse_test_function(std::string_view text);

// ---------------------------------------------------------------------------
// Brownian paths

/// Values of a standard two-sided Brownian motion on a grid, B(0) = 0.
struct BrownianPath {
    std::vector<double> z_grid;
    std::vector<double> values;
    std::uint64_t seed = 0;

    /// Value at a grid point; DomainError when z is not on the grid.
    double at(double z) const;
};

/// Gaussian increments with variance equal to the grid gaps, anchored at 0.
/// Increment j (between z_j and z_{j+1}) uses stream draw j, so the path is a
/// pure function of (grid, seed).
BrownianPath sample_path(std::span<const double> z_grid, std::uint64_t seed);

/// Inserts the points not already on the grid by Brownian bridge (or free
/// Brownian extension beyond the ends). Existing values are untouched, so
/// refinement never changes the coarse path.
BrownianPath refine(const BrownianPath& path, std::span<const double> points);

/// beta * sum_i c_i (B(x_i) - B(x_{i-1})). Breakpoints must lie on the grid.
double wiener_integral(const StepFunction& phi, const BrownianPath& path, double beta);
/// -beta * int phi'(z) B(z) dz by the trapezoid rule on the path grid.
double wiener_integral(const SmoothTestFunction& phi, const BrownianPath& path, double beta);

/// B(z_j) + eps * psi(z_j) with psi the antiderivative of phi.
BrownianPath perturb(const BrownianPath& path, const StepFunction& phi, double eps);

}  // namespace kpz
