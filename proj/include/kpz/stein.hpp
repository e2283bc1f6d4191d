#pragma once

// Solution of the two-dimensional Stein equation
//   sigma^2 d1 f(x1, x2) - x1 f(x1, x2) = l(x1, x2) - E[l(X1, x2)],  X1 ~ N(0, sigma^2),
// by Gauss-Legendre in theta (t = sin^2 theta) and Gauss-Hermite in X1.

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "kpz/quadrature.hpp"

namespace kpz {

struct SteinFunction {
    std::string name;
    std::function<double(double, double)> l;
    std::function<double(double, double)> d1;
    std::function<double(double, double)> d2;
    double sup_d1 = std::numeric_limits<double>::infinity();
    double sup_d2 = std::numeric_limits<double>::infinity();
    /// Variance of the mollifier smoothing a kink of l; 0 if l is analytic.
    double kink_eps = 0.0;
};

SteinFunction stein_linear();
SteinFunction stein_constant(double c);
SteinFunction stein_product();
/// sin(a . x) / |a| under Gaussian mollification of variance eps per axis.
SteinFunction stein_sine(double a1, double a2, double eps = 1e-2);
/// x2 tanh(x1).
SteinFunction stein_x2_tanh();
/// |u|, u = (x1 - x2) / sqrt(2), under Gaussian mollification of variance eps.
SteinFunction stein_abs(double eps = 1e-2);
/// Bounded-derivative catalog used by the residual and bound checks.
std::vector<SteinFunction> stein_catalog(double eps = 1e-2);

inline constexpr int kMinSteinOrder = 8;

/// Hermite order for ~1e-6 accuracy on a kink mollified at variance eps,
/// X1 ~ N(0, sigma^2): the node spacing near 0 must resolve sqrt(eps).
int stein_needed_hermite_order(double sigma, double kink_eps);

struct SteinProblem {
    double sigma = 1.0;
    SteinFunction fn;
    int n_theta = 48;
    int n_hermite = 64;
};

class SteinSolver {
public:
    explicit SteinSolver(SteinProblem p);

    const SteinProblem& problem() const noexcept { return p_; }
    /// -(1/sigma^2) int_0^{pi/2} E[X1 l(sin th x1 + cos th X1, x2)] dth
    double f(double x1, double x2) const;
    /// -int_0^{pi/2} cos th E[d1 l(sin th x1 + cos th X1, x2)] dth
    double f_alt(double x1, double x2) const;
    double d1f(double x1, double x2) const;
    double d2f(double x1, double x2) const;
    double mean_l(double x2) const;
    /// sigma^2 d1f - x1 f - (l - E l).
    double residual(double x1, double x2) const;

private:
    template <class G>
    double theta_integral(G&& g) const;

    SteinProblem p_;
    QuadratureRule theta_, hermite_;
};

double stein_residual(const SteinProblem& p, std::span<const double> x1s, std::span<const double> x2s);

struct SteinBoundsReport {
    double max_f = 0.0, max_d1f = 0.0, max_d2f = 0.0;
    double bound_f = 0.0, bound_d1f = 0.0, bound_d2f = 0.0;
    bool pass_f = false, pass_d1f = false, pass_d2f = false;
    bool pass() const noexcept { return pass_f && pass_d1f && pass_d2f; }
};

/// |f| <= |d1 l|, |d1 f| <= sqrt(2/pi)/sigma |d1 l|, |d2 f| <= sqrt(pi/2)/sigma |d2 l|
/// over the grid (sup norms as declared by the catalog).
SteinBoundsReport derivative_bounds_check(const SteinProblem& p, std::span<const double> x1s,
                                          std::span<const double> x2s);

/// max |f(n) - f(2n)| over the grid.
double stein_order_doubling(const SteinProblem& p, std::span<const double> x1s, std::span<const double> x2s);

}  // namespace kpz
