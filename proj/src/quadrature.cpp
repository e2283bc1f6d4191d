#include "kpz/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

#include "kpz/errors.hpp"

namespace kpz {

QuadratureRule gauss_legendre(int n, double a, double b) {
    if (n < 1) throw DomainError("gauss_legendre: order must be positive");
    QuadratureRule r;
    r.nodes.resize(static_cast<std::size_t>(n));
    r.weights.resize(static_cast<std::size_t>(n));
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        if (n == 1) dp = 1.0;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const auto lo = static_cast<std::size_t>(i), hi = static_cast<std::size_t>(n - 1 - i);
        r.nodes[lo] = mid - half * x;
        r.nodes[hi] = mid + half * x;
        r.weights[lo] = r.weights[hi] = half * w;
    }
    return r;
}

QuadratureRule gauss_hermite_normal(int n, double sigma) {
    if (n < 1) throw DomainError("gauss_hermite_normal: order must be positive");
    if (!(sigma > 0.0)) throw DomainError("gauss_hermite_normal: sigma must be positive");
    // Orthonormal physicists' Hermite recurrence, roots largest first.
    std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
    const double pim4 = std::pow(std::numbers::pi, -0.25);
    // Initial roots from the Jacobi matrix (Golub-Welsch), polished by Newton.
    std::vector<double> guess(static_cast<std::size_t>(n));
    {
        Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), off(std::max(n - 1, 0));
        for (int j = 1; j < n; ++j) off(j - 1) = std::sqrt(0.5 * j);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
        for (int j = 0; j < n; ++j) guess[static_cast<std::size_t>(j)] = es.eigenvalues()(n - 1 - j);
    }
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = guess[static_cast<std::size_t>(i)];
        double pp = 0.0, log_scale = 0.0;
        for (int it = 0; it < 200; ++it) {
            // p_j grows like exp(z^2/2) at the outer roots; rescale to stay finite.
            double p1 = pim4, p2 = 0.0;
            log_scale = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
                if (std::abs(p1) > 1e150) {
                    p1 *= 1e-150;
                    p2 *= 1e-150;
                    log_scale += 150.0 * std::numbers::ln10;
                }
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        x[static_cast<std::size_t>(i)] = z;
        x[static_cast<std::size_t>(n - 1 - i)] = -z;
        w[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(n - 1 - i)] =
            2.0 / (pp * pp) * std::exp(-2.0 * log_scale);
    }
    QuadratureRule r;
    r.nodes.resize(static_cast<std::size_t>(n));
    r.weights.resize(static_cast<std::size_t>(n));
    const double scale = std::numbers::sqrt2 * sigma;
    const double norm = 1.0 / std::sqrt(std::numbers::pi);
    // Ascending node order.
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
        const std::size_t src = r.nodes.size() - 1 - k;
        r.nodes[k] = scale * x[src];
        r.weights[k] = norm * w[src];
    }
    return r;
}

}  // namespace kpz
