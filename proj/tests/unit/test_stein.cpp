#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kpz/errors.hpp"
#include "kpz/quadrature.hpp"
#include "kpz/stein.hpp"

using namespace kpz;

namespace {

std::vector<double> grid21() {
    std::vector<double> g;
    for (int i = 0; i <= 20; ++i) g.push_back(-3.0 + 0.3 * i);
    return g;
}

}  // namespace

TEST(Quadrature, HermiteHighOrderMoments) {
    for (int n : {150, 200, 256, 400, 512}) {
        const auto q = gauss_hermite_normal(n, 1.0);
        double m0 = 0.0, m2 = 0.0, m4 = 0.0, m6 = 0.0;
        for (std::size_t i = 0; i < q.nodes.size(); ++i) {
            const double x2 = q.nodes[i] * q.nodes[i];
            m0 += q.weights[i];
            m2 += q.weights[i] * x2;
            m4 += q.weights[i] * x2 * x2;
            m6 += q.weights[i] * x2 * x2 * x2;
            if (i > 0) {
                EXPECT_LT(q.nodes[i - 1], q.nodes[i]) << n;
            }
        }
        EXPECT_NEAR(m0, 1.0, 1e-13) << n;
        EXPECT_NEAR(m2, 1.0, 1e-13) << n;
        EXPECT_NEAR(m4, 3.0, 1e-12) << n;
        EXPECT_NEAR(m6, 15.0, 1e-11) << n;
    }
}

TEST(Stein, ClosedForms) {
    const auto g = grid21();
    const SteinSolver lin({1.0, stein_linear()}), cst({1.7, stein_constant(3.0)}), prod({1.3, stein_product()});
    for (double a : g) {
        for (double b : g) {
            EXPECT_NEAR(lin.f(a, b), -1.0, 1e-12);
            EXPECT_NEAR(cst.f(a, b), 0.0, 1e-12);
            EXPECT_NEAR(prod.f(a, b), -b, 1e-8);
        }
    }
    EXPECT_LE(stein_residual({1.0, stein_linear()}, g, g), 1e-10);
    EXPECT_LE(stein_residual({1.3, stein_product()}, g, g), 1e-10);
}

TEST(Stein, CatalogResidualAtDefaultOrders) {
    const auto g = grid21();
    for (const auto& fn : {stein_sine(1.3, -0.7), stein_x2_tanh()}) {
        EXPECT_LE(stein_residual({1.0, fn, 48, 64}, g, g), 1e-6) << fn.name;
    }
}

TEST(Stein, MollifiedKinkNeedsHigherHermiteOrder) {
    const auto g = grid21();
    const auto fn = stein_abs(1e-2);
    EXPECT_THROW(SteinSolver({1.0, fn, 48, 64}), AccuracyError);
    const int need = stein_needed_hermite_order(1.0, 1e-2);
    EXPECT_EQ(need, 256);
    EXPECT_LE(stein_residual({1.0, fn, 48, need}, g, g), 1e-6);
    // The smoother kink is already resolved at 64.
    EXPECT_LE(stein_residual({1.0, stein_abs(0.04), 48, 64}, g, g), 1e-6);
}

TEST(Stein, OrderErrors) {
    EXPECT_THROW(SteinSolver({1.0, stein_linear(), 4, 64}), AccuracyError);
    EXPECT_THROW(SteinSolver({1.0, stein_linear(), 48, 7}), AccuracyError);
    EXPECT_THROW(SteinSolver({0.0, stein_linear()}), DomainError);
}

TEST(Stein, TwoRepresentationsAgree) {
    const auto g = grid21();
    for (const auto& fn : {stein_sine(1.3, -0.7), stein_x2_tanh(), stein_abs(1e-2)}) {
        const SteinSolver s({1.0, fn, 48, std::max(64, stein_needed_hermite_order(1.0, fn.kink_eps))});
        const double tol = fn.kink_eps > 0.0 ? 1e-6 : 1e-8;
        for (double a : g)
            for (double b : g) EXPECT_NEAR(s.f(a, b), s.f_alt(a, b), tol) << fn.name << " " << a << " " << b;
    }
}

TEST(Stein, DerivativeBounds) {
    const auto g = grid21();
    const auto lin = derivative_bounds_check({1.0, stein_linear()}, g, g);
    EXPECT_NEAR(lin.max_f, 1.0, 1e-12);
    EXPECT_TRUE(lin.pass());
    for (const auto& fn : {stein_sine(1.3, -0.7), stein_x2_tanh(), stein_abs(0.04)}) {
        for (double sigma : {0.5, 1.0, 2.0}) {
            const int nh = std::max(64, stein_needed_hermite_order(sigma, fn.kink_eps));
            const auto r = derivative_bounds_check({sigma, fn, 48, nh}, g, g);
            EXPECT_TRUE(r.pass()) << fn.name << " sigma " << sigma << ": " << r.max_f << "/" << r.bound_f << " "
                                  << r.max_d1f << "/" << r.bound_d1f << " " << r.max_d2f << "/" << r.bound_d2f;
        }
    }
    // Doubling sigma halves the d2 bound.
    const auto a = derivative_bounds_check({1.0, stein_x2_tanh()}, g, g);
    const auto b = derivative_bounds_check({2.0, stein_x2_tanh()}, g, g);
    EXPECT_NEAR(b.bound_d2f, 0.5 * a.bound_d2f, 1e-15);
    EXPECT_NEAR(a.bound_d2f, std::sqrt(std::numbers::pi / 2.0), 1e-15);
}

TEST(Stein, OrderDoublingConvergence) {
    const auto g = grid21();
    for (const auto& fn : {stein_sine(1.3, -0.7), stein_x2_tanh()})
        EXPECT_LT(stein_order_doubling({1.0, fn, 48, 64}, g, g), 1e-8) << fn.name;
}

TEST(Stein, BoundedOnExpandingBoxes) {
    const SteinSolver s({1.0, stein_sine(1.3, -0.7)});
    double prev = 0.0;
    for (double L : {3.0, 6.0, 12.0, 24.0}) {
        double m = 0.0;
        for (int i = 0; i <= 40; ++i)
            for (int j = 0; j <= 10; ++j) m = std::max(m, std::abs(s.f(-L + i * L / 20.0, -L + j * L / 5.0)));
        if (prev > 0.0) {
            EXPECT_LT(m, 1.5 * prev) << L;
        }
        prev = m;
    }
    EXPECT_LE(prev, stein_sine(1.3, -0.7).sup_d1 + 1e-9);
}

TEST(Stein, CharacterizingIdentityByMonteCarlo) {
    std::mt19937_64 rng(5);
    const double sigma = 1.4;
    std::normal_distribution<double> n1(0.0, sigma), n2(0.3, 2.0);
    const SteinSolver s({sigma, stein_sine(1.3, -0.7)});
    const int n = 20000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x1 = n1(rng), x2 = n2(rng);
        const double v = sigma * sigma * s.d1f(x1, x2) - x1 * s.f(x1, x2);
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / n, se = std::sqrt((sum2 / n - mean * mean) / n);
    EXPECT_LT(std::abs(mean), 3.0 * se);
}
