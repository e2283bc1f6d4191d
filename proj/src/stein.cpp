#include "kpz/stein.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kpz/errors.hpp"

namespace kpz {

SteinFunction stein_linear() {
    return {"x1", [](double x1, double) { return x1; }, [](double, double) { return 1.0; },
            [](double, double) { return 0.0; }, 1.0, 0.0};
}

SteinFunction stein_constant(double c) {
    return {"const", [c](double, double) { return c; }, [](double, double) { return 0.0; },
            [](double, double) { return 0.0; }, 0.0, 0.0};
}

SteinFunction stein_product() {
    return {"x1*x2", [](double x1, double x2) { return x1 * x2; }, [](double, double x2) { return x2; },
            [](double x1, double) { return x1; }};
}

SteinFunction stein_sine(double a1, double a2, double eps) {
    const double n = std::hypot(a1, a2);
    if (!(n > 0.0)) throw DomainError("stein_sine: zero frequency");
    const double damp = std::exp(-0.5 * eps * n * n);
    return {"sine",
            [=](double x1, double x2) { return damp * std::sin(a1 * x1 + a2 * x2) / n; },
            [=](double x1, double x2) { return damp * a1 / n * std::cos(a1 * x1 + a2 * x2); },
            [=](double x1, double x2) { return damp * a2 / n * std::cos(a1 * x1 + a2 * x2); },
            damp * std::abs(a1) / n, damp * std::abs(a2) / n};
}

SteinFunction stein_x2_tanh() {
    return {"x2*tanh(x1)", [](double x1, double x2) { return x2 * std::tanh(x1); },
            [](double x1, double x2) {
                const double c = std::cosh(x1);
                return x2 / (c * c);
            },
            [](double x1, double) { return std::tanh(x1); }, std::numeric_limits<double>::infinity(), 1.0};
}

SteinFunction stein_abs(double eps) {
    if (!(eps > 0.0)) throw DomainError("stein_abs: eps must be positive");
    const double s = std::sqrt(eps);
    // E|m + s N| = s sqrt(2/pi) exp(-m^2/(2 s^2)) + m erf(m / (s sqrt 2)).
    auto val = [s](double m) {
        return s * std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * m * m / (s * s)) +
               m * std::erf(m / (s * std::numbers::sqrt2));
    };
    auto slope = [s](double m) { return std::erf(m / (s * std::numbers::sqrt2)); };
    const double r = 1.0 / std::numbers::sqrt2;
    return {"abs",
            [=](double x1, double x2) { return val(r * (x1 - x2)); },
            [=](double x1, double x2) { return r * slope(r * (x1 - x2)); },
            [=](double x1, double x2) { return -r * slope(r * (x1 - x2)); },
            r, r, eps};
}

std::vector<SteinFunction> stein_catalog(double eps) {
    return {stein_sine(1.3, -0.7, eps), stein_abs(eps), stein_x2_tanh()};
}

int stein_needed_hermite_order(double sigma, double kink_eps) {
    if (!(kink_eps > 0.0)) return kMinSteinOrder;
    return std::max(kMinSteinOrder, static_cast<int>(std::ceil(2.56 * sigma * sigma / kink_eps)));
}

SteinSolver::SteinSolver(SteinProblem p) : p_(std::move(p)) {
    if (!(p_.sigma > 0.0)) throw DomainError("SteinSolver: sigma must be positive");
    if (p_.n_theta < kMinSteinOrder || p_.n_hermite < kMinSteinOrder) {
        throw AccuracyError("SteinSolver: quadrature orders (" + std::to_string(p_.n_theta) + ", " +
                            std::to_string(p_.n_hermite) + ") are below the minimum; at least " +
                            std::to_string(kMinSteinOrder) + " each is needed, (48, 64) for 1e-6 residuals");
    }
    const int need = stein_needed_hermite_order(p_.sigma, p_.fn.kink_eps);
    if (p_.n_hermite < need) {
        throw AccuracyError("SteinSolver: " + p_.fn.name + " has a kink smoothed at eps = " +
                            std::to_string(p_.fn.kink_eps) + "; Hermite order " + std::to_string(p_.n_hermite) +
                            " cannot resolve it, about " + std::to_string(need) + " is needed");
    }
    theta_ = gauss_legendre(p_.n_theta, 0.0, std::numbers::pi / 2.0);
    hermite_ = gauss_hermite_normal(p_.n_hermite, p_.sigma);
}

template <class G>
double SteinSolver::theta_integral(G&& g) const {
    double s = 0.0;
    for (std::size_t a = 0; a < theta_.nodes.size(); ++a) {
        const double th = theta_.nodes[a];
        const double sn = std::sin(th), cs = std::cos(th);
        double e = 0.0;
        for (std::size_t b = 0; b < hermite_.nodes.size(); ++b) e += hermite_.weights[b] * g(sn, cs, hermite_.nodes[b]);
        s += theta_.weights[a] * e;
    }
    return s;
}

double SteinSolver::f(double x1, double x2) const {
    const auto& l = p_.fn.l;
    return -theta_integral([&](double sn, double cs, double X) { return X * l(sn * x1 + cs * X, x2); }) /
           (p_.sigma * p_.sigma);
}

double SteinSolver::f_alt(double x1, double x2) const {
    const auto& d1 = p_.fn.d1;
    return -theta_integral([&](double sn, double cs, double X) { return cs * d1(sn * x1 + cs * X, x2); });
}

double SteinSolver::d1f(double x1, double x2) const {
    const auto& d1 = p_.fn.d1;
    return -theta_integral([&](double sn, double cs, double X) { return sn * X * d1(sn * x1 + cs * X, x2); }) /
           (p_.sigma * p_.sigma);
}

double SteinSolver::d2f(double x1, double x2) const {
    const auto& d2 = p_.fn.d2;
    return -theta_integral([&](double sn, double cs, double X) { return X * d2(sn * x1 + cs * X, x2); }) /
           (p_.sigma * p_.sigma);
}

double SteinSolver::mean_l(double x2) const {
    double e = 0.0;
    for (std::size_t b = 0; b < hermite_.nodes.size(); ++b) e += hermite_.weights[b] * p_.fn.l(hermite_.nodes[b], x2);
    return e;
}

double SteinSolver::residual(double x1, double x2) const {
    return p_.sigma * p_.sigma * d1f(x1, x2) - x1 * f(x1, x2) - (p_.fn.l(x1, x2) - mean_l(x2));
}

double stein_residual(const SteinProblem& p, std::span<const double> x1s, std::span<const double> x2s) {
    const SteinSolver s(p);
    double m = 0.0;
    for (double a : x1s)
        for (double b : x2s) m = std::max(m, std::abs(s.residual(a, b)));
    return m;
}

SteinBoundsReport derivative_bounds_check(const SteinProblem& p, std::span<const double> x1s,
                                          std::span<const double> x2s) {
    const SteinSolver s(p);
    SteinBoundsReport r;
    for (double a : x1s) {
        for (double b : x2s) {
            r.max_f = std::max(r.max_f, std::abs(s.f(a, b)));
            r.max_d1f = std::max(r.max_d1f, std::abs(s.d1f(a, b)));
            r.max_d2f = std::max(r.max_d2f, std::abs(s.d2f(a, b)));
        }
    }
    // Quadrature noise may put an attained bound a hair above its value.
    constexpr double tol = 1e-9;
    r.bound_f = p.fn.sup_d1;
    r.bound_d1f = std::sqrt(2.0 / std::numbers::pi) / p.sigma * p.fn.sup_d1;
    r.bound_d2f = std::sqrt(std::numbers::pi / 2.0) / p.sigma * p.fn.sup_d2;
    r.pass_f = r.max_f <= r.bound_f + tol;
    r.pass_d1f = r.max_d1f <= r.bound_d1f + tol;
    r.pass_d2f = r.max_d2f <= r.bound_d2f + tol;
    return r;
}

double stein_order_doubling(const SteinProblem& p, std::span<const double> x1s, std::span<const double> x2s) {
    auto q = p;
    q.n_theta *= 2;
    q.n_hermite *= 2;
    const SteinSolver a(p), b(q);
    double m = 0.0;
    for (double x : x1s)
        for (double y : x2s) m = std::max(m, std::abs(a.f(x, y) - b.f(x, y)));
    return m;
}

}  // namespace kpz
