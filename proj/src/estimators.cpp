#include "kpz/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kpz/errors.hpp"

namespace kpz {

// ---------------------------------------------------------------------------
// EnsembleStore

EnsembleStore::EnsembleStore(std::vector<double> x, std::vector<double> x_eff, double beta,
                             std::string fingerprint)
    : x_(std::move(x)), x_eff_(std::move(x_eff)), beta_(beta), fingerprint_(std::move(fingerprint)) {
    if (x_.size() != x_eff_.size()) throw DomainError("EnsembleStore: grid size mismatch");
}

void EnsembleStore::add(const HeightSample& s, const BrownianPath& path, std::uint32_t batch) {
    if (s.size() != nx()) throw DomainError("EnsembleStore: sample grid does not match store");
    const bool cens = s.any_censored();
    const std::size_t r = records();
    for (std::size_t k = 0; k < nx(); ++k) {
        h_.push_back(s.h[k]);
        Z_.push_back(s.Z[k]);
        B_.push_back(path.at(x_[k]));
    }
    batch_.push_back(batch);
    replica_.push_back(s.replica_id);
    censored_.push_back(cens ? 1 : 0);
    if (cens) {
        ++censored_count_;
    } else {
        usable_.push_back(r);
    }
}

void EnsembleStore::add_record(std::span<const double> h, std::span<const double> Z, std::span<const double> B,
                               std::uint32_t batch, std::uint64_t replica, bool censored) {
    if (h.size() != nx() || Z.size() != nx() || B.size() != nx())
        throw DomainError("EnsembleStore: record grid does not match store");
    const std::size_t r = records();
    h_.insert(h_.end(), h.begin(), h.end());
    Z_.insert(Z_.end(), Z.begin(), Z.end());
    B_.insert(B_.end(), B.begin(), B.end());
    batch_.push_back(batch);
    replica_.push_back(replica);
    censored_.push_back(censored ? 1 : 0);
    if (censored) {
        ++censored_count_;
    } else {
        usable_.push_back(r);
    }
}

void EnsembleStore::append(const EnsembleStore& o) {
    if (o.fingerprint_ != fingerprint_) {
        throw DomainError("EnsembleStore: cannot merge stores with different configurations");
    }
    const std::size_t base = records();
    h_.insert(h_.end(), o.h_.begin(), o.h_.end());
    Z_.insert(Z_.end(), o.Z_.begin(), o.Z_.end());
    B_.insert(B_.end(), o.B_.begin(), o.B_.end());
    batch_.insert(batch_.end(), o.batch_.begin(), o.batch_.end());
    replica_.insert(replica_.end(), o.replica_.begin(), o.replica_.end());
    censored_.insert(censored_.end(), o.censored_.begin(), o.censored_.end());
    for (std::size_t r : o.usable_) usable_.push_back(base + r);
    censored_count_ += o.censored_count_;
}

std::size_t EnsembleStore::batches() const {
    std::vector<std::uint32_t> ids;
    for (std::size_t r : usable_) ids.push_back(batch_[r]);
    std::sort(ids.begin(), ids.end());
    return static_cast<std::size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
}

std::size_t EnsembleStore::index_of(double xv) const {
    const auto k = grid_index(x_, xv);
    if (k < 0) throw DomainError("EnsembleStore: point " + std::to_string(xv) + " is not on the x grid");
    return static_cast<std::size_t>(k);
}

std::size_t EnsembleStore::origin() const { return index_of(0.0); }

std::vector<double> EnsembleStore::argmax_at_origin() const {
    const std::size_t k0 = origin();
    std::vector<double> z;
    z.reserve(usable_.size());
    for (std::size_t r : usable_) z.push_back(Z(r, k0));
    return z;
}

double EnsembleStore::x0(std::size_t r, const StepFunction& phi) const {
    const auto x = phi.breakpoints();
    const auto c = phi.values();
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        if (c[i] != 0.0) s += c[i] * (B(r, index_of(x[i + 1])) - B(r, index_of(x[i])));
    return beta_ * s;
}

double EnsembleStore::x1(std::size_t r, const StepFunction& phi) const {
    const auto x = phi.breakpoints();
    const auto c = phi.values();
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        if (c[i] != 0.0) s += c[i] * (h(r, index_of(x[i + 1])) - h(r, index_of(x[i])));
    return s;
}

// ---------------------------------------------------------------------------
// Batch means

BatchStat batch_mean(std::span<const double> values, std::span<const std::uint32_t> batch) {
    if (values.size() != batch.size()) throw DomainError("batch_mean: size mismatch");
    BatchStat st;
    st.n = values.size();
    if (values.empty()) throw StatisticsError("batch_mean: no usable records");
    std::vector<std::uint32_t> ids(batch.begin(), batch.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::vector<CompensatedSum> tot(ids.size());
    std::vector<double> cnt(ids.size(), 0.0);
    CompensatedSum all;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto b = static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), batch[i]) - ids.begin());
        tot[b].add(values[i]);
        cnt[b] += 1.0;
        all.add(values[i]);
    }
    const double n = static_cast<double>(values.size());
    st.mean = all.value() / n;
    st.batches = ids.size();
    if (ids.size() >= 2) {
        CompensatedSum ss;
        for (std::size_t b = 0; b < ids.size(); ++b) {
            const double d = tot[b].value() - st.mean * cnt[b];
            ss.add(d * d);
        }
        const double nb = static_cast<double>(ids.size());
        st.stderr = std::sqrt(nb / (nb - 1.0) * ss.value()) / n;
    }
    return st;
}

namespace {

/// Usable records as flat arrays.
struct Usable {
    std::vector<std::size_t> rec;
    std::vector<std::uint32_t> batch;
};

Usable usable_records(const EnsembleStore& s, std::size_t min_batches = kMinBatches) {
    Usable u;
    u.rec = s.usable();
    for (std::size_t r : u.rec) u.batch.push_back(s.batch(r));
    if (u.rec.empty()) throw StatisticsError("estimator: store holds no usable (non-censored) records");
    const std::size_t nb = s.batches();
    if (nb < min_batches) {
        throw StatisticsError("estimator: " + std::to_string(nb) + " batches available, at least " +
                              std::to_string(min_batches) + " required");
    }
    return u;
}

/// Per-record variance contributions (h - mean)^2 n/(n-1) for every x.
std::vector<double> variance_contributions(const EnsembleStore& s, const Usable& u) {
    const std::size_t n = u.rec.size(), nx = s.nx();
    std::vector<double> c(n * nx);
    for (std::size_t k = 0; k < nx; ++k) {
        CompensatedSum m;
        for (std::size_t r : u.rec) m.add(s.h(r, k));
        const double mean = m.value() / static_cast<double>(n);
        const double f = n > 1 ? static_cast<double>(n) / static_cast<double>(n - 1) : 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = s.h(u.rec[i], k) - mean;
            c[i * nx + k] = d * d * f;
        }
    }
    return c;
}

double uniform_spacing(std::span<const double> x, std::size_t min_points, const char* who) {
    if (x.size() < min_points) {
        throw DomainError(std::string(who) + ": grid has " + std::to_string(x.size()) +
                          " points, at least " + std::to_string(min_points) + " needed");
    }
    const double d = x[1] - x[0];
    for (std::size_t k = 2; k < x.size(); ++k)
        if (std::abs((x[k] - x[k - 1]) - d) > 1e-9 * std::max(1.0, std::abs(d)))
            throw DomainError(std::string(who) + ": grid must be uniform");
    return d;
}

}  // namespace

CurveEstimate variance_curve(const EnsembleStore& s) {
    const auto u = usable_records(s);
    const auto c = variance_contributions(s, u);
    CurveEstimate g;
    g.grid.assign(s.x().begin(), s.x().end());
    g.n_batches = s.batches();
    std::vector<double> col(u.rec.size());
    for (std::size_t k = 0; k < s.nx(); ++k) {
        for (std::size_t i = 0; i < col.size(); ++i) col[i] = c[i * s.nx() + k];
        const auto st = batch_mean(col, u.batch);
        g.mean.push_back(st.mean);
        g.stderr.push_back(st.stderr);
    }
    return g;
}

CurveEstimate increment_variance_curve(const EnsembleStore& s) {
    const auto u = usable_records(s);
    const std::size_t k0 = s.origin(), n = u.rec.size();
    CurveEstimate g;
    g.grid.assign(s.x().begin(), s.x().end());
    g.n_batches = s.batches();
    std::vector<double> d(n), c(n);
    for (std::size_t k = 0; k < s.nx(); ++k) {
        CompensatedSum m;
        for (std::size_t i = 0; i < n; ++i) {
            d[i] = s.h(u.rec[i], k) - s.h(u.rec[i], k0);
            m.add(d[i]);
        }
        const double mean = m.value() / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
            c[i] = (d[i] - mean) * (d[i] - mean) * static_cast<double>(n) / static_cast<double>(n - 1);
        const auto st = batch_mean(c, u.batch);
        g.mean.push_back(st.mean);
        g.stderr.push_back(st.stderr);
    }
    return g;
}

// ---------------------------------------------------------------------------
// Argmax law

double design_effect(const EnsembleStore& s) {
    const auto u = usable_records(s, 2);
    auto z = s.argmax_at_origin();
    std::vector<double> sorted = z;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
    const double med = sorted[sorted.size() / 2];
    std::vector<double> ind(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) ind[i] = z[i] <= med ? 1.0 : 0.0;
    const auto st = batch_mean(ind, u.batch);
    const double p = st.mean, n = static_cast<double>(z.size());
    const double iid = p * (1.0 - p) / n;
    if (!(iid > 0.0)) return 1.0;
    return std::max(1.0, st.stderr * st.stderr / iid);
}

EcdfEstimate argmax_cdf(const EnsembleStore& s, std::span<const double> grid) {
    const auto u = usable_records(s);
    const auto z = s.argmax_at_origin();
    if (z.size() < 1000) {
        throw StatisticsError("argmax_cdf: " + std::to_string(z.size()) +
                              " usable argmax samples, at least 1000 required");
    }
    EcdfEstimate e;
    e.curve.grid.assign(grid.begin(), grid.end());
    e.curve.n_batches = s.batches();
    std::vector<double> ind(z.size());
    for (double x : grid) {
        for (std::size_t i = 0; i < z.size(); ++i) ind[i] = z[i] <= x ? 1.0 : 0.0;
        const auto st = batch_mean(ind, u.batch);
        e.curve.mean.push_back(st.mean);
        e.curve.stderr.push_back(st.stderr);
    }
    e.design_effect = design_effect(s);
    e.n_eff = static_cast<double>(z.size()) / e.design_effect;
    e.dkw = dkw_halfwidth(e.n_eff);
    return e;
}

DensityEstimate argmax_density(const EnsembleStore& s, std::span<const double> grid, double bandwidth) {
    const auto u = usable_records(s);
    const auto z = s.argmax_at_origin();
    if (z.size() < 1000) {
        throw StatisticsError("argmax_density: " + std::to_string(z.size()) +
                              " usable argmax samples, at least 1000 required");
    }
    DensityEstimate d;
    if (bandwidth <= 0.0) {
        std::vector<double> sorted = z;
        std::sort(sorted.begin(), sorted.end());
        const double n = static_cast<double>(z.size());
        CompensatedSum m, m2;
        for (double v : z) m.add(v);
        const double mean = m.value() / n;
        for (double v : z) m2.add((v - mean) * (v - mean));
        const double sd = std::sqrt(m2.value() / (n - 1.0));
        const double iqr = sorted[static_cast<std::size_t>(0.75 * (n - 1))] -
                           sorted[static_cast<std::size_t>(0.25 * (n - 1))];
        bandwidth = 0.9 * std::min(sd, iqr / 1.34) * std::pow(n, -0.2);
    }
    d.bandwidth = bandwidth;
    d.curve.grid.assign(grid.begin(), grid.end());
    d.curve.n_batches = s.batches();
    const double norm = 1.0 / (bandwidth * std::sqrt(2.0 * std::numbers::pi));
    std::vector<double> k(z.size());
    for (double x : grid) {
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double q = (x - z[i]) / bandwidth;
            k[i] = norm * std::exp(-0.5 * q * q);
        }
        const auto st = batch_mean(k, u.batch);
        d.curve.mean.push_back(st.mean);
        d.curve.stderr.push_back(st.stderr);
    }
    return d;
}

// ---------------------------------------------------------------------------
// Identities

void IdentityReport::finish() {
    max_ratio = 0.0;
    worst_x = grid.empty() ? 0.0 : grid.front();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double r = stderr[k] > 0.0 ? std::abs(lhs[k] - rhs[k]) / stderr[k]
                                         : (lhs[k] == rhs[k] ? 0.0 : INFINITY);
        if (r > max_ratio) {
            max_ratio = r;
            worst_x = grid[k];
        }
    }
}

namespace {

/// Appends one grid point of a same-record comparison to a report.
void push_point(IdentityReport& rep, double x, std::span<const double> a, std::span<const double> b,
                std::span<const std::uint32_t> batch) {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    const auto sa = batch_mean(a, batch), sb = batch_mean(b, batch), sd = batch_mean(d, batch);
    rep.grid.push_back(x);
    rep.lhs.push_back(sa.mean);
    rep.rhs.push_back(sb.mean);
    rep.stderr.push_back(sd.stderr);
}

/// Weighted stencil of per-record contributions and of |x - Z| around node k.
struct Stencil {
    std::vector<int> offsets;
    std::vector<double> weights;
};

}  // namespace

GprimeReport gprime_identity_check(const EnsembleStore& s) {
    const double d = uniform_spacing(s.x(), 5, "gprime_identity_check");
    const auto u = usable_records(s);
    const auto c = variance_contributions(s, u);
    const std::size_t nx = s.nx(), n = u.rec.size(), k0 = s.origin();
    const double b2 = s.beta() * s.beta();
    const auto xe = s.x_eff();

    GprimeReport rep;
    rep.stencil.name = "g' central difference vs stencil-averaged beta^2 (2F - 1)";
    rep.pointwise.name = "g' central difference vs beta^2 (2F(x) - 1)";
    rep.local_fit.name = "g' five-point fit vs stencil-averaged beta^2 (2F - 1)";
    std::vector<double> a(n), b(n);
    for (std::size_t k = 1; k + 1 < nx; ++k) {
        const double den = xe[k + 1] - xe[k - 1];
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t r = u.rec[i];
            const double z = s.Z(r, k0);
            a[i] = (c[i * nx + k + 1] - c[i * nx + k - 1]) / den;
            b[i] = b2 * (std::abs(xe[k + 1] - z) - std::abs(xe[k - 1] - z)) / den;
        }
        push_point(rep.stencil, s.x()[k], a, b, u.batch);
        for (std::size_t i = 0; i < n; ++i) {
            const double z = s.Z(u.rec[i], k0);
            b[i] = b2 * (z <= xe[k] ? 1.0 : -1.0);
        }
        push_point(rep.pointwise, s.x()[k], a, b, u.batch);
    }
    const Stencil sg{{-2, -1, 0, 1, 2}, {-2.0, -1.0, 0.0, 1.0, 2.0}};
    for (std::size_t k = 2; k + 2 < nx; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            const double z = s.Z(u.rec[i], k0);
            double sa = 0.0, sb = 0.0;
            for (std::size_t m = 0; m < sg.offsets.size(); ++m) {
                const std::size_t q = static_cast<std::size_t>(static_cast<int>(k) + sg.offsets[m]);
                sa += sg.weights[m] * c[i * nx + q];
                sb += sg.weights[m] * std::abs(xe[q] - z);
            }
            a[i] = sa / (10.0 * d);
            b[i] = b2 * sb / (10.0 * d);
        }
        push_point(rep.local_fit, s.x()[k], a, b, u.batch);
    }
    rep.stencil.finish();
    rep.pointwise.finish();
    rep.local_fit.finish();
    return rep;
}

DensityReport density_identity_check(const EnsembleStore& s) {
    const double d = uniform_spacing(s.x(), 9, "density_identity_check");
    const auto u = usable_records(s);
    const auto c = variance_contributions(s, u);
    const std::size_t nx = s.nx(), n = u.rec.size(), k0 = s.origin();
    const double b2 = s.beta() * s.beta();
    if (!(b2 > 0.0)) throw DomainError("density_identity_check: beta must be positive");
    const auto xe = s.x_eff();
    const auto z0 = s.argmax_at_origin();

    DensityReport rep;
    rep.stencil.name = "g''/(2 beta^2) five-point fit vs matched-kernel density of Z";
    rep.central.name = "g''/(2 beta^2) second difference vs triangle-kernel density of Z";
    rep.gaussian_kde.name = "g''/(2 beta^2) five-point fit vs Gaussian KDE of Z";

    const Stencil sg{{-2, -1, 0, 1, 2}, {2.0, -1.0, -2.0, -1.0, 2.0}};
    const Stencil cd{{-1, 0, 1}, {1.0, -2.0, 1.0}};
    std::vector<double> a(n), b(n);

    auto apply = [&](const Stencil& st, double scale, std::size_t k, std::size_t i, double& sa, double& sb) {
        const double z = s.Z(u.rec[i], k0);
        sa = 0.0;
        sb = 0.0;
        for (std::size_t m = 0; m < st.offsets.size(); ++m) {
            const std::size_t q = static_cast<std::size_t>(static_cast<int>(k) + st.offsets[m]);
            sa += st.weights[m] * c[i * nx + q];
            sb += st.weights[m] * std::abs(xe[q] - z);
        }
        sa *= scale / (2.0 * b2);
        sb *= scale / 2.0;
    };

    const DensityEstimate kde = argmax_density(s, std::vector<double>(s.x().begin(), s.x().end()));
    rep.kde_bandwidth = kde.bandwidth;
    const double norm = 1.0 / (kde.bandwidth * std::sqrt(2.0 * std::numbers::pi));

    rep.gpp.n_batches = s.batches();
    for (std::size_t k = 2; k + 2 < nx; ++k) {
        for (std::size_t i = 0; i < n; ++i) apply(sg, 1.0 / (7.0 * d * d), k, i, a[i], b[i]);
        push_point(rep.stencil, s.x()[k], a, b, u.batch);
        {
            const auto st = batch_mean(a, u.batch);
            rep.gpp.grid.push_back(s.x()[k]);
            rep.gpp.mean.push_back(2.0 * b2 * st.mean);
            rep.gpp.stderr.push_back(2.0 * b2 * st.stderr);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double q = (xe[k] - z0[i]) / kde.bandwidth;
            b[i] = norm * std::exp(-0.5 * q * q);
        }
        push_point(rep.gaussian_kde, s.x()[k], a, b, u.batch);
    }
    for (std::size_t k = 1; k + 1 < nx; ++k) {
        for (std::size_t i = 0; i < n; ++i) apply(cd, 1.0 / (d * d), k, i, a[i], b[i]);
        push_point(rep.central, s.x()[k], a, b, u.batch);
    }
    rep.stencil.finish();
    rep.central.finish();
    rep.gaussian_kde.finish();

    // Mass: the sum of second differences telescopes to the end slopes.
    for (std::size_t i = 0; i < n; ++i) {
        const double right = (c[i * nx + nx - 1] - c[i * nx + nx - 2]) / (xe[nx - 1] - xe[nx - 2]);
        const double left = (c[i * nx + 1] - c[i * nx]) / (xe[1] - xe[0]);
        a[i] = (right - left) / (2.0 * b2);
    }
    const auto mass = batch_mean(a, u.batch);
    rep.mass = mass.mean;
    rep.mass_stderr = mass.stderr;

    // Reflection symmetry of g''.
    for (std::size_t k = 2; k + 2 < nx; ++k) {
        const auto mirror = grid_index(s.x(), -s.x()[k]);
        if (mirror < 0 || static_cast<std::size_t>(mirror) <= k) continue;
        const auto km = static_cast<std::size_t>(mirror);
        if (km + 2 >= nx) continue;
        double sa, sb, ma, mb;
        for (std::size_t i = 0; i < n; ++i) {
            apply(sg, 1.0, k, i, sa, sb);
            apply(sg, 1.0, km, i, ma, mb);
            a[i] = sa - ma;
        }
        const auto st = batch_mean(a, u.batch);
        if (st.stderr > 0.0) rep.max_asymmetry_ratio = std::max(rep.max_asymmetry_ratio, std::abs(st.mean) / st.stderr);
    }
    return rep;
}

CovarianceReport covariance_identity(const EnsembleStore& s, const StepFunction& phi1,
                                     const StepFunction& phi2, double t) {
    if (!(t > 0.0)) throw DomainError("covariance_identity: t must be positive");
    const auto u = usable_records(s);
    const double sc = std::cbrt(t * t);
    const auto p1 = phi1.dilate(sc), p2 = phi2.dilate(sc);
    const std::size_t n = u.rec.size(), k0 = s.origin();
    const double b2 = s.beta() * s.beta();
    std::vector<double> a(n), b(n), d(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = u.rec[i];
        a[i] = sc * s.x0(r, p1) * s.x1(r, p2);
        b[i] = b2 * cross_correlation(phi1, phi2, sc * s.Z(r, k0));
        d[i] = a[i] - b[i];
    }
    const auto sa = batch_mean(a, u.batch), sb = batch_mean(b, u.batch), sd = batch_mean(d, u.batch);
    CovarianceReport rep;
    rep.lhs = sa.mean;
    rep.rhs = sb.mean;
    rep.lhs_stderr = sa.stderr;
    rep.rhs_stderr = sb.stderr;
    rep.diff_stderr = sd.stderr;
    rep.ratio = sd.stderr > 0.0 ? std::abs(sd.mean) / sd.stderr : (sd.mean == 0.0 ? 0.0 : INFINITY);
    return rep;
}

namespace {

double interpolate(std::span<const double> grid, std::span<const double> v, double x) {
    if (grid.empty() || x < grid.front() - 1e-12 || x > grid.back() + 1e-12) {
        throw DomainError("two_point_function: argument " + std::to_string(x) +
                          " outside the estimated g'' range");
    }
    if (x <= grid.front()) return v.front();
    if (x >= grid.back()) return v.back();
    const auto it = std::upper_bound(grid.begin(), grid.end(), x);
    const auto k = static_cast<std::size_t>(it - grid.begin());
    const double w = (x - grid[k - 1]) / (grid[k] - grid[k - 1]);
    return v[k - 1] + w * (v[k] - v[k - 1]);
}

}  // namespace

double two_point_function(const CurveEstimate& gpp, double z, double t) {
    if (!(t > 0.0)) throw DomainError("two_point_function: t must be positive");
    const double sc = std::cbrt(t * t);
    return interpolate(gpp.grid, gpp.mean, z / sc) / (2.0 * sc);
}

double two_point_stderr(const CurveEstimate& gpp, double z, double t) {
    const double sc = std::cbrt(t * t);
    return interpolate(gpp.grid, gpp.stderr, z / sc) / (2.0 * sc);
}

double two_point_pairing(const CurveEstimate& gpp, const StepFunction& phi1, const StepFunction& phi2,
                         double t) {
    const auto cc = cross_correlation_function(phi1, phi2);
    if (cc.knots.empty() || gpp.grid.empty()) return 0.0;
    const double sc = std::cbrt(t * t);
    // C vanishes (to estimation accuracy) beyond the g'' grid.
    const double lo = std::max(cc.knots.front(), gpp.grid.front() * sc);
    const double hi = std::min(cc.knots.back(), gpp.grid.back() * sc);
    if (!(hi > lo)) return 0.0;
    const int m = 4000;
    const double h = (hi - lo) / m;
    CompensatedSum acc;
    for (int i = 0; i <= m; ++i) {
        const double z = lo + i * h;
        const double w = (i == 0 || i == m) ? 0.5 : 1.0;
        acc.add(w * h * cc(z) * two_point_function(gpp, z, t));
    }
    return acc.value();
}

// ---------------------------------------------------------------------------
// Distribution tests

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw StatisticsError("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double dmax = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        dmax = std::max(dmax, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return dmax;
}

double ks_threshold(double n, double m, double alpha) {
    const double c = std::sqrt(-0.5 * std::log(0.5 * alpha));
    return c * std::sqrt((n + m) / (n * m));
}

double ks_reflection(std::span<const double> a) {
    if (a.empty()) throw StatisticsError("ks_reflection: empty sample");
    // With the |Z_i| in decreasing order, #{Z <= -x} - #{Z > x} is a walk of signs.
    std::vector<std::pair<double, int>> v;
    for (double z : a) v.emplace_back(std::abs(z), z < 0.0 ? 1 : (z > 0.0 ? -1 : 0));
    std::sort(v.begin(), v.end(), [](const auto& p, const auto& q) { return p.first > q.first; });
    long walk = 0, best = 0;
    for (std::size_t i = 0; i < v.size();) {
        std::size_t j = i;
        // Points at the same |z| enter together; a zero enters with its sign 0
        // on the Z <= -x side once x reaches 0.
        while (j < v.size() && v[j].first == v[i].first) walk += v[j++].second;
        best = std::max(best, std::abs(walk));
        i = j;
    }
    return static_cast<double>(best) / static_cast<double>(a.size());
}

double ks_reflection_threshold(double n, double alpha) {
    // P(sup_[0,1] |W| < a) = (4/pi) sum_k (-1)^k/(2k+1) exp(-(2k+1)^2 pi^2 / (8 a^2)).
    auto inside = [](double a) {
        double s = 0.0;
        for (int k = 0; k < 200; ++k) {
            const double m = 2.0 * k + 1.0;
            s += (k % 2 ? -1.0 : 1.0) / m * std::exp(-m * m * std::numbers::pi * std::numbers::pi / (8.0 * a * a));
        }
        return 4.0 / std::numbers::pi * s;
    };
    double lo = 0.5, hi = 6.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (1.0 - inside(mid) > alpha) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi) / std::sqrt(n);
}

double dkw_halfwidth(double n, double alpha) { return std::sqrt(std::log(2.0 / alpha) / (2.0 * n)); }

SymmetryReport argmax_symmetry(const EnsembleStore& s) {
    const auto u = usable_records(s);
    const auto z = s.argmax_at_origin();
    const double deff = design_effect(s);
    const double n_eff = static_cast<double>(z.size()) / deff;
    SymmetryReport r;
    r.ks = ks_reflection(z);
    r.threshold = ks_reflection_threshold(n_eff);
    std::vector<double> ind(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) ind[i] = z[i] <= 0.0 ? 1.0 : 0.0;
    const auto f0 = batch_mean(ind, u.batch);
    r.F0 = f0.mean;
    r.F0_stderr = f0.stderr;
    r.dkw = dkw_halfwidth(n_eff);
    const auto m = batch_mean(z, u.batch);
    r.mean = m.mean;
    r.mean_stderr = m.stderr;
    r.pass = r.ks <= r.threshold && std::abs(r.F0 - 0.5) <= r.dkw &&
             std::abs(r.mean) <= 3.0 * r.mean_stderr;
    return r;
}

SupMomentReport sup_second_moment(const EnsembleStore& s) {
    const auto u = usable_records(s, 2);
    std::vector<double> v;
    for (std::size_t r : u.rec) {
        double m = 0.0;
        for (std::size_t k = 0; k < s.nx(); ++k) m = std::max(m, s.h(r, k) * s.h(r, k));
        v.push_back(m);
    }
    CompensatedSum half, all;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i < v.size() / 2) half.add(v[i]);
        all.add(v[i]);
    }
    SupMomentReport rep;
    rep.half = half.value() / static_cast<double>(v.size() / 2);
    rep.full = all.value() / static_cast<double>(v.size());
    rep.ratio = rep.half / rep.full;
    return rep;
}

}  // namespace kpz
