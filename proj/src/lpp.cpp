#include "kpz/lpp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kpz/errors.hpp"
#include "kpz/rng.hpp"

namespace kpz::lpp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string point_str(LatticePoint p) {
    return "(" + std::to_string(p.i) + "," + std::to_string(p.j) + ")";
}

}  // namespace

// ---------------------------------------------------------------------------
// WeightField

WeightField::WeightField(std::int64_t extent, std::uint64_t seed) : extent_(extent), seed_(seed) {
    if (extent < 1 || extent > (std::int64_t{1} << 30)) {
        throw DomainError("WeightField: extent must lie in [1, 2^30], got " +
                          std::to_string(extent));
    }
}

bool WeightField::contains(LatticePoint p) const noexcept {
    return p.i >= 1 && p.j >= 1 && p.i <= extent_ && p.j <= extent_;
}

double WeightField::weight(std::int64_t i, std::int64_t j) const {
    if (!contains({i, j})) {
        throw DomainError("WeightField: site " + point_str({i, j}) + " outside field");
    }
    const auto d = static_cast<std::uint32_t>(i + j);
    const auto block = philox4x32({d, static_cast<std::uint32_t>(i >> 2), kStreamWeights, 0u},
                                  key_from_seed(seed_));
    return exp1_from_bits(block[static_cast<std::size_t>(i & 3)]);
}

const double* WeightField::antidiagonal(std::int64_t d, std::int64_t i_first,
                                        std::int64_t i_last, double* scratch) const {
    const Key2 key = key_from_seed(seed_);
    const auto du = static_cast<std::uint32_t>(d);
    std::int64_t i = i_first;
    while (i <= i_last) {
        const auto block =
            philox4x32({du, static_cast<std::uint32_t>(i >> 2), kStreamWeights, 0u}, key);
        for (std::int64_t lane = i & 3; lane < 4 && i <= i_last; ++lane, ++i) {
            scratch[i - i_first] = exp1_from_bits(block[static_cast<std::size_t>(lane)]);
        }
    }
    return scratch;
}

// ---------------------------------------------------------------------------
// WeightBlock

WeightBlock::WeightBlock(const WeightField& field, LatticePoint lo, LatticePoint hi,
                         std::int64_t d_min)
    : lo_(lo), hi_(hi) {
    if (!field.contains(lo) || !field.contains(hi) || lo.i > hi.i || lo.j > hi.j) {
        throw DomainError("WeightBlock: box " + point_str(lo) + "-" + point_str(hi) +
                          " not inside field");
    }
    d_min_ = std::max(d_min, lo.i + lo.j);
    d_max_ = hi.i + hi.j;
    if (d_min_ > d_max_) throw DomainError("WeightBlock: empty anti-diagonal range");
    offset_.resize(static_cast<std::size_t>(d_max_ - d_min_ + 2));
    std::size_t total = 0;
    for (std::int64_t d = d_min_; d <= d_max_; ++d) {
        offset_[static_cast<std::size_t>(d - d_min_)] = total;
        const std::int64_t a = std::max(lo.i, d - hi.j);
        const std::int64_t b = std::min(hi.i, d - lo.j);
        total += static_cast<std::size_t>(std::max<std::int64_t>(0, b - a + 1));
    }
    offset_.back() = total;
    data_.resize(total);
    for (std::int64_t d = d_min_; d <= d_max_; ++d) {
        const std::int64_t a = std::max(lo.i, d - hi.j);
        const std::int64_t b = std::min(hi.i, d - lo.j);
        if (a <= b) field.antidiagonal(d, a, b, data_.data() + offset_[static_cast<std::size_t>(d - d_min_)]);
    }
}

bool WeightBlock::contains(LatticePoint p) const noexcept {
    return p.i >= lo_.i && p.i <= hi_.i && p.j >= lo_.j && p.j <= hi_.j &&
           p.i + p.j >= d_min_;
}

const double* WeightBlock::antidiagonal(std::int64_t d, std::int64_t i_first,
                                        std::int64_t i_last, double* /*scratch*/) const {
    const std::int64_t a = std::max(lo_.i, d - hi_.j);
    const std::int64_t b = std::min(hi_.i, d - lo_.j);
    if (d < d_min_ || d > d_max_ || i_first < a || i_last > b) {
        throw DomainError("WeightBlock: anti-diagonal " + std::to_string(d) +
                          " segment outside materialized region");
    }
    return data_.data() + offset_[static_cast<std::size_t>(d - d_min_)] +
           static_cast<std::size_t>(i_first - a);
}

// ---------------------------------------------------------------------------
// ExplicitWeights

ExplicitWeights::ExplicitWeights(std::int64_t rows, std::int64_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (rows < 1 || cols < 1 || values_.size() != static_cast<std::size_t>(rows * cols)) {
        throw DomainError("ExplicitWeights: shape does not match value count");
    }
}

bool ExplicitWeights::contains(LatticePoint p) const noexcept {
    return p.i >= 1 && p.j >= 1 && p.i <= rows_ && p.j <= cols_;
}

double ExplicitWeights::weight(std::int64_t i, std::int64_t j) const {
    if (!contains({i, j})) throw DomainError("ExplicitWeights: site out of range");
    return values_[static_cast<std::size_t>((i - 1) * cols_ + (j - 1))];
}

void ExplicitWeights::set(std::int64_t i, std::int64_t j, double w) {
    if (!contains({i, j})) throw DomainError("ExplicitWeights: site out of range");
    values_[static_cast<std::size_t>((i - 1) * cols_ + (j - 1))] = w;
}

const double* ExplicitWeights::antidiagonal(std::int64_t d, std::int64_t i_first,
                                            std::int64_t i_last, double* scratch) const {
    for (std::int64_t i = i_first; i <= i_last; ++i) scratch[i - i_first] = weight(i, d - i);
    return scratch;
}

// ---------------------------------------------------------------------------
// Dynamic programme

ValueTable lpp_value_table(const WeightSource& weights, LatticePoint sink, SourceLine sources) {
    if (!weights.contains(sink)) {
        throw DomainError("lpp_value_table: sink " + point_str(sink) + " outside field bounds");
    }
    if (sources.i_first > sources.i_last) throw DomainError("lpp_value_table: empty source line");
    const LatticePoint first = sources.at(sources.i_first);
    const LatticePoint last = sources.at(sources.i_last);
    for (const auto& p : {first, last}) {
        if (!weights.contains(p)) {
            throw DomainError("lpp_value_table: source " + point_str(p) + " outside field bounds");
        }
        if (p.i > sink.i || p.j > sink.j) {
            throw DomainError("lpp_value_table: source " + point_str(p) +
                              " not south-west of sink " + point_str(sink));
        }
    }

    const std::int64_t ia = sources.i_first;
    const std::int64_t jmin = sources.diagonal - sources.i_last;
    const auto width = static_cast<std::size_t>(sink.i - ia + 1);
    std::vector<double> prev(width + 3, kNegInf), cur(width + 3, kNegInf), scratch(width + 1);

    const std::int64_t d0 = sink.i + sink.j;
    for (std::int64_t d = d0; d >= sources.diagonal; --d) {
        const std::int64_t lo = std::max(ia, d - sink.j);
        const std::int64_t hi = std::min(sink.i, d - jmin);
        const double* w = weights.antidiagonal(d, lo, hi, scratch.data());
        double* __restrict out = cur.data() + (lo - ia);
        const double* __restrict down = prev.data() + (lo - ia);  // (i, j+1)
        const double* __restrict right = down + 1;                 // (i+1, j)
        const auto n = static_cast<std::size_t>(hi - lo + 1);
        if (d == d0) {
            out[0] = w[0];
        } else {
            for (std::size_t q = 0; q < n; ++q) out[q] = w[q] + std::max(down[q], right[q]);
        }
        const auto tail = static_cast<std::size_t>(hi - ia + 1);
        cur[tail] = kNegInf;
        cur[tail + 1] = kNegInf;
        std::swap(prev, cur);
    }

    ValueTable table{sink, sources, {}};
    table.values.assign(prev.begin(), prev.begin() + sources.size());
    return table;
}

double passage_time(const WeightSource& weights, LatticePoint source, LatticePoint sink) {
    const SourceLine line{source.i + source.j, source.i, source.i};
    return lpp_value_table(weights, sink, line).values.front();
}

// ---------------------------------------------------------------------------
// Geometry

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

}  // namespace

LatticeGeometry::LatticeGeometry(const GeometrySpec& spec) : spec_(spec) {
    if (spec.N < 1) throw DomainError("LatticeGeometry: N must be positive");
    if (!(spec.time > 0.0)) throw DomainError("LatticeGeometry: time must be positive");
    if (spec.z_stride < 1) throw DomainError("LatticeGeometry: z_stride must be >= 1");
    if (!(spec.window >= 0.0)) throw DomainError("LatticeGeometry: window must be >= 0");
    if (!(spec.constants.c_h > 0.0) || !(spec.constants.c_x > 0.0)) {
        throw DomainError("LatticeGeometry: scaling constants must be positive");
    }
    if (spec.x_grid.empty()) throw DomainError("LatticeGeometry: empty x_grid");
    for (std::size_t k = 1; k < spec.x_grid.size(); ++k) {
        if (!(spec.x_grid[k] > spec.x_grid[k - 1])) {
            throw DomainError("LatticeGeometry: x_grid must be strictly increasing");
        }
    }

    const double n = static_cast<double>(spec.N);
    steps_ = std::max<std::int64_t>(1, std::llround(spec.time * n));
    spatial_unit_ = spec.constants.c_x * std::cbrt(n * n);
    height_unit_ = spec.constants.c_h * std::cbrt(n);

    for (double x : spec.x_grid) {
        const std::int64_t k = std::llround(x * spatial_unit_);
        if (!kx_.empty() && k <= kx_.back()) {
            throw DomainError("LatticeGeometry: two x_grid points snap to the same sink; "
                              "refine N or coarsen the grid");
        }
        kx_.push_back(k);
        x_eff_.push_back(static_cast<double>(k) / spatial_unit_);
    }

    const auto cap_tilt = static_cast<std::int64_t>(std::floor(spec.max_tilt * steps_));
    const auto cap_window = static_cast<std::int64_t>(std::floor(spec.window * spatial_unit_ + 1e-9));
    window_lattice_ = std::max<std::int64_t>(0, std::min({cap_window, cap_tilt, steps_ - 1}));

    const std::int64_t s = spec.z_stride;
    const std::int64_t kz_lo = ceil_div(kx_.front() - window_lattice_, s) * s;
    const std::int64_t kz_hi = floor_div(kx_.back() + window_lattice_, s) * s;
    for (std::int64_t k = kz_lo; k <= kz_hi; k += s) {
        kz_.push_back(k);
        z_grid_.push_back(static_cast<double>(k) / spatial_unit_);
    }
    for (std::int64_t kx : kx_) {
        const std::int64_t a = ceil_div(kx - window_lattice_, s) * s;
        const std::int64_t b = floor_div(kx + window_lattice_, s) * s;
        if (a > b) throw DomainError("LatticeGeometry: window holds no source for some sink");
        band_.emplace_back(static_cast<std::size_t>((a - kz_lo) / s),
                           static_cast<std::size_t>((b - kz_lo) / s));
    }
    shift_ = std::max(std::abs(kz_lo), std::abs(kz_hi)) + 1;
}

LatticePoint LatticeGeometry::source(std::size_t j) const {
    const std::int64_t k = kz_.at(j);
    return {shift_ + k, shift_ - k};
}

LatticePoint LatticeGeometry::sink(std::size_t k) const {
    const std::int64_t kx = kx_.at(k);
    return {shift_ + steps_ - 1 + kx, shift_ + steps_ - 1 - kx};
}

std::int64_t LatticeGeometry::field_extent() const noexcept {
    std::int64_t e = 1;
    for (std::size_t k = 0; k < kx_.size(); ++k) {
        const auto p = sink(k);
        e = std::max({e, p.i, p.j});
    }
    return e;
}

// ---------------------------------------------------------------------------
// Landscape slices

std::uint64_t replica_field_seed(std::uint64_t master_seed, std::uint64_t replica) {
    return derive_seed(master_seed, 0x4c414e44u /* "LAND" */, replica);
}

namespace {

LandscapeSlice build_slice(const WeightSource& weights,
                           std::shared_ptr<const LatticeGeometry> geometry,
                           std::uint64_t replica_id) {
    const LatticeGeometry& g = *geometry;
    LandscapeSlice slice{geometry, replica_id,
                         std::vector<double>(g.nx() * g.nz(), kNegInf)};
    const double t = g.time();
    const auto z = g.z_grid();
    const auto x = g.x_effective();
    const auto stride = static_cast<std::size_t>(g.spec().z_stride);
    const bool pair_mean = g.spec().centering == Centering::pair_mean;
    const double mu0 = mean_surrogate(g.steps(), g.steps());
    for (std::size_t k = 0; k < g.nx(); ++k) {
        const auto [a, b] = g.band(k);
        const LatticePoint snk = g.sink(k);
        const LatticePoint first = g.source(a);
        const LatticePoint last = g.source(b);
        const SourceLine line{first.i + first.j, first.i, last.i};
        const ValueTable table = lpp_value_table(weights, snk, line);
        double* out = slice.values.data() + k * g.nz();
        for (std::size_t j = a; j <= b; ++j) {
            const LatticePoint src = g.source(j);
            const double raw = table.values[(j - a) * stride];
            if (!pair_mean) {
                out[j] = (raw - mu0) / g.height_unit();
                continue;
            }
            const double mu = mean_surrogate(snk.i - src.i + 1, snk.j - src.j + 1);
            const double dx = x[k] - z[j];
            out[j] = (raw - mu) / g.height_unit() - dx * dx / t;
        }
    }
    return slice;
}

}  // namespace

LandscapeSlice landscape_slice_from(const WeightSource& weights,
                                    std::shared_ptr<const LatticeGeometry> geometry,
                                    std::uint64_t replica_id) {
    if (!geometry) throw DomainError("landscape_slice: null geometry");
    return build_slice(weights, std::move(geometry), replica_id);
}

LandscapeSlice landscape_slice(const WeightField& field,
                               std::shared_ptr<const LatticeGeometry> geometry,
                               std::uint64_t replica_id) {
    if (!geometry) throw DomainError("landscape_slice: null geometry");
    const LatticeGeometry& g = *geometry;
    if (g.field_extent() > field.extent()) {
        throw DomainError("landscape_slice: geometry needs field extent " +
                          std::to_string(g.field_extent()) + ", field has " +
                          std::to_string(field.extent()));
    }
    const LatticePoint lo{g.source(0).i, g.source(g.nz() - 1).j};
    const LatticePoint hi{g.sink(g.nx() - 1).i, g.sink(0).j};
    const WeightBlock block(field, lo, hi, 2 * g.shift());
    return build_slice(block, std::move(geometry), replica_id);
}

// ---------------------------------------------------------------------------
// Calibration

CalibrationResult calibrate_from_moments(const LatticeConstants& current, double variance_at_zero,
                                         std::span<const double> abs_z,
                                         std::span<const double> increment_variance,
                                         std::size_t ensemble_size) {
    if (ensemble_size < kMinCalibrationEnsemble) {
        throw CalibrationError("calibrate_constants: ensemble of " + std::to_string(ensemble_size) +
                               " slices is too small; at least " +
                               std::to_string(kMinCalibrationEnsemble) + " are required");
    }
    if (abs_z.size() != increment_variance.size() || abs_z.size() < 2) {
        throw CalibrationError("calibrate_constants: need at least two increment lags");
    }
    if (!(variance_at_zero > 0.0)) throw CalibrationError("calibrate_constants: zero variance");

    // Least squares for v = s |z| + q z^2.
    double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
    for (std::size_t i = 0; i < abs_z.size(); ++i) {
        const double u = abs_z[i], u2 = u * u, v = increment_variance[i];
        a11 += u2;
        a12 += u * u2;
        a22 += u2 * u2;
        b1 += u * v;
        b2 += u2 * v;
    }
    const double det = a11 * a22 - a12 * a12;
    if (!(std::abs(det) > 0.0)) throw CalibrationError("calibrate_constants: degenerate lag set");
    const double slope = (b1 * a22 - b2 * a12) / det;
    if (!(slope > 0.0)) throw CalibrationError("calibrate_constants: non-positive increment slope");

    CalibrationResult r;
    r.measured_variance = variance_at_zero;
    r.measured_slope = slope;
    r.ensemble_size = ensemble_size;
    r.constants.c_h = current.c_h * std::sqrt(variance_at_zero / kTracyWidomGueVariance);
    const double ratio = r.constants.c_h / current.c_h;
    r.constants.c_x = current.c_x * (2.0 / slope) * ratio * ratio;
    return r;
}

CalibrationResult calibrate_constants(std::span<const LandscapeSlice> ensemble, double fit_radius) {
    if (ensemble.size() < kMinCalibrationEnsemble) {
        throw CalibrationError("calibrate_constants: ensemble of " +
                               std::to_string(ensemble.size()) +
                               " slices is too small; at least " +
                               std::to_string(kMinCalibrationEnsemble) + " are required");
    }
    const LatticeGeometry& g = *ensemble.front().geometry;
    const auto xs = g.x_effective();
    const auto zs = g.z_grid();
    const auto xk = std::find(xs.begin(), xs.end(), 0.0);
    const auto z0 = std::find(zs.begin(), zs.end(), 0.0);
    if (xk == xs.end() || z0 == zs.end()) {
        throw CalibrationError("calibrate_constants: slices must contain x = 0 and z = 0");
    }
    const auto k = static_cast<std::size_t>(xk - xs.begin());
    const auto j0 = static_cast<std::size_t>(z0 - zs.begin());
    const auto [a, b] = g.band(k);

    std::vector<std::size_t> lags;
    for (std::size_t j = a; j <= b; ++j) {
        if (j != j0 && std::abs(zs[j]) <= fit_radius) lags.push_back(j);
    }

    const double n = static_cast<double>(ensemble.size());
    double m0 = 0.0;
    for (const auto& s : ensemble) {
        if (s.geometry->nz() != g.nz() || s.geometry->nx() != g.nx()) {
            throw CalibrationError("calibrate_constants: slices have different geometries");
        }
        m0 += s.at(j0, k);
    }
    m0 /= n;
    double v0 = 0.0;
    for (const auto& s : ensemble) v0 += (s.at(j0, k) - m0) * (s.at(j0, k) - m0);
    v0 /= (n - 1.0);

    std::vector<double> abs_z, inc_var;
    for (std::size_t j : lags) {
        double m = 0.0;
        for (const auto& s : ensemble) m += s.at(j, k) - s.at(j0, k);
        m /= n;
        double v = 0.0;
        for (const auto& s : ensemble) {
            const double d = s.at(j, k) - s.at(j0, k) - m;
            v += d * d;
        }
        abs_z.push_back(std::abs(zs[j]));
        inc_var.push_back(v / (n - 1.0));
    }
    return calibrate_from_moments(g.constants(), v0, abs_z, inc_var, ensemble.size());
}

}  // namespace kpz::lpp
