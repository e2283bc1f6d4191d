#pragma once

// Exponential last-passage percolation and its rescaling into approximate
// directed-landscape slices z -> L(z,0; x,t).
//
// Lattice conventions: sites are (i, j) with i, j >= 1. A path moves by
// (+1, 0) or (0, +1). G(p -> q) is the maximal weight of a path from p to q,
// both endpoints included. Anti-diagonal d holds the sites with i + j = d.

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace kpz::lpp {

struct LatticePoint {
    std::int64_t i = 0;
    std::int64_t j = 0;
    friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

/// Anything that can hand out the weights along one anti-diagonal segment.
class WeightSource {
public:
    virtual ~WeightSource() = default;

    /// Weights of sites (i, d - i) for i in [i_first, i_last]. Returns a
    /// pointer either into internal storage or into `scratch`, which must
    /// hold at least i_last - i_first + 1 values.
    virtual const double* antidiagonal(std::int64_t d, std::int64_t i_first,
                                       std::int64_t i_last, double* scratch) const = 0;

    virtual bool contains(LatticePoint p) const noexcept = 0;
};

/// Seeded field of i.i.d. Exp(1) weights on {1..extent}^2. weight(i, j) is a
/// pure function of (seed, i, j): sites on one anti-diagonal are grouped four
/// to a Philox block, keyed by the seed, with counter (i + j, i / 4).
class WeightField final : public WeightSource {
public:
    WeightField(std::int64_t extent, std::uint64_t seed);

    double weight(std::int64_t i, std::int64_t j) const;
    std::int64_t extent() const noexcept { return extent_; }
    std::uint64_t seed() const noexcept { return seed_; }

    const double* antidiagonal(std::int64_t d, std::int64_t i_first, std::int64_t i_last,
                               double* scratch) const override;
    bool contains(LatticePoint p) const noexcept override;

private:
    std::int64_t extent_;
    std::uint64_t seed_;
};

/// Weights of a WeightField materialized over the part of a box that lies on
/// anti-diagonals >= d_min, stored anti-diagonal by anti-diagonal. Values are
/// bit-identical to the field's.
class WeightBlock final : public WeightSource {
public:
    WeightBlock(const WeightField& field, LatticePoint lo, LatticePoint hi, std::int64_t d_min);

    const double* antidiagonal(std::int64_t d, std::int64_t i_first, std::int64_t i_last,
                               double* scratch) const override;
    bool contains(LatticePoint p) const noexcept override;
    std::size_t size() const noexcept { return data_.size(); }

private:
    LatticePoint lo_, hi_;
    std::int64_t d_min_, d_max_;
    std::vector<std::size_t> offset_;  // per anti-diagonal
    std::vector<double> data_;
};

/// Explicit weight matrix (row i-1, column j-1). Used for small exact checks.
class ExplicitWeights final : public WeightSource {
public:
    ExplicitWeights(std::int64_t rows, std::int64_t cols, std::vector<double> values);

    double weight(std::int64_t i, std::int64_t j) const;
    std::int64_t rows() const noexcept { return rows_; }
    std::int64_t cols() const noexcept { return cols_; }
    void set(std::int64_t i, std::int64_t j, double w);

    const double* antidiagonal(std::int64_t d, std::int64_t i_first, std::int64_t i_last,
                               double* scratch) const override;
    bool contains(LatticePoint p) const noexcept override;

private:
    std::int64_t rows_, cols_;
    std::vector<double> values_;
};

/// Sources (i, diagonal - i) for i in [i_first, i_last].
struct SourceLine {
    std::int64_t diagonal = 0;
    std::int64_t i_first = 0;
    std::int64_t i_last = 0;

    std::int64_t size() const noexcept { return i_last - i_first + 1; }
    LatticePoint at(std::int64_t i) const noexcept { return {i, diagonal - i}; }
};

/// G(p -> sink) for every p on a source line.
struct ValueTable {
    LatticePoint sink;
    SourceLine sources;
    std::vector<double> values;  // index i - sources.i_first
};

/// Backward DP G(i,j) = w(i,j) + max(G(i+1,j), G(i,j+1)) from the sink down to
/// the source anti-diagonal, one anti-diagonal at a time; keeps O(width)
/// state. Throws DomainError if the sink is not in the source's domain or a
/// source does not lie weakly south-west of the sink.
ValueTable lpp_value_table(const WeightSource& weights, LatticePoint sink, SourceLine sources);

/// Single point-to-point passage time.
double passage_time(const WeightSource& weights, LatticePoint source, LatticePoint sink);

/// Deterministic leading-order mean of G over an m x n site rectangle.
inline double mean_surrogate(std::int64_t m, std::int64_t n) noexcept;

// ---------------------------------------------------------------------------
// Geometry of the rescaled landscape.

/// Exponential-LPP normalisation: G ~ mean + c_h N^{1/3} (Airy), with spatial
/// displacement c_x N^{2/3} per rescaled unit.
struct LatticeConstants {
    double c_h = 2.5198420997897464;  // 2^{4/3}
    double c_x = 1.5874010519681994;  // 2^{2/3}
};

/// How raw passage times are centred before rescaling.
///  untilted: subtract the mean of the untilted T x T rectangle for every pair;
///            the lattice's own curvature supplies the parabola and the slice
///            keeps the exact quadrangle (Monge) structure of G.
///  pair_mean: subtract mean_surrogate per source/sink pair and add
///            -(x - z)^2 / t back exactly. Not Monge: argmax ordering across
///            sinks can fail on near-ties.
enum class Centering { untilted, pair_mean };

struct GeometrySpec {
    int N = 1000;              // reference scale: one rescaled time unit = N steps
    double time = 1.0;         // landscape time t; the lattice runs round(t N) steps
    LatticeConstants constants;
    std::vector<double> x_grid{0.0};  // sink coordinates (rescaled)
    double window = 4.0;       // source half-width around each sink (rescaled)
    int z_stride = 1;          // lattice steps between consecutive sources
    double max_tilt = 0.9;     // caps the window at max_tilt * steps lattice units
    Centering centering = Centering::untilted;
};

/// Maps rescaled coordinates onto the lattice. Source z sits at
/// (S + k(z), S - k(z)) on the anti-diagonal 2S; sink x sits at
/// (S + T - 1 + k(x), S + T - 1 - k(x)) with T = round(t N), so the untilted
/// rectangle holds T x T sites. k(u) = round(c_x N^{2/3} u).
class LatticeGeometry {
public:
    explicit LatticeGeometry(const GeometrySpec& spec);

    const GeometrySpec& spec() const noexcept { return spec_; }
    int N() const noexcept { return spec_.N; }
    std::int64_t steps() const noexcept { return steps_; }
    double time() const noexcept { return spec_.time; }
    const LatticeConstants& constants() const noexcept { return spec_.constants; }

    double spatial_unit() const noexcept { return spatial_unit_; }
    double height_unit() const noexcept { return height_unit_; }

    std::span<const double> z_grid() const noexcept { return z_grid_; }
    std::span<const double> x_grid() const noexcept { return spec_.x_grid; }
    /// Sink coordinates after snapping to the lattice.
    std::span<const double> x_effective() const noexcept { return x_eff_; }
    std::size_t nz() const noexcept { return z_grid_.size(); }
    std::size_t nx() const noexcept { return spec_.x_grid.size(); }

    /// Admissible source index range [first, last] for sink k.
    std::pair<std::size_t, std::size_t> band(std::size_t k) const { return band_.at(k); }
    std::int64_t window_lattice() const noexcept { return window_lattice_; }
    double window_effective() const noexcept { return window_lattice_ / spatial_unit_; }

    LatticePoint source(std::size_t j) const;
    LatticePoint sink(std::size_t k) const;
    std::int64_t shift() const noexcept { return shift_; }
    /// Smallest field extent that contains every source and sink.
    std::int64_t field_extent() const noexcept;

private:
    GeometrySpec spec_;
    std::int64_t steps_ = 0;
    double spatial_unit_ = 0.0;
    double height_unit_ = 0.0;
    std::int64_t window_lattice_ = 0;
    std::int64_t shift_ = 0;
    std::vector<std::int64_t> kz_, kx_;
    std::vector<double> z_grid_, x_eff_;
    std::vector<std::pair<std::size_t, std::size_t>> band_;
};

/// Rescaled multi-source LPP values L(z_j; x_k), stored sink-major. Entries
/// outside a sink's band are -infinity.
struct LandscapeSlice {
    std::shared_ptr<const LatticeGeometry> geometry;
    std::uint64_t replica_id = 0;
    std::vector<double> values;

    double at(std::size_t j, std::size_t k) const { return values[k * geometry->nz() + j]; }
    std::span<const double> column(std::size_t k) const {
        return {values.data() + k * geometry->nz(), geometry->nz()};
    }
};

/// One backward pass per sink over a materialized weight block; each raw G is
/// centred according to the geometry's Centering and divided by c_h N^{1/3}.
LandscapeSlice landscape_slice(const WeightField& field,
                               std::shared_ptr<const LatticeGeometry> geometry,
                               std::uint64_t replica_id = 0);

/// Same as landscape_slice on an arbitrary weight source (no materialization).
LandscapeSlice landscape_slice_from(const WeightSource& weights,
                                    std::shared_ptr<const LatticeGeometry> geometry,
                                    std::uint64_t replica_id = 0);

/// Seed of the weight field used for landscape replica `replica`.
std::uint64_t replica_field_seed(std::uint64_t master_seed, std::uint64_t replica);

// ---------------------------------------------------------------------------
// Calibration.

inline constexpr double kTracyWidomGueMean = -1.7710868074;
inline constexpr double kTracyWidomGueVariance = 0.8131947928;

struct CalibrationResult {
    LatticeConstants constants;
    double measured_variance = 0.0;   // Var L(0;0) under the input constants
    double measured_slope = 0.0;      // d Var(L(z;0) - L(0;0)) / d|z| at 0
    std::size_t ensemble_size = 0;
};

inline constexpr std::size_t kMinCalibrationEnsemble = 1000;

/// Constants that put Var L(0;0) on the TW-GUE variance and the local
/// increment variance on 2|z|. The slope is a least-squares fit of
/// s|z| + q z^2 over 0 < |z| <= fit_radius. Every slice must contain the
/// sink x = 0 and the source z = 0.
CalibrationResult calibrate_constants(std::span<const LandscapeSlice> ensemble,
                                      double fit_radius = 0.5);

/// The same estimator on raw moments; separated so synthetic inputs can be fed.
CalibrationResult calibrate_from_moments(const LatticeConstants& current, double variance_at_zero,
                                         std::span<const double> abs_z,
                                         std::span<const double> increment_variance,
                                         std::size_t ensemble_size);

inline double mean_surrogate(std::int64_t m, std::int64_t n) noexcept {
    const double s = std::sqrt(static_cast<double>(m)) + std::sqrt(static_cast<double>(n));
    return s * s;
}

}  // namespace kpz::lpp
