#pragma once

// Run configuration: INI text (key = value in sections), canonical printing,
// validation with field paths.

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "kpz/lpp.hpp"
#include "kpz/simulate.hpp"

namespace kpz {

struct RunConfig {
    // [run]
    std::string name = "kpzlab";
    std::uint64_t seed = 20240601;
    int workers = 0;  // 0: KPZLAB_WORKERS or hardware
    std::string out = "out";

    // [lattice]
    int N = 1000;
    double window = 5.5;
    int z_stride = 1;
    double max_tilt = 0.9;
    std::string centering = "untilted";
    double c_h = lpp::LatticeConstants{}.c_h;
    double c_x = lpp::LatticeConstants{}.c_x;

    // [grid]
    double x_min = -2.5;
    double x_max = 2.5;
    double x_step = 0.25;

    // [ensemble]
    std::vector<double> betas{std::numbers::sqrt2, 1.0, 2.0, 0.0};
    std::size_t slices = 1000;
    std::size_t paths_per_slice = 40;

    // [observables]
    std::vector<std::string> test_functions{"indicator(0,1)", "indicator(1,2)", "indicator(-1,0)"};
    std::vector<double> times{1.0, 8.0};

    // [transport]
    std::size_t transport_n = 512;
    std::size_t transport_resamples = 8;

    // [stein]
    double stein_sigma = 1.0;
    int stein_n_theta = 48;
    int stein_n_hermite = 64;
    double stein_eps = 1e-2;
    double stein_box = 3.0;
    int stein_points = 21;

    // [chernoff]
    std::vector<double> ladder_betas{2.0, 4.0, 8.0};
    int ladder_N = 4000;
    std::size_t ladder_slices = 120;
    std::size_t ladder_paths = 100;
    std::size_t reference_samples = 40000;
    double reference_step = 0.002;
    double reference_window = 2.0;

    /// Sink grid x_min + i x_step, built from integer multiples of the step.
    std::vector<double> x_grid() const;
    lpp::GeometrySpec geometry() const;
    EnsembleSpec ensemble() const;
};

/// Throws ConfigError naming the offending field ("section.key").
void validate(const RunConfig& c);

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Canonical text; parse_config(to_text(c)) reproduces c exactly.
std::string to_text(const RunConfig& c);
/// Canonical text without the fields that cannot change results
/// (output directory, worker count).
std::string result_text(const RunConfig& c);

/// Small configuration for smoke runs (N = 64, 50 slices).
RunConfig tiny_config();

}  // namespace kpz
