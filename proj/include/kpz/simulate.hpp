#pragma once

// Ensemble driver: landscape slices in parallel, several Brownian paths per
// slice, heights for one or more beta sharing the same slices and paths.

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "kpz/estimators.hpp"
#include "kpz/lpp.hpp"

namespace kpz {

struct EnsembleSpec {
    lpp::GeometrySpec geometry;
    std::vector<double> betas{std::numbers::sqrt2};
    std::size_t slices = 100;
    std::size_t paths_per_slice = 10;
    std::uint64_t seed = 1;
    std::size_t first_slice = 0;  // lets ensembles be extended in chunks
};

/// Content string of everything that determines the records except the
/// slice range; stores with equal fingerprints can be appended.
std::string ensemble_fingerprint(const EnsembleSpec& spec, double beta);

/// Seed of path p on slice s.
std::uint64_t path_seed(std::uint64_t master, std::size_t slice, std::size_t path, std::size_t per_slice);

/// One store per beta. Slice s is batch s; replica id s * paths_per_slice + p.
std::vector<EnsembleStore> simulate_ensembles(const EnsembleSpec& spec, unsigned workers);

/// Argmax at x = 0 for one landscape slice, with no store (cheap large runs).
struct OriginArgmax {
    std::vector<double> Z;
    std::vector<std::uint32_t> batch;
    std::size_t censored = 0;
};
OriginArgmax simulate_origin_argmax(const EnsembleSpec& spec, double beta, unsigned workers);

}  // namespace kpz
