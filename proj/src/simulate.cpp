#include "kpz/simulate.hpp"

#include <cstdio>
#include <memory>

#include "kpz/errors.hpp"
#include "kpz/parallel.hpp"
#include "kpz/process.hpp"
#include "kpz/rng.hpp"

namespace kpz {

namespace {
constexpr std::uint64_t kDomainPath = 0x50415448;  // "PATH"

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct SliceOutput {
    std::vector<std::vector<HeightSample>> heights;  // [beta][path]
    std::vector<BrownianPath> paths;
};

}  // namespace

std::string ensemble_fingerprint(const EnsembleSpec& spec, double beta) {
    const auto& g = spec.geometry;
    std::string s = "N=" + std::to_string(g.N) + ";t=" + fmt17(g.time) + ";c_h=" + fmt17(g.constants.c_h) +
                    ";c_x=" + fmt17(g.constants.c_x) + ";window=" + fmt17(g.window) +
                    ";stride=" + std::to_string(g.z_stride) + ";tilt=" + fmt17(g.max_tilt) + ";centering=" +
                    (g.centering == lpp::Centering::untilted ? "untilted" : "pair_mean") + ";x=";
    for (double x : g.x_grid) s += fmt17(x) + ",";
    s += ";beta=" + fmt17(beta) + ";paths=" + std::to_string(spec.paths_per_slice) +
         ";seed=" + std::to_string(spec.seed);
    return s;
}

std::uint64_t path_seed(std::uint64_t master, std::size_t slice, std::size_t path, std::size_t per_slice) {
    return derive_seed(master, kDomainPath, slice * per_slice + path);
}

std::vector<EnsembleStore> simulate_ensembles(const EnsembleSpec& spec, unsigned workers) {
    if (spec.betas.empty()) throw ConfigError("simulate: beta list is empty");
    if (spec.paths_per_slice == 0) throw ConfigError("simulate: paths_per_slice must be positive");
    const auto geo = std::make_shared<const lpp::LatticeGeometry>(spec.geometry);
    const std::vector<double> xs(geo->x_grid().begin(), geo->x_grid().end());

    auto run = [&](std::size_t i) {
        const std::size_t s = spec.first_slice + i;
        const lpp::WeightField field(geo->field_extent(), lpp::replica_field_seed(spec.seed, s));
        const auto slice = lpp::landscape_slice(field, geo, s);
        SliceOutput out;
        out.heights.resize(spec.betas.size());
        for (std::size_t p = 0; p < spec.paths_per_slice; ++p) {
            const auto path = sample_path(geo->z_grid(), path_seed(spec.seed, s, p, spec.paths_per_slice));
            for (std::size_t b = 0; b < spec.betas.size(); ++b) {
                auto h = compose_height(slice, path, spec.betas[b]);
                h.replica_id = s * spec.paths_per_slice + p;
                out.heights[b].push_back(std::move(h));
            }
            // Only the values at the sinks are kept.
            const auto fine = refine(path, xs);
            BrownianPath at_x{xs, std::vector<double>(xs.size()), path.seed};
            for (std::size_t k = 0; k < xs.size(); ++k) at_x.values[k] = fine.at(xs[k]);
            out.paths.push_back(std::move(at_x));
        }
        return out;
    };
    const auto outs = parallel_map<SliceOutput>(spec.slices, workers, run);

    std::vector<EnsembleStore> stores;
    for (double beta : spec.betas) {
        stores.emplace_back(xs, std::vector<double>(geo->x_effective().begin(), geo->x_effective().end()), beta,
                            ensemble_fingerprint(spec, beta));
    }
    for (std::size_t i = 0; i < outs.size(); ++i) {
        const auto batch = static_cast<std::uint32_t>(spec.first_slice + i);
        for (std::size_t b = 0; b < stores.size(); ++b)
            for (std::size_t p = 0; p < outs[i].paths.size(); ++p) stores[b].add(outs[i].heights[b][p], outs[i].paths[p], batch);
    }
    return stores;
}

OriginArgmax simulate_origin_argmax(const EnsembleSpec& spec, double beta, unsigned workers) {
    auto g = spec.geometry;
    g.x_grid = {0.0};
    const auto geo = std::make_shared<const lpp::LatticeGeometry>(g);
    struct Out {
        std::vector<double> Z;
        std::size_t censored = 0;
    };
    const auto outs = parallel_map<Out>(spec.slices, workers, [&](std::size_t i) {
        const std::size_t s = spec.first_slice + i;
        const lpp::WeightField field(geo->field_extent(), lpp::replica_field_seed(spec.seed, s));
        const auto slice = lpp::landscape_slice(field, geo, s);
        Out o;
        for (std::size_t p = 0; p < spec.paths_per_slice; ++p) {
            const auto path = sample_path(geo->z_grid(), path_seed(spec.seed, s, p, spec.paths_per_slice));
            const auto h = compose_height(slice, path, beta);
            if (h.censored[0]) {
                ++o.censored;
            } else {
                o.Z.push_back(h.Z[0]);
            }
        }
        return o;
    });
    OriginArgmax r;
    for (std::size_t i = 0; i < outs.size(); ++i) {
        for (double z : outs[i].Z) {
            r.Z.push_back(z);
            r.batch.push_back(static_cast<std::uint32_t>(spec.first_slice + i));
        }
        r.censored += outs[i].censored;
    }
    return r;
}

}  // namespace kpz
