#include "tactoshape/completion/completion.hpp"

#include "tactoshape/geom/marching_cubes.hpp"
#include "tactoshape/geom/sampling.hpp"
#include "tactoshape/util/seed.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

namespace tact::completion {

namespace {

std::vector<std::size_t> batch_indices(const std::vector<geom::Vec3>& points,
                                       std::size_t batch, BatchMode mode,
                                       std::mt19937_64& rng) {
    const std::size_t n = points.size();
    if (batch >= n) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        return idx;
    }
    if (mode == BatchMode::fps) {
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        return geom::farthest_point_sample(points, batch, pick(rng));
    }
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::vector<std::size_t> idx;
    idx.reserve(batch);
    std::sample(all.begin(), all.end(), std::back_inserter(idx), batch, rng);
    return idx;
}

void gather(const geom::PointCloud& cloud, const std::vector<std::size_t>& idx,
            std::vector<geom::Vec3>& pts, std::vector<geom::Vec3>& nrms) {
    pts.clear();
    nrms.clear();
    pts.reserve(idx.size());
    nrms.reserve(idx.size());
    for (std::size_t i : idx) {
        pts.push_back(cloud.points[i]);
        nrms.push_back(cloud.normals[i]);
    }
}

// Flat view of every weight and bias vector, in a fixed order, so one Adam
// instance can step the whole decoder.
struct ParamBlocks {
    std::vector<std::size_t> sizes;
    std::vector<double*> values;

    explicit ParamBlocks(field::FieldParams& p) {
        for (auto& w : p.weights) {
            sizes.push_back(w.size());
            values.push_back(w.data());
        }
        for (auto& b : p.biases) {
            sizes.push_back(b.size());
            values.push_back(b.data());
        }
    }

    std::vector<const double*> grads_of(const field::FieldGrads& g) const {
        std::vector<const double*> r;
        r.reserve(sizes.size());
        for (const auto& w : g.weights)
            r.push_back(w.data());
        for (const auto& b : g.biases)
            r.push_back(b.data());
        return r;
    }
};

} // namespace

void InferConfig::validate() const {
    optim.validate();
    if (batch_size == 0)
        throw std::invalid_argument("inference: batch size must be positive");
    if (off_uniform + off_gaussian == 0)
        throw std::invalid_argument(
            "inference: the eikonal term needs off-surface samples");
    if (box_inflate < 0.0)
        throw std::invalid_argument("inference: box inflation must be >= 0");
}

void TrainConfig::validate() const {
    optim.validate();
    if (batch_size == 0)
        throw std::invalid_argument("training: batch size must be positive");
    if (off_uniform + off_gaussian == 0)
        throw std::invalid_argument(
            "training: the eikonal term needs off-surface samples");
    if (box_inflate < 0.0)
        throw std::invalid_argument("training: box inflation must be >= 0");
}

field::Checkpoint train_autodecoder(const field::FieldConfig& config,
                                    const std::vector<TrainShape>& shapes,
                                    const TrainConfig& train,
                                    const LossWeights& weights,
                                    std::uint64_t seed,
                                    std::vector<EpochLog>* log) {
    config.validate();
    train.validate();
    weights.validate();
    if (shapes.empty())
        throw std::invalid_argument("training needs at least one shape");
    std::set<std::string> ids;
    for (const auto& s : shapes) {
        if (s.surface.size() < 2)
            throw std::invalid_argument("shape '" + s.id +
                                        "' has fewer than two surface points");
        if (!s.surface.has_normals())
            throw std::invalid_argument("shape '" + s.id + "' has no normals");
        if (!ids.insert(s.id).second)
            throw std::invalid_argument("duplicate shape id '" + s.id + "'");
    }

    field::Checkpoint ck;
    ck.params = field::geometric_init(
        config, util::mix_seed(seed, util::hash_name("decoder")));

    // Latent seeds hang off the shape id, so a shape's starting code does
    // not depend on corpus order.
    const std::size_t n_shapes = shapes.size();
    std::vector<std::vector<double>> latents(n_shapes);
    std::vector<OffSurfaceSampler> samplers;
    samplers.reserve(n_shapes);
    for (std::size_t i = 0; i < n_shapes; ++i) {
        latents[i] = field::init_latent(
            config.latent_dim,
            util::mix_seed(seed, util::hash_name(shapes[i].id)));
        samplers.push_back(OffSurfaceSampler::for_evidence(
            shapes[i].surface, train.box_inflate, train.off_uniform,
            train.off_gaussian));
    }

    ParamBlocks theta(ck.params);
    Adam theta_opt(train.optim, theta.sizes);
    std::vector<Adam> z_opt;
    z_opt.reserve(n_shapes);
    for (std::size_t i = 0; i < n_shapes; ++i)
        z_opt.emplace_back(train.optim,
                           std::vector<std::size_t>{config.latent_dim});

    std::mt19937_64 rng(util::mix_seed(seed, util::hash_name("train-loop")));
    field::FieldTape tape(config);
    field::FieldGrads acc(config);
    std::vector<std::size_t> order(n_shapes);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<geom::Vec3> pts, nrms;
    const std::vector<geom::Vec3> no_free;

    for (std::size_t epoch = 0; epoch < train.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        LossBreakdown mean;
        for (std::size_t s : order) {
            const auto idx = batch_indices(shapes[s].surface.points,
                                           train.batch_size, BatchMode::fps,
                                           rng);
            gather(shapes[s].surface, idx, pts, nrms);
            const auto off = samplers[s].sample(pts, rng);
            acc.zero();
            LossBreakdown bd;
            try {
                bd = loss_with_grads(ck.params, latents[s], pts, nrms, off,
                                     no_free, weights, tape, acc, true);
            } catch (const std::runtime_error& e) {
                throw std::runtime_error(
                    "training aborted at epoch " + std::to_string(epoch) +
                    ", shape '" + shapes[s].id + "': " + e.what());
            }
            if (!std::isfinite(bd.total))
                throw std::runtime_error(
                    "training diverged at epoch " + std::to_string(epoch) +
                    ", shape '" + shapes[s].id + "' (non-finite loss)");
            theta_opt.step(theta.values, theta.grads_of(acc));
            z_opt[s].step({latents[s].data()}, {acc.latent.data()});
            mean.data += bd.data;
            mean.eikonal += bd.eikonal;
            mean.latent += bd.latent;
            mean.free += bd.free;
            mean.total += bd.total;
        }
        if (log) {
            const double inv = 1.0 / static_cast<double>(n_shapes);
            mean.data *= inv;
            mean.eikonal *= inv;
            mean.latent *= inv;
            mean.free *= inv;
            mean.total *= inv;
            log->push_back({epoch, mean});
        }
    }

    for (std::size_t i = 0; i < n_shapes; ++i)
        ck.latents.emplace(shapes[i].id, std::move(latents[i]));
    return ck;
}

std::vector<double> infer_latent(const field::FieldParams& params,
                                 const std::vector<double>& z_init,
                                 const geom::PointCloud& evidence,
                                 const std::vector<geom::Vec3>& free_points,
                                 const LossWeights& weights,
                                 const InferConfig& config, std::uint64_t seed,
                                 const InferStepFn& on_step,
                                 LossBreakdown* final_out) {
    params.validate();
    config.validate();
    weights.validate();
    if (z_init.size() != params.config.latent_dim)
        throw std::invalid_argument("latent size does not match the network");
    if (config.steps == 0) {
        if (final_out)
            *final_out = {};
        return z_init;
    }
    if (evidence.size() < 2)
        throw std::invalid_argument(
            "latent inference needs at least two evidence points");
    if (!evidence.has_normals())
        throw std::invalid_argument("evidence cloud must carry normals");

    std::mt19937_64 rng(util::mix_seed(seed, util::hash_name("infer")));
    const auto sampler = OffSurfaceSampler::for_evidence(
        evidence, config.box_inflate, config.off_uniform, config.off_gaussian);

    std::vector<geom::Vec3> free = free_points;
    if (free.size() > config.free_space_cap) {
        std::vector<geom::Vec3> capped;
        capped.reserve(config.free_space_cap);
        std::sample(free.begin(), free.end(), std::back_inserter(capped),
                    config.free_space_cap, rng);
        free = std::move(capped);
    }

    std::vector<double> z = z_init;
    Adam opt(config.optim, {z.size()});
    field::FieldTape tape(params.config);
    field::FieldGrads acc(params.config);
    std::vector<geom::Vec3> pts, nrms;
    LossBreakdown bd;

    for (std::size_t step = 0; step < config.steps; ++step) {
        const auto idx = batch_indices(evidence.points, config.batch_size,
                                       config.batch_mode, rng);
        gather(evidence, idx, pts, nrms);
        const auto off = sampler.sample(pts, rng);
        acc.zero();
        bd = loss_with_grads(params, z, pts, nrms, off, free, weights, tape,
                             acc, /*with_params=*/false);
        if (!std::isfinite(bd.total))
            throw std::runtime_error("latent inference diverged at step " +
                                     std::to_string(step));
        opt.step({z.data()}, {acc.latent.data()});
        if (on_step)
            on_step(step, bd);
    }
    if (final_out)
        *final_out = bd;
    return z;
}

SurfaceEstimate extract_surface_estimate(const field::FieldParams& params,
                                         const std::vector<double>& z,
                                         const geom::Aabb& box,
                                         std::uint32_t n) {
    params.validate();
    if (z.size() != params.config.latent_dim)
        throw std::invalid_argument("latent size does not match the network");
    if (n < 2)
        throw std::invalid_argument(
            "extraction grid needs at least two samples per axis");
    const geom::Vec3 ext = box.extent();
    if (!box.valid() || !(ext.x > 0.0) || !(ext.y > 0.0) || !(ext.z > 0.0))
        throw std::invalid_argument(
            "extraction box must have positive extent");

    geom::FieldGrid grid;
    grid.origin = box.lo;
    grid.nx = grid.ny = grid.nz = n;
    grid.spacing = {ext.x / (n - 1), ext.y / (n - 1), ext.z / (n - 1)};
    grid.values.resize(static_cast<std::size_t>(n) * n * n);

    field::FieldTape tape(params.config);
    for (std::uint32_t k = 0; k < n; ++k)
        for (std::uint32_t j = 0; j < n; ++j)
            for (std::uint32_t i = 0; i < n; ++i)
                grid.values[grid.index(i, j, k)] =
                    tape.value_only(params, z, grid.point(i, j, k));

    geom::TriangleMesh mesh = geom::marching_cubes(grid, 0.0);
    if (mesh.vertices.empty())
        throw std::runtime_error("no surface in grid");

    SurfaceEstimate est;
    est.mesh = std::move(mesh);
    est.points.points = est.mesh.vertices;
    est.points.normals.reserve(est.mesh.vertices.size());
    est.uncertainty.reserve(est.mesh.vertices.size());
    for (const geom::Vec3& v : est.mesh.vertices) {
        const auto& ev = tape.forward(params, z, v);
        const double gn = geom::norm(ev.grad_x);
        est.uncertainty.push_back((gn - 1.0) * (gn - 1.0));
        est.points.normals.push_back(geom::normalized_or(ev.grad_x, {0, 0, 1}));
    }
    return est;
}

geom::Aabb extraction_box(const geom::PointCloud& evidence, double inflate,
                          double min_extent) {
    if (evidence.empty())
        throw std::invalid_argument("extraction box needs evidence points");
    return evidence.bounds().inflated(inflate).with_min_extent(min_extent);
}

} // namespace tact::completion
