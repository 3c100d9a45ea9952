#pragma once

// Shape completion on top of the implicit field: joint decoder training over
// a shape corpus, per-object latent inference against accumulated evidence,
// and explicit surface extraction with per-vertex uncertainty.

#include "tactoshape/completion/loss.hpp"
#include "tactoshape/completion/optim.hpp"
#include "tactoshape/field/checkpoint.hpp"
#include "tactoshape/field/field.hpp"
#include "tactoshape/geom/cloud.hpp"
#include "tactoshape/geom/mesh.hpp"
#include "tactoshape/geom/voxel.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace tact::completion {

enum class BatchMode : std::uint8_t {
    fps,    // farthest point sampling, spatially even coverage
    random, // uniform without replacement
};

// Latent inference against evidence for one object.
struct InferConfig {
    std::size_t steps = 300;
    std::size_t batch_size = 512;     // surface points per step
    BatchMode batch_mode = BatchMode::fps;
    std::size_t free_space_cap = 4096; // subsample free points above this
    std::size_t off_uniform = 256;     // off-surface samples per step
    std::size_t off_gaussian = 256;
    double box_inflate = 0.2;          // off-surface box margin (fraction)
    OptimConfig optim{.lr = 1e-3};

    void validate() const;
};

// Joint decoder + latent-table training over a corpus of shapes.
struct TrainConfig {
    std::size_t epochs = 500;
    std::size_t batch_size = 512;
    std::size_t off_uniform = 256;
    std::size_t off_gaussian = 256;
    double box_inflate = 0.2;
    OptimConfig optim{.lr = 5e-4};

    void validate() const;
};

struct TrainShape {
    std::string id;
    geom::PointCloud surface; // must carry normals
};

struct EpochLog {
    std::size_t epoch = 0;
    LossBreakdown mean; // averaged over shapes this epoch
};

// Trains the decoder weights and one latent per shape from scratch
// (geometric init for the field, small random init for latents).
// Throws std::invalid_argument on an empty corpus or shapes without
// normals, and std::runtime_error naming the epoch and shape if the
// loss diverges (non-finite).
field::Checkpoint train_autodecoder(const field::FieldConfig& config,
                                    const std::vector<TrainShape>& shapes,
                                    const TrainConfig& train,
                                    const LossWeights& weights,
                                    std::uint64_t seed,
                                    std::vector<EpochLog>* log = nullptr);

// Optimizes a latent code against evidence with decoder weights frozen.
// steps == 0 returns z_init unchanged. The evidence cloud must carry
// normals. on_step, when set, receives (step index, loss breakdown)
// after each optimizer step.
using InferStepFn = std::function<void(std::size_t, const LossBreakdown&)>;

std::vector<double> infer_latent(const field::FieldParams& params,
                                 const std::vector<double>& z_init,
                                 const geom::PointCloud& evidence,
                                 const std::vector<geom::Vec3>& free_points,
                                 const LossWeights& weights,
                                 const InferConfig& config,
                                 std::uint64_t seed,
                                 const InferStepFn& on_step = {},
                                 LossBreakdown* final_out = nullptr);

// Explicit surface pulled from the field: mesh vertices with outward
// normals (normalized field gradient) and a per-vertex uncertainty
// u = (|grad f| - 1)^2, the local Eikonal residual.
struct SurfaceEstimate {
    geom::PointCloud points;            // mesh vertices + normals
    std::vector<double> uncertainty;    // one per vertex, >= 0
    geom::TriangleMesh mesh;
};

// Samples the field on an n^3 lattice over box and runs marching cubes
// at the zero level set. Throws std::runtime_error("no surface in grid")
// when the field does not change sign anywhere in the box.
SurfaceEstimate extract_surface_estimate(const field::FieldParams& params,
                                         const std::vector<double>& z,
                                         const geom::Aabb& box,
                                         std::uint32_t n = 64);

// Bounding box of the evidence inflated by a fraction per side, with a
// floor on the extent so degenerate (flat or tiny) evidence still yields
// a usable sampling volume.
geom::Aabb extraction_box(const geom::PointCloud& evidence,
                          double inflate = 0.25,
                          double min_extent = 0.02);

} // namespace tact::completion
