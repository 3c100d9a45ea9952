#pragma once

#include "tactoshape/field/field.hpp"
#include "tactoshape/geom/cloud.hpp"
#include "tactoshape/geom/vec3.hpp"

#include <random>
#include <span>
#include <vector>

namespace tact::completion {

using field::FieldGrads;
using field::FieldParams;
using field::FieldTape;
using geom::Aabb;
using geom::PointCloud;
using geom::Vec3;

struct LossWeights {
    double lambda_eikonal = 0.1;
    double alpha_latent = 1e-3;
    double w_free = 1.0;
    double free_margin = 0.001; // meters
    // Free-space rule. false: every free point with f < margin contributes
    // |f| (the rule as stated, which also pulls slightly-positive distances
    // toward zero). true: hinge max(0, margin - f) instead.
    bool free_hinge = false;

    void validate() const; // throws when any weight or the margin is negative
};

struct LossBreakdown {
    double data = 0.0;
    double eikonal = 0.0;
    double latent = 0.0;
    double free = 0.0;
    double total = 0.0;
};

// Points observed (or swept) as empty space around one object; positions
// only, all within the crop radius of the object center.
struct FreeSpaceSet {
    std::vector<Vec3> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }

    // Throws when a point violates the crop-radius invariant.
    void validate_radius(const Vec3& center, double radius = 0.20) const;
};

// Where the Eikonal expectation is sampled: half uniform over the inflated
// evidence box, half Gaussian around the current surface batch with the
// evidence cloud's mean nearest-neighbor spacing as standard deviation.
struct OffSurfaceSampler {
    Aabb box;
    double gaussian_std = 0.005;
    std::size_t uniform_count = 256;
    std::size_t gaussian_count = 256;

    // Derives box and spread from the evidence cloud.
    static OffSurfaceSampler for_evidence(const PointCloud& evidence,
                                          double box_inflate,
                                          std::size_t uniform_count,
                                          std::size_t gaussian_count);

    void validate() const; // total count must be positive
    std::vector<Vec3> sample(const std::vector<Vec3>& around,
                             std::mt19937_64& rng) const;
};

// --- individual terms -------------------------------------------------------

// Mean over the batch of |f(x_c)| + ||grad f(x_c) - n_c||. Throws on an
// empty batch or size mismatch.
double data_term(const FieldParams& params, std::span<const double> z,
                 const std::vector<Vec3>& points,
                 const std::vector<Vec3>& normals);

// Mean over the samples of (||grad f|| - 1)^2; zero for no samples.
double eikonal_term(const FieldParams& params, std::span<const double> z,
                    const std::vector<Vec3>& points);

// Sum over free points with f < margin of |f| (or the hinge variant).
double free_space_term(const FieldParams& params, std::span<const double> z,
                       const std::vector<Vec3>& free_points,
                       double margin = 0.001, bool hinge = false);

// Plain L2 norm of the latent code.
double latent_term(std::span<const double> z);

// data + lambda * eikonal + alpha * ||z|| + w_free * free; the breakdown
// stores the unweighted terms and the weighted total.
LossBreakdown total_loss(const FieldParams& params, std::span<const double> z,
                         const std::vector<Vec3>& surface_points,
                         const std::vector<Vec3>& surface_normals,
                         const std::vector<Vec3>& off_points,
                         const std::vector<Vec3>& free_points,
                         const LossWeights& weights);

// Same values as total_loss (term by term, bit for bit) while accumulating
// the exact gradient of the weighted total into `acc` (theta left untouched
// when with_params is false). The surface batch may be empty during
// free-space-only updates.
LossBreakdown loss_with_grads(const FieldParams& params,
                              std::span<const double> z,
                              const std::vector<Vec3>& surface_points,
                              const std::vector<Vec3>& surface_normals,
                              const std::vector<Vec3>& off_points,
                              const std::vector<Vec3>& free_points,
                              const LossWeights& weights, FieldTape& tape,
                              FieldGrads& acc, bool with_params);

} // namespace tact::completion
