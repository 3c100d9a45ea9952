#pragma once

// Rigid pose re-estimation by point-to-point iterative closest point:
// grid-hashed nearest neighbors with a fixed rejection gate and a
// closed-form SVD fit per iteration. Cheap enough to run per touch.

#include "tactoshape/geom/cloud.hpp"
#include "tactoshape/geom/transform.hpp"

#include <cstddef>
#include <vector>

namespace tact::reg {

using geom::PointCloud;
using geom::RigidTransform;

struct IcpParams {
    std::size_t max_iterations = 50;
    double reject_distance = 0.02; // correspondence gate, meters
    double tolerance = 1e-7;       // stop when RMSE improves less than this

    void validate() const; // throws std::invalid_argument
};

struct IcpResult {
    RigidTransform transform; // source -> target
    double rmse = 0.0;        // over gated matches, meters
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> rmse_history; // one entry per iteration
};

// Aligns `source` onto `target`. Starts from centroid alignment, then
// alternates gated nearest-neighbor matching with a det-corrected SVD fit
// of the full source->target transform. Throws std::invalid_argument for
// clouds of fewer than 3 points and std::runtime_error ("rank-deficient")
// when the matched points are collinear.
IcpResult icp_register(const PointCloud& source, const PointCloud& target,
                       const IcpParams& params = {});

} // namespace tact::reg
