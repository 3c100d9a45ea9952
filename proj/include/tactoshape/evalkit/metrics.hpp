#pragma once

// Reconstruction quality metrics: volumetric Jaccard overlap, symmetric
// Chamfer distance, and relative surface-area deviation.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tactoshape/geom/cloud.hpp"
#include "tactoshape/geom/mesh.hpp"
#include "tactoshape/geom/voxel.hpp"

namespace tact::evalkit {

// One metrics row of an experiment trajectory. `touch` counts simulated
// touches executed so far; `wall_time_s` is simulated elapsed time.
// Metric fields may be NaN when a reconstruction was unavailable.
struct MetricRecord {
    std::size_t touch = 0;
    double wall_time_s = 0.0;
    double jaccard = 0.0;
    double chamfer_m = 0.0;
    double area_dev = 0.0;
    double mean_uncertainty = 0.0;
};

// Jaccard similarity |A n B| / |A u B| of two voxelizations. The grids must
// share the same spec. Two empty grids count as identical (1.0).
double jaccard_similarity(const geom::VoxelGrid& a, const geom::VoxelGrid& b);

// Voxelizes both meshes on a common grid covering the union of their bounds
// (inflated 5%) and compares occupancy. `resolution` is the cell count along
// each axis.
double jaccard_similarity(const geom::TriangleMesh& a, const geom::TriangleMesh& b,
                          std::size_t resolution = 40);

// Symmetric Chamfer distance in meters:
//   0.5 * (mean_a min_b |a-b| + mean_b min_a |b-a|).
// Throws std::invalid_argument if either cloud is empty.
double chamfer_distance(const std::vector<geom::Vec3>& a, const std::vector<geom::Vec3>& b);

// Samples `samples` area-uniform surface points from each mesh (seeded, so
// results are reproducible) and measures the point-cloud Chamfer distance.
double chamfer_distance(const geom::TriangleMesh& a, const geom::TriangleMesh& b,
                        std::size_t samples = 2048, std::uint64_t seed = 0);

// Relative surface-area error (area(recon) - area(truth)) / area(truth).
// Signed: positive means the reconstruction overestimates area.
double area_deviation(const geom::TriangleMesh& recon, const geom::TriangleMesh& truth);

}  // namespace tact::evalkit
