#pragma once

#include "tactoshape/geom/cloud.hpp"
#include "tactoshape/geom/mesh.hpp"
#include "tactoshape/geom/vec3.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace tact::geom {

// Greedy farthest-point subsampling: repeatedly add the point with the
// largest distance to the already-selected set, starting from start_index.
// Distance ties resolve to the lowest point index, so the result is a pure
// function of (points, m, start_index). Throws when m exceeds the cloud size
// or the cloud is empty.
std::vector<std::size_t> farthest_point_sample(const std::vector<Vec3>& points,
                                               std::size_t m,
                                               std::size_t start_index);

// PCA normal per point from its k nearest neighbors (smallest-eigenvector of
// the local covariance), oriented so each normal faces the viewpoint.
// Collinear neighborhoods yield a deterministic orthogonal to the line.
// Throws when the cloud has fewer than k points.
std::vector<Vec3> estimate_normals(const std::vector<Vec3>& points,
                                   std::size_t k, const Vec3& viewpoint);

// Area-uniform surface samples with face normals (unit, per winding).
PointCloud sample_mesh_surface(const TriangleMesh& mesh, std::size_t n,
                               std::mt19937_64& rng);
PointCloud sample_mesh_surface(const TriangleMesh& mesh, std::size_t n,
                               std::uint64_t seed);

// Indices of the k nearest neighbors of points[query] (self excluded),
// ordered by ascending distance; ties by index.
std::vector<std::size_t> knn_indices(const std::vector<Vec3>& points,
                                     std::size_t query, std::size_t k);

// Smallest pairwise distance in the set (infinity for < 2 points).
double min_pairwise_distance(const std::vector<Vec3>& points);

// Mean distance to the nearest other point; scale estimate for sampling
// noise around a batch. Throws for < 2 points.
double mean_nn_spacing(const std::vector<Vec3>& points);

} // namespace tact::geom
