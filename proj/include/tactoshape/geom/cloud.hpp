#pragma once

#include "tactoshape/geom/transform.hpp"
#include "tactoshape/geom/vec3.hpp"

#include <vector>

namespace tact::geom {

// Point set with optional per-point unit normals. `normals` is either empty
// or the same length as `points`.
struct PointCloud {
    std::vector<Vec3> points;
    std::vector<Vec3> normals;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    bool has_normals() const { return !normals.empty(); }

    void append(const PointCloud& other);

    Aabb bounds() const;
    Vec3 centroid() const;

    // Rigid motion applied to points; normals are rotated only.
    PointCloud transformed(const RigidTransform& tf) const;
};

// Structure-of-arrays view used by the distance kernels.
struct CloudSoa {
    std::vector<double> xs, ys, zs;

    explicit CloudSoa(const std::vector<Vec3>& pts);
    std::size_t size() const { return xs.size(); }
};

} // namespace tact::geom
