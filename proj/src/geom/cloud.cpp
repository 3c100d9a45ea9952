#include "tactoshape/geom/cloud.hpp"

#include <stdexcept>

namespace tact::geom {

void PointCloud::append(const PointCloud& other) {
    if (has_normals() != other.has_normals() && !empty() && !other.empty())
        throw std::invalid_argument(
            "cannot append: one cloud has normals, the other does not");
    points.insert(points.end(), other.points.begin(), other.points.end());
    normals.insert(normals.end(), other.normals.begin(), other.normals.end());
}

Aabb PointCloud::bounds() const {
    Aabb box = Aabb::empty();
    for (const Vec3& p : points)
        box.grow(p);
    return box;
}

Vec3 PointCloud::centroid() const {
    if (points.empty())
        throw std::invalid_argument("centroid of an empty cloud");
    Vec3 c{0, 0, 0};
    for (const Vec3& p : points)
        c += p;
    return c / static_cast<double>(points.size());
}

PointCloud PointCloud::transformed(const RigidTransform& tf) const {
    PointCloud out;
    out.points.reserve(points.size());
    for (const Vec3& p : points)
        out.points.push_back(tf.apply(p));
    out.normals.reserve(normals.size());
    for (const Vec3& n : normals)
        out.normals.push_back(tf.rotate(n));
    return out;
}

CloudSoa::CloudSoa(const std::vector<Vec3>& pts) {
    xs.resize(pts.size());
    ys.resize(pts.size());
    zs.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        xs[i] = pts[i].x;
        ys[i] = pts[i].y;
        zs[i] = pts[i].z;
    }
}

} // namespace tact::geom
