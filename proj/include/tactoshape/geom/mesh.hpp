#pragma once

#include "tactoshape/geom/transform.hpp"
#include "tactoshape/geom/vec3.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace tact::geom {

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;

    std::size_t vertex_count() const { return vertices.size(); }
    std::size_t triangle_count() const { return triangles.size(); }
    bool empty() const { return triangles.empty(); }

    Aabb bounds() const;

    Vec3 triangle_vertex(std::size_t tri, int corner) const {
        return vertices[triangles[tri][static_cast<std::size_t>(corner)]];
    }

    // Geometric (unnormalized) triangle normal: (b-a) x (c-a).
    Vec3 triangle_normal_raw(std::size_t tri) const;

    double triangle_area(std::size_t tri) const;

    TriangleMesh transformed(const RigidTransform& tf) const;

    // Throws std::invalid_argument on out-of-range indices or non-finite
    // vertices.
    void validate() const;
};

// Sum of triangle areas.
double mesh_area(const TriangleMesh& mesh);

// Sum of signed tetrahedron volumes; magnitude is the enclosed volume for a
// watertight mesh, the sign reflects the triangle winding.
double mesh_signed_volume(const TriangleMesh& mesh);

// True when every edge is shared by exactly two triangles.
bool mesh_is_watertight(const TriangleMesh& mesh);

} // namespace tact::geom
