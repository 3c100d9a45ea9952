#include "tactoshape/geom/mesh.hpp"

#include <cstdint>
#include <stdexcept>
#include <unordered_map>

namespace tact::geom {

Aabb TriangleMesh::bounds() const {
    Aabb box = Aabb::empty();
    for (const Vec3& v : vertices)
        box.grow(v);
    return box;
}

Vec3 TriangleMesh::triangle_normal_raw(std::size_t tri) const {
    const Vec3 a = triangle_vertex(tri, 0);
    const Vec3 b = triangle_vertex(tri, 1);
    const Vec3 c = triangle_vertex(tri, 2);
    return cross(b - a, c - a);
}

double TriangleMesh::triangle_area(std::size_t tri) const {
    return 0.5 * norm(triangle_normal_raw(tri));
}

TriangleMesh TriangleMesh::transformed(const RigidTransform& tf) const {
    TriangleMesh out;
    out.vertices.reserve(vertices.size());
    for (const Vec3& v : vertices)
        out.vertices.push_back(tf.apply(v));
    out.triangles = triangles;
    return out;
}

void TriangleMesh::validate() const {
    const std::uint32_t n = static_cast<std::uint32_t>(vertices.size());
    for (const Vec3& v : vertices)
        if (!is_finite(v))
            throw std::invalid_argument("mesh has a non-finite vertex");
    for (const auto& t : triangles)
        for (int k = 0; k < 3; ++k)
            if (t[static_cast<std::size_t>(k)] >= n)
                throw std::invalid_argument(
                    "mesh triangle references a vertex out of range");
}

double mesh_area(const TriangleMesh& mesh) {
    double area = 0.0;
    for (std::size_t i = 0; i < mesh.triangle_count(); ++i)
        area += mesh.triangle_area(i);
    return area;
}

double mesh_signed_volume(const TriangleMesh& mesh) {
    double vol = 0.0;
    for (std::size_t i = 0; i < mesh.triangle_count(); ++i) {
        const Vec3 a = mesh.triangle_vertex(i, 0);
        const Vec3 b = mesh.triangle_vertex(i, 1);
        const Vec3 c = mesh.triangle_vertex(i, 2);
        vol += dot(a, cross(b, c)) / 6.0;
    }
    return vol;
}

bool mesh_is_watertight(const TriangleMesh& mesh) {
    if (mesh.triangles.empty())
        return false;
    std::unordered_map<std::uint64_t, int> edge_count;
    edge_count.reserve(mesh.triangles.size() * 3);
    for (const auto& t : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            std::uint64_t a = t[static_cast<std::size_t>(k)];
            std::uint64_t b = t[static_cast<std::size_t>((k + 1) % 3)];
            if (a == b)
                return false;
            if (a > b)
                std::swap(a, b);
            ++edge_count[(a << 32) | b];
        }
    }
    for (const auto& [edge, count] : edge_count)
        if (count != 2)
            return false;
    return true;
}

} // namespace tact::geom
