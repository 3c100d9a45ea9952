#pragma once

#include "tactoshape/geom/mesh.hpp"
#include "tactoshape/geom/vec3.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace tact::geom {

struct Ray {
    Vec3 origin;
    Vec3 dir; // unit length expected
};

struct RayHit {
    double t = 0.0;       // distance along the ray
    Vec3 point;           // origin + t * dir
    Vec3 normal;          // unit, oriented against the ray (dot(normal, dir) < 0)
    std::uint32_t tri = 0;
    // Barycentric coordinates of the hit inside the triangle (u for vertex 1,
    // v for vertex 2); used by callers that need to detect grazing hits.
    double u = 0.0;
    double v = 0.0;
};

// Median-split bounding volume hierarchy over the triangles of one mesh.
// Built once per mesh in its local frame; scene code moves rays into the
// local frame when the mesh is posed, rather than rebuilding.
class Bvh {
  public:
    explicit Bvh(const TriangleMesh& mesh);

    // Nearest intersection with t in (t_min, t_max). Degenerate (zero-area)
    // triangles never intersect.
    std::optional<RayHit> raycast(const Ray& ray, double t_max = 1e300,
                                  double t_min = 1e-9) const;

    // All intersections with t in (t_min, t_max), sorted by t ascending.
    std::vector<RayHit> raycast_all(const Ray& ray, double t_max = 1e300,
                                    double t_min = 1e-9) const;

    const TriangleMesh& mesh() const { return *mesh_; }

  private:
    struct Node {
        Aabb box;
        std::int32_t left = -1;   // child index, or -1 for leaves
        std::int32_t right = -1;
        std::uint32_t first = 0;  // leaf triangle range in order_
        std::uint32_t count = 0;
    };

    const TriangleMesh* mesh_;
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> order_;

    std::int32_t build(std::vector<std::uint32_t>& tris, std::size_t begin,
                       std::size_t end, const std::vector<Vec3>& centroids);

    template <typename Fn>
    void traverse(const Ray& ray, double& t_max, double t_min,
                  Fn&& on_hit) const;
};

// Convenience wrapper: builds a throwaway BVH. Prefer holding a Bvh when
// casting many rays against the same mesh.
std::optional<RayHit> ray_mesh_intersect(const TriangleMesh& mesh,
                                         const Ray& ray, double t_max = 1e300,
                                         double t_min = 1e-9);

} // namespace tact::geom
