#include "tactoshape/geom/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tact::geom {

namespace {

// Moeller-Trumbore. Returns false for misses and for degenerate triangles.
bool intersect_triangle(const Ray& ray, const Vec3& a, const Vec3& b,
                        const Vec3& c, double t_min, double t_max, double& t,
                        double& u, double& v) {
    const Vec3 e1 = b - a;
    const Vec3 e2 = c - a;
    const Vec3 pvec = cross(ray.dir, e2);
    const double det = dot(e1, pvec);
    // Scale-aware degeneracy / parallelism cutoff.
    const double eps = 1e-14 * std::sqrt(norm_sq(e1) * norm_sq(e2)) + 1e-300;
    if (std::abs(det) < eps)
        return false;
    const double inv_det = 1.0 / det;
    const Vec3 tvec = ray.origin - a;
    u = dot(tvec, pvec) * inv_det;
    if (u < 0.0 || u > 1.0)
        return false;
    const Vec3 qvec = cross(tvec, e1);
    v = dot(ray.dir, qvec) * inv_det;
    if (v < 0.0 || u + v > 1.0)
        return false;
    t = dot(e2, qvec) * inv_det;
    return t > t_min && t < t_max;
}

// Slab test; also true when the origin is inside the box.
bool intersect_aabb(const Aabb& box, const Ray& ray, double t_max) {
    double t0 = 0.0;
    double t1 = t_max;
    for (std::size_t axis = 0; axis < 3; ++axis) {
        const double inv = 1.0 / ray.dir[axis];
        double near = (box.lo[axis] - ray.origin[axis]) * inv;
        double far = (box.hi[axis] - ray.origin[axis]) * inv;
        if (inv < 0.0)
            std::swap(near, far);
        t0 = std::max(t0, near);
        t1 = std::min(t1, far);
        if (t0 > t1)
            return false;
    }
    return true;
}

} // namespace

Bvh::Bvh(const TriangleMesh& mesh) : mesh_(&mesh) {
    mesh.validate();
    if (mesh.triangles.empty())
        throw std::invalid_argument("cannot build a BVH over an empty mesh");
    const std::size_t n = mesh.triangle_count();
    std::vector<Vec3> centroids(n);
    for (std::size_t i = 0; i < n; ++i)
        centroids[i] = (mesh.triangle_vertex(i, 0) + mesh.triangle_vertex(i, 1) +
                        mesh.triangle_vertex(i, 2)) /
                       3.0;
    std::vector<std::uint32_t> tris(n);
    for (std::size_t i = 0; i < n; ++i)
        tris[i] = static_cast<std::uint32_t>(i);
    nodes_.reserve(2 * n);
    order_.reserve(n);
    build(tris, 0, n, centroids);
}

std::int32_t Bvh::build(std::vector<std::uint32_t>& tris, std::size_t begin,
                        std::size_t end,
                        const std::vector<Vec3>& centroids) {
    Node node;
    node.box = Aabb::empty();
    for (std::size_t i = begin; i < end; ++i)
        for (int c = 0; c < 3; ++c)
            node.box.grow(mesh_->triangle_vertex(tris[i], c));

    constexpr std::size_t kLeafSize = 4;
    const std::int32_t index = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= kLeafSize) {
        nodes_[static_cast<std::size_t>(index)].first =
            static_cast<std::uint32_t>(order_.size());
        nodes_[static_cast<std::size_t>(index)].count =
            static_cast<std::uint32_t>(end - begin);
        for (std::size_t i = begin; i < end; ++i)
            order_.push_back(tris[i]);
        return index;
    }

    const Vec3 ext = node.box.extent();
    std::size_t axis = 0;
    if (ext.y > ext[axis])
        axis = 1;
    if (ext.z > ext[axis])
        axis = 2;
    const std::size_t mid = (begin + end) / 2;
    std::nth_element(tris.begin() + static_cast<std::ptrdiff_t>(begin),
                     tris.begin() + static_cast<std::ptrdiff_t>(mid),
                     tris.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::uint32_t lhs, std::uint32_t rhs) {
                         return centroids[lhs][axis] < centroids[rhs][axis];
                     });
    const std::int32_t left = build(tris, begin, mid, centroids);
    const std::int32_t right = build(tris, mid, end, centroids);
    nodes_[static_cast<std::size_t>(index)].left = left;
    nodes_[static_cast<std::size_t>(index)].right = right;
    return index;
}

template <typename Fn>
void Bvh::traverse(const Ray& ray, double& t_max, double t_min,
                   Fn&& on_hit) const {
    // The callback may shrink t_max (nearest-hit search); the alias is read
    // on every box and triangle test, so tightening prunes later subtrees.
    std::int32_t stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[static_cast<std::size_t>(stack[--top])];
        if (!intersect_aabb(node.box, ray, t_max))
            continue;
        if (node.left < 0) {
            for (std::uint32_t i = 0; i < node.count; ++i) {
                const std::uint32_t tri = order_[node.first + i];
                double t, u, v;
                if (intersect_triangle(ray, mesh_->triangle_vertex(tri, 0),
                                       mesh_->triangle_vertex(tri, 1),
                                       mesh_->triangle_vertex(tri, 2), t_min,
                                       t_max, t, u, v))
                    on_hit(tri, t, u, v);
            }
        } else {
            stack[top++] = node.left;
            stack[top++] = node.right;
        }
    }
}

std::optional<RayHit> Bvh::raycast(const Ray& ray, double t_max,
                                   double t_min) const {
    std::optional<RayHit> best;
    double closest = t_max;
    traverse(ray, closest, t_min,
             [&](std::uint32_t tri, double t, double u, double v) {
                 if (t < closest) {
                     closest = t;
                     RayHit hit;
                     hit.t = t;
                     hit.tri = tri;
                     hit.u = u;
                     hit.v = v;
                     best = hit;
                 }
             });
    if (best) {
        best->point = ray.origin + ray.dir * best->t;
        Vec3 n = normalized_or(mesh_->triangle_normal_raw(best->tri),
                               -ray.dir);
        if (dot(n, ray.dir) > 0.0)
            n = -n;
        best->normal = n;
    }
    return best;
}

std::vector<RayHit> Bvh::raycast_all(const Ray& ray, double t_max,
                                     double t_min) const {
    std::vector<RayHit> hits;
    double limit = t_max;
    traverse(ray, limit, t_min,
             [&](std::uint32_t tri, double t, double u, double v) {
                 RayHit hit;
                 hit.t = t;
                 hit.tri = tri;
                 hit.u = u;
                 hit.v = v;
                 hit.point = ray.origin + ray.dir * t;
                 Vec3 n = normalized_or(mesh_->triangle_normal_raw(tri),
                                        -ray.dir);
                 if (dot(n, ray.dir) > 0.0)
                     n = -n;
                 hit.normal = n;
                 hits.push_back(hit);
             });
    std::sort(hits.begin(), hits.end(),
              [](const RayHit& a, const RayHit& b) { return a.t < b.t; });
    return hits;
}

std::optional<RayHit> ray_mesh_intersect(const TriangleMesh& mesh,
                                         const Ray& ray, double t_max,
                                         double t_min) {
    return Bvh(mesh).raycast(ray, t_max, t_min);
}

} // namespace tact::geom
