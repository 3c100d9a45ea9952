#include "tactoshape/sensim/scene.hpp"

#include <cmath>
#include <utility>

namespace tact::sensim {

SceneObject SceneObject::make(std::string id, TriangleMesh mesh,
                              const RigidTransform& pose,
                              bool exclude_from_metrics) {
    mesh.validate();
    SceneObject o;
    o.id = std::move(id);
    o.mesh = std::make_shared<TriangleMesh>(std::move(mesh));
    o.bvh = std::make_shared<geom::Bvh>(*o.mesh);
    o.pose = pose;
    o.exclude_from_metrics = exclude_from_metrics;
    return o;
}

TriangleMesh SceneObject::posed_mesh() const { return mesh->transformed(pose); }

Vec3 SceneObject::center() const {
    return pose.apply(mesh->bounds().center());
}

std::optional<RayHit> SceneObject::raycast(const Ray& world_ray,
                                           double t_max) const {
    const RigidTransform inv = geom::inverse(pose);
    const Ray local{inv.apply(world_ray.origin), inv.rotate(world_ray.dir)};
    auto hit = bvh->raycast(local, t_max);
    if (!hit)
        return std::nullopt;
    hit->point = pose.apply(hit->point);
    hit->normal = pose.rotate(hit->normal);
    return hit;
}

SceneObject* Scene::find(const std::string& id) {
    for (auto& o : objects)
        if (o.id == id)
            return &o;
    return nullptr;
}

const SceneObject* Scene::find(const std::string& id) const {
    for (const auto& o : objects)
        if (o.id == id)
            return &o;
    return nullptr;
}

std::optional<Scene::SceneHit> Scene::raycast(const Ray& ray,
                                              double t_max) const {
    std::optional<SceneHit> best;
    double nearest = t_max;
    for (std::size_t i = 0; i < objects.size(); ++i) {
        if (auto hit = objects[i].raycast(ray, nearest)) {
            nearest = hit->t;
            best = SceneHit{*hit, static_cast<int>(i)};
        }
    }
    // table plane z = table_z
    if (std::abs(ray.dir.z) > 1e-14) {
        const double t = (table_z - ray.origin.z) / ray.dir.z;
        if (t > 1e-9 && t < nearest) {
            RayHit hit;
            hit.t = t;
            hit.point = ray.origin + ray.dir * t;
            hit.normal = ray.dir.z < 0.0 ? Vec3{0, 0, 1} : Vec3{0, 0, -1};
            best = SceneHit{hit, -1};
        }
    }
    return best;
}

} // namespace tact::sensim
