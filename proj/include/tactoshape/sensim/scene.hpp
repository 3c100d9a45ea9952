#pragma once

// Desk-scale scene: a table plane at a fixed height plus rigid objects with
// ground-truth meshes. Object poses change only through touch displacement;
// sensing takes the scene by const reference.

#include "tactoshape/geom/bvh.hpp"
#include "tactoshape/geom/mesh.hpp"
#include "tactoshape/geom/transform.hpp"
#include "tactoshape/geom/vec3.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tact::sensim {

using geom::Ray;
using geom::RayHit;
using geom::RigidTransform;
using geom::TriangleMesh;
using geom::Vec3;

// Mesh and acceleration structure live in the local frame (shared,
// immutable); only the pose moves. Rays are cast by moving them into the
// local frame, so a displacement never rebuilds anything.
struct SceneObject {
    std::string id;
    std::shared_ptr<const TriangleMesh> mesh; // local frame
    std::shared_ptr<const geom::Bvh> bvh;
    RigidTransform pose; // local -> world
    bool exclude_from_metrics = false;

    static SceneObject make(std::string id, TriangleMesh mesh,
                            const RigidTransform& pose,
                            bool exclude_from_metrics = false);

    TriangleMesh posed_mesh() const;
    Vec3 center() const; // posed bounding box center

    // Nearest intersection of a world-frame ray with the posed mesh.
    std::optional<RayHit> raycast(const Ray& world_ray,
                                  double t_max = 1e300) const;
};

struct Scene {
    double table_z = 0.0;
    std::vector<SceneObject> objects;

    SceneObject* find(const std::string& id);
    const SceneObject* find(const std::string& id) const;

    struct SceneHit {
        RayHit hit;
        int object = -1; // index into objects, or -1 for the table plane
        bool is_table() const { return object < 0; }
    };

    // Nearest hit across every object and the table plane.
    std::optional<SceneHit> raycast(const Ray& ray,
                                    double t_max = 1e300) const;
};

} // namespace tact::sensim
