#include "tactoshape/sensim/touch.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tact::sensim {

void DisplacementConfig::validate() const {
    if (max_translation < 0.0 || max_yaw_deg < 0.0)
        throw std::invalid_argument("displacement: magnitudes must be >= 0");
    if (direction_bias < 0.0 || direction_bias > 1.0)
        throw std::invalid_argument("displacement: bias must lie in [0, 1]");
}

void TouchConfig::validate() const {
    displacement.validate();
    if (!(standoff > 0.0) || !(max_travel > 0.0))
        throw std::invalid_argument("touch: standoff and travel must be > 0");
    if (!(sweep_step > 0.0) || sweep_exclusion < 0.0)
        throw std::invalid_argument("touch: bad sweep settings");
    if (contact_noise_std < 0.0 || patch_radius < 0.0)
        throw std::invalid_argument("touch: negative noise or patch radius");
}

RigidTransform displace_object(Scene& scene, const std::string& id,
                               const Vec3& probe_dir,
                               const DisplacementConfig& config,
                               std::mt19937_64& rng) {
    config.validate();
    SceneObject* obj = scene.find(id);
    if (!obj)
        throw std::invalid_argument("displace: unknown object '" + id + "'");

    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double magnitude = config.max_translation * u01(rng);
    const double angle = 2.0 * std::numbers::pi * u01(rng);
    const double yaw =
        (2.0 * u01(rng) - 1.0) * config.max_yaw_deg * std::numbers::pi / 180.0;

    const Vec3 random_dir{std::cos(angle), std::sin(angle), 0.0};
    const Vec3 push = geom::normalized_or({probe_dir.x, probe_dir.y, 0.0},
                                          random_dir);
    const Vec3 dir = geom::normalized_or(
        push * config.direction_bias + random_dir * (1.0 - config.direction_bias),
        random_dir);

    const RigidTransform nudge =
        geom::planar_motion(obj->center(), yaw, dir * magnitude);
    obj->pose = geom::compose(nudge, obj->pose);
    return nudge;
}

TouchOutcome simulate_touch(Scene& scene, const Vec3& target,
                            const Vec3& normal, const TouchConfig& config,
                            std::mt19937_64& rng) {
    config.validate();
    if (std::abs(norm(normal) - 1.0) > 1e-6)
        throw std::invalid_argument("touch: approach normal must be unit");

    const Vec3 start = target + normal * config.standoff;
    const Vec3 dir = -normal;
    if (start.z <= scene.table_z + 1e-9)
        throw std::runtime_error(
            "touch unreachable: probe would start below the table");

    TouchOutcome out;

    // Phase one: what does the probe meet first? That object takes the
    // nudge before anything is recorded.
    const Ray ray{start, dir};
    const auto pre = scene.raycast(ray, config.max_travel);
    if (pre && !pre->is_table()) {
        const std::string& id = scene.objects[pre->object].id;
        out.moved_object_id = id;
        out.displacement =
            displace_object(scene, id, dir, config.displacement, rng);
    }

    // Phase two: the recorded stroke, against the final poses.
    const auto hit = scene.raycast(ray, config.max_travel);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double sweep_end = config.max_travel;   // end exclusive for a miss
    bool sweep_inclusive = false;

    if (hit) {
        out.contact = true;
        out.impact_normal = hit->hit.normal;
        out.contact_point =
            hit->hit.point +
            out.impact_normal * (config.contact_noise_std * gauss(rng));
        const double t_recorded = dot(out.contact_point - start, dir);
        sweep_end = t_recorded - config.sweep_exclusion;
        sweep_inclusive = true;

        if (!hit->is_table()) {
            out.object_id = scene.objects[hit->object].id;
            // haptic patch: a ring in the contact plane
            const Vec3 e1 = geom::any_orthogonal(out.impact_normal);
            const Vec3 e2 = cross(out.impact_normal, e1);
            for (std::size_t k = 0; k < config.patch_points; ++k) {
                const double a = 2.0 * std::numbers::pi *
                                 static_cast<double>(k) /
                                 static_cast<double>(config.patch_points);
                out.patch.points.push_back(out.contact_point +
                                           (e1 * std::cos(a) + e2 * std::sin(a)) *
                                               config.patch_radius);
                out.patch.normals.push_back(out.impact_normal);
            }
        }
    }

    // Picometer slack keeps boundary samples stable when k * step and the
    // recorded end round differently.
    const double slack = 1e-12;
    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * config.sweep_step;
        if (sweep_inclusive ? t > sweep_end + slack : t >= sweep_end - slack)
            break;
        out.swept_free.push_back(start + dir * t);
    }
    return out;
}

completion::FreeSpaceSet crop_free_space(const std::vector<Vec3>& points,
                                         const Vec3& center, double radius) {
    completion::FreeSpaceSet out;
    for (const Vec3& p : points)
        if (norm(p - center) < radius)
            out.points.push_back(p);
    return out;
}

} // namespace tact::sensim
