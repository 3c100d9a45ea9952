#pragma once

// Simulated touch probe: approach along the estimated normal from a fixed
// standoff, detect contact, record a haptic patch and the swept free space,
// and nudge the touched object the way a real probe would.

#include "tactoshape/completion/loss.hpp"
#include "tactoshape/geom/cloud.hpp"
#include "tactoshape/geom/transform.hpp"
#include "tactoshape/geom/vec3.hpp"
#include "tactoshape/sensim/scene.hpp"

#include <random>
#include <string>
#include <vector>

namespace tact::sensim {

using geom::PointCloud;

// Planar nudge of the touched object: translation magnitude uniform in
// [0, max_translation], direction a blend of the probe's horizontal push
// direction (weight direction_bias) with a random horizontal direction,
// plus a yaw uniform in +-max_yaw_deg about the vertical axis through the
// object center. Zero magnitudes give the exact identity.
struct DisplacementConfig {
    double max_translation = 0.02; // meters
    double direction_bias = 0.7;   // 0 = fully random, 1 = fully along push
    double max_yaw_deg = 10.0;

    void validate() const;
};

struct TouchConfig {
    double standoff = 0.10;       // probe starts target + standoff * normal
    double max_travel = 0.15;     // stroke length along -normal
    double sweep_step = 0.005;    // free-space sample spacing
    double sweep_exclusion = 0.01; // no free samples this close to contact
    double contact_noise_std = 0.001; // recorded contact jitter along normal
    std::size_t patch_points = 16;
    double patch_radius = 0.008;
    DisplacementConfig displacement;

    void validate() const;
};

struct TouchOutcome {
    bool contact = false;
    // Object the probe ended on; empty for a miss or a table contact.
    std::string object_id;
    // Object nudged by the touch (pre-displacement contact); usually equals
    // object_id, empty when nothing moved.
    std::string moved_object_id;
    Vec3 contact_point;  // recorded (noisy) position
    Vec3 impact_normal;  // ground-truth surface normal, facing the probe
    // Ring of patch_points points, radius patch_radius, centered on the
    // recorded contact in the plane orthogonal to impact_normal; every
    // point carries impact_normal as its normal. Empty for table contacts.
    PointCloud patch;
    // Positions sampled every sweep_step along the traversed segment,
    // starting at the probe start. A miss sweeps the whole stroke, end
    // exclusive (0.10 m of travel yields 20 points); a contact keeps
    // samples up to and including sweep_exclusion before the recorded
    // contact.
    std::vector<Vec3> swept_free;
    RigidTransform displacement; // identity when nothing moved
};

// Two-phase probe: a pre-cast against the current poses decides what the
// probe first meets; that object is displaced; the final cast against the
// displaced scene produces the recorded contact, patch, and sweep, so all
// evidence is consistent with the object's final pose. Throws
// std::invalid_argument for a non-unit normal and std::runtime_error
// ("unreachable") when the probe would start at or below the table.
TouchOutcome simulate_touch(Scene& scene, const Vec3& target,
                            const Vec3& normal, const TouchConfig& config,
                            std::mt19937_64& rng);

// Samples the planar nudge for object `id`, applies it to the pose, and
// returns it. `probe_dir` is the probe's direction of motion. Draw order:
// translation magnitude, random direction angle, yaw.
RigidTransform displace_object(Scene& scene, const std::string& id,
                               const Vec3& probe_dir,
                               const DisplacementConfig& config,
                               std::mt19937_64& rng);

// Keeps only points strictly closer than `radius` to `center`.
completion::FreeSpaceSet crop_free_space(const std::vector<Vec3>& points,
                                         const Vec3& center,
                                         double radius = 0.20);

} // namespace tact::sensim
