#pragma once

#include "tactoshape/geom/vec3.hpp"

#include <array>

namespace tact::geom {

// Proper rigid motion p -> R p + t. R is row-major.
struct RigidTransform {
    std::array<double, 9> r{1, 0, 0, 0, 1, 0, 0, 0, 1};
    Vec3 t{0, 0, 0};

    static RigidTransform identity() { return {}; }

    Vec3 apply(const Vec3& p) const {
        return {r[0] * p.x + r[1] * p.y + r[2] * p.z + t.x,
                r[3] * p.x + r[4] * p.y + r[5] * p.z + t.y,
                r[6] * p.x + r[7] * p.y + r[8] * p.z + t.z};
    }

    // Rotation only; for directions and normals.
    Vec3 rotate(const Vec3& v) const {
        return {r[0] * v.x + r[1] * v.y + r[2] * v.z,
                r[3] * v.x + r[4] * v.y + r[5] * v.z,
                r[6] * v.x + r[7] * v.y + r[8] * v.z};
    }

    Vec3 rotate_transposed(const Vec3& v) const {
        return {r[0] * v.x + r[3] * v.y + r[6] * v.z,
                r[1] * v.x + r[4] * v.y + r[7] * v.z,
                r[2] * v.x + r[5] * v.y + r[8] * v.z};
    }
};

RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform inverse(const RigidTransform& tf);

// Rotation about an arbitrary unit axis (radians).
RigidTransform axis_angle(const Vec3& axis, double angle);

// Intrinsic roll-pitch-yaw (x, then y, then z; radians) plus translation.
RigidTransform from_rpy(double roll, double pitch, double yaw,
                        const Vec3& translation);

// Rotation about the vertical axis through `center`, composed with a
// translation; used for the planar object nudges.
RigidTransform planar_motion(const Vec3& center, double yaw,
                             const Vec3& translation);

// Frobenius distance of R^T R from the identity.
double orthonormality_error(const RigidTransform& tf);

// Rotation angle (radians) and translation magnitude of the motion.
double rotation_angle(const RigidTransform& tf);

} // namespace tact::geom
