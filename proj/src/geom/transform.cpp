#include "tactoshape/geom/transform.hpp"

#include <algorithm>
#include <cmath>

namespace tact::geom {

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    RigidTransform c;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k)
                s += a.r[i * 3 + k] * b.r[k * 3 + j];
            c.r[i * 3 + j] = s;
        }
    }
    c.t = a.apply(b.t);
    return c;
}

RigidTransform inverse(const RigidTransform& tf) {
    RigidTransform inv;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            inv.r[i * 3 + j] = tf.r[j * 3 + i];
    inv.t = -inv.rotate(tf.t);
    return inv;
}

RigidTransform axis_angle(const Vec3& axis, double angle) {
    const Vec3 u = normalized(axis);
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double ic = 1.0 - c;
    RigidTransform tf;
    tf.r = {c + u.x * u.x * ic,       u.x * u.y * ic - u.z * s, u.x * u.z * ic + u.y * s,
            u.y * u.x * ic + u.z * s, c + u.y * u.y * ic,       u.y * u.z * ic - u.x * s,
            u.z * u.x * ic - u.y * s, u.z * u.y * ic + u.x * s, c + u.z * u.z * ic};
    return tf;
}

RigidTransform from_rpy(double roll, double pitch, double yaw,
                        const Vec3& translation) {
    RigidTransform tf = compose(
        axis_angle({0, 0, 1}, yaw),
        compose(axis_angle({0, 1, 0}, pitch), axis_angle({1, 0, 0}, roll)));
    tf.t = translation;
    return tf;
}

RigidTransform planar_motion(const Vec3& center, double yaw,
                             const Vec3& translation) {
    // Rotate about the vertical line through `center`, then translate.
    RigidTransform rot = axis_angle({0, 0, 1}, yaw);
    rot.t = center - rot.rotate(center);
    RigidTransform shift;
    shift.t = translation;
    return compose(shift, rot);
}

double orthonormality_error(const RigidTransform& tf) {
    double err = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k)
                s += tf.r[k * 3 + i] * tf.r[k * 3 + j];
            const double target = (i == j) ? 1.0 : 0.0;
            err += (s - target) * (s - target);
        }
    }
    return std::sqrt(err);
}

double rotation_angle(const RigidTransform& tf) {
    const double tr = tf.r[0] + tf.r[4] + tf.r[8];
    const double c = std::clamp((tr - 1.0) * 0.5, -1.0, 1.0);
    return std::acos(c);
}

} // namespace tact::geom
