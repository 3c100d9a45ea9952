#pragma once

// Virtual pinhole depth camera, depth-image segmentation, and
// back-projection to world-frame point clouds.

#include "tactoshape/geom/cloud.hpp"
#include "tactoshape/geom/transform.hpp"
#include "tactoshape/geom/vec3.hpp"
#include "tactoshape/sensim/scene.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace tact::sensim {

using geom::PointCloud;

struct CameraModel {
    std::uint32_t width = 160;
    std::uint32_t height = 120;
    double fx = 140.0, fy = 140.0; // focal lengths, pixels
    double cx = 79.5, cy = 59.5;   // principal point, pixels
    RigidTransform pose;           // camera-to-world; +z is the optical axis
    double noise_std = 0.0;        // per-pixel depth noise, meters

    Vec3 position() const { return pose.t; }
    void validate() const; // throws on nonpositive focals or resolution
};

// Camera-to-world pose looking from `position` toward `target`, with +x to
// the right and +y down in the image.
RigidTransform look_at_camera(const Vec3& position, const Vec3& target,
                              const Vec3& up = {0, 0, 1});

// Per-pixel depth along the optical axis (z-depth); 0 means no return.
struct DepthImage {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<double> depth; // row-major, v * width + u

    double at(std::uint32_t u, std::uint32_t v) const {
        return depth[static_cast<std::size_t>(v) * width + u];
    }
    double& at(std::uint32_t u, std::uint32_t v) {
        return depth[static_cast<std::size_t>(v) * width + u];
    }
    void validate() const; // sizes match, depths finite and >= 0
};

// Casts one ray per pixel against every object and the table plane. The
// noiseless overload is deterministic; the other adds zero-mean Gaussian
// depth noise with camera.noise_std to every returned pixel.
DepthImage render_depth(const Scene& scene, const CameraModel& camera);
DepthImage render_depth(const Scene& scene, const CameraModel& camera,
                        std::mt19937_64& rng);

// Inclusive pixel rectangle.
struct PixelRect {
    int u0 = 0, v0 = 0;
    int u1 = -1, v1 = -1;

    bool valid() const { return u0 <= u1 && v0 <= v1; }
    bool contains(int u, int v) const {
        return u >= u0 && u <= u1 && v >= v0 && v <= v1;
    }
    int center_u() const { return (u0 + u1) / 2; }
    int center_v() const { return (v0 + v1) / 2; }
};

// Projected pixel bounding box of world-frame points, widened by `inflate`
// (fraction of each side) and clamped to the image. nullopt when every
// point sits behind the camera or the clamped box is empty.
std::optional<PixelRect> project_bbox(const CameraModel& camera,
                                      const std::vector<Vec3>& world_points,
                                      double inflate = 0.10);

// 4-connected region growing from the seed pixel: a neighbor joins when it
// lies inside `bbox`, has a depth return, and its depth differs from the
// current pixel's by at most `threshold`. Returns a width*height 0/1 mask.
// Throws std::invalid_argument when the seed is outside the bbox or image,
// or has no depth return.
std::vector<std::uint8_t> flood_fill_segment(const DepthImage& depth,
                                             int seed_u, int seed_v,
                                             double threshold,
                                             const PixelRect& bbox);

// Back-projects masked pixels with depth returns into a world-frame cloud
// (no normals). An empty mask selects nothing; otherwise the mask must
// hold width*height entries.
PointCloud depth_to_cloud(const DepthImage& depth,
                          const std::vector<std::uint8_t>& mask,
                          const CameraModel& camera);

} // namespace tact::sensim
