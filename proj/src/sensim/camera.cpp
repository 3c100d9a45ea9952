#include "tactoshape/sensim/camera.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace tact::sensim {

void CameraModel::validate() const {
    if (width == 0 || height == 0)
        throw std::invalid_argument("camera: resolution must be positive");
    if (!(fx > 0.0) || !(fy > 0.0))
        throw std::invalid_argument("camera: focal lengths must be positive");
    if (!(noise_std >= 0.0))
        throw std::invalid_argument("camera: noise std must be >= 0");
    if (geom::orthonormality_error(pose) > 1e-9)
        throw std::invalid_argument("camera: pose is not a rigid transform");
}

RigidTransform look_at_camera(const Vec3& position, const Vec3& target,
                              const Vec3& up) {
    const Vec3 z = geom::normalized(target - position); // optical axis
    const Vec3 x =
        geom::normalized_or(cross(z, up), geom::any_orthogonal(z)); // right
    const Vec3 y = cross(z, x); // down in the image
    RigidTransform tf;
    tf.r = {x.x, y.x, z.x, x.y, y.y, z.y, x.z, y.z, z.z};
    tf.t = position;
    return tf;
}

void DepthImage::validate() const {
    if (depth.size() != static_cast<std::size_t>(width) * height)
        throw std::invalid_argument("depth image: buffer size mismatch");
    for (double d : depth)
        if (!(d >= 0.0) || !std::isfinite(d))
            throw std::invalid_argument(
                "depth image: depths must be finite and >= 0");
}

namespace {

DepthImage render_impl(const Scene& scene, const CameraModel& camera,
                       std::mt19937_64* rng) {
    camera.validate();
    DepthImage img;
    img.width = camera.width;
    img.height = camera.height;
    img.depth.assign(static_cast<std::size_t>(camera.width) * camera.height,
                     0.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    const Vec3 origin = camera.position();
    for (std::uint32_t v = 0; v < camera.height; ++v) {
        for (std::uint32_t u = 0; u < camera.width; ++u) {
            const Vec3 d_cam{(u - camera.cx) / camera.fx,
                             (v - camera.cy) / camera.fy, 1.0};
            const double len = norm(d_cam);
            const Ray ray{origin, camera.pose.rotate(d_cam / len)};
            const auto hit = scene.raycast(ray);
            if (!hit)
                continue;
            double depth = hit->hit.t / len; // distance -> z-depth
            if (rng && camera.noise_std > 0.0) {
                depth += camera.noise_std * noise(*rng);
                depth = std::max(depth, 1e-6);
            }
            img.at(u, v) = depth;
        }
    }
    return img;
}

} // namespace

DepthImage render_depth(const Scene& scene, const CameraModel& camera) {
    return render_impl(scene, camera, nullptr);
}

DepthImage render_depth(const Scene& scene, const CameraModel& camera,
                        std::mt19937_64& rng) {
    return render_impl(scene, camera, &rng);
}

std::optional<PixelRect> project_bbox(const CameraModel& camera,
                                      const std::vector<Vec3>& world_points,
                                      double inflate) {
    camera.validate();
    const RigidTransform inv = geom::inverse(camera.pose);
    double u_lo = 1e300, u_hi = -1e300, v_lo = 1e300, v_hi = -1e300;
    bool any = false;
    for (const Vec3& p : world_points) {
        const Vec3 c = inv.apply(p);
        if (c.z <= 1e-9)
            continue; // behind the camera
        const double u = camera.fx * c.x / c.z + camera.cx;
        const double v = camera.fy * c.y / c.z + camera.cy;
        u_lo = std::min(u_lo, u);
        u_hi = std::max(u_hi, u);
        v_lo = std::min(v_lo, v);
        v_hi = std::max(v_hi, v);
        any = true;
    }
    if (!any)
        return std::nullopt;
    const double grow_u = 0.5 * inflate * (u_hi - u_lo);
    const double grow_v = 0.5 * inflate * (v_hi - v_lo);
    PixelRect r;
    r.u0 = std::max(0, static_cast<int>(std::floor(u_lo - grow_u)));
    r.v0 = std::max(0, static_cast<int>(std::floor(v_lo - grow_v)));
    r.u1 = std::min(static_cast<int>(camera.width) - 1,
                    static_cast<int>(std::ceil(u_hi + grow_u)));
    r.v1 = std::min(static_cast<int>(camera.height) - 1,
                    static_cast<int>(std::ceil(v_hi + grow_v)));
    if (!r.valid())
        return std::nullopt;
    return r;
}

std::vector<std::uint8_t> flood_fill_segment(const DepthImage& depth,
                                             int seed_u, int seed_v,
                                             double threshold,
                                             const PixelRect& bbox) {
    const int w = static_cast<int>(depth.width);
    const int h = static_cast<int>(depth.height);
    if (seed_u < 0 || seed_u >= w || seed_v < 0 || seed_v >= h)
        throw std::invalid_argument("flood fill: seed outside the image");
    if (!bbox.contains(seed_u, seed_v))
        throw std::invalid_argument("flood fill: seed outside the bbox");
    if (!(threshold >= 0.0))
        throw std::invalid_argument("flood fill: negative threshold");
    const auto d = [&](int u, int v) {
        return depth.at(static_cast<std::uint32_t>(u),
                        static_cast<std::uint32_t>(v));
    };
    if (d(seed_u, seed_v) <= 0.0)
        throw std::invalid_argument("flood fill: seed pixel has no depth");

    std::vector<std::uint8_t> mask(depth.depth.size(), 0);
    std::deque<std::pair<int, int>> frontier;
    mask[static_cast<std::size_t>(seed_v) * w + seed_u] = 1;
    frontier.emplace_back(seed_u, seed_v);
    constexpr int du[4] = {1, -1, 0, 0};
    constexpr int dv[4] = {0, 0, 1, -1};
    while (!frontier.empty()) {
        const auto [u, v] = frontier.front();
        frontier.pop_front();
        for (int k = 0; k < 4; ++k) {
            const int nu = u + du[k];
            const int nv = v + dv[k];
            if (nu < 0 || nu >= w || nv < 0 || nv >= h)
                continue;
            if (!bbox.contains(nu, nv))
                continue;
            auto& m = mask[static_cast<std::size_t>(nv) * w + nu];
            if (m)
                continue;
            const double dn = d(nu, nv);
            if (dn <= 0.0 || std::abs(dn - d(u, v)) > threshold)
                continue;
            m = 1;
            frontier.emplace_back(nu, nv);
        }
    }
    return mask;
}

PointCloud depth_to_cloud(const DepthImage& depth,
                          const std::vector<std::uint8_t>& mask,
                          const CameraModel& camera) {
    camera.validate();
    PointCloud cloud;
    if (mask.empty())
        return cloud;
    if (mask.size() != depth.depth.size())
        throw std::invalid_argument("depth_to_cloud: mask size mismatch");
    for (std::uint32_t v = 0; v < depth.height; ++v) {
        for (std::uint32_t u = 0; u < depth.width; ++u) {
            const std::size_t idx =
                static_cast<std::size_t>(v) * depth.width + u;
            if (!mask[idx])
                continue;
            const double d = depth.depth[idx];
            if (d <= 0.0)
                continue;
            const Vec3 p_cam{(u - camera.cx) / camera.fx * d,
                             (v - camera.cy) / camera.fy * d, d};
            cloud.points.push_back(camera.pose.apply(p_cam));
        }
    }
    return cloud;
}

} // namespace tact::sensim
