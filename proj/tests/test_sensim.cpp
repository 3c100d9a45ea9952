#include "tactoshape/geom/mesh_io.hpp"
#include "tactoshape/geom/voxel.hpp"
#include "tactoshape/sensim/camera.hpp"
#include "tactoshape/sensim/scene.hpp"
#include "tactoshape/sensim/scene_io.hpp"
#include "tactoshape/sensim/touch.hpp"

#include "support/oracles.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

using namespace tact::sensim;
using tact::geom::RigidTransform;
using tact::geom::Vec3;

namespace {

// small camera with an integral principal point so the center pixel's ray
// runs exactly along the optical axis
CameraModel tiny_camera(std::uint32_t w = 3, std::uint32_t h = 3,
                        double f = 10.0) {
    CameraModel cam;
    cam.width = w;
    cam.height = h;
    cam.fx = cam.fy = f;
    cam.cx = (w - 1) / 2.0;
    cam.cy = (h - 1) / 2.0;
    return cam;
}

Scene table_scene() {
    Scene scene;
    scene.table_z = 0.0;
    return scene;
}

TouchConfig quiet_touch() {
    TouchConfig cfg;
    cfg.contact_noise_std = 0.0;
    cfg.displacement.max_translation = 0.0;
    cfg.displacement.max_yaw_deg = 0.0;
    return cfg;
}

std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

bool is_identity(const RigidTransform& tf) {
    const double ident[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    for (int i = 0; i < 9; ++i)
        if (tf.r[i] != ident[i])
            return false;
    return tf.t.x == 0.0 && tf.t.y == 0.0 && tf.t.z == 0.0;
}

} // namespace

// ---------------------------------------------------------------------------
// camera model

TEST_CASE("look_at_camera builds a right-handed camera frame") {
    const Vec3 pos{0.3, -0.4, 0.5};
    const Vec3 target{0.0, 0.1, 0.05};
    const RigidTransform tf = look_at_camera(pos, target);

    CHECK(tact::geom::orthonormality_error(tf) < 1e-12);
    CHECK(tf.t.x == pos.x);
    CHECK(tf.t.y == pos.y);
    CHECK(tf.t.z == pos.z);

    // +z maps to the viewing direction
    const Vec3 fwd = tf.rotate({0, 0, 1});
    const Vec3 want = tact::geom::normalized(target - pos);
    CHECK(norm(fwd - want) < 1e-12);
    // +y is down in the image: against world up
    CHECK(dot(tf.rotate({0, 1, 0}), Vec3{0, 0, 1}) < 0.0);
    // +x, +y, +z form a right-handed frame
    const Vec3 x = tf.rotate({1, 0, 0});
    const Vec3 y = tf.rotate({0, 1, 0});
    CHECK(norm(cross(x, y) - fwd) < 1e-12);

    // facing +x from the origin: right is -y, down is -z
    const RigidTransform ax = look_at_camera({0, 0, 0}, {1, 0, 0});
    CHECK(norm(ax.rotate({1, 0, 0}) - Vec3{0, -1, 0}) < 1e-15);
    CHECK(norm(ax.rotate({0, 1, 0}) - Vec3{0, 0, -1}) < 1e-15);

    // looking straight down is fine (degenerate up handled)
    const RigidTransform down = look_at_camera({0, 0, 1}, {0, 0, 0});
    CHECK(tact::geom::orthonormality_error(down) < 1e-12);
    CHECK(norm(down.rotate({0, 0, 1}) - Vec3{0, 0, -1}) < 1e-12);
}

TEST_CASE("camera and depth image validation") {
    CameraModel cam = tiny_camera();
    CHECK_NOTHROW(cam.validate());
    cam.fx = 0.0;
    CHECK_THROWS_AS(cam.validate(), std::invalid_argument);
    cam = tiny_camera();
    cam.width = 0;
    CHECK_THROWS_AS(cam.validate(), std::invalid_argument);
    cam = tiny_camera();
    cam.noise_std = -0.1;
    CHECK_THROWS_AS(cam.validate(), std::invalid_argument);
    cam = tiny_camera();
    cam.pose.r[0] = 2.0;
    CHECK_THROWS_AS(cam.validate(), std::invalid_argument);

    DepthImage img;
    img.width = 2;
    img.height = 2;
    img.depth = {0.0, 1.0, 2.0};
    CHECK_THROWS_AS(img.validate(), std::invalid_argument);
    img.depth = {0.0, 1.0, 2.0, -1.0};
    CHECK_THROWS_AS(img.validate(), std::invalid_argument);
    img.depth = {0.0, 1.0, 2.0, 3.0};
    CHECK_NOTHROW(img.validate());
}

// ---------------------------------------------------------------------------
// rendering

TEST_CASE("table plane renders at constant z-depth") {
    Scene scene = table_scene();

    // straight down from 1 m: every pixel's z-depth is the height
    CameraModel cam = tiny_camera();
    cam.pose = look_at_camera({0, 0, 1}, {0, 0, 0}, {0, 1, 0});
    const DepthImage img = render_depth(scene, cam);
    img.validate();
    for (double d : img.depth)
        CHECK(d == doctest::Approx(1.0).epsilon(1e-12));

    // looking away from the table: nothing returns
    cam.pose = look_at_camera({0, 0, 1}, {0, 0, 2}, {0, 1, 0});
    const DepthImage sky = render_depth(scene, cam);
    for (double d : sky.depth)
        CHECK(d == 0.0);
}

TEST_CASE("box top renders at exact z-depth") {
    Scene scene = table_scene();
    scene.objects.push_back(SceneObject::make(
        "slab", oracle::box_mesh({-0.2, -0.2, 0.0}, {0.2, 0.2, 0.08}), {}));

    CameraModel cam = tiny_camera();
    cam.pose = look_at_camera({0, 0, 1.05}, {0, 0, 0}, {0, 1, 0});
    const DepthImage img = render_depth(scene, cam);
    for (double d : img.depth)
        CHECK(d == doctest::Approx(1.05 - 0.08).epsilon(1e-12));
}

TEST_CASE("sphere on the optical axis at 1 m reads 1 - r at the center") {
    const double r = 0.04;
    Scene scene = table_scene();
    scene.objects.push_back(SceneObject::make(
        "ball", oracle::icosphere(r, 3),
        RigidTransform{{1, 0, 0, 0, 1, 0, 0, 0, 1}, {0, 0, 0.05}}));

    CameraModel cam = tiny_camera(1, 1, 100.0);
    cam.cx = cam.cy = 0.0;
    cam.pose = look_at_camera({0, 0, 1.05}, {0, 0, 0.05}, {0, 1, 0});
    const DepthImage img = render_depth(scene, cam);
    CHECK(img.at(0, 0) == doctest::Approx(1.0 - r).epsilon(1e-3));
}

TEST_CASE("occluding boxes match a per-ray nearest-hit oracle") {
    const Vec3 lo_a{-0.06, -0.05, 0.0}, hi_a{0.05, 0.06, 0.07};
    const Vec3 lo_b{-0.11, 0.02, 0.0}, hi_b{0.09, 0.21, 0.123};
    Scene scene = table_scene();
    scene.objects.push_back(
        SceneObject::make("near", oracle::box_mesh(lo_a, hi_a), {}));
    scene.objects.push_back(
        SceneObject::make("far", oracle::box_mesh(lo_b, hi_b), {}));

    CameraModel cam = tiny_camera(24, 18, 20.0);
    cam.cx = 11.0;
    cam.cy = 8.0;
    cam.pose = look_at_camera({0.31, -0.47, 0.52}, {0.02, 0.03, 0.05});
    const DepthImage img = render_depth(scene, cam);

    const Vec3 origin = cam.position();
    std::size_t front_wins = 0;
    for (std::uint32_t v = 0; v < cam.height; ++v) {
        for (std::uint32_t u = 0; u < cam.width; ++u) {
            const Vec3 d_cam{(u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy,
                             1.0};
            const double len = norm(d_cam);
            const Vec3 dir = cam.pose.rotate(d_cam / len);
            double t_best = 1e300;
            const double ta = oracle::slab_box_hit(origin, dir, lo_a, hi_a);
            const double tb = oracle::slab_box_hit(origin, dir, lo_b, hi_b);
            if (ta > 0.0)
                t_best = std::min(t_best, ta);
            if (tb > 0.0)
                t_best = std::min(t_best, tb);
            if (ta > 0.0 && tb > 0.0)
                ++front_wins;
            if (dir.z < 0.0)
                t_best = std::min(t_best, -origin.z / dir.z);
            const double want = t_best < 1e300 ? t_best / len : 0.0;
            CHECK(img.at(u, v) == doctest::Approx(want).epsilon(1e-9));
        }
    }
    CHECK(front_wins > 0); // the oracle actually exercised occlusion
}

TEST_CASE("depth noise is seeded, clamped, and leaves misses empty") {
    Scene scene = table_scene();
    scene.objects.push_back(SceneObject::make(
        "box", oracle::box_mesh({-0.1, -0.1, 0.0}, {0.1, 0.1, 0.05}), {}));

    CameraModel cam = tiny_camera(8, 6, 8.0);
    // tilted toward the horizon so upper rows miss everything
    cam.pose = look_at_camera({0, -0.8, 0.15}, {0, 2.0, 0.15});
    cam.noise_std = 0.005;

    const DepthImage clean_a = render_depth(scene, cam);
    const DepthImage clean_b = render_depth(scene, cam);
    CHECK(clean_a.depth == clean_b.depth); // noiseless is deterministic

    std::mt19937_64 rng_a(42), rng_b(42), rng_c(43);
    const DepthImage noisy_a = render_depth(scene, cam, rng_a);
    const DepthImage noisy_b = render_depth(scene, cam, rng_b);
    const DepthImage noisy_c = render_depth(scene, cam, rng_c);
    CHECK(noisy_a.depth == noisy_b.depth); // same seed, same image
    CHECK(noisy_a.depth != noisy_c.depth);
    CHECK(noisy_a.depth != clean_a.depth);

    bool saw_return = false, saw_miss = false;
    for (std::size_t i = 0; i < clean_a.depth.size(); ++i) {
        if (clean_a.depth[i] == 0.0) {
            saw_miss = true;
            CHECK(noisy_a.depth[i] == 0.0); // noise never invents returns
        } else {
            saw_return = true;
        }
    }
    CHECK(saw_return);
    CHECK(saw_miss);

    // huge noise still clamps returned depths to a positive floor
    cam.noise_std = 10.0;
    std::mt19937_64 rng_d(7);
    const DepthImage wild = render_depth(scene, cam, rng_d);
    for (std::size_t i = 0; i < wild.depth.size(); ++i)
        if (clean_a.depth[i] > 0.0)
            CHECK(wild.depth[i] >= 1e-6);
}

// ---------------------------------------------------------------------------
// segmentation

namespace {

// 5x5 depth image: plus-shaped object at 1.0 m, background at 2.0 m,
// two dead pixels in opposite corners
DepthImage plus_image() {
    DepthImage img;
    img.width = img.height = 5;
    img.depth.assign(25, 2.0);
    const int plus[5][2] = {{2, 1}, {1, 2}, {2, 2}, {3, 2}, {2, 3}};
    for (const auto& uv : plus)
        img.at(uv[0], uv[1]) = 1.0;
    img.at(0, 0) = 0.0;
    img.at(4, 4) = 0.0;
    return img;
}

} // namespace

TEST_CASE("flood fill recovers a hand-enumerated plus shape") {
    const DepthImage img = plus_image();
    const PixelRect full{0, 0, 4, 4};

    const auto mask = flood_fill_segment(img, 2, 2, 0.05, full);
    REQUIRE(mask.size() == 25);
    std::size_t count = 0;
    for (std::uint32_t v = 0; v < 5; ++v)
        for (std::uint32_t u = 0; u < 5; ++u)
            if (mask[v * 5 + u]) {
                ++count;
                CHECK(img.at(u, v) == 1.0);
            }
    CHECK(count == 5);

    SUBCASE("large threshold floods every live pixel in the bbox") {
        const auto all = flood_fill_segment(img, 2, 2, 1.0, full);
        std::size_t n = 0;
        for (std::size_t i = 0; i < all.size(); ++i)
            if (all[i]) {
                ++n;
                CHECK(img.depth[i] > 0.0);
            }
        CHECK(n == 23); // everything except the two dead pixels
    }

    SUBCASE("bbox restricts growth") {
        const PixelRect one{2, 2, 2, 2};
        const auto just_seed = flood_fill_segment(img, 2, 2, 1.0, one);
        std::size_t n = 0;
        for (std::size_t i = 0; i < just_seed.size(); ++i)
            n += just_seed[i];
        CHECK(n == 1);
        CHECK(just_seed[2 * 5 + 2] == 1);
    }

    SUBCASE("threshold compares against the current pixel, not the seed") {
        DepthImage ramp;
        ramp.width = 5;
        ramp.height = 1;
        ramp.depth = {1.0, 1.4, 1.8, 2.2, 2.6};
        const PixelRect row{0, 0, 4, 0};
        const auto chain = flood_fill_segment(ramp, 0, 0, 0.5, row);
        for (std::size_t i = 0; i < 5; ++i)
            CHECK(chain[i] == 1); // every step is 0.4 even if ends differ by 1.6
        const auto stuck = flood_fill_segment(ramp, 0, 0, 0.3, row);
        CHECK(stuck[0] == 1);
        CHECK(stuck[1] + stuck[2] + stuck[3] + stuck[4] == 0);
    }

    SUBCASE("bad seeds are rejected") {
        CHECK_THROWS_AS(flood_fill_segment(img, 0, 0, 0.1, full),
                        std::invalid_argument); // dead pixel
        CHECK_THROWS_AS(flood_fill_segment(img, 9, 2, 0.1, full),
                        std::invalid_argument); // outside image
        CHECK_THROWS_AS(flood_fill_segment(img, 2, 2, 0.1, PixelRect{0, 0, 1, 1}),
                        std::invalid_argument); // outside bbox
    }
}

TEST_CASE("depth_to_cloud back-projects the pinhole equation exactly") {
    const CameraModel cam = tiny_camera(); // identity pose
    DepthImage img;
    img.width = img.height = 3;
    img.depth.assign(9, 0.0);
    img.at(1, 1) = 1.0;
    img.at(0, 0) = 2.0;

    std::vector<std::uint8_t> all(9, 1);
    const auto cloud = depth_to_cloud(img, all, cam);
    REQUIRE(cloud.points.size() == 2);
    CHECK(!cloud.has_normals());
    // row-major: (0,0) first, then the center pixel
    CHECK(cloud.points[0].x == -0.2);
    CHECK(cloud.points[0].y == -0.2);
    CHECK(cloud.points[0].z == 2.0);
    CHECK(cloud.points[1].x == 0.0);
    CHECK(cloud.points[1].y == 0.0);
    CHECK(cloud.points[1].z == 1.0);

    std::vector<std::uint8_t> center_only(9, 0);
    center_only[4] = 1;
    CHECK(depth_to_cloud(img, center_only, cam).points.size() == 1);

    CHECK(depth_to_cloud(img, {}, cam).points.empty()); // empty mask
    std::vector<std::uint8_t> none(9, 0);
    CHECK(depth_to_cloud(img, none, cam).points.empty());
    std::vector<std::uint8_t> short_mask(5, 1);
    CHECK_THROWS_AS(depth_to_cloud(img, short_mask, cam),
                    std::invalid_argument);
}

TEST_CASE("rendered sphere back-projects onto the sphere surface") {
    const double r = 0.05;
    const Vec3 center{0.0, 0.0, 0.06};
    Scene scene = table_scene();
    scene.objects.push_back(SceneObject::make(
        "ball", oracle::icosphere(r, 3),
        RigidTransform{{1, 0, 0, 0, 1, 0, 0, 0, 1}, center}));

    CameraModel cam = tiny_camera(32, 24, 30.0);
    cam.cx = 15.5;
    cam.cy = 11.5;
    cam.pose = look_at_camera({0.25, -0.3, 0.4}, center);
    const DepthImage img = render_depth(scene, cam);

    std::vector<std::uint8_t> all(img.depth.size(), 1);
    const auto cloud = depth_to_cloud(img, all, cam);
    REQUIRE(!cloud.points.empty());
    std::size_t on_ball = 0;
    for (const Vec3& p : cloud.points) {
        if (std::abs(p.z) < 1e-9)
            continue; // table return
        CHECK(std::abs(norm(p - center) - r) < 1.5e-3);
        ++on_ball;
    }
    CHECK(on_ball > 20);
}

TEST_CASE("project_bbox contains the rendered object") {
    Scene scene = table_scene();
    scene.objects.push_back(SceneObject::make(
        "box", oracle::box_mesh({-0.04, -0.03, 0.0}, {0.05, 0.06, 0.07}), {}));

    CameraModel cam = tiny_camera(40, 30, 35.0);
    cam.cx = 19.5;
    cam.cy = 14.5;
    cam.pose = look_at_camera({0.3, -0.35, 0.45}, {0, 0, 0.03});

    const auto verts = scene.objects[0].posed_mesh().vertices;
    const auto tight = project_bbox(cam, verts, 0.0);
    const auto wide = project_bbox(cam, verts, 0.10);
    REQUIRE(tight.has_value());
    REQUIRE(wide.has_value());
    CHECK(wide->u0 <= tight->u0);
    CHECK(wide->v0 <= tight->v0);
    CHECK(wide->u1 >= tight->u1);
    CHECK(wide->v1 >= tight->v1);

    // every pixel whose ray meets the box lies inside the projected rect
    const DepthImage img = render_depth(scene, cam);
    Scene bare = table_scene();
    const DepthImage table_only = render_depth(bare, cam);
    for (std::uint32_t v = 0; v < cam.height; ++v)
        for (std::uint32_t u = 0; u < cam.width; ++u)
            if (img.at(u, v) != table_only.at(u, v))
                CHECK(tight->contains(static_cast<int>(u), static_cast<int>(v)));

    // points behind the camera are ignored, and alone they give nothing
    const Vec3 behind = cam.position() + cam.pose.rotate({0, 0, -1.0});
    CHECK(!project_bbox(cam, {behind}, 0.1).has_value());
    auto mixed = verts;
    mixed.push_back(behind);
    const auto rect = project_bbox(cam, mixed, 0.0);
    REQUIRE(rect.has_value());
    CHECK(rect->u0 == tight->u0);
    CHECK(rect->v1 == tight->v1);
}

TEST_CASE("disjoint objects produce disjoint segmentation masks") {
    Scene scene = table_scene();
    scene.objects.push_back(SceneObject::make(
        "left", oracle::box_mesh({-0.09, -0.03, 0.0}, {-0.03, 0.03, 0.05}),
        {}));
    scene.objects.push_back(SceneObject::make(
        "right", oracle::box_mesh({0.03, -0.03, 0.0}, {0.09, 0.03, 0.04}),
        {}));

    CameraModel cam = tiny_camera(48, 36, 40.0);
    cam.cx = 23.5;
    cam.cy = 17.5;
    cam.pose = look_at_camera({0, 0, 0.6}, {0, 0, 0}, {0, 1, 0});
    const DepthImage img = render_depth(scene, cam);

    auto seg = [&](const SceneObject& obj) {
        const auto rect =
            project_bbox(cam, obj.posed_mesh().vertices, 0.10);
        REQUIRE(rect.has_value());
        return flood_fill_segment(img, rect->center_u(), rect->center_v(),
                                  0.02, *rect);
    };
    const auto mask_l = seg(scene.objects[0]);
    const auto mask_r = seg(scene.objects[1]);

    std::size_t nl = 0, nr = 0;
    for (std::size_t i = 0; i < mask_l.size(); ++i) {
        nl += mask_l[i];
        nr += mask_r[i];
        CHECK(!(mask_l[i] && mask_r[i]));
    }
    CHECK(nl > 4);
    CHECK(nr > 4);
}

// ---------------------------------------------------------------------------
// touch

TEST_CASE("box-top touch records exact contact, patch, and sweep") {
    Scene scene = table_scene();
    scene.objects.push_back(SceneObject::make(
        "box", oracle::box_mesh({-0.05, -0.05, 0.0}, {0.05, 0.05, 0.05}), {}));

    const TouchConfig cfg = quiet_touch();
    std::mt19937_64 rng(1);
    const TouchOutcome out =
        simulate_touch(scene, {0, 0, 0.05}, {0, 0, 1}, cfg, rng);

    CHECK(out.contact);
    CHECK(out.object_id == "box");
    CHECK(out.moved_object_id == "box");
    CHECK(is_identity(out.displacement));
    CHECK(norm(out.contact_point - Vec3{0, 0, 0.05}) < 1e-12);
    CHECK(norm(out.impact_normal - Vec3{0, 0, 1}) < 1e-12);

    REQUIRE(out.patch.points.size() == 16);
    REQUIRE(out.patch.normals.size() == 16);
    Vec3 centroid{0, 0, 0};
    for (std::size_t i = 0; i < 16; ++i) {
        const Vec3& p = out.patch.points[i];
        CHECK(std::abs(dot(p - out.contact_point, out.impact_normal)) < 1e-9);
        CHECK(norm(p - out.contact_point) == doctest::Approx(0.008).epsilon(1e-9));
        CHECK(norm(out.patch.normals[i] - out.impact_normal) == 0.0);
        centroid = centroid + p;
    }
    centroid = centroid / 16.0;
    CHECK(norm(centroid - out.contact_point) < 1e-9);

    // stroke starts at standoff height and stops 1 cm shy of contact
    const Vec3 start = Vec3{0, 0, 0.05} + Vec3{0, 0, 1} * cfg.standoff;
    REQUIRE(out.swept_free.size() == 19);
    CHECK(norm(out.swept_free.front() - start) == 0.0);
    CHECK(out.swept_free.back().z == doctest::Approx(0.06).epsilon(1e-9));
    for (std::size_t i = 0; i < out.swept_free.size(); ++i) {
        const Vec3& p = out.swept_free[i];
        CHECK(p.x == 0.0);
        CHECK(p.y == 0.0);
        CHECK(p.z == doctest::Approx(0.15 - 0.005 * i).epsilon(1e-12));
        CHECK(p.z > 0.05 + 0.009); // all outside the box with margin
    }
}

TEST_CASE("sphere touch matches the analytic ray-sphere solution") {
    Scene scene = table_scene();
    scene.objects.push_back(
        SceneObject::make("ball", oracle::icosphere(0.05, 3), {}));

    const TouchConfig cfg = quiet_touch();
    std::mt19937_64 rng(2);
    const TouchOutcome out =
        simulate_touch(scene, {0, 0, 0.05}, {0, 0, 1}, cfg, rng);

    CHECK(out.contact);
    CHECK(out.object_id == "ball");
    CHECK(norm(out.contact_point - Vec3{0, 0, 0.05}) < 1e-3);
    CHECK(dot(out.impact_normal, Vec3{0, 0, 1}) > 0.99);

    REQUIRE(out.swept_free.size() == 19);
    for (std::size_t i = 0; i < out.swept_free.size(); ++i) {
        CHECK(out.swept_free[i].z ==
              doctest::Approx(0.15 - 0.005 * i).epsilon(1e-9));
        CHECK(out.swept_free[i].z > 0.06 - 1e-6);
    }

    // off-axis touch: contact lands on the sphere, normal points outward
    const Vec3 n = tact::geom::normalized({1.0, 1.0, 1.0});
    const TouchOutcome side =
        simulate_touch(scene, n * 0.05, n, cfg, rng);
    CHECK(side.contact);
    CHECK(std::abs(norm(side.contact_point) - 0.05) < 1.2e-3);
    CHECK(dot(side.impact_normal, n) > 0.99);
}

TEST_CASE("a missed probe sweeps the whole stroke") {
    Scene scene = table_scene();
    scene.objects.push_back(SceneObject::make(
        "box", oracle::box_mesh({-0.05, -0.05, 0.0}, {0.05, 0.05, 0.05}), {}));

    TouchConfig cfg = quiet_touch();
    cfg.max_travel = 0.10; // documented example: 0.10 m at 5 mm spacing
    std::mt19937_64 rng(3);
    const TouchOutcome out =
        simulate_touch(scene, {0.2, 0.2, 0.05}, {0, 0, 1}, cfg, rng);

    CHECK(!out.contact);
    CHECK(out.object_id.empty());
    CHECK(out.moved_object_id.empty());
    CHECK(out.patch.points.empty());
    CHECK(is_identity(out.displacement));
    REQUIRE(out.swept_free.size() == 20);
    const Vec3 start = Vec3{0.2, 0.2, 0.05} + Vec3{0, 0, 1} * cfg.standoff;
    CHECK(norm(out.swept_free.front() - start) == 0.0);
    CHECK(out.swept_free.back().z == doctest::Approx(0.055).epsilon(1e-12));
}

TEST_CASE("table contact is recorded without a patch or displacement") {
    Scene scene = table_scene();
    const TouchConfig cfg = quiet_touch();
    std::mt19937_64 rng(4);
    const TouchOutcome out =
        simulate_touch(scene, {0.3, 0.0, 0.0}, {0, 0, 1}, cfg, rng);

    CHECK(out.contact);
    CHECK(out.object_id.empty());
    CHECK(out.moved_object_id.empty());
    CHECK(out.patch.points.empty());
    CHECK(is_identity(out.displacement));
    CHECK(norm(out.contact_point - Vec3{0.3, 0.0, 0.0}) < 1e-12);
    CHECK(norm(out.impact_normal - Vec3{0, 0, 1}) < 1e-15);
    REQUIRE(!out.swept_free.empty());
    for (const Vec3& p : out.swept_free)
        CHECK(p.z > 0.009); // exclusion zone above the table
}

TEST_CASE("touch rejects bad approaches") {
    Scene scene = table_scene();
    scene.objects.push_back(
        SceneObject::make("ball", oracle::icosphere(0.05, 2), {}));
    const TouchConfig cfg = quiet_touch();
    std::mt19937_64 rng(5);

    CHECK_THROWS_AS(
        simulate_touch(scene, {0, 0, 0.05}, {0, 0, 2}, cfg, rng),
        std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        simulate_touch(scene, {0, 0, 0.05}, {0, 0, -1}, cfg, rng),
        doctest::Contains("unreachable"), std::runtime_error);

    TouchConfig bad = cfg;
    bad.sweep_step = 0.0;
    CHECK_THROWS_AS(simulate_touch(scene, {0, 0, 0.05}, {0, 0, 1}, bad, rng),
                    std::invalid_argument);
}

// ---------------------------------------------------------------------------
// displacement

TEST_CASE("displacement draws are seeded and bounded") {
    auto make_scene = [] {
        Scene scene = table_scene();
        scene.objects.push_back(SceneObject::make(
            "box",
            oracle::box_mesh({0.08, 0.17, 0.0}, {0.12, 0.23, 0.05}), {}));
        return scene;
    };
    DisplacementConfig cfg;
    cfg.max_translation = 0.02;
    cfg.direction_bias = 0.7;
    cfg.max_yaw_deg = 10.0;

    SUBCASE("same seed, same transform") {
        Scene a = make_scene(), b = make_scene();
        std::mt19937_64 ra(99), rb(99);
        const auto ta = displace_object(a, "box", {0, 0, -1}, cfg, ra);
        const auto tb = displace_object(b, "box", {0, 0, -1}, cfg, rb);
        for (int i = 0; i < 9; ++i)
            CHECK(ta.r[i] == tb.r[i]);
        CHECK(ta.t.x == tb.t.x);
        CHECK(ta.t.y == tb.t.y);
        CHECK(ta.t.z == tb.t.z);
    }

    SUBCASE("bounds hold over many draws") {
        Scene scene = make_scene();
        std::mt19937_64 rng(123);
        const double yaw_cap = 10.0 * 3.141592653589793 / 180.0;
        for (int i = 0; i < 10000; ++i) {
            const Vec3 before = scene.objects[0].center();
            const auto tf =
                displace_object(scene, "box", {0.3, -0.8, -0.5}, cfg, rng);
            const Vec3 after = scene.objects[0].center();
            CHECK(norm(tf.apply(before) - before) <= 0.02 + 1e-12);
            CHECK(tact::geom::rotation_angle(tf) <= yaw_cap + 1e-12);
            CHECK(std::abs(after.z - before.z) < 1e-12);
            CHECK(norm(tf.apply(before) - after) < 1e-9);
        }
    }

    SUBCASE("full bias pushes along the probe's horizontal component") {
        Scene scene = make_scene();
        DisplacementConfig along = cfg;
        along.direction_bias = 1.0;
        std::mt19937_64 rng(7);
        for (int i = 0; i < 100; ++i) {
            const Vec3 before = scene.objects[0].center();
            const auto tf =
                displace_object(scene, "box", {1.0, 0.0, -1.0}, along, rng);
            const Vec3 moved = tf.apply(before) - before;
            CHECK(moved.x >= -1e-15);
            CHECK(std::abs(moved.y) < 1e-12);
        }
    }

    SUBCASE("zero-magnitude config is the exact identity") {
        Scene scene = make_scene();
        DisplacementConfig none;
        none.max_translation = 0.0;
        none.max_yaw_deg = 0.0;
        std::mt19937_64 rng(11);
        const auto tf = displace_object(scene, "box", {0, 1, 0}, none, rng);
        CHECK(is_identity(tf));
        CHECK(is_identity(scene.objects[0].pose));
    }

    SUBCASE("unknown object and bad config throw") {
        Scene scene = make_scene();
        std::mt19937_64 rng(1);
        CHECK_THROWS_AS(displace_object(scene, "ghost", {0, 0, -1}, cfg, rng),
                        std::invalid_argument);
        DisplacementConfig bad = cfg;
        bad.direction_bias = 1.5;
        CHECK_THROWS_AS(displace_object(scene, "box", {0, 0, -1}, bad, rng),
                        std::invalid_argument);
    }
}

TEST_CASE("contacting touches keep evidence consistent with the final pose") {
    Scene scene = table_scene();
    scene.objects.push_back(SceneObject::make(
        "ball", oracle::icosphere(0.05, 3),
        RigidTransform{{1, 0, 0, 0, 1, 0, 0, 0, 1}, {0.1, 0.1, 0.05}}));
    scene.objects.push_back(SceneObject::make(
        "box", oracle::box_mesh({-0.15, -0.15, 0.0}, {-0.05, -0.05, 0.06}),
        {}));

    TouchConfig cfg; // defaults: 1 mm contact noise, displacement on
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    int ball_contacts = 0;
    for (int i = 0; i < 30; ++i) {
        // aim at the ball's current surface from an upper-hemisphere angle
        const double az = 2.0 * 3.141592653589793 * u01(rng);
        const double el = 0.5 * 3.141592653589793 * u01(rng);
        const Vec3 n{std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
                     std::sin(el)};
        const Vec3 center = scene.find("ball")->center();
        const Vec3 pre_center = center;
        const TouchOutcome out =
            simulate_touch(scene, center + n * 0.05, n, cfg, rng);

        if (!out.contact || out.object_id != "ball")
            continue;
        ++ball_contacts;
        CHECK(out.moved_object_id == "ball");

        const SceneObject* ball = scene.find("ball");
        const Vec3 now = ball->center();
        CHECK(norm(out.displacement.apply(pre_center) - now) < 1e-9);

        const auto posed = ball->posed_mesh();
        for (const Vec3& p : out.swept_free)
            CHECK(!tact::geom::point_in_mesh(posed, p));
        CHECK(std::abs(norm(out.contact_point - now) - 0.05) < 0.006);
        for (const Vec3& p : out.patch.points)
            CHECK(std::abs(norm(p - now) - 0.05) < 0.007);
    }
    CHECK(ball_contacts >= 25);
}

TEST_CASE("crop_free_space keeps strictly closer points") {
    const Vec3 center{0.1, 0.0, 0.05};
    const std::vector<Vec3> pts = {
        center,                          // distance 0
        center + Vec3{0.19, 0, 0},       // kept
        center + Vec3{0.21, 0, 0},       // dropped
        center + Vec3{0, 0, 0.25},       // dropped
        center + Vec3{-0.1, 0.1, 0.05},  // kept
    };
    const auto free = crop_free_space(pts, center);
    REQUIRE(free.points.size() == 3);
    CHECK(norm(free.points[0] - center) == 0.0);
    CHECK(norm(free.points[1] - (center + Vec3{0.19, 0, 0})) == 0.0);
}

// ---------------------------------------------------------------------------
// scene configuration files

namespace {

std::filesystem::path write_scene_fixture(const std::string& dirname,
                                          nlohmann::json mutate(nlohmann::json)) {
    const auto dir = temp_dir(dirname);
    tact::geom::write_obj((dir / "box.obj").string(),
                          oracle::box_mesh({-0.03, -0.02, 0.0},
                                           {0.03, 0.02, 0.05}));
    nlohmann::json cfg = {
        {"table_z", 0.01},
        {"seed", 42},
        {"camera",
         {{"width", 64},
          {"height", 48},
          {"fx", 55.0},
          {"fy", 50.0},
          {"cx", 31.0},
          {"cy", 23.0},
          {"position", {0.3, -0.3, 0.4}},
          {"look_at", {0.0, 0.0, 0.05}},
          {"noise_std", 0.002}}},
        {"objects",
         {{{"id", "crate"},
           {"mesh", "box.obj"},
           {"position", {0.1, 0.05, 0.01}},
           {"yaw_deg", 90.0},
           {"exclude_from_metrics", true}},
          {{"id", "plain"},
           {"mesh", "box.obj"},
           {"position", {-0.1, 0.0, 0.01}}}}},
    };
    cfg = mutate(std::move(cfg));
    std::ofstream out(dir / "scene.json");
    out << cfg.dump(2);
    return dir / "scene.json";
}

} // namespace

TEST_CASE("scene files load with declared and defaulted fields") {
    const auto path = write_scene_fixture(
        "tact_scene_ok", [](nlohmann::json j) { return j; });
    const SceneFile sf = load_scene(path.string());

    CHECK(sf.scene.table_z == 0.01);
    CHECK(sf.seed == 42);
    CHECK(sf.camera.width == 64);
    CHECK(sf.camera.height == 48);
    CHECK(sf.camera.fx == 55.0);
    CHECK(sf.camera.fy == 50.0);
    CHECK(sf.camera.cx == 31.0);
    CHECK(sf.camera.cy == 23.0);
    CHECK(sf.camera.noise_std == 0.002);
    CHECK(norm(sf.camera.position() - Vec3{0.3, -0.3, 0.4}) == 0.0);
    const Vec3 fwd = sf.camera.pose.rotate({0, 0, 1});
    const Vec3 want =
        tact::geom::normalized(Vec3{0.0, 0.0, 0.05} - Vec3{0.3, -0.3, 0.4});
    CHECK(norm(fwd - want) < 1e-12);

    REQUIRE(sf.scene.objects.size() == 2);
    const SceneObject& crate = sf.scene.objects[0];
    CHECK(crate.id == "crate");
    CHECK(crate.exclude_from_metrics);
    CHECK(crate.mesh->vertices.size() == 8);
    CHECK(norm(crate.pose.t - Vec3{0.1, 0.05, 0.01}) == 0.0);
    // 90 degree yaw carries +x to +y
    CHECK(norm(crate.pose.rotate({1, 0, 0}) - Vec3{0, 1, 0}) < 1e-12);
    CHECK(sf.scene.objects[1].id == "plain");
    CHECK(!sf.scene.objects[1].exclude_from_metrics);
    CHECK(norm(sf.scene.objects[1].pose.rotate({1, 0, 0}) - Vec3{1, 0, 0}) ==
          0.0);

    SUBCASE("defaults for omitted optional keys") {
        const auto sparse = write_scene_fixture(
            "tact_scene_sparse", [](nlohmann::json j) {
                j.erase("table_z");
                j.erase("seed");
                j["camera"].erase("cx");
                j["camera"].erase("cy");
                j["camera"].erase("noise_std");
                j["objects"][0].erase("yaw_deg");
                j["objects"][0].erase("exclude_from_metrics");
                return j;
            });
        const SceneFile df = load_scene(sparse.string());
        CHECK(df.scene.table_z == 0.0);
        CHECK(df.seed == 0);
        CHECK(df.camera.cx == (64 - 1) / 2.0);
        CHECK(df.camera.cy == (48 - 1) / 2.0);
        CHECK(df.camera.noise_std == 0.0);
        CHECK(!df.scene.objects[0].exclude_from_metrics);
        CHECK(norm(df.scene.objects[0].pose.rotate({1, 0, 0}) -
                   Vec3{1, 0, 0}) == 0.0);
    }
}

TEST_CASE("scene files reject schema violations by name") {
    auto expect_throw = [](const std::string& dirname, auto mutate,
                           const char* needle) {
        const auto path = write_scene_fixture(dirname, mutate);
        CHECK_THROWS_WITH_AS(load_scene(path.string()),
                             doctest::Contains(needle),
                             std::invalid_argument);
    };

    expect_throw(
        "tact_scene_unknown_top",
        [](nlohmann::json j) {
            j["frobnicate"] = 1;
            return j;
        },
        "frobnicate");
    expect_throw(
        "tact_scene_unknown_cam",
        [](nlohmann::json j) {
            j["camera"]["fov"] = 60;
            return j;
        },
        "camera.fov");
    expect_throw(
        "tact_scene_unknown_obj",
        [](nlohmann::json j) {
            j["objects"][1]["glow"] = true;
            return j;
        },
        "objects[1].glow");
    expect_throw(
        "tact_scene_dup_id",
        [](nlohmann::json j) {
            j["objects"][1]["id"] = "crate";
            return j;
        },
        "duplicate");
    expect_throw(
        "tact_scene_missing_cam",
        [](nlohmann::json j) {
            j["camera"].erase("width");
            return j;
        },
        "camera.width");
    expect_throw(
        "tact_scene_missing_objs",
        [](nlohmann::json j) {
            j.erase("objects");
            return j;
        },
        "objects");
    expect_throw(
        "tact_scene_bad_vec",
        [](nlohmann::json j) {
            j["camera"]["position"] = {0.1, 0.2};
            return j;
        },
        "camera.position");

    CHECK_THROWS_AS(load_scene("/nonexistent/scene.json"),
                    std::runtime_error);

    const auto dir = temp_dir("tact_scene_garbage");
    std::ofstream(dir / "scene.json") << "{ not json";
    CHECK_THROWS_WITH_AS(load_scene((dir / "scene.json").string()),
                         doctest::Contains("parse"), std::runtime_error);
}
