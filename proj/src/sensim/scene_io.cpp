#include "tactoshape/sensim/scene_io.hpp"

#include "tactoshape/geom/mesh_io.hpp"
#include "tactoshape/geom/transform.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

namespace tact::sensim {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a)
                ok = true;
        if (!ok)
            throw std::invalid_argument("scene config: unknown key '" + where +
                                        key + "'");
    }
}

const json& require(const json& obj, const char* key,
                    const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw std::invalid_argument("scene config: missing key '" + where +
                                    key + "'");
    return *it;
}

Vec3 as_vec3(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() ||
        !v[1].is_number() || !v[2].is_number())
        throw std::invalid_argument("scene config: '" + where +
                                    "' must be a [x, y, z] array");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

} // namespace

SceneFile load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("scene config: cannot open '" + path + "'");
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("scene config: parse failure in '" + path +
                                 "': " + e.what());
    }
    if (!root.is_object())
        throw std::invalid_argument("scene config: top level must be object");
    reject_unknown_keys(root, "", {"table_z", "seed", "camera", "objects"});

    SceneFile out;
    out.scene.table_z = root.value("table_z", 0.0);
    out.seed = root.value("seed", std::uint64_t{0});

    const json& cam = require(root, "camera", "");
    reject_unknown_keys(cam, "camera.",
                        {"width", "height", "fx", "fy", "cx", "cy",
                         "position", "look_at", "up", "noise_std"});
    out.camera.width = require(cam, "width", "camera.").get<std::uint32_t>();
    out.camera.height = require(cam, "height", "camera.").get<std::uint32_t>();
    out.camera.fx = require(cam, "fx", "camera.").get<double>();
    out.camera.fy = require(cam, "fy", "camera.").get<double>();
    out.camera.cx = cam.value("cx", 0.5 * (out.camera.width - 1));
    out.camera.cy = cam.value("cy", 0.5 * (out.camera.height - 1));
    out.camera.noise_std = cam.value("noise_std", 0.0);
    const Vec3 cam_pos = as_vec3(require(cam, "position", "camera."),
                                 "camera.position");
    const Vec3 cam_aim = as_vec3(require(cam, "look_at", "camera."),
                                 "camera.look_at");
    const Vec3 cam_up = cam.contains("up")
                            ? as_vec3(cam.at("up"), "camera.up")
                            : Vec3{0, 0, 1};
    out.camera.pose = look_at_camera(cam_pos, cam_aim, cam_up);
    out.camera.validate();

    const json& objs = require(root, "objects", "");
    if (!objs.is_array())
        throw std::invalid_argument("scene config: 'objects' must be array");
    const auto base = std::filesystem::path(path).parent_path();
    std::set<std::string> seen;
    for (std::size_t i = 0; i < objs.size(); ++i) {
        const json& o = objs[i];
        const std::string where = "objects[" + std::to_string(i) + "].";
        reject_unknown_keys(o, where,
                            {"id", "mesh", "position", "yaw_deg",
                             "exclude_from_metrics"});
        const std::string id =
            require(o, "id", where).get<std::string>();
        if (id.empty() || !seen.insert(id).second)
            throw std::invalid_argument(
                "scene config: duplicate or empty object id '" + id + "'");
        const std::string mesh_rel =
            require(o, "mesh", where).get<std::string>();
        const auto mesh_path = base / mesh_rel;
        geom::TriangleMesh mesh = geom::read_mesh(mesh_path.string());
        const Vec3 pos = as_vec3(require(o, "position", where),
                                 where + "position");
        const double yaw =
            o.value("yaw_deg", 0.0) * 3.141592653589793 / 180.0;
        const RigidTransform pose = geom::from_rpy(0.0, 0.0, yaw, pos);
        out.scene.objects.push_back(SceneObject::make(
            id, std::move(mesh), pose, o.value("exclude_from_metrics", false)));
    }
    return out;
}

} // namespace tact::sensim
