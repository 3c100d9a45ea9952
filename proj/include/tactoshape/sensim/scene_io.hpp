#pragma once

// Scene configuration files. JSON schema (all lengths in meters):
//
// {
//   "table_z": 0.0,             // optional, default 0
//   "seed": 7,                  // optional, default 0
//   "camera": {
//     "width": 160, "height": 120,
//     "fx": 140.0, "fy": 140.0,
//     "cx": 79.5, "cy": 59.5,   // optional, default image center
//     "position": [0.25, -0.35, 0.45],
//     "look_at": [0.25, 0.0, 0.0],
//     "up": [0, 0, 1],          // optional
//     "noise_std": 0.0          // optional
//   },
//   "objects": [
//     {
//       "id": "ball",
//       "mesh": "meshes/ball.obj",   // relative to this file
//       "position": [0.2, 0.0, 0.05],
//       "yaw_deg": 0.0,              // optional
//       "exclude_from_metrics": false // optional
//     }
//   ]
// }
//
// Unknown keys are rejected by name; so are duplicate object ids.

#include "tactoshape/sensim/camera.hpp"
#include "tactoshape/sensim/scene.hpp"

#include <cstdint>
#include <string>

namespace tact::sensim {

struct SceneFile {
    Scene scene;
    CameraModel camera;
    std::uint64_t seed = 0;
};

// Throws std::invalid_argument naming the offending key on schema errors
// and std::runtime_error on unreadable files or meshes.
SceneFile load_scene(const std::string& path);

} // namespace tact::sensim
