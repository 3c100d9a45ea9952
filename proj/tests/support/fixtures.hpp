#pragma once

// Shared pipeline-level test fixtures: a tiny decoder trained once per
// binary on a sphere and a box, scene configs on disk, and a fast
// PipelineConfig. Small enough to train in about a second; tests assert
// mechanics tightly and reconstruction quality loosely.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tactoshape/completion/completion.hpp"
#include "tactoshape/geom/mesh_io.hpp"
#include "tactoshape/geom/sampling.hpp"
#include "tactoshape/pipeline/pipeline.hpp"

#include "support/oracles.hpp"

namespace fixtures {

inline std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline const tact::field::FieldParams& test_decoder() {
    static const tact::field::FieldParams params = [] {
        tact::field::FieldConfig fc;
        fc.latent_dim = 8;
        fc.hidden_layers = 2;
        fc.hidden_width = 32;
        fc.skip_layer = 2;

        std::vector<tact::completion::TrainShape> shapes;
        shapes.push_back({"sphere", tact::geom::sample_mesh_surface(
                                        oracle::icosphere(0.05, 3), 500, 11u)});
        shapes.push_back(
            {"box", tact::geom::sample_mesh_surface(
                        oracle::box_mesh({-0.04, -0.03, -0.04},
                                         {0.04, 0.03, 0.04}),
                        500, 12u)});

        tact::completion::TrainConfig tc;
        tc.epochs = 120;
        tc.batch_size = 96;
        tc.off_uniform = 48;
        tc.off_gaussian = 48;
        const auto ckpt = tact::completion::train_autodecoder(
            fc, shapes, tc, tact::completion::LossWeights{}, 5);
        return ckpt.params;
    }();
    return params;
}

// ball.obj + box.obj plus one.json (single ball) and two.json (ball + box).
inline const std::filesystem::path& scene_dir() {
    static const std::filesystem::path dir = [] {
        const auto d = temp_dir("tact_pipeline_scenes");
        tact::geom::write_obj((d / "ball.obj").string(),
                              oracle::icosphere(0.05, 2));
        tact::geom::write_obj(
            (d / "box.obj").string(),
            oracle::box_mesh({-0.04, -0.03, -0.04}, {0.04, 0.03, 0.04}));

        const char* one = R"({
  "table_z": 0.0,
  "camera": {
    "width": 64, "height": 48, "fx": 55.0, "fy": 55.0,
    "position": [0.0, -0.40, 0.35], "look_at": [0.0, 0.0, 0.05],
    "noise_std": 0.002
  },
  "objects": [
    {"id": "ball", "mesh": "ball.obj", "position": [0.0, 0.0, 0.05]}
  ]
})";
        const char* two = R"({
  "table_z": 0.0,
  "camera": {
    "width": 64, "height": 48, "fx": 55.0, "fy": 55.0,
    "position": [0.0, -0.40, 0.35], "look_at": [0.0, 0.0, 0.05],
    "noise_std": 0.002
  },
  "objects": [
    {"id": "ball", "mesh": "ball.obj", "position": [-0.07, 0.0, 0.05]},
    {"id": "box", "mesh": "box.obj", "position": [0.09, 0.0, 0.04],
     "yaw_deg": 15.0}
  ]
})";
        std::ofstream(d / "one.json") << one;
        std::ofstream(d / "two.json") << two;
        return d;
    }();
    return dir;
}

inline tact::pipeline::PipelineConfig test_config() {
    tact::pipeline::PipelineConfig cfg;
    cfg.service.infer.steps = 60;
    cfg.service.infer.batch_size = 64;
    cfg.service.infer.off_uniform = 32;
    cfg.service.infer.off_gaussian = 32;
    cfg.service.infer.free_space_cap = 256;
    cfg.service.grid_n = 20;
    cfg.noise = false;
    return cfg;
}

} // namespace fixtures
