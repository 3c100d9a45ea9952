#pragma once

// Closed-loop exploration coordinator: segment every object from the first
// view, keep a background completion per object, then repeatedly touch the
// most uncertain surface point, re-estimate the touched object's pose, and
// fold the re-anchored visual + haptic evidence back into its completion,
// until the touch or time budget runs out.
//
// Time accounting is simulated: captures and touches charge fixed durations
// while completions overlap with them for free, so runs are reproducible on
// any machine. Real time only bounds the completion-service waits.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tactoshape/completion/completion.hpp"
#include "tactoshape/completion/service.hpp"
#include "tactoshape/evalkit/metrics.hpp"
#include "tactoshape/field/field.hpp"
#include "tactoshape/geom/cloud.hpp"
#include "tactoshape/geom/mesh_io.hpp"
#include "tactoshape/geom/transform.hpp"
#include "tactoshape/pipeline/event_log.hpp"
#include "tactoshape/register/icp.hpp"
#include "tactoshape/sensim/scene_io.hpp"
#include "tactoshape/sensim/touch.hpp"

namespace tact::pipeline {

// Exploration budget: at most `max_touches` touches, and no new iteration
// starts once the simulated clock passes `max_seconds`.
struct Budget {
    std::size_t max_touches = 15;
    double max_seconds = 600.0;

    void validate() const; // throws std::invalid_argument
};

struct PipelineConfig {
    completion::ServiceConfig service; // seed is overridden per run
    sensim::TouchConfig touch;
    reg::IcpParams icp;

    double capture_seconds = 0.5;  // simulated cost of one depth capture
    double touch_seconds = 8.0;    // simulated cost of one probe stroke
    double completion_timeout_s = 120.0; // real seconds per request wait

    double segment_threshold = 0.02; // flood-fill depth continuity, meters
    double bbox_inflate = 0.10;      // detector stand-in box widening
    double rebbox_inflate = 0.15;    // post-touch search box widening
    double table_margin = 0.003;     // drop visual points this close to the table
    double free_space_radius = 0.20; // crop radius around the evidence centroid
    double max_normal_down_deg = 60.0; // steeper-down normals are unreachable
    std::size_t max_consecutive = 3; // same-object touches before a forced skip
    std::size_t normal_k = 12;       // neighbors for visual normal estimation

    // false freezes the simulation: no depth noise, no contact jitter, no
    // touch-induced displacement.
    bool noise = true;

    void validate() const; // throws std::invalid_argument
};

// The touch the selector picked: the global-argmax uncertainty vertex among
// eligible estimate points, mapped into the current world pose.
struct TouchSelection {
    std::string object;
    std::size_t point_index = 0; // vertex index in the object's estimate
    geom::Vec3 point;            // world frame, current pose
    geom::Vec3 normal;           // world frame, unit
    double uncertainty = 0.0;
};

// Per-object input to the selector. `estimate` lives in the object's anchor
// frame (the first-view frame all evidence is expressed in);
// `anchor_to_current` maps it onto the current pose.
struct CandidateSet {
    std::string object;
    const completion::SurfaceEstimate* estimate = nullptr;
    geom::RigidTransform anchor_to_current;
    std::size_t consecutive = 0; // touches in a row this object received
};

// Global argmax of vertex uncertainty across candidates, subject to:
//  - vertices whose world normal points down more than
//    config.max_normal_down_deg below horizontal are skipped;
//  - pairs listed in `excluded` (object id, vertex index) are skipped;
//  - a candidate with consecutive >= config.max_consecutive sits out, unless
//    it is the only candidate with an estimate;
//  - ties resolve to the lowest (object id, vertex index).
// Returns nullopt when nothing is eligible. Pure function: counters are the
// caller's to update.
std::optional<TouchSelection> select_touch_point(
    const std::vector<CandidateSet>& candidates, const PipelineConfig& config,
    const std::vector<std::pair<std::string, std::size_t>>& excluded = {});

// Maps freshly sensed data into the anchor frame: points transformed,
// normals rotated.
geom::PointCloud reanchor_data(const geom::PointCloud& cloud,
                               const geom::RigidTransform& current_to_anchor);

struct ObjectOutput {
    std::string id;
    std::vector<double> latent;
    completion::SurfaceEstimate estimate; // anchor frame; empty on failure
    bool estimate_ok = false;
    geom::RigidTransform current_to_anchor; // final registration
    geom::PointCloud evidence;              // anchor frame
    std::vector<geom::PointSource> tags;    // provenance per evidence point
    std::vector<geom::Vec3> free_points;    // anchor frame
    bool excluded_from_metrics = false;
};

struct PipelineResult {
    std::vector<ObjectOutput> objects; // scene order
    std::vector<evalkit::MetricRecord> metrics; // row t = evidence thru touch t
    std::size_t touches = 0;
    double sim_seconds = 0.0;
};

// Runs the loop on a copy of the scene. `params` is the frozen decoder; all
// randomness (camera noise, touch jitter, completion batches) derives from
// `seed`. Events land in `log` when given. Throws std::runtime_error when a
// completion wait exceeds config.completion_timeout_s or the first view
// yields no usable segmentation for some object.
PipelineResult run_pipeline(const sensim::SceneFile& scene_file,
                            const field::FieldParams& params,
                            const PipelineConfig& config, const Budget& budget,
                            std::uint64_t seed, EventLog* log = nullptr);

}  // namespace tact::pipeline
