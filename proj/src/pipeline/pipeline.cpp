#include "tactoshape/pipeline/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "tactoshape/geom/sampling.hpp"
#include "tactoshape/sensim/camera.hpp"
#include "tactoshape/util/seed.hpp"

namespace tact::pipeline {

using completion::CompletionResult;
using completion::SurfaceEstimate;
using geom::PointCloud;
using geom::PointSource;
using geom::RigidTransform;
using geom::Vec3;
using sensim::CameraModel;
using sensim::DepthImage;
using sensim::PixelRect;

void Budget::validate() const {
    if (!(max_seconds > 0.0))
        throw std::invalid_argument("budget: max_seconds must be positive");
}

void PipelineConfig::validate() const {
    service.validate();
    touch.validate();
    icp.validate();
    if (!(capture_seconds >= 0.0) || !(touch_seconds >= 0.0))
        throw std::invalid_argument("pipeline: simulated durations must be >= 0");
    if (!(completion_timeout_s > 0.0))
        throw std::invalid_argument("pipeline: completion_timeout_s must be positive");
    if (!(segment_threshold > 0.0))
        throw std::invalid_argument("pipeline: segment_threshold must be positive");
    if (bbox_inflate < 0.0 || rebbox_inflate < 0.0)
        throw std::invalid_argument("pipeline: bbox inflations must be >= 0");
    if (table_margin < 0.0)
        throw std::invalid_argument("pipeline: table_margin must be >= 0");
    if (!(free_space_radius > 0.0))
        throw std::invalid_argument("pipeline: free_space_radius must be positive");
    if (max_normal_down_deg < 0.0 || max_normal_down_deg > 90.0)
        throw std::invalid_argument("pipeline: max_normal_down_deg must be in [0, 90]");
    if (max_consecutive == 0)
        throw std::invalid_argument("pipeline: max_consecutive must be positive");
    if (normal_k < 3)
        throw std::invalid_argument("pipeline: normal_k must be at least 3");
}

std::optional<TouchSelection> select_touch_point(
    const std::vector<CandidateSet>& candidates, const PipelineConfig& config,
    const std::vector<std::pair<std::string, std::size_t>>& excluded) {
    // Lowest-id-first scan makes the strict > comparison implement the tie
    // rule for free.
    std::vector<const CandidateSet*> order;
    std::size_t with_estimate = 0;
    for (const auto& c : candidates) {
        if (!c.estimate || c.estimate->uncertainty.empty()) continue;
        ++with_estimate;
        order.push_back(&c);
    }
    std::sort(order.begin(), order.end(),
              [](const CandidateSet* a, const CandidateSet* b) {
                  return a->object < b->object;
              });

    const double min_nz =
        -std::sin(config.max_normal_down_deg * std::numbers::pi / 180.0);
    std::optional<TouchSelection> best;
    for (const CandidateSet* c : order) {
        // The consecutive-touch skip never empties the pool: with a single
        // populated candidate it stays eligible.
        if (c->consecutive >= config.max_consecutive && with_estimate > 1)
            continue;
        const auto& est = *c->estimate;
        for (std::size_t i = 0; i < est.uncertainty.size(); ++i) {
            const double u = est.uncertainty[i];
            if (best && !(u > best->uncertainty)) continue;
            const Vec3 n_world =
                c->anchor_to_current.rotate(est.points.normals[i]);
            if (geom::norm(n_world) < 1e-12) continue;
            const Vec3 n_unit = geom::normalized(n_world);
            if (n_unit.z < min_nz) continue;
            if (std::find(excluded.begin(), excluded.end(),
                          std::make_pair(c->object, i)) != excluded.end())
                continue;
            TouchSelection sel;
            sel.object = c->object;
            sel.point_index = i;
            sel.point = c->anchor_to_current.apply(est.points.points[i]);
            sel.normal = n_unit;
            sel.uncertainty = u;
            best = std::move(sel);
        }
    }
    return best;
}

geom::PointCloud reanchor_data(const geom::PointCloud& cloud,
                               const geom::RigidTransform& current_to_anchor) {
    return cloud.transformed(current_to_anchor);
}

namespace {

Vec3 pixel_to_world(const CameraModel& cam, std::uint32_t u, std::uint32_t v,
                    double z) {
    const Vec3 d_cam{(u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0};
    return cam.pose.apply(d_cam * z);
}

PixelRect inflate_rect(const PixelRect& r, double frac, std::uint32_t width,
                       std::uint32_t height) {
    const double du = 0.5 * frac * (r.u1 - r.u0 + 1);
    const double dv = 0.5 * frac * (r.v1 - r.v0 + 1);
    PixelRect out;
    out.u0 = std::max(0, static_cast<int>(std::floor(r.u0 - du)));
    out.v0 = std::max(0, static_cast<int>(std::floor(r.v0 - dv)));
    out.u1 = std::min(static_cast<int>(width) - 1,
                      static_cast<int>(std::ceil(r.u1 + du)));
    out.v1 = std::min(static_cast<int>(height) - 1,
                      static_cast<int>(std::ceil(r.v1 + dv)));
    return out;
}

// Seed for region growing: the pixel with a depth return nearest the box
// center, skipping returns at table height so the fill starts on the object.
// Row-major scan order breaks distance ties.
std::optional<std::pair<int, int>> find_seed(const DepthImage& depth,
                                             const CameraModel& cam,
                                             const PixelRect& bbox,
                                             double min_world_z) {
    const int cu = bbox.center_u(), cv = bbox.center_v();
    const int u0 = std::max(0, bbox.u0);
    const int v0 = std::max(0, bbox.v0);
    const int u1 = std::min(static_cast<int>(depth.width) - 1, bbox.u1);
    const int v1 = std::min(static_cast<int>(depth.height) - 1, bbox.v1);
    long best = -1;
    std::pair<int, int> seed{0, 0};
    for (int v = v0; v <= v1; ++v) {
        for (int u = u0; u <= u1; ++u) {
            const double z = depth.at(static_cast<std::uint32_t>(u),
                                      static_cast<std::uint32_t>(v));
            if (z <= 0.0) continue;
            if (pixel_to_world(cam, static_cast<std::uint32_t>(u),
                               static_cast<std::uint32_t>(v), z)
                    .z < min_world_z)
                continue;
            const long q = static_cast<long>(u - cu) * (u - cu) +
                           static_cast<long>(v - cv) * (v - cv);
            if (best < 0 || q < best) {
                best = q;
                seed = {u, v};
            }
        }
    }
    if (best < 0) return std::nullopt;
    return seed;
}

struct Segmented {
    PointCloud cloud; // world frame, normals estimated, table points dropped
    std::size_t mask_pixels = 0;
};

// bbox -> seed -> flood fill -> back-project -> drop table-height points ->
// PCA normals toward the camera. nullopt when too few points survive for
// normal estimation.
std::optional<Segmented> segment_in_bbox(const DepthImage& depth,
                                         const CameraModel& cam,
                                         const PixelRect& bbox,
                                         const PipelineConfig& config,
                                         double table_z) {
    const double min_z = table_z + config.table_margin;
    const auto seed = find_seed(depth, cam, bbox, min_z);
    if (!seed) return std::nullopt;
    const auto mask = sensim::flood_fill_segment(
        depth, seed->first, seed->second, config.segment_threshold, bbox);
    const PointCloud raw = sensim::depth_to_cloud(depth, mask, cam);

    Segmented out;
    for (const auto& m : mask) out.mask_pixels += m != 0;
    for (const auto& p : raw.points)
        if (p.z >= min_z) out.cloud.points.push_back(p);
    if (out.cloud.points.size() <= config.normal_k) return std::nullopt;
    out.cloud.normals =
        geom::estimate_normals(out.cloud.points, config.normal_k, cam.position());
    return out;
}

nlohmann::ordered_json jvec(const Vec3& v) {
    return nlohmann::ordered_json::array({v.x, v.y, v.z});
}

// Per-object pipeline state. Evidence mirrors the service store so ICP can
// match fresh views against exactly what the completions see.
struct Track {
    std::string id;
    bool excluded = false;
    PointCloud evidence; // anchor frame
    std::vector<PointSource> tags;
    std::vector<Vec3> free_points;
    RigidTransform current_to_anchor;
    std::size_t consecutive = 0;
    PixelRect bbox; // latest detector box, for the post-touch re-segmentation
    std::shared_ptr<const CompletionResult> result;
};

struct Coordinator {
    const PipelineConfig& config;
    sensim::Scene scene;
    CameraModel camera;
    EventLog* log = nullptr;
    std::vector<geom::TriangleMesh> gt_meshes{}; // initial poses, metric truth
    std::vector<Track> tracks{};
    completion::CompletionService* service = nullptr;
    std::mt19937_64 camera_rng{};
    std::mt19937_64 touch_rng{};
    std::uint64_t metric_seed = 0;
    double clock = 0.0;
    std::size_t touches = 0;
    DepthImage view{}; // latest capture
    PipelineResult out{};

    void record(const std::string& kind, EventLog::Event fields) {
        if (log) log->record(kind, std::move(fields));
    }

    Track* find_track(const std::string& id) {
        for (auto& t : tracks)
            if (t.id == id) return &t;
        return nullptr;
    }

    void capture() {
        clock += config.capture_seconds;
        if (config.noise && camera.noise_std > 0.0)
            view = sensim::render_depth(scene, camera, camera_rng);
        else
            view = sensim::render_depth(scene, camera);
    }

    // Detector stand-in: the ground-truth mesh projected into the current
    // view, widened by bbox_inflate.
    std::optional<PixelRect> detect(const Track& track) {
        const auto* obj = scene.find(track.id);
        const auto posed = obj->posed_mesh();
        return sensim::project_bbox(camera, posed.vertices, config.bbox_inflate);
    }

    void wait_or_throw(std::uint64_t request, const std::string& id) {
        if (service->wait(request, config.completion_timeout_s)) return;
        record("timeout", {{"object", id}, {"request", request}});
        throw std::runtime_error("pipeline: completion request for '" + id +
                                 "' timed out");
    }

    void refresh_result(Track& track) {
        track.result = service->poll(track.id);
        if (track.result && !track.result->ok())
            record("completion_error",
                   {{"object", track.id}, {"error", track.result->error}});
    }

    // ICP of a fresh world-frame view against the anchor-frame evidence;
    // adopts the absolute current-to-anchor fit, or keeps the old
    // registration when the view or the fit is unusable.
    void register_view(Track& track, const std::optional<Segmented>& seg) {
        if (!seg || seg->cloud.points.size() < 3 ||
            track.evidence.points.size() < 3) {
            record("pose_skipped", {{"object", track.id}});
            return;
        }
        try {
            const auto res =
                reg::icp_register(seg->cloud, track.evidence, config.icp);
            if (res.iterations == 0 || !std::isfinite(res.rmse)) {
                record("pose_skipped", {{"object", track.id}});
                return;
            }
            track.current_to_anchor = res.transform;
            record("pose", {{"object", track.id},
                            {"rmse", res.rmse},
                            {"iterations", res.iterations},
                            {"converged", res.converged}});
        } catch (const std::exception& e) {
            record("pose_skipped", {{"object", track.id}, {"error", e.what()}});
        }
    }

    // Loop-top pose refresh: re-detect, re-segment, re-register.
    void update_pose(Track& track) {
        const auto bbox = detect(track);
        std::optional<Segmented> seg;
        if (bbox) {
            track.bbox = *bbox;
            seg = segment_in_bbox(view, camera, *bbox, config, scene.table_z);
        }
        register_view(track, seg);
    }

    void append_surface(Track& track, const PointCloud& cloud, PointSource tag) {
        track.evidence.append(cloud);
        track.tags.insert(track.tags.end(), cloud.size(), tag);
        service->add_evidence(track.id, cloud, tag);
    }

    void emit_metrics() {
        evalkit::MetricRecord row;
        row.touch = touches;
        row.wall_time_s = clock;
        double jac = 0, cham = 0, area = 0, unc = 0;
        std::size_t n_shape = 0, n_unc = 0;
        for (std::size_t i = 0; i < tracks.size(); ++i) {
            const auto& t = tracks[i];
            if (!t.result || !t.result->ok()) continue;
            const auto& est = t.result->surface;
            if (!est.uncertainty.empty()) {
                double s = 0;
                for (double u : est.uncertainty) s += u;
                unc += s / static_cast<double>(est.uncertainty.size());
                ++n_unc;
            }
            if (t.excluded || est.mesh.vertices.empty()) continue;
            jac += evalkit::jaccard_similarity(est.mesh, gt_meshes[i], 40);
            cham += evalkit::chamfer_distance(
                est.mesh, gt_meshes[i], 2048,
                util::mix_seed(util::mix_seed(metric_seed, touches), i));
            area += evalkit::area_deviation(est.mesh, gt_meshes[i]);
            ++n_shape;
        }
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.jaccard = n_shape ? jac / n_shape : nan;
        row.chamfer_m = n_shape ? cham / n_shape : nan;
        row.area_dev = n_shape ? area / n_shape : nan;
        row.mean_uncertainty = n_unc ? unc / n_unc : nan;
        out.metrics.push_back(row);
        record("metrics", {{"touch", row.touch},
                           {"wall_time_s", row.wall_time_s},
                           {"jaccard", row.jaccard},
                           {"chamfer_m", row.chamfer_m},
                           {"area_dev", row.area_dev},
                           {"mean_uncertainty", row.mean_uncertainty}});
    }
};

} // namespace

PipelineResult run_pipeline(const sensim::SceneFile& scene_file,
                            const field::FieldParams& params,
                            const PipelineConfig& config, const Budget& budget,
                            std::uint64_t seed, EventLog* log) {
    config.validate();
    budget.validate();
    if (scene_file.scene.objects.empty())
        throw std::invalid_argument("pipeline: scene has no objects");

    Coordinator co{.config = config,
                   .scene = scene_file.scene,
                   .camera = scene_file.camera,
                   .log = log};
    co.camera_rng.seed(util::mix_seed(seed, util::hash_name("camera")));
    co.touch_rng.seed(util::mix_seed(seed, util::hash_name("touch")));
    co.metric_seed = util::mix_seed(seed, util::hash_name("metrics"));
    if (!config.noise) co.camera.noise_std = 0.0;

    sensim::TouchConfig touch_cfg = config.touch;
    if (!config.noise) {
        touch_cfg.contact_noise_std = 0.0;
        touch_cfg.displacement.max_translation = 0.0;
        touch_cfg.displacement.max_yaw_deg = 0.0;
    }

    completion::ServiceConfig service_cfg = config.service;
    service_cfg.seed = util::mix_seed(seed, util::hash_name("service"));
    completion::CompletionService service(params, service_cfg);
    co.service = &service;

    co.record("init", {{"objects", co.scene.objects.size()},
                       {"table_z", co.scene.table_z},
                       {"seed", seed},
                       {"noise", config.noise}});

    // ------------------------------------------------------------------
    // First view: detect, segment, and register every object, then wait for
    // the vision-only completions.
    // ------------------------------------------------------------------
    for (const auto& obj : co.scene.objects) {
        co.gt_meshes.push_back(obj.posed_mesh());
        Track t;
        t.id = obj.id;
        t.excluded = obj.exclude_from_metrics;
        co.tracks.push_back(std::move(t));
    }

    co.capture();
    std::vector<std::uint64_t> initial_requests;
    for (auto& track : co.tracks) {
        const auto bbox = co.detect(track);
        std::optional<Segmented> seg;
        if (bbox) {
            track.bbox = *bbox;
            seg = segment_in_bbox(co.view, co.camera, *bbox, config,
                                  co.scene.table_z);
        }
        if (!seg)
            throw std::runtime_error(
                "pipeline: first view yields no segmentation for '" + track.id +
                "'");
        track.evidence = seg->cloud;
        track.tags.assign(track.evidence.size(), PointSource::visual);
        co.record("segment", {{"object", track.id},
                              {"pixels", seg->mask_pixels},
                              {"points", track.evidence.size()}});
        service.register_object(track.id, track.evidence);
        initial_requests.push_back(service.submit(track.id));
    }
    for (std::size_t i = 0; i < co.tracks.size(); ++i)
        co.wait_or_throw(initial_requests[i], co.tracks[i].id);
    for (auto& track : co.tracks) co.refresh_result(track);
    co.emit_metrics();

    // ------------------------------------------------------------------
    // Exploration loop. Each iteration: budget gate, pose refresh for all
    // objects, re-completion of the previously touched one (so metric row n
    // reflects touches 0..n), then pick and execute the next touch.
    // ------------------------------------------------------------------
    std::string last_touched;
    bool row_pending = false; // a touch happened since the last metric row
    for (std::size_t n = 0; n < budget.max_touches; ++n) {
        if (co.clock >= budget.max_seconds) {
            co.record("budget_stop", {{"wall_time_s", co.clock}});
            break;
        }
        if (n > 0) {
            for (auto& track : co.tracks) co.update_pose(track);
            Track* prev = co.find_track(last_touched);
            if (prev) {
                co.wait_or_throw(service.submit(prev->id), prev->id);
                co.refresh_result(*prev);
            }
            co.emit_metrics();
            row_pending = false;
        }

        // Candidates come from the latest completed estimates; a touch
        // rejected as unreachable excludes that vertex and reselects.
        std::vector<CandidateSet> candidates;
        for (const auto& track : co.tracks) {
            CandidateSet c;
            c.object = track.id;
            c.estimate = (track.result && track.result->ok())
                             ? &track.result->surface
                             : nullptr;
            c.anchor_to_current = geom::inverse(track.current_to_anchor);
            c.consecutive = track.consecutive;
            candidates.push_back(std::move(c));
        }
        std::vector<std::pair<std::string, std::size_t>> excluded;
        std::optional<TouchSelection> sel;
        std::optional<sensim::TouchOutcome> outcome;
        for (;;) {
            sel = select_touch_point(candidates, config, excluded);
            if (!sel) break;
            try {
                outcome = sensim::simulate_touch(co.scene, sel->point,
                                                 sel->normal, touch_cfg,
                                                 co.touch_rng);
                break;
            } catch (const std::runtime_error& e) {
                co.record("reselect", {{"object", sel->object},
                                       {"point_index", sel->point_index},
                                       {"reason", e.what()}});
                excluded.emplace_back(sel->object, sel->point_index);
            }
        }
        if (!outcome) {
            co.record("no_reachable_touch", {{"iteration", n}});
            break;
        }
        co.clock += config.touch_seconds;
        ++co.touches;

        // The probe may have met a different object than intended (or the
        // table); evidence goes to whatever it actually touched.
        Track* target = nullptr;
        if (outcome->contact && !outcome->object_id.empty())
            target = co.find_track(outcome->object_id);
        if (!target) target = co.find_track(sel->object);

        // Post-touch view: one segmentation inside the pre-touch box widened
        // for the displacement serves both the pose update and the visual
        // evidence for the touched object.
        co.capture();
        const auto rebbox = inflate_rect(target->bbox, config.rebbox_inflate,
                                         co.view.width, co.view.height);
        const auto seg =
            segment_in_bbox(co.view, co.camera, rebbox, config, co.scene.table_z);
        co.register_view(*target, seg);

        PointCloud visual_anchor;
        if (seg)
            visual_anchor = reanchor_data(seg->cloud, target->current_to_anchor);
        if (!visual_anchor.empty())
            co.append_surface(*target, visual_anchor, PointSource::visual);
        const PointCloud patch_anchor =
            reanchor_data(outcome->patch, target->current_to_anchor);
        std::vector<Vec3> swept_anchor;
        swept_anchor.reserve(outcome->swept_free.size());
        for (const auto& p : outcome->swept_free)
            swept_anchor.push_back(target->current_to_anchor.apply(p));
        const auto free = sensim::crop_free_space(
            swept_anchor,
            target->evidence.empty() ? target->current_to_anchor.apply(sel->point)
                                     : target->evidence.centroid(),
            config.free_space_radius);
        if (!patch_anchor.empty() || !free.empty()) {
            service.add_evidence(target->id, patch_anchor, PointSource::touch,
                                 free.points);
            target->evidence.append(patch_anchor);
            target->tags.insert(target->tags.end(), patch_anchor.size(),
                                PointSource::touch);
            target->free_points.insert(target->free_points.end(),
                                       free.points.begin(), free.points.end());
        }

        // Touched object counts up; everyone else resets. An object that sat
        // out this round (counter at the cap) starts over too, so with one
        // object the cap never wedges the loop.
        for (auto& track : co.tracks) {
            if (&track != target)
                track.consecutive = 0;
            else if (track.consecutive >= config.max_consecutive)
                track.consecutive = 1;
            else
                ++track.consecutive;
        }
        last_touched = target->id;
        row_pending = true;

        co.record("touch",
                  {{"iteration", n},
                   {"object", sel->object},
                   {"point_index", sel->point_index},
                   {"uncertainty", sel->uncertainty},
                   {"point", jvec(sel->point)},
                   {"normal", jvec(sel->normal)},
                   {"contact", outcome->contact},
                   {"contacted", outcome->object_id},
                   {"moved", outcome->moved_object_id},
                   {"contact_point", jvec(outcome->contact_point)},
                   {"patch_points", patch_anchor.size()},
                   {"free_points", free.size()},
                   {"visual_points", visual_anchor.size()},
                   {"pose_delta",
                    {{"rotation_deg", geom::rotation_angle(outcome->displacement) *
                                          180.0 / std::numbers::pi},
                     {"translation_m", geom::norm(outcome->displacement.t)}}},
                   {"loss",
                    {{"data", target->result ? target->result->final_loss.data : 0.0},
                     {"eikonal",
                      target->result ? target->result->final_loss.eikonal : 0.0},
                     {"latent",
                      target->result ? target->result->final_loss.latent : 0.0},
                     {"free", target->result ? target->result->final_loss.free : 0.0},
                     {"total",
                      target->result ? target->result->final_loss.total : 0.0}}},
                   {"wall_time_s", co.clock}});
    }

    // Fold the final touch into its completion so the last metric row covers
    // every touch taken.
    if (row_pending) {
        Track* prev = co.find_track(last_touched);
        if (prev) {
            co.wait_or_throw(service.submit(prev->id), prev->id);
            co.refresh_result(*prev);
        }
        co.emit_metrics();
    }

    co.record("done", {{"touches", co.touches}, {"wall_time_s", co.clock}});

    for (auto& track : co.tracks) {
        ObjectOutput obj;
        obj.id = track.id;
        if (track.result && track.result->ok()) {
            obj.latent = track.result->latent;
            obj.estimate = track.result->surface;
            obj.estimate_ok = true;
        } else if (track.result) {
            obj.latent = track.result->latent;
        }
        obj.current_to_anchor = track.current_to_anchor;
        obj.evidence = std::move(track.evidence);
        obj.tags = std::move(track.tags);
        obj.free_points = std::move(track.free_points);
        obj.excluded_from_metrics = track.excluded;
        co.out.objects.push_back(std::move(obj));
    }
    co.out.touches = co.touches;
    co.out.sim_seconds = co.clock;
    return co.out;
}

}  // namespace tact::pipeline
