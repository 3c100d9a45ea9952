#pragma once

// Background completion worker. One thread exclusively runs the latent
// optimizations against a frozen decoder; everything else talks to it
// through registration, evidence updates, submit, and poll. Poll hands out
// immutable result snapshots.

#include "tactoshape/completion/completion.hpp"
#include "tactoshape/field/field.hpp"
#include "tactoshape/geom/mesh_io.hpp"

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace tact::completion {

struct ServiceConfig {
    LossWeights weights;
    InferConfig infer;
    std::uint32_t grid_n = 64;      // extraction lattice samples per axis
    double grid_inflate = 0.25;     // evidence box inflation for extraction
    double grid_min_extent = 0.02;  // extraction box floor, meters
    std::uint64_t seed = 0;
    std::string loss_curve_dir;     // per-request CSVs; empty disables
    bool start_paused = false;      // queue accepts work, worker waits

    void validate() const;
};

struct CompletionResult {
    std::uint64_t request_id = 0;
    std::string object_id;
    std::vector<double> latent;
    LossBreakdown final_loss;
    SurfaceEstimate surface;
    // Empty on success. A failed optimization or extraction lands here; the
    // worker never dies with the request.
    std::string error;

    bool ok() const { return error.empty(); }
};

class CompletionService {
  public:
    // Takes the frozen decoder. The weights never change afterwards; the
    // worker asserts their checksum around every optimization.
    CompletionService(field::FieldParams params, ServiceConfig config);
    ~CompletionService();

    CompletionService(const CompletionService&) = delete;
    CompletionService& operator=(const CompletionService&) = delete;

    // Creates the evidence store entry for an object. `tags` is per-point
    // provenance (defaults to visual when empty). The starting latent is
    // `prior_latent` when given, otherwise a seeded small random code.
    // Throws std::invalid_argument on duplicate ids, missing normals, or
    // size mismatches.
    void register_object(const std::string& id, geom::PointCloud evidence,
                         std::vector<geom::PointSource> tags = {},
                         FreeSpaceSet free = {},
                         std::vector<double> prior_latent = {});

    // Appends surface evidence (must carry normals) with one provenance tag
    // for all its points, plus free-space points. Throws for unknown ids.
    void add_evidence(const std::string& id, const geom::PointCloud& cloud,
                      geom::PointSource tag,
                      const std::vector<geom::Vec3>& free_points = {});

    // Enqueues a completion for the object and returns the request id. The
    // evidence is snapshotted here, so the result is a function of the call
    // sequence, not of worker timing. A repeated submit while the earlier
    // request still waits in the queue coalesces: the pending snapshot is
    // refreshed and the same id returned. A running request does not
    // coalesce. Throws for unknown ids.
    std::uint64_t submit(const std::string& id);

    // Latest published result for the object, or nullptr while the first
    // request is still pending. Throws std::invalid_argument("unknown
    // object ...") when the object was never submitted.
    std::shared_ptr<const CompletionResult> poll(const std::string& id) const;

    // Blocks until the request completes; false on timeout (wall clock).
    bool wait(std::uint64_t request_id, double timeout_s) const;

    // Releases the worker after a paused start.
    void resume();

    // Request ids in the order their optimizations finished.
    std::vector<std::uint64_t> completion_order() const;

    // Persists per-object evidence as <id>_surface.ply (with source tags)
    // and <id>_free.ply under dir, creating it if needed.
    void save_evidence(const std::string& dir) const;

    const field::FieldParams& params() const { return params_; }
    std::uint64_t params_checksum() const { return checksum_; }

  private:
    struct Request {
        std::uint64_t id = 0;
        std::string object;
        geom::PointCloud evidence;
        std::vector<geom::Vec3> free;
    };

    struct ObjectState {
        geom::PointCloud evidence;
        std::vector<geom::PointSource> tags;
        std::vector<geom::Vec3> free;
        bool submitted = false;
    };

    void worker_loop();
    std::shared_ptr<CompletionResult> run_request(const Request& req,
                                                  std::vector<double> z0);

    const field::FieldParams params_;
    const ServiceConfig config_;
    const std::uint64_t checksum_;

    mutable std::mutex mu_;
    mutable std::condition_variable cv_;
    bool stop_ = false;
    bool paused_ = false;
    std::uint64_t next_request_ = 1;
    std::map<std::string, ObjectState> objects_;
    std::map<std::string, std::vector<double>> latents_;
    std::map<std::string, std::shared_ptr<const CompletionResult>> results_;
    std::deque<Request> queue_;
    std::map<std::string, std::uint64_t> pending_;
    std::vector<std::uint64_t> completed_order_;
    std::set<std::uint64_t> completed_ids_;
    std::thread worker_;
};

} // namespace tact::completion
