#include "tactoshape/completion/service.hpp"

#include "tactoshape/util/seed.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace tact::completion {

void ServiceConfig::validate() const {
    weights.validate();
    infer.validate();
    if (grid_n < 2)
        throw std::invalid_argument("service: extraction grid too small");
    if (grid_inflate < 0.0 || grid_min_extent <= 0.0)
        throw std::invalid_argument("service: bad extraction box settings");
}

CompletionService::CompletionService(field::FieldParams params,
                                     ServiceConfig config)
    : params_(std::move(params)), config_(std::move(config)),
      checksum_(field::params_checksum(params_)) {
    params_.validate();
    config_.validate();
    if (!config_.loss_curve_dir.empty())
        std::filesystem::create_directories(config_.loss_curve_dir);
    paused_ = config_.start_paused;
    worker_ = std::thread([this] { worker_loop(); });
}

CompletionService::~CompletionService() {
    {
        std::lock_guard lk(mu_);
        stop_ = true;
    }
    cv_.notify_all();
    worker_.join();
}

void CompletionService::register_object(const std::string& id,
                                        geom::PointCloud evidence,
                                        std::vector<geom::PointSource> tags,
                                        FreeSpaceSet free,
                                        std::vector<double> prior_latent) {
    if (id.empty())
        throw std::invalid_argument("object id must not be empty");
    if (!evidence.empty() && !evidence.has_normals())
        throw std::invalid_argument("evidence cloud must carry normals");
    if (!tags.empty() && tags.size() != evidence.size())
        throw std::invalid_argument("evidence tags length mismatch");
    if (!prior_latent.empty() &&
        prior_latent.size() != params_.config.latent_dim)
        throw std::invalid_argument("prior latent size does not match");
    if (tags.empty())
        tags.assign(evidence.size(), geom::PointSource::visual);

    std::lock_guard lk(mu_);
    if (objects_.count(id))
        throw std::invalid_argument("object '" + id + "' already registered");
    ObjectState st;
    st.evidence = std::move(evidence);
    st.tags = std::move(tags);
    st.free = std::move(free.points);
    objects_.emplace(id, std::move(st));
    latents_[id] =
        prior_latent.empty()
            ? field::init_latent(params_.config.latent_dim,
                                 util::mix_seed(config_.seed,
                                                util::hash_name(id)))
            : std::move(prior_latent);
}

void CompletionService::add_evidence(const std::string& id,
                                     const geom::PointCloud& cloud,
                                     geom::PointSource tag,
                                     const std::vector<geom::Vec3>& free_points) {
    if (!cloud.empty() && !cloud.has_normals())
        throw std::invalid_argument("evidence cloud must carry normals");
    std::lock_guard lk(mu_);
    auto it = objects_.find(id);
    if (it == objects_.end())
        throw std::invalid_argument("unknown object '" + id + "'");
    it->second.evidence.append(cloud);
    it->second.tags.insert(it->second.tags.end(), cloud.size(), tag);
    it->second.free.insert(it->second.free.end(), free_points.begin(),
                           free_points.end());
}

std::uint64_t CompletionService::submit(const std::string& id) {
    std::lock_guard lk(mu_);
    auto it = objects_.find(id);
    if (it == objects_.end())
        throw std::invalid_argument("unknown object '" + id + "'");
    it->second.submitted = true;
    if (auto p = pending_.find(id); p != pending_.end()) {
        for (auto& r : queue_) {
            if (r.id == p->second) {
                r.evidence = it->second.evidence;
                r.free = it->second.free;
                break;
            }
        }
        return p->second;
    }
    const std::uint64_t rid = next_request_++;
    queue_.push_back({rid, id, it->second.evidence, it->second.free});
    pending_[id] = rid;
    cv_.notify_all();
    return rid;
}

std::shared_ptr<const CompletionResult>
CompletionService::poll(const std::string& id) const {
    std::lock_guard lk(mu_);
    auto it = objects_.find(id);
    if (it == objects_.end() || !it->second.submitted)
        throw std::invalid_argument("unknown object '" + id + "'");
    auto r = results_.find(id);
    return r == results_.end() ? nullptr : r->second;
}

bool CompletionService::wait(std::uint64_t request_id,
                             double timeout_s) const {
    std::unique_lock lk(mu_);
    return cv_.wait_for(lk, std::chrono::duration<double>(timeout_s), [&] {
        return completed_ids_.count(request_id) != 0;
    });
}

void CompletionService::resume() {
    {
        std::lock_guard lk(mu_);
        paused_ = false;
    }
    cv_.notify_all();
}

std::vector<std::uint64_t> CompletionService::completion_order() const {
    std::lock_guard lk(mu_);
    return completed_order_;
}

void CompletionService::save_evidence(const std::string& dir) const {
    std::filesystem::create_directories(dir);
    std::lock_guard lk(mu_);
    for (const auto& [id, st] : objects_) {
        geom::write_ply_cloud(dir + "/" + id + "_surface.ply", st.evidence,
                              &st.tags);
        geom::PointCloud fc;
        fc.points = st.free;
        geom::write_ply_cloud(dir + "/" + id + "_free.ply", fc);
    }
}

void CompletionService::worker_loop() {
    std::unique_lock lk(mu_);
    for (;;) {
        cv_.wait(lk, [&] { return stop_ || (!paused_ && !queue_.empty()); });
        if (stop_)
            return;
        Request req = std::move(queue_.front());
        queue_.pop_front();
        pending_.erase(req.object);
        std::vector<double> z0 = latents_.at(req.object);
        lk.unlock();

        auto result = run_request(req, std::move(z0));

        lk.lock();
        latents_[req.object] = result->latent;
        results_[req.object] = result;
        completed_order_.push_back(req.id);
        completed_ids_.insert(req.id);
        cv_.notify_all();
    }
}

std::shared_ptr<CompletionResult>
CompletionService::run_request(const Request& req, std::vector<double> z0) {
    auto res = std::make_shared<CompletionResult>();
    res->request_id = req.id;
    res->object_id = req.object;
    const std::uint64_t rseed = util::mix_seed(
        util::mix_seed(config_.seed, util::hash_name(req.object)), req.id);

    std::ofstream curve;
    InferStepFn on_step;
    if (!config_.loss_curve_dir.empty()) {
        std::ostringstream name;
        name << config_.loss_curve_dir << "/request_" << std::setw(6)
             << std::setfill('0') << req.id << ".csv";
        curve.open(name.str());
        curve << std::setprecision(17)
              << "step,data,eikonal,latent,free,total\n";
        on_step = [&curve](std::size_t step, const LossBreakdown& bd) {
            curve << step << ',' << bd.data << ',' << bd.eikonal << ','
                  << bd.latent << ',' << bd.free << ',' << bd.total << '\n';
        };
    }

    try {
        res->latent = infer_latent(params_, z0, req.evidence, req.free,
                                   config_.weights, config_.infer, rseed,
                                   on_step, &res->final_loss);
        if (field::params_checksum(params_) != checksum_)
            throw std::runtime_error("decoder weights changed during inference");
        res->surface = extract_surface_estimate(
            params_, res->latent,
            extraction_box(req.evidence, config_.grid_inflate,
                           config_.grid_min_extent),
            config_.grid_n);
    } catch (const std::exception& e) {
        res->error = e.what();
        if (res->latent.empty())
            res->latent = std::move(z0); // keep the latent table entry valid
    }
    return res;
}

} // namespace tact::completion
