#include "tactoshape/harness/config.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace tact::harness {

namespace {

using nlohmann::json;

struct Loader {
    std::string label; // "train config" | "run manifest"

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument(label + ": " + msg);
    }

    json parse_file(const std::string& path) const {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error(label + ": cannot open '" + path + "'");
        try {
            json root = json::parse(in);
            if (!root.is_object())
                fail("top level must be an object");
            return root;
        } catch (const json::parse_error& e) {
            throw std::runtime_error(label + ": parse failure in '" + path +
                                     "': " + e.what());
        }
    }

    void reject_unknown(const json& obj, const std::string& where,
                        std::initializer_list<const char*> allowed) const {
        for (const auto& [key, value] : obj.items()) {
            bool ok = false;
            for (const char* a : allowed)
                if (key == a)
                    ok = true;
            if (!ok)
                fail("unknown key '" + where + key + "'");
        }
    }

    const json* find(const json& obj, const char* key) const {
        auto it = obj.find(key);
        return it == obj.end() ? nullptr : &*it;
    }

    const json& require(const json& obj, const char* key,
                        const std::string& where) const {
        const json* v = find(obj, key);
        if (!v)
            fail("missing key '" + where + key + "'");
        return *v;
    }

    void get_count(const json& obj, const char* key, const std::string& where,
                   std::size_t& out) const {
        if (const json* v = find(obj, key)) {
            if (!v->is_number_unsigned())
                fail("'" + where + key + "' must be a non-negative integer");
            out = v->get<std::size_t>();
        }
    }

    void get_u32(const json& obj, const char* key, const std::string& where,
                 std::uint32_t& out) const {
        if (const json* v = find(obj, key)) {
            if (!v->is_number_unsigned())
                fail("'" + where + key + "' must be a non-negative integer");
            out = v->get<std::uint32_t>();
        }
    }

    void get_int(const json& obj, const char* key, const std::string& where,
                 int& out) const {
        if (const json* v = find(obj, key)) {
            if (!v->is_number_integer())
                fail("'" + where + key + "' must be an integer");
            out = v->get<int>();
        }
    }

    void get_double(const json& obj, const char* key, const std::string& where,
                    double& out) const {
        if (const json* v = find(obj, key)) {
            if (!v->is_number())
                fail("'" + where + key + "' must be a number");
            out = v->get<double>();
        }
    }

    void get_bool(const json& obj, const char* key, const std::string& where,
                  bool& out) const {
        if (const json* v = find(obj, key)) {
            if (!v->is_boolean())
                fail("'" + where + key + "' must be true or false");
            out = v->get<bool>();
        }
    }

    void get_seed(const json& obj, const char* key, const std::string& where,
                  std::uint64_t& out) const {
        if (const json* v = find(obj, key)) {
            if (!v->is_number_unsigned())
                fail("'" + where + key + "' must be a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }

    void get_range(const json& obj, const char* key, const std::string& where,
                   ParamRange& out) const {
        if (const json* v = find(obj, key)) {
            if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() ||
                !(*v)[1].is_number())
                fail("'" + where + key + "' must be a [lo, hi] number pair");
            out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
        }
    }

    std::string get_path(const json& obj, const char* key,
                         const std::string& where,
                         const std::filesystem::path& base) const {
        const json& v = require(obj, key, where);
        if (!v.is_string())
            fail("'" + where + key + "' must be a path string");
        return (base / v.get<std::string>()).string();
    }
};

} // namespace

void TrainSpec::validate() const {
    corpus.validate();
    if (corpus.total_count() == 0)
        throw std::invalid_argument("train config: corpus has no shapes");
    field.validate();
    train.validate();
    weights.validate();
}

TrainSpec load_train_spec(const std::string& path) {
    const Loader ld{"train config"};
    const json root = ld.parse_file(path);
    ld.reject_unknown(root, "", {"seed", "corpus", "field", "train", "weights"});

    TrainSpec spec;
    ld.get_seed(root, "seed", "", spec.seed);
    spec.corpus.seed = spec.seed; // one seed governs the whole recipe

    if (const json* c = ld.find(root, "corpus")) {
        ld.reject_unknown(*c, "corpus.",
                          {"spheres", "sphere_radius", "boxes",
                           "box_half_extent", "ellipsoids",
                           "ellipsoid_semi_axis", "capsules", "capsule_radius",
                           "capsule_half_length", "superellipsoids",
                           "super_semi_axis", "super_exponent", "tessellation",
                           "samples_per_shape"});
        CorpusSpec& cs = spec.corpus;
        ld.get_count(*c, "spheres", "corpus.", cs.spheres);
        ld.get_range(*c, "sphere_radius", "corpus.", cs.sphere_radius);
        ld.get_count(*c, "boxes", "corpus.", cs.boxes);
        ld.get_range(*c, "box_half_extent", "corpus.", cs.box_half_extent);
        ld.get_count(*c, "ellipsoids", "corpus.", cs.ellipsoids);
        ld.get_range(*c, "ellipsoid_semi_axis", "corpus.",
                     cs.ellipsoid_semi_axis);
        ld.get_count(*c, "capsules", "corpus.", cs.capsules);
        ld.get_range(*c, "capsule_radius", "corpus.", cs.capsule_radius);
        ld.get_range(*c, "capsule_half_length", "corpus.",
                     cs.capsule_half_length);
        ld.get_count(*c, "superellipsoids", "corpus.", cs.superellipsoids);
        ld.get_range(*c, "super_semi_axis", "corpus.", cs.super_semi_axis);
        ld.get_range(*c, "super_exponent", "corpus.", cs.super_exponent);
        ld.get_int(*c, "tessellation", "corpus.", cs.tessellation);
        ld.get_count(*c, "samples_per_shape", "corpus.", cs.samples_per_shape);
    }
    if (const json* f = ld.find(root, "field")) {
        ld.reject_unknown(*f, "field.",
                          {"latent_dim", "hidden_layers", "hidden_width",
                           "skip_layer", "beta"});
        ld.get_u32(*f, "latent_dim", "field.", spec.field.latent_dim);
        ld.get_u32(*f, "hidden_layers", "field.", spec.field.hidden_layers);
        ld.get_u32(*f, "hidden_width", "field.", spec.field.hidden_width);
        ld.get_u32(*f, "skip_layer", "field.", spec.field.skip_layer);
        ld.get_double(*f, "beta", "field.", spec.field.beta);
    }
    if (const json* t = ld.find(root, "train")) {
        ld.reject_unknown(*t, "train.",
                          {"epochs", "batch_size", "off_uniform",
                           "off_gaussian", "box_inflate", "learning_rate"});
        ld.get_count(*t, "epochs", "train.", spec.train.epochs);
        ld.get_count(*t, "batch_size", "train.", spec.train.batch_size);
        ld.get_count(*t, "off_uniform", "train.", spec.train.off_uniform);
        ld.get_count(*t, "off_gaussian", "train.", spec.train.off_gaussian);
        ld.get_double(*t, "box_inflate", "train.", spec.train.box_inflate);
        ld.get_double(*t, "learning_rate", "train.", spec.train.optim.lr);
    }
    if (const json* w = ld.find(root, "weights")) {
        ld.reject_unknown(*w, "weights.",
                          {"lambda_eikonal", "alpha_latent", "w_free",
                           "free_margin", "free_hinge"});
        ld.get_double(*w, "lambda_eikonal", "weights.",
                      spec.weights.lambda_eikonal);
        ld.get_double(*w, "alpha_latent", "weights.",
                      spec.weights.alpha_latent);
        ld.get_double(*w, "w_free", "weights.", spec.weights.w_free);
        ld.get_double(*w, "free_margin", "weights.", spec.weights.free_margin);
        ld.get_bool(*w, "free_hinge", "weights.", spec.weights.free_hinge);
    }
    spec.validate();
    return spec;
}

void RunManifest::validate() const {
    if (scene.empty())
        throw std::invalid_argument("run manifest: 'scene' must not be empty");
    if (checkpoint.empty())
        throw std::invalid_argument(
            "run manifest: 'checkpoint' must not be empty");
    if (repetitions == 0)
        throw std::invalid_argument(
            "run manifest: 'repetitions' must be positive");
    budget.validate();
    pipeline.validate();
}

RunManifest load_run_manifest(const std::string& path) {
    const Loader ld{"run manifest"};
    const json root = ld.parse_file(path);
    ld.reject_unknown(root, "",
                      {"scene", "checkpoint", "budget", "seed", "noise",
                       "repetitions", "pipeline"});

    RunManifest mf;
    const auto base = std::filesystem::path(path).parent_path();
    mf.scene = ld.get_path(root, "scene", "", base);
    mf.checkpoint = ld.get_path(root, "checkpoint", "", base);
    ld.get_seed(root, "seed", "", mf.seed);
    ld.get_bool(root, "noise", "", mf.pipeline.noise);
    ld.get_count(root, "repetitions", "", mf.repetitions);

    if (const json* b = ld.find(root, "budget")) {
        ld.reject_unknown(*b, "budget.", {"touches", "seconds"});
        ld.get_count(*b, "touches", "budget.", mf.budget.max_touches);
        ld.get_double(*b, "seconds", "budget.", mf.budget.max_seconds);
    }
    if (const json* p = ld.find(root, "pipeline")) {
        ld.reject_unknown(*p, "pipeline.",
                          {"grid_n", "infer_steps", "batch_size", "batch_mode",
                           "free_space_cap", "capture_seconds",
                           "touch_seconds", "max_consecutive"});
        auto& svc = mf.pipeline.service;
        ld.get_u32(*p, "grid_n", "pipeline.", svc.grid_n);
        ld.get_count(*p, "infer_steps", "pipeline.", svc.infer.steps);
        ld.get_count(*p, "batch_size", "pipeline.", svc.infer.batch_size);
        if (const json* m = ld.find(*p, "batch_mode")) {
            const std::string mode =
                m->is_string() ? m->get<std::string>() : std::string{};
            if (mode == "fps")
                svc.infer.batch_mode = completion::BatchMode::fps;
            else if (mode == "random")
                svc.infer.batch_mode = completion::BatchMode::random;
            else
                ld.fail("'pipeline.batch_mode' must be \"fps\" or \"random\"");
        }
        ld.get_count(*p, "free_space_cap", "pipeline.", svc.infer.free_space_cap);
        ld.get_double(*p, "capture_seconds", "pipeline.",
                      mf.pipeline.capture_seconds);
        ld.get_double(*p, "touch_seconds", "pipeline.",
                      mf.pipeline.touch_seconds);
        ld.get_count(*p, "max_consecutive", "pipeline.",
                     mf.pipeline.max_consecutive);
    }
    mf.validate();
    return mf;
}

} // namespace tact::harness
