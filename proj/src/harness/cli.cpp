#include "tactoshape/harness/cli.hpp"

#include "tactoshape/evalkit/experiment.hpp"
#include "tactoshape/field/checkpoint.hpp"
#include "tactoshape/geom/mesh_io.hpp"
#include "tactoshape/harness/config.hpp"
#include "tactoshape/harness/corpus.hpp"
#include "tactoshape/pipeline/event_log.hpp"
#include "tactoshape/pipeline/pipeline.hpp"
#include "tactoshape/sensim/scene_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tact::harness {

namespace {

namespace fs = std::filesystem;

// Flags shared by run and eval; negative/empty means "keep manifest value".
struct RunFlags {
    std::string config;
    std::string out = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    long long touches = -1;
    double time_budget = -1.0;
    std::string noise; // "", "on", "off"
    std::size_t reps = 0;
};

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory '" + dir +
                                 "': " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out.write(text.data(), static_cast<std::streamsize>(text.size())))
        throw std::runtime_error("cannot write '" + path + "'");
}

RunManifest load_with_overrides(const RunFlags& f) {
    RunManifest mf = load_run_manifest(f.config);
    if (f.seed_set)
        mf.seed = f.seed;
    if (f.touches >= 0)
        mf.budget.max_touches = static_cast<std::size_t>(f.touches);
    if (f.time_budget >= 0.0)
        mf.budget.max_seconds = f.time_budget;
    if (f.noise == "on")
        mf.pipeline.noise = true;
    else if (f.noise == "off")
        mf.pipeline.noise = false;
    if (f.reps > 0)
        mf.repetitions = f.reps;
    mf.validate();
    return mf;
}

int cmd_train(const RunFlags& f) {
    TrainSpec spec = load_train_spec(f.config);
    if (f.seed_set) {
        spec.seed = f.seed;
        spec.corpus.seed = f.seed;
    }
    const auto corpus = generate_corpus(spec.corpus);

    std::vector<completion::TrainShape> shapes;
    shapes.reserve(corpus.size());
    nlohmann::ordered_json listing = nlohmann::ordered_json::array();
    for (const auto& s : corpus) {
        shapes.push_back({s.id, s.cloud});
        nlohmann::ordered_json entry;
        entry["id"] = s.id;
        entry["family"] = s.family;
        entry["params"] = s.params;
        listing.push_back(std::move(entry));
    }

    std::vector<completion::EpochLog> log;
    const field::Checkpoint ck = completion::train_autodecoder(
        spec.field, shapes, spec.train, spec.weights, spec.seed, &log);

    ensure_dir(f.out);
    const std::string ck_path = f.out + "/checkpoint.tsf";
    field::save_checkpoint(ck_path, ck);
    write_text(f.out + "/corpus.json", listing.dump(2) + "\n");

    const double final_loss = log.empty() ? 0.0 : log.back().mean.total;
    std::printf("trained %zu shapes, %zu epochs, final loss %.6f -> %s\n",
                shapes.size(), spec.train.epochs, final_loss, ck_path.c_str());
    return 0;
}

int cmd_run(const RunFlags& f) {
    const RunManifest mf = load_with_overrides(f);
    const sensim::SceneFile scene = sensim::load_scene(mf.scene);
    const field::Checkpoint ck = field::load_checkpoint(mf.checkpoint);

    pipeline::EventLog log;
    const pipeline::PipelineResult result = pipeline::run_pipeline(
        scene, ck.params, mf.pipeline, mf.budget, mf.seed, &log);

    ensure_dir(f.out);
    log.save(f.out + "/events.jsonl");

    const std::string label = fs::path(mf.scene).stem().string();
    std::vector<evalkit::ExperimentRow> rows;
    rows.reserve(result.metrics.size());
    for (const auto& rec : result.metrics)
        rows.push_back({label, 0, rec});
    evalkit::write_metrics_csv(rows, f.out + "/metrics.csv");

    nlohmann::ordered_json latents;
    std::size_t exported = 0;
    for (const auto& obj : result.objects) {
        latents[obj.id] = obj.latent;
        if (obj.estimate_ok) {
            geom::write_obj(f.out + "/estimate_" + obj.id + ".obj",
                            obj.estimate.mesh);
            ++exported;
        }
    }
    write_text(f.out + "/latents.json", latents.dump(2) + "\n");

    std::printf("run: %zu touches, %.1f simulated seconds, %zu/%zu estimates "
                "-> %s\n",
                result.touches, result.sim_seconds, exported,
                result.objects.size(), f.out.c_str());
    return 0;
}

int cmd_eval(const RunFlags& f) {
    const RunManifest mf = load_with_overrides(f);

    evalkit::ExperimentSpec spec{
        .scene_label = fs::path(mf.scene).stem().string(),
        .scene = sensim::load_scene(mf.scene),
        .config = mf.pipeline,
        .budget = mf.budget,
        .seed = mf.seed,
        .repetitions = mf.repetitions,
    };
    const field::Checkpoint ck = field::load_checkpoint(mf.checkpoint);
    const evalkit::ExperimentResult result =
        evalkit::run_experiment(spec, ck.params);

    ensure_dir(f.out);
    evalkit::write_metrics_csv(result.rows, f.out + "/metrics.csv");
    const std::string summary = evalkit::summary_text(result);
    write_text(f.out + "/summary.txt", summary);

    std::fputs(summary.c_str(), stdout);
    std::printf("eval: %zu repetitions x %zu touches -> %s\n",
                mf.repetitions, mf.budget.max_touches, f.out.c_str());
    return 0;
}

struct ExportFlags {
    std::string checkpoint;
    std::string object;
    std::string latent; // comma-separated values
    std::uint32_t grid = 64;
    double extent = 0.15;
    std::string out = "out";
};

std::vector<double> parse_latent_list(const std::string& text) {
    std::vector<double> values;
    const char* p = text.c_str();
    while (*p) {
        char* end = nullptr;
        const double v = std::strtod(p, &end);
        if (end == p)
            throw std::invalid_argument(
                "export-mesh: '--latent' must be comma-separated numbers");
        values.push_back(v);
        p = end;
        if (*p == ',')
            ++p;
        else if (*p)
            throw std::invalid_argument(
                "export-mesh: '--latent' must be comma-separated numbers");
    }
    return values;
}

int cmd_export(const ExportFlags& f) {
    if (f.object.empty() == f.latent.empty())
        throw std::invalid_argument(
            "export-mesh: give exactly one of --object or --latent");
    const field::Checkpoint ck = field::load_checkpoint(f.checkpoint);

    std::vector<double> z;
    std::string name = "mesh";
    if (!f.object.empty()) {
        auto it = ck.latents.find(f.object);
        if (it == ck.latents.end())
            throw std::invalid_argument("checkpoint '" + f.checkpoint +
                                        "' has no latent for object '" +
                                        f.object + "'");
        z = it->second;
        name = f.object;
    } else {
        z = parse_latent_list(f.latent);
        if (z.size() != ck.params.config.latent_dim)
            throw std::invalid_argument(
                "export-mesh: latent has " + std::to_string(z.size()) +
                " values, checkpoint expects " +
                std::to_string(ck.params.config.latent_dim));
    }
    if (f.extent <= 0.0)
        throw std::invalid_argument("export-mesh: '--extent' must be positive");

    const geom::Aabb box{{-f.extent, -f.extent, -f.extent},
                         {f.extent, f.extent, f.extent}};
    const completion::SurfaceEstimate est =
        completion::extract_surface_estimate(ck.params, z, box, f.grid);

    ensure_dir(f.out);
    const std::string path = f.out + "/" + name + ".obj";
    geom::write_obj(path, est.mesh);
    std::printf("exported %zu vertices, %zu triangles -> %s\n",
                est.mesh.vertex_count(), est.mesh.triangle_count(),
                path.c_str());
    return 0;
}

void add_run_flags(CLI::App* cmd, RunFlags& f, bool with_reps) {
    cmd->add_option("--config", f.config, "configuration file")->required();
    cmd->add_option("--out", f.out, "output directory (default: out)");
    cmd->add_option("--seed", f.seed, "override the configured seed")
        ->each([&f](const std::string&) { f.seed_set = true; });
    cmd->add_option("--touches", f.touches, "override the touch budget N");
    cmd->add_option("--time-budget", f.time_budget,
                    "override the simulated-time budget T, seconds");
    cmd->add_option("--noise", f.noise, "sensor noise on|off")
        ->check(CLI::IsMember({"on", "off"}));
    if (with_reps)
        cmd->add_option("--reps", f.reps, "override manifest repetitions");
}

} // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"closed-loop visuo-haptic shape completion"};
    app.require_subcommand(1);

    RunFlags train_f, run_f, eval_f;
    int rc = 0;
    ExportFlags export_f;

    CLI::App* train = app.add_subcommand(
        "train", "train the shape decoder on a procedural corpus");
    add_run_flags(train, train_f, false);
    train->callback([&] { rc = cmd_train(train_f); });

    CLI::App* run = app.add_subcommand(
        "run", "one exploration run: event log, metrics, estimates");
    add_run_flags(run, run_f, false);
    run->callback([&] { rc = cmd_run(run_f); });

    CLI::App* eval = app.add_subcommand(
        "eval", "repeated runs, aggregated metrics CSV");
    add_run_flags(eval, eval_f, true);
    eval->callback([&] { rc = cmd_eval(eval_f); });

    CLI::App* exp = app.add_subcommand(
        "export-mesh", "extract a checkpoint latent as a watertight OBJ");
    exp->add_option("--checkpoint", export_f.checkpoint, "TSF1 checkpoint")
        ->required();
    exp->add_option("--object", export_f.object, "trained shape id");
    exp->add_option("--latent", export_f.latent,
                    "explicit latent code, comma-separated");
    exp->add_option("--grid", export_f.grid, "marching-cubes lattice size");
    exp->add_option("--extent", export_f.extent,
                    "half-width of the extraction box, meters");
    exp->add_option("--out", export_f.out, "output directory (default: out)");
    exp->callback([&] { rc = cmd_export(export_f); });

    try {
        app.parse(argc, argv);
        return rc;
    } catch (const CLI::CallForHelp&) {
        std::fputs(app.help().c_str(), stdout);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        const int code = e.get_exit_code();
        return code == 0 ? 1 : code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

} // namespace tact::harness
