#pragma once

// Repeated-run experiment driver: executes the exploration pipeline several
// times with distinct seeds, collects per-touch metric rows, aggregates them
// across repetitions, and serializes both as CSV and a text summary.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tactoshape/evalkit/metrics.hpp"
#include "tactoshape/field/field.hpp"
#include "tactoshape/pipeline/pipeline.hpp"
#include "tactoshape/sensim/scene_io.hpp"

namespace tact::evalkit {

struct ExperimentSpec {
    std::string scene_label = "scene"; // first CSV column
    sensim::SceneFile scene;
    pipeline::PipelineConfig config;
    pipeline::Budget budget;
    std::uint64_t seed = 0;       // repetition r runs with mix_seed(seed, r)
    std::size_t repetitions = 3;

    void validate() const; // throws std::invalid_argument
};

struct ExperimentRow {
    std::string scene;
    std::size_t repetition = 0;
    MetricRecord record;
};

// Mean / sample standard deviation over the repetitions that produced a
// finite value (absent metrics are skipped, not zero-filled).
struct Stat {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t count = 0;
};

struct AggregateRow {
    std::size_t touch = 0;
    Stat wall_time_s, jaccard, chamfer_m, area_dev, mean_uncertainty;
};

struct ExperimentResult {
    std::vector<ExperimentRow> rows;        // repetition-major, touch-minor
    std::vector<AggregateRow> aggregate;    // ascending touch index
};

// Runs spec.repetitions pipelines. Repetitions execute concurrently up to
// the TACTOSHAPE_THREADS environment variable (hardware concurrency when
// unset); row order and content do not depend on the thread count.
ExperimentResult run_experiment(const ExperimentSpec& spec,
                                const field::FieldParams& params);

// Aggregates any row set by touch index; run_experiment uses this on its own
// rows, and tests recompute it by hand.
std::vector<AggregateRow> aggregate_rows(const std::vector<ExperimentRow>& rows);

// CSV with the exact header
//   scene,repetition,touch,wall_time_s,jaccard,chamfer_m,area_dev,mean_uncertainty
// one row per record; non-finite metric values become empty cells.
std::string metrics_csv(const std::vector<ExperimentRow>& rows);
void write_metrics_csv(const std::vector<ExperimentRow>& rows,
                       const std::string& path);

// Human-readable per-touch means and deviations.
std::string summary_text(const ExperimentResult& result);

}  // namespace tact::evalkit
