#pragma once

// Configuration files for the command-line front end. Both formats are JSON
// with a published schema (see schema/ in the repository root); unknown keys
// are rejected by name so typos fail loudly instead of silently defaulting.

#include "tactoshape/completion/completion.hpp"
#include "tactoshape/harness/corpus.hpp"
#include "tactoshape/pipeline/pipeline.hpp"

#include <cstdint>
#include <string>

namespace tact::harness {

// Decoder training recipe: corpus recipe, network topology, optimization
// settings, and loss weights. Every block is optional in the file; defaults
// are the struct defaults.
struct TrainSpec {
    CorpusSpec corpus;
    field::FieldConfig field;
    completion::TrainConfig train;
    completion::LossWeights weights;
    std::uint64_t seed = 0;

    // Throws std::invalid_argument; a corpus with zero shapes is rejected.
    void validate() const;
};

// Throws std::invalid_argument naming the offending key on schema errors and
// std::runtime_error on unreadable files.
TrainSpec load_train_spec(const std::string& path);

// One evaluation setup: scene, trained checkpoint, touch/time budget, seed,
// and noise toggle. Relative paths are resolved against the manifest's
// directory.
struct RunManifest {
    std::string scene;      // scene config path, resolved
    std::string checkpoint; // checkpoint path, resolved
    pipeline::Budget budget;
    pipeline::PipelineConfig pipeline; // includes the noise toggle
    std::uint64_t seed = 0;
    std::size_t repetitions = 3; // used by `eval`

    void validate() const; // throws std::invalid_argument
};

RunManifest load_run_manifest(const std::string& path);

} // namespace tact::harness
