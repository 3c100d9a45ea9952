#pragma once

#include "tactoshape/field/field.hpp"

#include <map>
#include <string>

namespace tact::field {

// Trained network plus the per-shape latent table, as persisted on disk.
//
// Binary little-endian layout (all integers uint32, all reals float64):
//   magic "TSF1", version
//   latent_dim, hidden_layers, hidden_width, skip_layer, beta
//   per layer (hidden layers first, output last):
//     nin, nout, nin*nout weights (input-major rows), nout biases
//   latent count, then per entry: id length, id bytes, latent_dim values
// Round-trips are bit-exact.
struct Checkpoint {
    FieldParams params;
    std::map<std::string, std::vector<double>> latents; // shape id -> code
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);

// Throws std::runtime_error naming the problem (bad magic, unsupported
// version, truncation, shape mismatch).
Checkpoint load_checkpoint(const std::string& path);

} // namespace tact::field
