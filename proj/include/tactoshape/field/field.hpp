#pragma once

#include "tactoshape/geom/vec3.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace tact::field {

using geom::Vec3;

// Network topology of the implicit field f(x; theta, z): an MLP on the
// concatenated input [x, z] with `hidden_layers` softplus layers of
// `hidden_width` units, a linear scalar output, and optionally the input
// concatenated again into one hidden layer ("skip").
struct FieldConfig {
    std::uint32_t latent_dim = 32;
    std::uint32_t hidden_layers = 4;
    std::uint32_t hidden_width = 128;
    // 1-based hidden layer whose input is [previous activation, x, z];
    // 0 disables the skip. Layer 1 already sees the input, so 1 is invalid.
    std::uint32_t skip_layer = 2;
    double beta = 100.0; // softplus sharpness; larger is closer to ReLU

    std::uint32_t input_dim() const { return 3 + latent_dim; }
    std::size_t layer_count() const { return hidden_layers + 1; }

    struct LayerShape {
        std::size_t nin = 0;
        std::size_t nout = 0;
    };
    LayerShape layer_shape(std::size_t layer) const;
    bool layer_has_skip(std::size_t layer) const {
        return skip_layer != 0 && layer + 1 == skip_layer;
    }

    bool operator==(const FieldConfig&) const = default;

    // Throws std::invalid_argument on inconsistent settings.
    void validate() const;
};

// Weights and biases, one entry per layer. Weight matrices are input-major:
// w[layer][j * nout + o] multiplies input j into output o, which makes the
// forward pre-activation a contiguous accumulation per input (the layout the
// vector kernels expect).
struct FieldParams {
    FieldConfig config;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    void validate() const;
};

// Geometric initialization: the untrained network approximates the signed
// distance of a sphere with the given radius (latent and skip columns start
// at zero, the output layer is a calibrated constant row). Stabilizes the
// first optimization steps.
FieldParams geometric_init(const FieldConfig& config, std::uint64_t seed,
                           double radius = 0.05);

// Plain random initialization (zero-mean normals scaled by fan-in); used by
// tests that want an arbitrary non-symmetric operating point.
FieldParams random_init(const FieldConfig& config, std::uint64_t seed,
                        double scale = 1.0);

// i.i.d. N(0, 0.01^2) entries, reproducible for a given seed.
std::vector<double> init_latent(std::uint32_t dim, std::uint64_t seed);

// FNV-1a over the raw parameter bytes; used to assert the frozen-weights
// contract across inference.
std::uint64_t params_checksum(const FieldParams& params);

struct FieldEval {
    double value = 0.0;
    Vec3 grad_x; // exact spatial gradient
};

// Parameter-space gradients accumulated by FieldTape::backward, with the
// same shapes as FieldParams plus the latent gradient.
struct FieldGrads {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    std::vector<double> latent;

    explicit FieldGrads(const FieldConfig& config);
    void zero();
    bool all_finite() const;
};

// Fixed-topology forward/backward workspace for one network architecture.
// forward() evaluates f and its exact spatial gradient (three forward-mode
// tangents ride along the pass); backward() then pulls an arbitrary cotangent
// seed (fbar for the value, gbar for the gradient) back onto the weights and
// the latent code, which covers every loss term including the second-order
// path through grad_x. Buffers are preallocated; one tape per thread.
class FieldTape {
  public:
    explicit FieldTape(const FieldConfig& config);

    // Throws std::invalid_argument on NaN/Inf inputs or a latent size
    // mismatch; std::runtime_error naming the term when the evaluation
    // produces a non-finite value or tangent.
    const FieldEval& forward(const FieldParams& params,
                             std::span<const double> z, const Vec3& x);

    // Value without the tangent passes; cheaper for dense grid sampling.
    // Does not leave a reusable tape behind.
    double value_only(const FieldParams& params, std::span<const double> z,
                      const Vec3& x);

    // Accumulates d(fbar * f + gbar . grad_x)/d(theta, z) into `acc` for the
    // point of the preceding forward() call. Returns the same pullback with
    // respect to x (the reverse-mode spatial gradient), which tests check
    // against the forward-mode one. Throws std::logic_error without a prior
    // forward, std::invalid_argument on non-finite seeds. `with_params`
    // false skips the weight/bias accumulation (latent-only optimization).
    Vec3 backward(const FieldParams& params, double fbar, const Vec3& gbar,
                  FieldGrads& acc, bool with_params = true);

    const FieldEval& last() const { return eval_; }
    const FieldConfig& config() const { return config_; }

  private:
    FieldConfig config_;
    FieldEval eval_;
    bool has_forward_ = false;

    // per-layer records of the forward pass
    std::vector<std::vector<double>> in_;         // layer input
    std::vector<std::array<std::vector<double>, 3>> din_; // input tangents
    std::vector<std::vector<double>> sig_;        // softplus'(pre)
    std::vector<std::array<std::vector<double>, 3>> dpre_; // pre tangents

    // backward scratch, sized to the widest layer
    std::vector<double> abar_, prebar_, inbar_;
    std::array<std::vector<double>, 3> dabar_, dprebar_, dinbar_;
};

// One-shot conveniences (each builds a throwaway tape).
FieldEval field_eval(const FieldParams& params, std::span<const double> z,
                     const Vec3& x);
double field_forward(const FieldParams& params, std::span<const double> z,
                     const Vec3& x);
Vec3 field_grad_input(const FieldParams& params, std::span<const double> z,
                      const Vec3& x);

} // namespace tact::field
