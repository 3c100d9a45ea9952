#pragma once

#include <cstddef>
#include <vector>

namespace tact::completion {

struct OptimConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void validate() const;
};

// Adam over a fixed list of parameter blocks. Blocks are registered once by
// size; each step takes matching parameter/gradient pointers in the same
// order. Keeping the moment buffers here lets one instance drive theta
// (many blocks) or a latent code (one block) uniformly.
class Adam {
  public:
    Adam(const OptimConfig& config, const std::vector<std::size_t>& sizes);

    void step(const std::vector<double*>& blocks,
              const std::vector<const double*>& grads);

    std::size_t steps_taken() const { return t_; }

  private:
    OptimConfig config_;
    std::vector<std::size_t> sizes_;
    std::vector<std::vector<double>> m_, v_;
    std::size_t t_ = 0;
};

} // namespace tact::completion
