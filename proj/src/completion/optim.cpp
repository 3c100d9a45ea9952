#include "tactoshape/completion/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace tact::completion {

void OptimConfig::validate() const {
    if (!(lr > 0.0))
        throw std::invalid_argument("optimizer: learning rate must be > 0");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
        throw std::invalid_argument("optimizer: betas must lie in [0, 1)");
    if (!(eps > 0.0))
        throw std::invalid_argument("optimizer: eps must be > 0");
}

Adam::Adam(const OptimConfig& config, const std::vector<std::size_t>& sizes)
    : config_(config), sizes_(sizes) {
    config.validate();
    m_.resize(sizes.size());
    v_.resize(sizes.size());
    for (std::size_t b = 0; b < sizes.size(); ++b) {
        m_[b].assign(sizes[b], 0.0);
        v_[b].assign(sizes[b], 0.0);
    }
}

void Adam::step(const std::vector<double*>& blocks,
                const std::vector<const double*>& grads) {
    if (blocks.size() != sizes_.size() || grads.size() != sizes_.size())
        throw std::invalid_argument("optimizer: block count mismatch");
    ++t_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t b = 0; b < sizes_.size(); ++b) {
        double* p = blocks[b];
        const double* g = grads[b];
        double* m = m_[b].data();
        double* v = v_[b].data();
        for (std::size_t i = 0; i < sizes_[b]; ++i) {
            m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
            v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
        }
    }
}

} // namespace tact::completion
