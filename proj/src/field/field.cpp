#include "tactoshape/field/field.hpp"

#include "tactoshape/kern/kernels.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <stdexcept>
#include <string>

namespace tact::field {

namespace {

// Numerically stable softplus with sharpness beta and its first derivative
// (the logistic). softplus''(p) = beta * s * (1 - s) with s = logistic.
inline double softplus(double p, double beta) {
    const double t = beta * p;
    if (t > 0.0)
        return p + std::log1p(std::exp(-t)) / beta;
    return std::log1p(std::exp(t)) / beta;
}

inline double logistic(double t) {
    if (t >= 0.0)
        return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

} // namespace

// ---------------------------------------------------------------------------
// configuration

FieldConfig::LayerShape FieldConfig::layer_shape(std::size_t layer) const {
    LayerShape s;
    if (layer == hidden_layers) { // output
        s.nin = hidden_layers == 0 ? input_dim() : hidden_width;
        s.nout = 1;
        return s;
    }
    s.nout = hidden_width;
    if (layer == 0)
        s.nin = input_dim();
    else
        s.nin = hidden_width + (layer_has_skip(layer) ? input_dim() : 0);
    return s;
}

void FieldConfig::validate() const {
    if (hidden_layers > 0 && hidden_width == 0)
        throw std::invalid_argument("field config: hidden_width must be >= 1");
    if (skip_layer == 1)
        throw std::invalid_argument(
            "field config: skip_layer 1 would duplicate the network input; "
            "use 0 (disabled) or 2..hidden_layers");
    if (skip_layer > hidden_layers)
        throw std::invalid_argument(
            "field config: skip_layer " + std::to_string(skip_layer) +
            " exceeds hidden_layers " + std::to_string(hidden_layers));
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw std::invalid_argument("field config: beta must be positive");
}

void FieldParams::validate() const {
    config.validate();
    if (weights.size() != config.layer_count() ||
        biases.size() != config.layer_count())
        throw std::invalid_argument("field params: wrong layer count");
    for (std::size_t l = 0; l < config.layer_count(); ++l) {
        const auto s = config.layer_shape(l);
        if (weights[l].size() != s.nin * s.nout)
            throw std::invalid_argument("field params: layer " +
                                        std::to_string(l) +
                                        " weight shape mismatch");
        if (biases[l].size() != s.nout)
            throw std::invalid_argument("field params: layer " +
                                        std::to_string(l) +
                                        " bias shape mismatch");
        for (double w : weights[l])
            if (!std::isfinite(w))
                throw std::invalid_argument("field params: non-finite weight");
        for (double b : biases[l])
            if (!std::isfinite(b))
                throw std::invalid_argument("field params: non-finite bias");
    }
}

// ---------------------------------------------------------------------------
// initialization

FieldParams geometric_init(const FieldConfig& config, std::uint64_t seed,
                           double radius) {
    config.validate();
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw std::invalid_argument("geometric init: radius must be positive");
    FieldParams p;
    p.config = config;
    p.weights.resize(config.layer_count());
    p.biases.resize(config.layer_count());
    std::mt19937_64 rng(seed);

    // The ReLU-like analysis behind this init holds when pre-activations
    // clear the softplus knee, so the cascade runs at unit scale: the first
    // layer divides x by the radius and the output row multiplies back.
    for (std::size_t l = 0; l < config.layer_count(); ++l) {
        const auto s = config.layer_shape(l);
        p.weights[l].assign(s.nin * s.nout, 0.0);
        p.biases[l].assign(s.nout, 0.0);

        if (l == config.hidden_layers) {
            // output row: equal positive weights calibrated so the ReLU-like
            // cascade reproduces ||x||, bias shifts it to a sphere of the
            // requested radius
            const double w =
                radius * std::sqrt(M_PI / static_cast<double>(s.nin));
            for (double& v : p.weights[l])
                v = w;
            p.biases[l][0] = -radius;
            continue;
        }

        // fan-out scaling keeps activation norms near the input norm layer
        // after layer; latent columns (and the whole re-injected skip block)
        // start at zero so the untrained field depends on x alone
        std::normal_distribution<double> dist(
            0.0, std::sqrt(2.0 / static_cast<double>(s.nout)));
        const double col_scale = l == 0 ? 1.0 / radius : 1.0;
        std::size_t zero_from = s.nin; // first input row left at zero
        if (l == 0)
            zero_from = 3;
        else if (config.layer_has_skip(l))
            zero_from = config.hidden_width;
        for (std::size_t j = 0; j < s.nin; ++j)
            for (std::size_t o = 0; o < s.nout; ++o)
                p.weights[l][j * s.nout + o] =
                    j < zero_from ? col_scale * dist(rng) : 0.0;
    }

    // softplus is not exactly ReLU, so the cascade carries a constant offset;
    // recenter the output bias so the field is exactly -radius at the origin
    const std::vector<double> z0(config.latent_dim, 0.0);
    const double f0 = field_forward(p, z0, {0.0, 0.0, 0.0});
    p.biases.back()[0] += -radius - f0;
    return p;
}

FieldParams random_init(const FieldConfig& config, std::uint64_t seed,
                        double scale) {
    config.validate();
    FieldParams p;
    p.config = config;
    p.weights.resize(config.layer_count());
    p.biases.resize(config.layer_count());
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l < config.layer_count(); ++l) {
        const auto s = config.layer_shape(l);
        std::normal_distribution<double> dist(
            0.0, scale / std::sqrt(static_cast<double>(s.nin)));
        p.weights[l].resize(s.nin * s.nout);
        p.biases[l].resize(s.nout);
        for (double& w : p.weights[l])
            w = dist(rng);
        for (double& b : p.biases[l])
            b = dist(rng);
    }
    return p;
}

std::vector<double> init_latent(std::uint32_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 0.01);
    std::vector<double> z(dim);
    for (double& v : z)
        v = dist(rng);
    return z;
}

std::uint64_t params_checksum(const FieldParams& params) {
    std::uint64_t h = 1469598103934665603ull; // FNV-1a offset basis
    auto mix_bytes = [&h](const void* data, std::size_t n) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ull;
        }
    };
    const FieldConfig& c = params.config;
    const std::uint32_t dims[4] = {c.latent_dim, c.hidden_layers,
                                   c.hidden_width, c.skip_layer};
    mix_bytes(dims, sizeof(dims));
    mix_bytes(&c.beta, sizeof(c.beta));
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        mix_bytes(params.weights[l].data(),
                  params.weights[l].size() * sizeof(double));
        mix_bytes(params.biases[l].data(),
                  params.biases[l].size() * sizeof(double));
    }
    return h;
}

// ---------------------------------------------------------------------------
// gradients container

FieldGrads::FieldGrads(const FieldConfig& config) {
    weights.resize(config.layer_count());
    biases.resize(config.layer_count());
    for (std::size_t l = 0; l < config.layer_count(); ++l) {
        const auto s = config.layer_shape(l);
        weights[l].assign(s.nin * s.nout, 0.0);
        biases[l].assign(s.nout, 0.0);
    }
    latent.assign(config.latent_dim, 0.0);
}

void FieldGrads::zero() {
    for (auto& w : weights)
        std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : biases)
        std::fill(b.begin(), b.end(), 0.0);
    std::fill(latent.begin(), latent.end(), 0.0);
}

bool FieldGrads::all_finite() const {
    auto ok = [](const std::vector<double>& v) {
        for (double x : v)
            if (!std::isfinite(x))
                return false;
        return true;
    };
    for (const auto& w : weights)
        if (!ok(w))
            return false;
    for (const auto& b : biases)
        if (!ok(b))
            return false;
    return ok(latent);
}

// ---------------------------------------------------------------------------
// tape

FieldTape::FieldTape(const FieldConfig& config) : config_(config) {
    config.validate();
    const std::size_t layers = config.layer_count();
    in_.resize(layers);
    din_.resize(layers);
    sig_.resize(layers);
    dpre_.resize(layers);
    std::size_t widest = 1;
    for (std::size_t l = 0; l < layers; ++l) {
        const auto s = config.layer_shape(l);
        widest = std::max({widest, s.nin, s.nout});
        in_[l].resize(s.nin);
        for (auto& t : din_[l])
            t.resize(s.nin);
        sig_[l].resize(s.nout);
        for (auto& t : dpre_[l])
            t.resize(s.nout);
    }
    abar_.resize(widest);
    prebar_.resize(widest);
    inbar_.resize(widest);
    for (int k = 0; k < 3; ++k) {
        dabar_[static_cast<std::size_t>(k)].resize(widest);
        dprebar_[static_cast<std::size_t>(k)].resize(widest);
        dinbar_[static_cast<std::size_t>(k)].resize(widest);
    }
}

const FieldEval& FieldTape::forward(const FieldParams& params,
                                    std::span<const double> z, const Vec3& x) {
    if (params.config != config_)
        throw std::invalid_argument("field tape: params built for a "
                                    "different architecture");
    if (z.size() != config_.latent_dim)
        throw std::invalid_argument("field tape: latent size mismatch");
    if (!geom::is_finite(x))
        throw std::invalid_argument("field tape: non-finite input point");
    for (double v : z)
        if (!std::isfinite(v))
            throw std::invalid_argument("field tape: non-finite latent code");

    const std::size_t nl = config_.layer_count();
    const std::size_t id = config_.input_dim();
    const double beta = config_.beta;

    // layer 0 input: [x, z], tangents are the spatial unit directions
    in_[0][0] = x.x;
    in_[0][1] = x.y;
    in_[0][2] = x.z;
    for (std::size_t j = 0; j < z.size(); ++j)
        in_[0][3 + j] = z[j];
    for (std::size_t k = 0; k < 3; ++k) {
        std::fill(din_[0][k].begin(), din_[0][k].end(), 0.0);
        din_[0][k][k] = 1.0;
    }

    for (std::size_t l = 0; l < nl; ++l) {
        const auto s = config_.layer_shape(l);
        const double* w = params.weights[l].data();
        const bool output_layer = l == nl - 1;

        // pre-activations for the value and the three tangents; sig_ and
        // dpre_ double as the landing buffers
        double pre_out = 0.0;
        double* pre = output_layer ? &pre_out : sig_[l].data();
        std::copy(params.biases[l].begin(), params.biases[l].end(), pre);
        kern::gemv_col_acc(s.nin, s.nout, w, in_[l].data(), pre);
        for (std::size_t k = 0; k < 3; ++k) {
            double* dp = dpre_[l][k].data();
            std::fill(dp, dp + s.nout, 0.0);
            kern::gemv_col_acc(s.nin, s.nout, w, din_[l][k].data(), dp);
        }

        if (output_layer) {
            eval_.value = pre_out;
            eval_.grad_x = {dpre_[l][0][0], dpre_[l][1][0], dpre_[l][2][0]};
            break;
        }

        // next layer input (with the skip block when configured)
        const std::size_t next = l + 1;
        const bool skip = next < config_.hidden_layers + 1 &&
                          config_.layer_has_skip(next) && next < nl - 1;
        double* nin_vals = in_[next].data();
        for (std::size_t o = 0; o < s.nout; ++o) {
            const double p = pre[o];
            nin_vals[o] = softplus(p, beta);
            sig_[l][o] = logistic(beta * p); // overwrites pre in place
        }
        for (std::size_t k = 0; k < 3; ++k) {
            const double* dp = dpre_[l][k].data();
            double* dn = din_[next][k].data();
            for (std::size_t o = 0; o < s.nout; ++o)
                dn[o] = sig_[l][o] * dp[o];
        }
        if (skip) {
            for (std::size_t j = 0; j < id; ++j)
                nin_vals[s.nout + j] = in_[0][j];
            for (std::size_t k = 0; k < 3; ++k) {
                double* dn = din_[next][k].data();
                for (std::size_t j = 0; j < id; ++j)
                    dn[s.nout + j] = din_[0][k][j];
            }
        }
    }

    if (!std::isfinite(eval_.value))
        throw std::runtime_error("field evaluation: non-finite field value");
    if (!geom::is_finite(eval_.grad_x))
        throw std::runtime_error(
            "field evaluation: non-finite spatial gradient");
    has_forward_ = true;
    return eval_;
}

double FieldTape::value_only(const FieldParams& params,
                             std::span<const double> z, const Vec3& x) {
    if (params.config != config_)
        throw std::invalid_argument("field tape: params built for a "
                                    "different architecture");
    if (z.size() != config_.latent_dim)
        throw std::invalid_argument("field tape: latent size mismatch");
    if (!geom::is_finite(x))
        throw std::invalid_argument("field tape: non-finite input point");

    const std::size_t nl = config_.layer_count();
    const std::size_t id = config_.input_dim();
    const double beta = config_.beta;
    has_forward_ = false; // no tangent records: the tape is not reusable

    in_[0][0] = x.x;
    in_[0][1] = x.y;
    in_[0][2] = x.z;
    for (std::size_t j = 0; j < z.size(); ++j)
        in_[0][3 + j] = z[j];

    for (std::size_t l = 0; l < nl; ++l) {
        const auto s = config_.layer_shape(l);
        const double* w = params.weights[l].data();
        if (l == nl - 1) {
            double out = params.biases[l][0];
            kern::gemv_col_acc(s.nin, s.nout, w, in_[l].data(), &out);
            if (!std::isfinite(out))
                throw std::runtime_error(
                    "field evaluation: non-finite field value");
            return out;
        }
        double* pre = sig_[l].data();
        std::copy(params.biases[l].begin(), params.biases[l].end(), pre);
        kern::gemv_col_acc(s.nin, s.nout, w, in_[l].data(), pre);
        double* nin_vals = in_[l + 1].data();
        for (std::size_t o = 0; o < s.nout; ++o)
            nin_vals[o] = softplus(pre[o], beta);
        if (config_.layer_has_skip(l + 1) && l + 1 < nl - 1)
            for (std::size_t j = 0; j < id; ++j)
                nin_vals[s.nout + j] = in_[0][j];
    }
    return 0.0; // unreachable: the loop always hits the output layer
}

Vec3 FieldTape::backward(const FieldParams& params, double fbar,
                         const Vec3& gbar, FieldGrads& acc, bool with_params) {
    if (!has_forward_)
        throw std::logic_error("field tape: backward without forward");
    if (!std::isfinite(fbar))
        throw std::invalid_argument("field tape: non-finite value seed");
    if (!geom::is_finite(gbar))
        throw std::invalid_argument("field tape: non-finite gradient seed");
    if (acc.latent.size() != config_.latent_dim)
        throw std::invalid_argument("field tape: gradient accumulator shape");

    const std::size_t nl = config_.layer_count();
    const double beta = config_.beta;

    // ---- output layer (linear, single unit) ----
    {
        const std::size_t l = nl - 1;
        const auto s = config_.layer_shape(l);
        const double* w = params.weights[l].data();
        const double gb[3] = {gbar.x, gbar.y, gbar.z};

        // weight and bias pullback: in * fbar plus the tangent terms
        if (with_params) {
            double* wacc = acc.weights[l].data();
            kern::axpy(s.nin, fbar, in_[l].data(), wacc);
            for (std::size_t k = 0; k < 3; ++k)
                kern::axpy(s.nin, gb[k], din_[l][k].data(), wacc);
            acc.biases[l][0] += fbar;
        }

        // input pullback
        double* ib = inbar_.data();
        std::fill(ib, ib + s.nin, 0.0);
        kern::axpy(s.nin, fbar, w, ib);
        for (std::size_t k = 0; k < 3; ++k) {
            double* dib = dinbar_[k].data();
            std::fill(dib, dib + s.nin, 0.0);
            kern::axpy(s.nin, gb[k], w, dib);
        }
    }

    Vec3 xbar{0, 0, 0};
    auto absorb_input_block = [&](const double* block_bar) {
        xbar.x += block_bar[0];
        xbar.y += block_bar[1];
        xbar.z += block_bar[2];
        for (std::size_t j = 0; j < config_.latent_dim; ++j)
            acc.latent[j] += block_bar[3 + j];
    };

    // ---- hidden layers, last to first ----
    for (std::size_t l = nl - 1; l-- > 0;) {
        const auto s = config_.layer_shape(l);
        const auto up = config_.layer_shape(l + 1);
        const double* w = params.weights[l].data();

        // split the upstream input pullback: the leading s.nout entries are
        // this layer's activation cotangent, a trailing skip block (if any)
        // belongs to the network input
        const bool up_skip = up.nin > s.nout;
        std::copy(inbar_.begin(), inbar_.begin() + static_cast<long>(s.nout),
                  abar_.begin());
        if (up_skip)
            absorb_input_block(inbar_.data() + s.nout);
        for (std::size_t k = 0; k < 3; ++k)
            std::copy(dinbar_[k].begin(),
                      dinbar_[k].begin() + static_cast<long>(s.nout),
                      dabar_[k].begin());
        // tangent cotangents of the skip block pull back onto constant unit
        // directions; nothing to accumulate

        // activation pullback:
        //   prebar = sig * abar + softplus''(pre) * sum_k dpre_k * dabar_k
        //   dprebar_k = sig * dabar_k
        for (std::size_t o = 0; o < s.nout; ++o) {
            const double sg = sig_[l][o];
            double second = 0.0;
            for (std::size_t k = 0; k < 3; ++k)
                second += dpre_[l][k][o] * dabar_[k][o];
            prebar_[o] = sg * abar_[o] + beta * sg * (1.0 - sg) * second;
        }
        for (std::size_t k = 0; k < 3; ++k)
            for (std::size_t o = 0; o < s.nout; ++o)
                dprebar_[k][o] = sig_[l][o] * dabar_[k][o];

        // parameter pullback
        if (with_params) {
            kern::outer_acc(s.nin, s.nout, in_[l].data(), prebar_.data(),
                            acc.weights[l].data());
            for (std::size_t k = 0; k < 3; ++k)
                kern::outer_acc(s.nin, s.nout, din_[l][k].data(),
                                dprebar_[k].data(), acc.weights[l].data());
            for (std::size_t o = 0; o < s.nout; ++o)
                acc.biases[l][o] += prebar_[o];
        }

        // input pullback for the next step down
        kern::gemv_row_dot(s.nin, s.nout, w, prebar_.data(), inbar_.data());
        for (std::size_t k = 0; k < 3; ++k)
            kern::gemv_row_dot(s.nin, s.nout, w, dprebar_[k].data(),
                               dinbar_[k].data());
    }

    // layer 0's input pullback lands on [x, z] itself
    absorb_input_block(inbar_.data());
    return xbar;
}

// ---------------------------------------------------------------------------
// conveniences

FieldEval field_eval(const FieldParams& params, std::span<const double> z,
                     const Vec3& x) {
    FieldTape tape(params.config);
    return tape.forward(params, z, x);
}

double field_forward(const FieldParams& params, std::span<const double> z,
                     const Vec3& x) {
    return field_eval(params, z, x).value;
}

Vec3 field_grad_input(const FieldParams& params, std::span<const double> z,
                      const Vec3& x) {
    return field_eval(params, z, x).grad_x;
}

} // namespace tact::field
