#include "tactoshape/completion/loss.hpp"

#include "tactoshape/geom/sampling.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tact::completion {

namespace {

inline double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

} // namespace

void LossWeights::validate() const {
    if (lambda_eikonal < 0.0 || alpha_latent < 0.0 || w_free < 0.0 ||
        free_margin < 0.0)
        throw std::invalid_argument(
            "loss weights: all weights and the margin must be >= 0");
}

void FreeSpaceSet::validate_radius(const Vec3& center, double radius) const {
    for (const Vec3& p : points)
        if (norm(p - center) > radius)
            throw std::invalid_argument(
                "free-space set: point beyond the crop radius of " +
                std::to_string(radius) + " m");
}

OffSurfaceSampler OffSurfaceSampler::for_evidence(const PointCloud& evidence,
                                                  double box_inflate,
                                                  std::size_t uniform_count,
                                                  std::size_t gaussian_count) {
    if (evidence.size() < 2)
        throw std::invalid_argument(
            "off-surface sampler: need at least two evidence points");
    OffSurfaceSampler s;
    s.box = evidence.bounds().inflated(box_inflate);
    s.gaussian_std = geom::mean_nn_spacing(evidence.points);
    s.uniform_count = uniform_count;
    s.gaussian_count = gaussian_count;
    s.validate();
    return s;
}

void OffSurfaceSampler::validate() const {
    if (uniform_count + gaussian_count == 0)
        throw std::invalid_argument(
            "off-surface sampler: sample count must be positive");
    if (!box.valid())
        throw std::invalid_argument("off-surface sampler: invalid box");
    if (!(gaussian_std >= 0.0))
        throw std::invalid_argument(
            "off-surface sampler: negative gaussian std");
}

std::vector<Vec3> OffSurfaceSampler::sample(const std::vector<Vec3>& around,
                                            std::mt19937_64& rng) const {
    if (gaussian_count > 0 && around.empty())
        throw std::invalid_argument(
            "off-surface sampler: gaussian samples need anchor points");
    std::vector<Vec3> out;
    out.reserve(uniform_count + gaussian_count);
    std::uniform_real_distribution<double> ux(box.lo.x, box.hi.x);
    std::uniform_real_distribution<double> uy(box.lo.y, box.hi.y);
    std::uniform_real_distribution<double> uz(box.lo.z, box.hi.z);
    for (std::size_t i = 0; i < uniform_count; ++i)
        out.push_back({ux(rng), uy(rng), uz(rng)});
    if (gaussian_count > 0) {
        std::uniform_int_distribution<std::size_t> pick(0, around.size() - 1);
        std::normal_distribution<double> jitter(0.0, gaussian_std);
        for (std::size_t i = 0; i < gaussian_count; ++i) {
            const Vec3& a = around[pick(rng)];
            out.push_back(
                {a.x + jitter(rng), a.y + jitter(rng), a.z + jitter(rng)});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// terms

double data_term(const FieldParams& params, std::span<const double> z,
                 const std::vector<Vec3>& points,
                 const std::vector<Vec3>& normals) {
    if (points.empty())
        throw std::invalid_argument("data term: empty batch");
    if (points.size() != normals.size())
        throw std::invalid_argument("data term: points/normals size mismatch");
    FieldTape tape(params.config);
    double sum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const field::FieldEval& e = tape.forward(params, z, points[i]);
        sum += std::abs(e.value) + norm(e.grad_x - normals[i]);
    }
    return sum / static_cast<double>(points.size());
}

double eikonal_term(const FieldParams& params, std::span<const double> z,
                    const std::vector<Vec3>& points) {
    if (points.empty())
        return 0.0;
    FieldTape tape(params.config);
    double sum = 0.0;
    for (const Vec3& x : points) {
        const double n = norm(tape.forward(params, z, x).grad_x);
        sum += (n - 1.0) * (n - 1.0);
    }
    return sum / static_cast<double>(points.size());
}

double free_space_term(const FieldParams& params, std::span<const double> z,
                       const std::vector<Vec3>& free_points, double margin,
                       bool hinge) {
    if (free_points.empty())
        return 0.0;
    FieldTape tape(params.config);
    double sum = 0.0;
    for (const Vec3& x : free_points) {
        const double f = tape.value_only(params, z, x);
        if (f < margin)
            sum += hinge ? margin - f : std::abs(f);
    }
    return sum;
}

double latent_term(std::span<const double> z) {
    double sq = 0.0;
    for (double v : z)
        sq += v * v;
    return std::sqrt(sq);
}

LossBreakdown total_loss(const FieldParams& params, std::span<const double> z,
                         const std::vector<Vec3>& surface_points,
                         const std::vector<Vec3>& surface_normals,
                         const std::vector<Vec3>& off_points,
                         const std::vector<Vec3>& free_points,
                         const LossWeights& weights) {
    weights.validate();
    LossBreakdown b;
    b.data = data_term(params, z, surface_points, surface_normals);
    b.eikonal = eikonal_term(params, z, off_points);
    b.latent = latent_term(z);
    b.free = free_space_term(params, z, free_points, weights.free_margin,
                             weights.free_hinge);
    b.total = b.data + weights.lambda_eikonal * b.eikonal +
              weights.alpha_latent * b.latent + weights.w_free * b.free;
    return b;
}

LossBreakdown loss_with_grads(const FieldParams& params,
                              std::span<const double> z,
                              const std::vector<Vec3>& surface_points,
                              const std::vector<Vec3>& surface_normals,
                              const std::vector<Vec3>& off_points,
                              const std::vector<Vec3>& free_points,
                              const LossWeights& weights, FieldTape& tape,
                              FieldGrads& acc, bool with_params) {
    weights.validate();
    if (surface_points.size() != surface_normals.size())
        throw std::invalid_argument("loss: points/normals size mismatch");

    LossBreakdown b;

    // data term: d/df |f| = sign(f); d/dg ||g - n|| = (g - n)/||g - n||
    if (!surface_points.empty()) {
        const double inv_c = 1.0 / static_cast<double>(surface_points.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < surface_points.size(); ++i) {
            const field::FieldEval& e =
                tape.forward(params, z, surface_points[i]);
            const Vec3 dn = e.grad_x - surface_normals[i];
            const double dnn = norm(dn);
            sum += std::abs(e.value) + dnn;
            const double fbar = sign_of(e.value) * inv_c;
            const Vec3 gbar =
                dnn > 0.0 ? dn * (inv_c / dnn) : Vec3{0, 0, 0};
            tape.backward(params, fbar, gbar, acc, with_params);
        }
        b.data = sum / static_cast<double>(surface_points.size());
    }

    // eikonal term: d/dg (||g|| - 1)^2 = 2 (||g|| - 1) g / ||g||
    if (!off_points.empty()) {
        const double inv_m = 1.0 / static_cast<double>(off_points.size());
        double sum = 0.0;
        for (const Vec3& x : off_points) {
            const field::FieldEval& e = tape.forward(params, z, x);
            const double gn = norm(e.grad_x);
            sum += (gn - 1.0) * (gn - 1.0);
            if (gn > 0.0) {
                const Vec3 gbar = e.grad_x * (weights.lambda_eikonal * 2.0 *
                                              (gn - 1.0) * inv_m / gn);
                tape.backward(params, 0.0, gbar, acc, with_params);
            }
        }
        b.eikonal = sum / static_cast<double>(off_points.size());
    }

    // free-space term (a sum, not a mean)
    if (!free_points.empty()) {
        double sum = 0.0;
        for (const Vec3& x : free_points) {
            const field::FieldEval& e = tape.forward(params, z, x);
            if (e.value < weights.free_margin) {
                if (weights.free_hinge) {
                    sum += weights.free_margin - e.value;
                    tape.backward(params, -weights.w_free, {0, 0, 0}, acc,
                                  with_params);
                } else {
                    sum += std::abs(e.value);
                    tape.backward(params, weights.w_free * sign_of(e.value),
                                  {0, 0, 0}, acc, with_params);
                }
            }
        }
        b.free = sum;
    }

    // latent norm: d/dz ||z|| = z / ||z||
    b.latent = latent_term(z);
    if (b.latent > 0.0) {
        const double s = weights.alpha_latent / b.latent;
        for (std::size_t j = 0; j < z.size(); ++j)
            acc.latent[j] += s * z[j];
    }

    b.total = b.data + weights.lambda_eikonal * b.eikonal +
              weights.alpha_latent * b.latent + weights.w_free * b.free;
    return b;
}

} // namespace tact::completion
