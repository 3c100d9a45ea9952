#pragma once

// Procedural shape corpus: primitive solids with watertight meshes and
// area-uniform surface samples carrying exact analytic normals, the raw
// material for decoder training and for ground-truth scenes.

#include "tactoshape/geom/cloud.hpp"
#include "tactoshape/geom/mesh.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace tact::harness {

struct ParamRange {
    double lo = 0.0;
    double hi = 0.0;

    double draw(std::mt19937_64& rng) const {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    }
    bool valid() const { return lo > 0.0 && hi >= lo; }
};

// Counts and parameter ranges per primitive family. Lengths in meters.
// Shapes are centered at their local origin; capsules extend along z.
struct CorpusSpec {
    std::size_t spheres = 0;
    ParamRange sphere_radius{0.030, 0.055};

    std::size_t boxes = 0;
    ParamRange box_half_extent{0.020, 0.050}; // drawn per axis

    std::size_t ellipsoids = 0;
    ParamRange ellipsoid_semi_axis{0.020, 0.055}; // drawn per axis

    std::size_t capsules = 0;
    ParamRange capsule_radius{0.015, 0.030};
    ParamRange capsule_half_length{0.020, 0.050}; // cylinder section, half

    std::size_t superellipsoids = 0;
    ParamRange super_semi_axis{0.020, 0.050};     // drawn per axis
    ParamRange super_exponent{0.50, 1.60};        // e1 (n-s), e2 (e-w)

    int tessellation = 3;              // subdivision / ring resolution level
    std::size_t samples_per_shape = 600;
    std::uint64_t seed = 0;

    std::size_t total_count() const {
        return spheres + boxes + ellipsoids + capsules + superellipsoids;
    }

    // Throws std::invalid_argument naming the offending field. Exponent
    // ranges must stay within [0.2, 2.0] so superellipsoid normals remain
    // well defined everywhere.
    void validate() const;
};

struct CorpusShape {
    std::string id;     // e.g. "sphere_000"
    std::string family; // sphere | box | ellipsoid | capsule | superellipsoid
    std::map<std::string, double> params;
    geom::TriangleMesh mesh;
    geom::PointCloud cloud; // uniform surface samples, analytic normals
};

// Deterministic for a given spec; each shape derives its own RNG stream from
// (seed, id), so one family's output does not depend on the other counts.
// Order: spheres, boxes, ellipsoids, capsules, superellipsoids.
std::vector<CorpusShape> generate_corpus(const CorpusSpec& spec);

// Eight fixed solids for evaluation, every one with at least one parameter
// outside the default training ranges above. Deterministic for a given seed.
std::vector<CorpusShape> held_out_shapes(int tessellation = 3,
                                         std::size_t samples = 600,
                                         std::uint64_t seed = 9001);

} // namespace tact::harness
