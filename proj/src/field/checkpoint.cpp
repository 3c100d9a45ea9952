#include "tactoshape/field/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace tact::field {

static_assert(std::endian::native == std::endian::little,
              "checkpoint IO assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'T', 'S', 'F', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void put_f64(std::ostream& out, double v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void put_f64s(std::ostream& out, const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::uint32_t get_u32(std::istream& in) {
    std::uint32_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(v)))
        throw std::runtime_error("checkpoint: truncated file");
    return v;
}

double get_f64(std::istream& in) {
    double v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(v)))
        throw std::runtime_error("checkpoint: truncated file");
    return v;
}

void get_f64s(std::istream& in, std::vector<double>& v) {
    if (!in.read(reinterpret_cast<char*>(v.data()),
                 static_cast<std::streamsize>(v.size() * sizeof(double))))
        throw std::runtime_error("checkpoint: truncated file");
}

} // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    ck.params.validate();
    for (const auto& [id, z] : ck.latents)
        if (z.size() != ck.params.config.latent_dim)
            throw std::invalid_argument("checkpoint: latent for '" + id +
                                        "' has the wrong dimension");

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("checkpoint: cannot open " + path +
                                 " for writing");
    out.write(kMagic, 4);
    put_u32(out, kVersion);
    const FieldConfig& c = ck.params.config;
    put_u32(out, c.latent_dim);
    put_u32(out, c.hidden_layers);
    put_u32(out, c.hidden_width);
    put_u32(out, c.skip_layer);
    put_f64(out, c.beta);

    for (std::size_t l = 0; l < c.layer_count(); ++l) {
        const auto s = c.layer_shape(l);
        put_u32(out, static_cast<std::uint32_t>(s.nin));
        put_u32(out, static_cast<std::uint32_t>(s.nout));
        put_f64s(out, ck.params.weights[l]);
        put_f64s(out, ck.params.biases[l]);
    }

    put_u32(out, static_cast<std::uint32_t>(ck.latents.size()));
    for (const auto& [id, z] : ck.latents) {
        put_u32(out, static_cast<std::uint32_t>(id.size()));
        out.write(id.data(), static_cast<std::streamsize>(id.size()));
        put_f64s(out, z);
    }
    out.flush();
    if (!out)
        throw std::runtime_error("checkpoint: write to " + path + " failed");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("checkpoint: cannot open " + path);

    char magic[4] = {};
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("checkpoint: bad magic, not a TSF1 file");
    const std::uint32_t version = get_u32(in);
    if (version != kVersion)
        throw std::runtime_error("checkpoint: unsupported version " +
                                 std::to_string(version));

    Checkpoint ck;
    FieldConfig& c = ck.params.config;
    c.latent_dim = get_u32(in);
    c.hidden_layers = get_u32(in);
    c.hidden_width = get_u32(in);
    c.skip_layer = get_u32(in);
    c.beta = get_f64(in);
    c.validate();

    ck.params.weights.resize(c.layer_count());
    ck.params.biases.resize(c.layer_count());
    for (std::size_t l = 0; l < c.layer_count(); ++l) {
        const auto s = c.layer_shape(l);
        const std::uint32_t nin = get_u32(in);
        const std::uint32_t nout = get_u32(in);
        if (nin != s.nin || nout != s.nout)
            throw std::runtime_error(
                "checkpoint: layer " + std::to_string(l) +
                " shape does not match the declared architecture");
        ck.params.weights[l].resize(s.nin * s.nout);
        ck.params.biases[l].resize(s.nout);
        get_f64s(in, ck.params.weights[l]);
        get_f64s(in, ck.params.biases[l]);
    }

    const std::uint32_t count = get_u32(in);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t len = get_u32(in);
        std::string id(len, '\0');
        if (len > 0 &&
            !in.read(id.data(), static_cast<std::streamsize>(len)))
            throw std::runtime_error("checkpoint: truncated file");
        std::vector<double> z(c.latent_dim);
        get_f64s(in, z);
        if (!ck.latents.emplace(std::move(id), std::move(z)).second)
            throw std::runtime_error("checkpoint: duplicate shape id");
    }

    ck.params.validate();
    return ck;
}

} // namespace tact::field
