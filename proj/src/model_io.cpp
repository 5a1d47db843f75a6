#include "vprmon/model_io.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "vprmon/binary_io.hpp"
#include "vprmon/errors.hpp"

namespace vprmon {
namespace {

constexpr char kModelMagic[4] = {'V', 'P', 'R', 'M'};
constexpr std::uint32_t kModelVersion = 1;

void validate_model(const MlpModel& model) {
    if (model.layers.size() < 2) {
        throw ConfigError("model must have at least one hidden layer");
    }
    if (model.layers.back().out != 1) {
        throw ConfigError("model output layer must have exactly one unit");
    }
    const std::size_t dim = model.input_dim();
    if (model.norm_mean.size() != dim || model.norm_std.size() != dim) {
        throw ConfigError("normalization statistics must match the input dimension");
    }
    for (float s : model.norm_std) {
        if (!(s > 0.0F)) throw ConfigError("normalization std-devs must be > 0");
    }
    if (!(model.threshold > 0.0 && model.threshold < 1.0)) {
        throw ConfigError("decision threshold must be in (0, 1)");
    }
    std::size_t in = dim;
    for (const auto& layer : model.layers) {
        if (layer.in != in || layer.out == 0 ||
            layer.w.size() != layer.out * layer.in || layer.b.size() != layer.out) {
            throw ConfigError("inconsistent layer shapes");
        }
        in = layer.out;
    }
}

}  // namespace

void save_model(const MlpModel& model, const std::filesystem::path& path) {
    validate_model(model);
    BinaryWriter out(path);
    out.bytes(kModelMagic, 4);
    out.u32(kModelVersion);
    out.u32(model.catalogue_version);
    out.u32(static_cast<std::uint32_t>(model.layers.size()));
    for (const auto& layer : model.layers) {
        out.u32(static_cast<std::uint32_t>(layer.out));
        out.u32(static_cast<std::uint32_t>(layer.in));
        out.f32_array(layer.w);
        out.f32_array(layer.b);
    }
    out.f32_array(model.norm_mean);
    out.f32_array(model.norm_std);
    out.f64(model.threshold);
    out.f64(model.alpha_used);
    out.finish_with_crc();
}

MlpModel load_model(const std::filesystem::path& path) {
    BinaryReader in(path);
    if (in.size() < 4 + 4 + 4 + 4 + 4) {
        throw ModelIoError("truncated model file: " + path.string());
    }
    if (in.body_crc() != in.trailer_crc()) {
        throw ModelIoError("checksum failure in " + path.string());
    }
    char magic[4];
    in.bytes(magic, 4);
    if (std::memcmp(magic, kModelMagic, 4) != 0) {
        throw ModelIoError("bad magic in " + path.string());
    }
    const std::uint32_t version = in.u32();
    if (version != kModelVersion) {
        throw ModelIoError("model file version mismatch: expected " +
                           std::to_string(kModelVersion) + ", found " +
                           std::to_string(version));
    }
    MlpModel model;
    model.catalogue_version = in.u32();
    const std::uint32_t layer_count = in.u32();
    if (layer_count < 2) {
        throw ModelIoError("model file declares fewer than two layers");
    }
    for (std::uint32_t l = 0; l < layer_count; ++l) {
        MlpLayer layer;
        layer.out = in.u32();
        layer.in = in.u32();
        if (layer.out == 0 || layer.in == 0 ||
            layer.out > (1U << 20) || layer.in > (1U << 20)) {
            throw ModelIoError("implausible layer shape in " + path.string());
        }
        layer.w = in.f32_array(layer.out * layer.in);
        layer.b = in.f32_array(layer.out);
        model.layers.push_back(std::move(layer));
    }
    const std::size_t dim = model.input_dim();
    model.norm_mean = in.f32_array(dim);
    model.norm_std = in.f32_array(dim);
    model.threshold = in.f64();
    model.alpha_used = in.f64();
    if (in.remaining() != 4) {
        throw ModelIoError("trailing bytes in " + path.string());
    }
    validate_model(model);
    return model;
}

}  // namespace vprmon
