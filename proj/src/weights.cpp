#include "lfsc/weights.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <random>

#include <zlib.h>

#include "byte_io.hpp"
#include "lfsc/error.hpp"
#include "model_layout.hpp"

namespace lfsc {

namespace {

enum class DType : std::uint8_t { F32 = 0, I32 = 1 };

using Shape = std::vector<std::uint32_t>;

std::uint32_t u32(int v) { return static_cast<std::uint32_t>(v); }

long long product(const std::vector<int>& v) {
    long long p = 1;
    for (int x : v) p = std::min(p * x, 1LL << 40);
    return p;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, "model config: " + what);
}

void add_conv(std::vector<std::pair<std::string, Shape>>& out, const std::string& prefix, Shape weight,
              std::uint32_t bias) {
    out.emplace_back(layout::weight(prefix), std::move(weight));
    out.emplace_back(layout::bias(prefix), Shape{bias});
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks.
    constexpr std::size_t kChunk = std::size_t{1} << 30;
    for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
        const std::size_t n = std::min(kChunk, bytes.size() - off);
        crc = crc32(crc, bytes.data() + off, static_cast<uInt>(n));
    }
    return static_cast<std::uint32_t>(crc);
}

// Metadata <-> config.
std::map<std::string, std::vector<std::int32_t>> config_to_meta(const ModelConfig& c) {
    auto ints = [](const std::vector<int>& v) { return std::vector<std::int32_t>(v.begin(), v.end()); };
    return {
        {"meta.sample_rate", {c.sample_rate}},
        {"meta.fsq.codebooks", {c.fsq.num_codebooks()}},
        {"meta.fsq.levels", ints(c.fsq.levels())},
        {"meta.encoder.channels", {c.encoder.initial_channels}},
        {"meta.encoder.strides", ints(c.encoder.strides)},
        {"meta.encoder.residual_layers", {c.encoder.residual_layers}},
        {"meta.encoder.residual_kernel", {c.encoder.residual_kernel}},
        {"meta.encoder.dilation", {c.encoder.dilation}},
        {"meta.encoder.input_kernel", {c.encoder.input_kernel}},
        {"meta.decoder.channels", {c.decoder.initial_channels}},
        {"meta.decoder.rates", ints(c.decoder.upsample_rates)},
        {"meta.decoder.mrf_kernels", ints(c.decoder.mrf_kernels)},
        {"meta.decoder.mrf_dilations", ints(c.decoder.mrf_dilations)},
        {"meta.decoder.output_kernel", {c.decoder.output_kernel}},
    };
}

ModelConfig meta_to_config(std::map<std::string, std::vector<std::int32_t>> meta) {
    auto take = [&](const std::string& key) {
        auto it = meta.find(key);
        if (it == meta.end()) throw Error(ErrorCode::Validation, "weights: missing metadata " + key);
        std::vector<int> v(it->second.begin(), it->second.end());
        meta.erase(it);
        if (v.empty()) throw Error(ErrorCode::Validation, "weights: empty metadata " + key);
        return v;
    };
    auto scalar = [&](const std::string& key) {
        auto v = take(key);
        if (v.size() != 1) throw Error(ErrorCode::Validation, "weights: metadata " + key + " must be scalar");
        return v[0];
    };
    try {
        ModelConfig c;
        c.sample_rate = scalar("meta.sample_rate");
        const int codebooks = scalar("meta.fsq.codebooks");
        c.fsq = FsqSpec(codebooks, take("meta.fsq.levels"));
        c.encoder.initial_channels = scalar("meta.encoder.channels");
        c.encoder.strides = take("meta.encoder.strides");
        c.encoder.residual_layers = scalar("meta.encoder.residual_layers");
        c.encoder.residual_kernel = scalar("meta.encoder.residual_kernel");
        c.encoder.dilation = scalar("meta.encoder.dilation");
        c.encoder.input_kernel = scalar("meta.encoder.input_kernel");
        c.decoder.initial_channels = scalar("meta.decoder.channels");
        c.decoder.upsample_rates = take("meta.decoder.rates");
        c.decoder.mrf_kernels = take("meta.decoder.mrf_kernels");
        c.decoder.mrf_dilations = take("meta.decoder.mrf_dilations");
        c.decoder.output_kernel = scalar("meta.decoder.output_kernel");
        if (!meta.empty()) {
            throw Error(ErrorCode::Validation, "weights: unexpected metadata " + meta.begin()->first);
        }
        c.validate();
        return c;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Validation) throw;
        throw Error(ErrorCode::Validation, std::string("weights: ") + e.what());
    }
}

std::string shape_string(const Shape& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? ", " : "") + std::to_string(s[i]);
    return out + "]";
}

}  // namespace

int ModelConfig::total_stride() const { return static_cast<int>(std::min(product(encoder.strides), 1LL << 30)); }

int ModelConfig::encoder_output_channels() const {
    return encoder.initial_channels << encoder.strides.size();
}

int ModelConfig::decoder_output_channels() const {
    return decoder.initial_channels >> decoder.upsample_rates.size();
}

void ModelConfig::validate() const {
    require(sample_rate > 0, "sample_rate must be positive");
    require(!encoder.strides.empty(), "encoder needs at least one block");
    require(!decoder.upsample_rates.empty(), "decoder needs at least one stage");
    require(encoder.strides.size() <= 16 && decoder.upsample_rates.size() <= 16, "too many stages");
    for (int s : encoder.strides) require(s >= 1, "encoder strides must be >= 1");
    for (int r : decoder.upsample_rates) require(r >= 1, "upsample rates must be >= 1");
    require(total_stride() == product(decoder.upsample_rates),
            "product of encoder strides must equal product of upsample rates");
    require(total_stride() <= 65535, "total stride must fit in 16 bits");
    require(encoder.initial_channels >= 1, "encoder channels must be positive");
    require((static_cast<long long>(encoder.initial_channels) << encoder.strides.size()) < (1LL << 24),
            "encoder channel schedule overflows");
    require(encoder.residual_layers >= 0, "residual layer count must be non-negative");
    require(encoder.residual_kernel >= 1 && encoder.input_kernel >= 1 && encoder.dilation >= 1,
            "encoder kernels and dilation must be positive");
    require(decoder.initial_channels >= 1 &&
                decoder.initial_channels % (1 << decoder.upsample_rates.size()) == 0,
            "decoder channels must stay integral after halving at every stage");
    require(!decoder.mrf_kernels.empty() && !decoder.mrf_dilations.empty(),
            "decoder needs MRF kernels and dilations");
    for (int k : decoder.mrf_kernels) require(k >= 1, "MRF kernels must be positive");
    for (int d : decoder.mrf_dilations) require(d >= 1, "MRF dilations must be positive");
    require(decoder.output_kernel >= 1, "output kernel must be positive");
}

ModelConfig ModelConfig::standard() { return ModelConfig{}; }

ModelConfig ModelConfig::reduced() {
    ModelConfig c;
    c.encoder.initial_channels = 4;
    c.decoder.initial_channels = 64;
    return c;
}

ModelConfig ModelConfig::tiny() {
    ModelConfig c;
    c.encoder.initial_channels = 2;
    c.encoder.strides = {4};
    c.encoder.residual_layers = 1;
    c.decoder.initial_channels = 4;
    c.decoder.upsample_rates = {4};
    c.decoder.mrf_kernels = {3};
    c.decoder.mrf_dilations = {1};
    return c;
}

std::size_t Tensor::numel() const {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

const Tensor& ModelWeights::at(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw Error(ErrorCode::Validation, "weights: missing tensor " + name);
    return it->second;
}

std::vector<std::pair<std::string, Shape>> expected_tensor_shapes(const ModelConfig& c) {
    c.validate();
    std::vector<std::pair<std::string, Shape>> out;
    const auto latent = u32(c.fsq.latent_width());

    const auto& enc = c.encoder;
    auto channels = u32(enc.initial_channels);
    add_conv(out, layout::encoder_input(), {channels, 1, u32(enc.input_kernel)}, channels);
    for (std::size_t b = 0; b < enc.strides.size(); ++b) {
        const int block = static_cast<int>(b);
        for (int l = 0; l < enc.residual_layers; ++l) {
            for (int conv = 1; conv <= 2; ++conv) {
                add_conv(out, layout::encoder_residual(block, l, conv),
                         {channels, channels, u32(enc.residual_kernel)}, channels);
            }
        }
        add_conv(out, layout::encoder_down(block), {2 * channels, channels, u32(2 * enc.strides[b])},
                 2 * channels);
        channels *= 2;
    }
    add_conv(out, layout::encoder_proj(), {latent, channels, 1}, latent);

    const auto& dec = c.decoder;
    channels = u32(dec.initial_channels);
    add_conv(out, layout::decoder_proj(), {channels, latent, 1}, channels);
    for (std::size_t i = 0; i < dec.upsample_rates.size(); ++i) {
        const int stage = static_cast<int>(i);
        const auto next = channels / 2;
        add_conv(out, layout::decoder_up(stage), {channels, next, u32(2 * dec.upsample_rates[i])}, next);
        for (std::size_t k = 0; k < dec.mrf_kernels.size(); ++k) {
            for (std::size_t d = 0; d < dec.mrf_dilations.size(); ++d) {
                for (int conv = 1; conv <= 2; ++conv) {
                    add_conv(out,
                             layout::decoder_mrf(stage, static_cast<int>(k), static_cast<int>(d), conv),
                             {next, next, u32(dec.mrf_kernels[k])}, next);
                }
            }
        }
        channels = next;
    }
    add_conv(out, layout::decoder_output(), {1, channels, u32(dec.output_kernel)}, 1);

    std::sort(out.begin(), out.end());
    return out;
}

void validate_weights(const ModelWeights& weights) {
    std::vector<std::pair<std::string, Shape>> expected;
    try {
        expected = expected_tensor_shapes(weights.config);
    } catch (const Error& e) {
        throw Error(ErrorCode::Validation, std::string("weights: ") + e.what());
    }
    for (const auto& [name, shape] : expected) {
        auto it = weights.tensors.find(name);
        if (it == weights.tensors.end()) {
            throw Error(ErrorCode::Validation, "weights: missing tensor " + name);
        }
        if (it->second.shape != shape) {
            throw Error(ErrorCode::Validation, "weights: tensor " + name + " has shape " +
                                                   shape_string(it->second.shape) + ", expected " +
                                                   shape_string(shape));
        }
        if (it->second.data.size() != it->second.numel()) {
            throw Error(ErrorCode::Validation, "weights: tensor " + name + " data size mismatch");
        }
    }
    if (weights.tensors.size() != expected.size()) {
        for (const auto& [name, tensor] : weights.tensors) {
            const bool known = std::binary_search(
                expected.begin(), expected.end(), std::pair<std::string, Shape>{name, tensor.shape},
                [](const auto& a, const auto& b) { return a.first < b.first; });
            if (!known) throw Error(ErrorCode::Validation, "weights: unexpected tensor " + name);
        }
    }
}

ModelWeights random_weights(const ModelConfig& config, std::uint64_t seed) {
    const auto shapes = expected_tensor_shapes(config);
    // A bias shares its weight's bound. Weights are [out, in, k] for convs and
    // [in, out, k] for transposed convs; either way PyTorch's fan_in is dim1 * k.
    std::map<std::string, float> bounds;
    for (const auto& [name, shape] : shapes) {
        if (shape.size() == 3) {
            const std::string prefix = name.substr(0, name.size() - std::string_view(".weight").size());
            bounds[prefix] = 1.0f / std::sqrt(static_cast<float>(shape[1] * shape[2]));
        }
    }

    ModelWeights w;
    w.config = config;
    std::mt19937_64 rng(seed);
    for (const auto& [name, shape] : shapes) {
        const std::string prefix = name.substr(0, name.rfind('.'));
        std::uniform_real_distribution<float> dist(-bounds.at(prefix), bounds.at(prefix));
        Tensor t;
        t.shape = shape;
        t.data.resize(t.numel());
        for (float& v : t.data) v = dist(rng);
        w.tensors.emplace(name, std::move(t));
    }
    return w;
}

ParameterCount parameter_count(const ModelWeights& weights) {
    ParameterCount count;
    for (const auto& [name, tensor] : weights.tensors) {
        if (name.starts_with("encoder.")) count.encoder += tensor.numel();
        else if (name.starts_with("decoder.")) count.decoder += tensor.numel();
    }
    return count;
}

std::vector<std::uint8_t> serialize_weights(const ModelWeights& weights) {
    const auto meta = config_to_meta(weights.config);
    for (const auto& [name, tensor] : weights.tensors) {
        if (name.starts_with("meta.")) {
            throw Error(ErrorCode::InvalidArgument, "weights: tensor name " + name + " is reserved");
        }
        if (tensor.data.size() != tensor.numel()) {
            throw Error(ErrorCode::Shape, "weights: tensor " + name + " data size mismatch");
        }
    }

    detail::ByteWriter out;
    out.raw(std::string_view(kWeightMagic, 4));
    out.u16(kWeightVersion);
    const std::size_t body_start = out.bytes().size();
    out.u32(static_cast<std::uint32_t>(meta.size() + weights.tensors.size()));

    auto write_name = [&](const std::string& name, const Shape& shape, DType dtype) {
        out.u16(static_cast<std::uint16_t>(name.size()));
        out.raw(name);
        out.u8(static_cast<std::uint8_t>(shape.size()));
        for (auto d : shape) out.u32(d);
        out.u8(static_cast<std::uint8_t>(dtype));
    };

    // Merge the two sorted sequences so the file is in global name order.
    auto m = meta.begin();
    auto t = weights.tensors.begin();
    while (m != meta.end() || t != weights.tensors.end()) {
        if (t == weights.tensors.end() || (m != meta.end() && m->first < t->first)) {
            write_name(m->first, {static_cast<std::uint32_t>(m->second.size())}, DType::I32);
            for (auto v : m->second) out.i32(v);
            ++m;
        } else {
            write_name(t->first, t->second.shape, DType::F32);
            for (float v : t->second.data) out.f32(v);
            ++t;
        }
    }

    auto& bytes = out.bytes();
    const std::uint32_t crc =
        crc32_of(std::span<const std::uint8_t>(bytes).subspan(body_start));
    out.u32(crc);
    return std::move(bytes);
}

ModelWeights load_weights(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 6 || !std::equal(kWeightMagic, kWeightMagic + 4, bytes.begin())) {
        throw Error(ErrorCode::Format, "weights: bad magic (expected \"LFSW\")");
    }
    const auto version = static_cast<std::uint16_t>(bytes[4] | (bytes[5] << 8));
    if (version != kWeightVersion) {
        throw Error(ErrorCode::Format, "weights: unsupported version " + std::to_string(version));
    }

    detail::ByteReader in(bytes.subspan(6), ErrorCode::Validation, "weights");
    const std::uint32_t count = in.u32();
    std::map<std::string, std::vector<std::int32_t>> meta;
    ModelWeights weights;
    std::string previous;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::string name = in.str(in.u16());
        if (i > 0 && name <= previous) {
            throw Error(ErrorCode::Validation, "weights: tensor " + name + " out of order or duplicated");
        }
        previous = name;
        const std::uint8_t rank = in.u8();
        Shape shape(rank);
        std::uint64_t numel = 1;
        for (auto& d : shape) {
            d = in.u32();
            numel *= d;
            if (numel > (std::uint64_t{1} << 40)) {
                throw Error(ErrorCode::Validation, "weights: tensor " + name + " is implausibly large");
            }
        }
        const auto dtype = static_cast<DType>(in.u8());
        if (numel > in.remaining() / 4) in.need(numel * 4);  // reports truncation
        if (dtype == DType::I32) {
            if (!name.starts_with("meta.") || rank != 1) {
                throw Error(ErrorCode::Validation, "weights: unexpected int32 tensor " + name);
            }
            std::vector<std::int32_t> values(numel);
            for (auto& v : values) v = in.i32();
            meta.emplace(name, std::move(values));
        } else if (dtype == DType::F32) {
            Tensor t;
            t.shape = std::move(shape);
            t.data.resize(numel);
            for (float& v : t.data) v = in.f32();
            weights.tensors.emplace(name, std::move(t));
        } else {
            throw Error(ErrorCode::Validation, "weights: tensor " + name + " has unknown dtype tag " +
                                                   std::to_string(static_cast<int>(dtype)));
        }
    }
    const std::size_t body_end = 6 + in.position();
    const std::uint32_t stored_crc = in.u32();
    if (in.remaining() != 0) {
        throw Error(ErrorCode::Validation, "weights: " + std::to_string(in.remaining()) +
                                               " trailing bytes after checksum");
    }
    const std::uint32_t crc = crc32_of(bytes.subspan(6, body_end - 6));
    if (crc != stored_crc) throw Error(ErrorCode::Validation, "weights: checksum mismatch");

    weights.config = meta_to_config(std::move(meta));
    validate_weights(weights);
    return weights;
}

ModelWeights load_weights_file(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
    return load_weights(bytes);
}

void save_weights_file(const ModelWeights& weights, const std::filesystem::path& path) {
    const auto bytes = serialize_weights(weights);
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error(ErrorCode::Io, "cannot write " + path.string());
    file.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!file) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace lfsc
