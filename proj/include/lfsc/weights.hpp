#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lfsc/audio.hpp"
#include "lfsc/fsq.hpp"

namespace lfsc {

struct EncoderConfig {
    int initial_channels = 48;  // doubled by every downsampling conv
    std::vector<int> strides{2, 2, 4, 8, 8};
    int residual_layers = 3;
    int residual_kernel = 3;
    int dilation = 1;
    int input_kernel = 7;

    bool operator==(const EncoderConfig&) const = default;
};

struct DecoderConfig {
    int initial_channels = 1024;  // halved by every upsampling conv
    std::vector<int> upsample_rates{8, 8, 4, 2, 2};
    std::vector<int> mrf_kernels{3, 7, 11};
    std::vector<int> mrf_dilations{1, 3, 5};
    int output_kernel = 7;

    bool operator==(const DecoderConfig&) const = default;
};

struct ModelConfig {
    int sample_rate = kCodecSampleRate;
    FsqSpec fsq = FsqSpec::standard();
    EncoderConfig encoder;
    DecoderConfig decoder;

    int total_stride() const;
    int encoder_output_channels() const;
    int decoder_output_channels() const;

    /// Throws InvalidArgument describing the first inconsistency.
    void validate() const;

    bool operator==(const ModelConfig&) const = default;

    /// Full-size generator.
    static ModelConfig standard();
    /// Same strides, rates and FSQ layout as standard() with narrow channels,
    /// cheap enough for CPU tests.
    static ModelConfig reduced();
    /// One encoder block, one decoder stage, stride 4.
    static ModelConfig tiny();
};

struct Tensor {
    std::vector<std::uint32_t> shape;
    std::vector<float> data;

    std::size_t numel() const;
    bool operator==(const Tensor&) const = default;
};

/// Named parameter tensors plus the architecture they belong to. Immutable
/// once loaded; encode/decode only read from it.
struct ModelWeights {
    ModelConfig config;
    std::map<std::string, Tensor> tensors;

    const Tensor& at(const std::string& name) const;
};

struct ParameterCount {
    std::uint64_t encoder = 0;
    std::uint64_t decoder = 0;

    std::uint64_t total() const { return encoder + decoder; }
    bool operator==(const ParameterCount&) const = default;
};

/// Every tensor the config requires, in canonical (sorted) order.
std::vector<std::pair<std::string, std::vector<std::uint32_t>>> expected_tensor_shapes(
    const ModelConfig& config);

/// Throws Validation naming the first missing, unexpected or mis-shaped tensor.
void validate_weights(const ModelWeights& weights);

/// Deterministic uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialisation.
ModelWeights random_weights(const ModelConfig& config, std::uint64_t seed);

/// Sums element counts of "encoder." and "decoder." tensors.
ParameterCount parameter_count(const ModelWeights& weights);

// Weight file layout (all integers little-endian):
//   "LFSW" | u16 version | u32 tensor count |
//   per tensor: u16 name length, name bytes, u8 rank, u32 dims[rank],
//               u8 dtype (0 = f32, 1 = i32), raw element data |
//   u32 CRC-32 of every byte after the version field.
// Tensors are written in name order. Architecture metadata travels as i32
// tensors under "meta.".
inline constexpr char kWeightMagic[4] = {'L', 'F', 'S', 'W'};
inline constexpr std::uint16_t kWeightVersion = 1;

std::vector<std::uint8_t> serialize_weights(const ModelWeights& weights);
ModelWeights load_weights(std::span<const std::uint8_t> bytes);
ModelWeights load_weights_file(const std::filesystem::path& path);
void save_weights_file(const ModelWeights& weights, const std::filesystem::path& path);

}  // namespace lfsc
