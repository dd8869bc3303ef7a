#include "lfsc/codec_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lfsc/conv.hpp"
#include "lfsc/error.hpp"
#include "model_layout.hpp"

namespace lfsc {

namespace {

// Looks up prefix.weight / prefix.bias and derives the conv shape from the
// stored tensor.
struct ConvParams {
    const Tensor& weight;
    const Tensor& bias;
};

ConvParams params(const ModelWeights& w, const std::string& prefix) {
    return {w.at(layout::weight(prefix)), w.at(layout::bias(prefix))};
}

Signal apply_conv(const Signal& x, const ModelWeights& w, const std::string& prefix, int stride = 1,
                  int dilation = 1) {
    const auto p = params(w, prefix);
    Conv1dShape shape;
    shape.out_channels = static_cast<int>(p.weight.shape[0]);
    shape.in_channels = static_cast<int>(p.weight.shape[1]);
    shape.kernel = static_cast<int>(p.weight.shape[2]);
    shape.stride = stride;
    shape.dilation = dilation;
    return conv1d(x, p.weight.data, p.bias.data, shape);
}

Signal apply_conv_transpose(const Signal& x, const ModelWeights& w, const std::string& prefix, int stride) {
    const auto p = params(w, prefix);
    Conv1dShape shape;
    shape.in_channels = static_cast<int>(p.weight.shape[0]);
    shape.out_channels = static_cast<int>(p.weight.shape[1]);
    shape.kernel = static_cast<int>(p.weight.shape[2]);
    shape.stride = stride;
    return conv_transpose1d(x, p.weight.data, p.bias.data, shape);
}

void add_inplace(Signal& acc, const Signal& x) {
    for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += x.data[i];
}

// x + conv2(lrelu(conv1(lrelu(x))))
void residual_unit(Signal& x, const ModelWeights& w, const std::string& conv1, const std::string& conv2,
                   int dilation) {
    Signal h = apply_conv(leaky_relu(x, kLeakySlope), w, conv1, 1, dilation);
    leaky_relu_inplace(h, kLeakySlope);
    add_inplace(x, apply_conv(h, w, conv2));
}

void check_audio(const AudioBuffer& audio, const ModelConfig& config) {
    if (audio.channels != 1) {
        throw Error(ErrorCode::UnsupportedLayout,
                    "codec expects mono audio, got " + std::to_string(audio.channels) + " channels");
    }
    if (audio.sample_rate != config.sample_rate) {
        throw Error(ErrorCode::UnsupportedRate, "codec expects " + std::to_string(config.sample_rate) +
                                                    " Hz audio, got " + std::to_string(audio.sample_rate));
    }
    if (audio.samples.empty()) {
        throw Error(ErrorCode::InvalidInput, "codec input must contain at least one sample");
    }
}

}  // namespace

double frame_rate(double sample_rate, int total_stride) {
    if (total_stride <= 0 || !(sample_rate > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "frame_rate: sample rate and stride must be positive");
    }
    return sample_rate / static_cast<double>(total_stride);
}

std::size_t frame_count(std::size_t samples, int total_stride) {
    if (total_stride <= 0) throw Error(ErrorCode::InvalidArgument, "frame_count: stride must be positive");
    const auto stride = static_cast<std::size_t>(total_stride);
    return (samples + stride - 1) / stride;
}

LatentSequence encode_latent(const AudioBuffer& audio, const ModelWeights& weights) {
    const ModelConfig& config = weights.config;
    check_audio(audio, config);
    const int stride = config.total_stride();
    const std::size_t frames = frame_count(audio.samples.size(), stride);

    Signal x(1, frames * static_cast<std::size_t>(stride));
    std::copy(audio.samples.begin(), audio.samples.end(), x.data.begin());

    const auto& enc = config.encoder;
    Signal h = apply_conv(x, weights, layout::encoder_input());
    for (std::size_t b = 0; b < enc.strides.size(); ++b) {
        const int block = static_cast<int>(b);
        for (int l = 0; l < enc.residual_layers; ++l) {
            residual_unit(h, weights, layout::encoder_residual(block, l, 1),
                          layout::encoder_residual(block, l, 2), enc.dilation);
        }
        leaky_relu_inplace(h, kLeakySlope);
        h = apply_conv(h, weights, layout::encoder_down(block), enc.strides[b]);
    }
    leaky_relu_inplace(h, kLeakySlope);
    h = apply_conv(h, weights, layout::encoder_proj());

    LatentSequence latent;
    latent.frames = h.length;
    latent.width = static_cast<std::size_t>(h.channels);
    latent.frame_rate = frame_rate(config.sample_rate, stride);
    latent.values.resize(latent.frames * latent.width);
    for (int c = 0; c < h.channels; ++c) {
        const float* row = h.row(c);
        for (std::size_t t = 0; t < h.length; ++t) latent.values[t * latent.width + static_cast<std::size_t>(c)] = row[t];
    }
    return latent;
}

AudioBuffer decode_latent(const LatentSequence& latent, const ModelWeights& weights) {
    const ModelConfig& config = weights.config;
    const auto width = static_cast<std::size_t>(config.fsq.latent_width());
    if (latent.width != width || latent.values.size() != latent.frames * width) {
        throw Error(ErrorCode::Shape, "decoder expects latent width " + std::to_string(width) + ", got " +
                                          std::to_string(latent.width));
    }

    Signal z(static_cast<int>(width), latent.frames);
    for (std::size_t t = 0; t < latent.frames; ++t) {
        for (std::size_t c = 0; c < width; ++c) z.row(static_cast<int>(c))[t] = latent.at(t, c);
    }

    const auto& dec = config.decoder;
    Signal h = apply_conv(z, weights, layout::decoder_proj());
    for (std::size_t i = 0; i < dec.upsample_rates.size(); ++i) {
        const int stage = static_cast<int>(i);
        leaky_relu_inplace(h, kLeakySlope);
        h = apply_conv_transpose(h, weights, layout::decoder_up(stage), dec.upsample_rates[i]);

        Signal fused(h.channels, h.length);
        for (std::size_t k = 0; k < dec.mrf_kernels.size(); ++k) {
            Signal r = h;
            for (std::size_t d = 0; d < dec.mrf_dilations.size(); ++d) {
                const int ki = static_cast<int>(k);
                const int di = static_cast<int>(d);
                residual_unit(r, weights, layout::decoder_mrf(stage, ki, di, 1),
                              layout::decoder_mrf(stage, ki, di, 2), dec.mrf_dilations[d]);
            }
            add_inplace(fused, r);
        }
        const float scale = 1.0f / static_cast<float>(dec.mrf_kernels.size());
        for (float& v : fused.data) v *= scale;
        h = std::move(fused);
    }
    leaky_relu_inplace(h, kLeakySlope);
    h = apply_conv(h, weights, layout::decoder_output());

    AudioBuffer out;
    out.sample_rate = config.sample_rate;
    out.channels = 1;
    out.samples = std::move(h.data);
    for (float& v : out.samples) v = std::clamp(v, -1.0f, 1.0f);
    return out;
}

CodeSequence encode(const AudioBuffer& audio, const ModelWeights& weights) {
    return quantize_frames(encode_latent(audio, weights), weights.config.fsq);
}

AudioBuffer decode(const CodeSequence& codes, const ModelWeights& weights,
                   std::optional<std::size_t> original_length) {
    if (!(codes.spec() == weights.config.fsq)) {
        throw Error(ErrorCode::InvalidCode, "code sequence FSQ layout does not match the model");
    }
    codes.validate();
    const std::size_t full = codes.frames() * static_cast<std::size_t>(weights.config.total_stride());
    if (original_length && *original_length > full) {
        throw Error(ErrorCode::Length, "original length " + std::to_string(*original_length) +
                                           " exceeds decoded length " + std::to_string(full));
    }
    AudioBuffer out = decode_latent(dequantize_frames(codes), weights);
    if (original_length) out.samples.resize(*original_length);
    return out;
}

}  // namespace lfsc
