#pragma once

#include <cstddef>
#include <optional>

#include "lfsc/audio.hpp"
#include "lfsc/fsq.hpp"
#include "lfsc/weights.hpp"

namespace lfsc {

inline constexpr float kLeakySlope = 0.1f;

/// Frames per second for a given total encoder stride.
double frame_rate(double sample_rate, int total_stride);

/// ceil(samples / total_stride).
std::size_t frame_count(std::size_t samples, int total_stride);

/// Audio -> continuous latent (frames x latent_width). The input is
/// right-padded with zeros to a whole number of frames.
LatentSequence encode_latent(const AudioBuffer& audio, const ModelWeights& weights);

/// Latent -> audio of frames * total_stride samples, clamped to [-1, 1].
AudioBuffer decode_latent(const LatentSequence& latent, const ModelWeights& weights);

CodeSequence encode(const AudioBuffer& audio, const ModelWeights& weights);

/// When original_length is given the output is trimmed to it.
AudioBuffer decode(const CodeSequence& codes, const ModelWeights& weights,
                   std::optional<std::size_t> original_length = std::nullopt);

}  // namespace lfsc
