#pragma once

#include <cstddef>
#include <vector>

namespace lfsc {

inline constexpr int kCodecSampleRate = 22050;

// Interleaved PCM samples, nominally in [-1, 1].
struct AudioBuffer {
    std::vector<float> samples;
    int sample_rate = kCodecSampleRate;
    int channels = 1;

    std::size_t frames() const { return channels > 0 ? samples.size() / static_cast<std::size_t>(channels) : 0; }
};

}  // namespace lfsc
