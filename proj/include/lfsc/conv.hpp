#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lfsc {

// Channel-major activation: data[c * length + t].
struct Signal {
    int channels = 0;
    std::size_t length = 0;
    std::vector<float> data;

    Signal() = default;
    Signal(int channels_, std::size_t length_)
        : channels(channels_), length(length_), data(static_cast<std::size_t>(channels_) * length_, 0.0f) {}

    float* row(int c) { return data.data() + static_cast<std::size_t>(c) * length; }
    const float* row(int c) const { return data.data() + static_cast<std::size_t>(c) * length; }
};

struct Conv1dShape {
    int in_channels = 0;
    int out_channels = 0;
    int kernel = 1;
    int stride = 1;
    int dilation = 1;
};

// Output length of a conv with symmetric "same" padding: ceil(length / stride).
std::size_t conv1d_output_length(std::size_t length, const Conv1dShape& shape);

// weight: [out, in, kernel]; bias: [out]. Symmetric "same" padding: total
// max(0, (out_len - 1) * stride + dilation * (kernel - 1) + 1 - length),
// odd remainder on the right.
Signal conv1d(const Signal& x, std::span<const float> weight, std::span<const float> bias,
              const Conv1dShape& shape);

// weight: [in, out, kernel]; bias: [out]. Output length is exactly
// length * stride; the full transposed output is cropped by
// (kernel - stride) / 2 samples on the left.
Signal conv_transpose1d(const Signal& x, std::span<const float> weight, std::span<const float> bias,
                        const Conv1dShape& shape);

void leaky_relu_inplace(Signal& x, float slope);
Signal leaky_relu(const Signal& x, float slope);

}  // namespace lfsc
