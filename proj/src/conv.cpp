#include "lfsc/conv.hpp"

#include <algorithm>
#include <string>

#include <Eigen/Core>

#include "lfsc/error.hpp"

namespace lfsc {

namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMatrix>;
using StridedRowMap = Eigen::Map<RowMatrix, 0, Eigen::OuterStride<>>;

// Working set for one im2col tile, in floats.
constexpr std::size_t kTileBudget = std::size_t{1} << 19;

void check_shape(const Signal& x, std::span<const float> weight, std::span<const float> bias,
                 const Conv1dShape& shape) {
    if (shape.in_channels <= 0 || shape.out_channels <= 0 || shape.kernel <= 0 ||
        shape.stride <= 0 || shape.dilation <= 0) {
        throw Error(ErrorCode::InvalidArgument, "conv: non-positive shape parameter");
    }
    if (x.channels != shape.in_channels || x.data.size() != static_cast<std::size_t>(x.channels) * x.length) {
        throw Error(ErrorCode::Shape, "conv: input has " + std::to_string(x.channels) +
                                          " channels, expected " + std::to_string(shape.in_channels));
    }
    const auto expected = static_cast<std::size_t>(shape.in_channels) *
                          static_cast<std::size_t>(shape.out_channels) *
                          static_cast<std::size_t>(shape.kernel);
    if (weight.size() != expected || bias.size() != static_cast<std::size_t>(shape.out_channels)) {
        throw Error(ErrorCode::Shape, "conv: weight/bias size mismatch");
    }
}

void add_bias(Signal& y, std::span<const float> bias) {
    for (int c = 0; c < y.channels; ++c) {
        float* row = y.row(c);
        const float b = bias[static_cast<std::size_t>(c)];
        for (std::size_t t = 0; t < y.length; ++t) row[t] += b;
    }
}

}  // namespace

std::size_t conv1d_output_length(std::size_t length, const Conv1dShape& shape) {
    const auto stride = static_cast<std::size_t>(shape.stride);
    return (length + stride - 1) / stride;
}

Signal conv1d(const Signal& x, std::span<const float> weight, std::span<const float> bias,
              const Conv1dShape& shape) {
    check_shape(x, weight, bias, shape);
    const std::size_t out_len = conv1d_output_length(x.length, shape);
    Signal y(shape.out_channels, out_len);
    if (out_len == 0) return y;

    const long span = static_cast<long>(shape.dilation) * (shape.kernel - 1);
    const long pad_total = std::max<long>(
        0, static_cast<long>(out_len - 1) * shape.stride + span + 1 - static_cast<long>(x.length));
    const long pad_left = pad_total / 2;

    const int cin = shape.in_channels;
    const int k = shape.kernel;
    const long rows = static_cast<long>(cin) * k;
    ConstRowMap w(weight.data(), shape.out_channels, rows);

    if (k == 1 && shape.stride == 1) {
        ConstRowMap xm(x.data.data(), cin, static_cast<long>(x.length));
        Eigen::Map<RowMatrix> ym(y.data.data(), shape.out_channels, static_cast<long>(out_len));
        ym.noalias() = w * xm;
        add_bias(y, bias);
        return y;
    }

    const std::size_t tile =
        std::clamp<std::size_t>(kTileBudget / static_cast<std::size_t>(rows), 64, out_len);
    RowMatrix cols(rows, static_cast<long>(tile));
    const long in_len = static_cast<long>(x.length);

    for (std::size_t t0 = 0; t0 < out_len; t0 += tile) {
        const std::size_t n = std::min(tile, out_len - t0);
        for (int ci = 0; ci < cin; ++ci) {
            const float* src = x.row(ci);
            for (int kk = 0; kk < k; ++kk) {
                float* dst = cols.data() + (static_cast<long>(ci) * k + kk) * static_cast<long>(tile);
                const long offset = static_cast<long>(kk) * shape.dilation - pad_left;
                for (std::size_t j = 0; j < n; ++j) {
                    const long pos = static_cast<long>(t0 + j) * shape.stride + offset;
                    dst[j] = (pos >= 0 && pos < in_len) ? src[pos] : 0.0f;
                }
            }
        }
        StridedRowMap out(y.data.data() + t0, shape.out_channels, static_cast<long>(n),
                          Eigen::OuterStride<>(static_cast<long>(out_len)));
        out.noalias() = w * cols.leftCols(static_cast<long>(n));
    }
    add_bias(y, bias);
    return y;
}

Signal conv_transpose1d(const Signal& x, std::span<const float> weight, std::span<const float> bias,
                        const Conv1dShape& shape) {
    check_shape(x, weight, bias, shape);
    const int cout = shape.out_channels;
    const int k = shape.kernel;
    const long s = shape.stride;
    const std::size_t out_len = x.length * static_cast<std::size_t>(s);
    Signal y(cout, out_len);
    if (out_len == 0) return y;

    const long crop = std::max<long>(0, (k - s) / 2);
    const long rows = static_cast<long>(cout) * k;
    ConstRowMap w(weight.data(), shape.in_channels, rows);

    const std::size_t tile =
        std::clamp<std::size_t>(kTileBudget / static_cast<std::size_t>(rows), 64, x.length);
    RowMatrix cols(rows, static_cast<long>(tile));
    const long y_len = static_cast<long>(out_len);

    for (std::size_t t0 = 0; t0 < x.length; t0 += tile) {
        const std::size_t n = std::min(tile, x.length - t0);
        Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>> xm(
            x.data.data() + t0, shape.in_channels, static_cast<long>(n),
            Eigen::OuterStride<>(static_cast<long>(x.length)));
        cols.leftCols(static_cast<long>(n)).noalias() = w.transpose() * xm;
        for (int co = 0; co < cout; ++co) {
            float* dst = y.row(co);
            for (int kk = 0; kk < k; ++kk) {
                const float* src = cols.data() + (static_cast<long>(co) * k + kk) * static_cast<long>(tile);
                const long offset = kk - crop;
                for (std::size_t j = 0; j < n; ++j) {
                    const long pos = static_cast<long>(t0 + j) * s + offset;
                    if (pos >= 0 && pos < y_len) dst[pos] += src[j];
                }
            }
        }
    }
    add_bias(y, bias);
    return y;
}

void leaky_relu_inplace(Signal& x, float slope) {
    for (float& v : x.data) v = v < 0.0f ? v * slope : v;
}

Signal leaky_relu(const Signal& x, float slope) {
    Signal y = x;
    leaky_relu_inplace(y, slope);
    return y;
}

}  // namespace lfsc
