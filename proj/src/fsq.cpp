#include "lfsc/fsq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lfsc/error.hpp"

namespace lfsc {

FsqSpec::FsqSpec(int num_codebooks, std::vector<int> levels)
    : num_codebooks_(num_codebooks), levels_(std::move(levels)) {
    if (num_codebooks_ < 1) {
        throw Error(ErrorCode::InvalidArgument, "fsq: num_codebooks must be positive");
    }
    if (levels_.empty()) {
        throw Error(ErrorCode::InvalidArgument, "fsq: levels must not be empty");
    }
    std::uint64_t product = 1;
    for (int level : levels_) {
        if (level < 2) {
            throw Error(ErrorCode::InvalidArgument,
                        "fsq: every level must be >= 2, got " + std::to_string(level));
        }
        product *= static_cast<std::uint64_t>(level);
        if (product > (std::uint64_t{1} << 31)) {
            throw Error(ErrorCode::InvalidArgument, "fsq: codes per codebook exceeds 2^31");
        }
    }
    codes_per_codebook_ = static_cast<std::uint32_t>(product);
    code_bit_width_ = 0;
    while ((std::uint64_t{1} << code_bit_width_) < product) ++code_bit_width_;
}

FsqSpec FsqSpec::standard() { return FsqSpec(8, {8, 7, 6, 6}); }
FsqSpec FsqSpec::codes_1000() { return FsqSpec(8, {8, 5, 5, 5}); }
FsqSpec FsqSpec::codes_4032() { return FsqSpec(8, {8, 7, 6, 12}); }

CodeSequence::CodeSequence(FsqSpec spec, std::size_t frames)
    : spec_(std::move(spec)), frames_(frames), codes_(frames * num_codebooks(), 0) {}

CodeSequence::CodeSequence(FsqSpec spec, std::size_t frames, std::vector<std::uint32_t> codes)
    : spec_(std::move(spec)), frames_(frames), codes_(std::move(codes)) {
    if (codes_.size() != frames_ * num_codebooks()) {
        throw Error(ErrorCode::Shape, "code matrix has " + std::to_string(codes_.size()) +
                                          " entries, expected " +
                                          std::to_string(frames_ * num_codebooks()));
    }
}

void CodeSequence::validate() const {
    for (std::size_t i = 0; i < codes_.size(); ++i) {
        if (codes_[i] >= spec_.codes_per_codebook()) {
            throw Error(ErrorCode::InvalidCode,
                        "code " + std::to_string(codes_[i]) + " at frame " +
                            std::to_string(i / num_codebooks()) + " exceeds codebook size " +
                            std::to_string(spec_.codes_per_codebook()));
        }
    }
}

int quantize_dim(double z, int levels) {
    if (levels < 2) {
        throw Error(ErrorCode::InvalidArgument, "fsq: level count must be >= 2");
    }
    if (!std::isfinite(z)) {
        throw Error(ErrorCode::InvalidInput, "fsq: non-finite latent value");
    }
    const double half = 0.5 * (levels - 1);
    const double shifted = half * std::tanh(z) + half;
    const int index = static_cast<int>(std::floor(shifted + 0.5));
    // tanh(z) can round to exactly +/-1 for large |z|; the floor then stays in range.
    return std::clamp(index, 0, levels - 1);
}

double dequantize_dim(int index, int levels) {
    if (levels < 2 || index < 0 || index >= levels) {
        throw Error(ErrorCode::InvalidCode, "fsq: index " + std::to_string(index) +
                                                " outside [0, " + std::to_string(levels - 1) + "]");
    }
    return static_cast<double>(2 * index - (levels - 1)) / static_cast<double>(levels - 1);
}

std::uint32_t indices_to_code(std::span<const int> indices, const FsqSpec& spec) {
    const auto& levels = spec.levels();
    if (indices.size() != levels.size()) {
        throw Error(ErrorCode::InvalidCode, "fsq: expected " + std::to_string(levels.size()) +
                                                " indices, got " + std::to_string(indices.size()));
    }
    std::uint32_t code = 0;
    for (std::size_t d = levels.size(); d-- > 0;) {
        if (indices[d] < 0 || indices[d] >= levels[d]) {
            throw Error(ErrorCode::InvalidCode, "fsq: index " + std::to_string(indices[d]) +
                                                    " out of range for dimension " +
                                                    std::to_string(d));
        }
        code = code * static_cast<std::uint32_t>(levels[d]) + static_cast<std::uint32_t>(indices[d]);
    }
    return code;
}

std::vector<int> code_to_indices(std::uint32_t code, const FsqSpec& spec) {
    if (code >= spec.codes_per_codebook()) {
        throw Error(ErrorCode::InvalidCode, "fsq: code " + std::to_string(code) +
                                                " >= " + std::to_string(spec.codes_per_codebook()));
    }
    std::vector<int> indices(spec.levels().size());
    for (std::size_t d = 0; d < indices.size(); ++d) {
        const auto level = static_cast<std::uint32_t>(spec.levels()[d]);
        indices[d] = static_cast<int>(code % level);
        code /= level;
    }
    return indices;
}

CodeSequence quantize_frames(const LatentSequence& latent, const FsqSpec& spec) {
    const auto width = static_cast<std::size_t>(spec.latent_width());
    if (latent.width != width || latent.values.size() != latent.frames * latent.width) {
        throw Error(ErrorCode::Shape, "fsq: latent width " + std::to_string(latent.width) +
                                          " does not match spec width " + std::to_string(width));
    }
    const auto& levels = spec.levels();
    const std::size_t dims = levels.size();
    CodeSequence codes(spec, latent.frames);
    std::vector<int> indices(dims);
    for (std::size_t f = 0; f < latent.frames; ++f) {
        for (std::size_t cb = 0; cb < codes.num_codebooks(); ++cb) {
            for (std::size_t d = 0; d < dims; ++d) {
                indices[d] = quantize_dim(latent.at(f, cb * dims + d), levels[d]);
            }
            codes.at(f, cb) = indices_to_code(indices, spec);
        }
    }
    return codes;
}

LatentSequence dequantize_frames(const CodeSequence& codes) {
    const FsqSpec& spec = codes.spec();
    const auto& levels = spec.levels();
    const std::size_t dims = levels.size();
    LatentSequence latent;
    latent.frames = codes.frames();
    latent.width = static_cast<std::size_t>(spec.latent_width());
    latent.values.resize(latent.frames * latent.width);
    for (std::size_t f = 0; f < codes.frames(); ++f) {
        for (std::size_t cb = 0; cb < codes.num_codebooks(); ++cb) {
            const auto indices = code_to_indices(codes.at(f, cb), spec);
            for (std::size_t d = 0; d < dims; ++d) {
                latent.values[f * latent.width + cb * dims + d] =
                    static_cast<float>(dequantize_dim(indices[d], levels[d]));
            }
        }
    }
    return latent;
}

double straight_through_value(double z, int levels) {
    return dequantize_dim(quantize_dim(z, levels), levels);
}

double straight_through_gradient(double z, int levels) {
    if (levels < 2) {
        throw Error(ErrorCode::InvalidArgument, "fsq: level count must be >= 2");
    }
    const double t = std::tanh(z);
    return 1.0 - t * t;
}

}  // namespace lfsc
