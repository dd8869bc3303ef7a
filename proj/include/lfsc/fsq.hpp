#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lfsc {

/// Finite scalar quantizer layout: `num_codebooks` groups of `levels.size()`
/// latent dimensions. Each group's per-dimension indices combine into one
/// mixed-radix code in [0, codes_per_codebook()).
class FsqSpec {
public:
    FsqSpec(int num_codebooks, std::vector<int> levels);

    int num_codebooks() const { return num_codebooks_; }
    const std::vector<int>& levels() const { return levels_; }
    int dims_per_code() const { return static_cast<int>(levels_.size()); }
    int latent_width() const { return num_codebooks_ * dims_per_code(); }
    std::uint32_t codes_per_codebook() const { return codes_per_codebook_; }
    int code_bit_width() const { return code_bit_width_; }

    bool operator==(const FsqSpec&) const = default;

    /// 8 codebooks at [8, 7, 6, 6]: 2016 codes, 11 bits.
    static FsqSpec standard();
    /// Stand-in for the 1000-code ablation: [8, 5, 5, 5].
    static FsqSpec codes_1000();
    /// Stand-in for the 4032-code ablation: [8, 7, 6, 12].
    static FsqSpec codes_4032();

private:
    int num_codebooks_;
    std::vector<int> levels_;
    std::uint32_t codes_per_codebook_;
    int code_bit_width_;
};

/// Row-major frames x latent_width continuous latent.
struct LatentSequence {
    std::size_t frames = 0;
    std::size_t width = 0;
    double frame_rate = 0.0;
    std::vector<float> values;

    float at(std::size_t frame, std::size_t dim) const { return values[frame * width + dim]; }
};

/// Row-major frames x num_codebooks code matrix.
class CodeSequence {
public:
    explicit CodeSequence(FsqSpec spec, std::size_t frames = 0);
    CodeSequence(FsqSpec spec, std::size_t frames, std::vector<std::uint32_t> codes);

    const FsqSpec& spec() const { return spec_; }
    std::size_t frames() const { return frames_; }
    std::size_t num_codebooks() const { return static_cast<std::size_t>(spec_.num_codebooks()); }
    std::size_t size() const { return codes_.size(); }

    std::uint32_t at(std::size_t frame, std::size_t codebook) const {
        return codes_[frame * num_codebooks() + codebook];
    }
    std::uint32_t& at(std::size_t frame, std::size_t codebook) {
        return codes_[frame * num_codebooks() + codebook];
    }
    std::span<const std::uint32_t> data() const { return codes_; }

    /// Throws InvalidCode when any entry is >= codes_per_codebook.
    void validate() const;

    bool operator==(const CodeSequence&) const = default;

private:
    FsqSpec spec_;
    std::size_t frames_;
    std::vector<std::uint32_t> codes_;
};

// Bounded rounding of one latent dimension: round_half_up(h * tanh(z) + h)
// with h = (levels - 1) / 2.
int quantize_dim(double z, int levels);

// Reconstruction grid value (2 * index - (levels - 1)) / (levels - 1).
double dequantize_dim(int index, int levels);

// Mixed radix, dimension 0 least significant.
std::uint32_t indices_to_code(std::span<const int> indices, const FsqSpec& spec);
std::vector<int> code_to_indices(std::uint32_t code, const FsqSpec& spec);

CodeSequence quantize_frames(const LatentSequence& latent, const FsqSpec& spec);
LatentSequence dequantize_frames(const CodeSequence& codes);

/// Straight-through surrogate: forward value is the dequantized grid point of
/// quantize_dim(z); the backward pass treats rounding as identity, so the
/// gradient w.r.t. z is that of the bounding function, tanh'(z).
double straight_through_value(double z, int levels);
double straight_through_gradient(double z, int levels);

}  // namespace lfsc
