#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lfsc/fsq.hpp"

namespace lfsc {

inline constexpr char kBitstreamMagic[4] = {'L', 'F', 'S', 'C'};
inline constexpr std::uint16_t kBitstreamVersion = 1;

// On-disk layout (little-endian integers):
//   "LFSC" | u16 version | u32 sample_rate | u16 total_stride |
//   u8 num_codebooks | u8 level count | u16 levels[] | u32 num_frames |
//   u64 original_length | payload
// The payload holds frames in order, codebooks 0..N-1 within a frame, each
// code as a code_bit_width-bit field packed MSB-first; the last byte is
// zero-padded.
struct BitstreamHeader {
    std::uint16_t version = kBitstreamVersion;
    std::uint32_t sample_rate = 0;
    std::uint16_t total_stride = 0;
    FsqSpec spec = FsqSpec::standard();
    std::uint32_t num_frames = 0;
    std::uint64_t original_length = 0;

    std::size_t header_bytes() const;
    std::size_t payload_bytes() const;

    bool operator==(const BitstreamHeader&) const = default;
};

struct DecodedBitstream {
    BitstreamHeader header;
    CodeSequence codes;
};

/// ceil(frames * codebooks * width / 8).
std::size_t payload_size(const FsqSpec& spec, std::size_t frames);

std::vector<std::uint8_t> pack(const CodeSequence& codes, std::uint32_t sample_rate,
                               std::uint16_t total_stride, std::uint64_t original_length);

/// Format for bad magic/version/header fields, Truncation for a short or
/// over-long payload, Corruption for a decoded code outside the codebook.
DecodedBitstream unpack(std::span<const std::uint8_t> bytes);

/// Parses and checks only the header; payload length is still verified.
BitstreamHeader read_header(std::span<const std::uint8_t> bytes);

double bitrate(const FsqSpec& spec, double sample_rate, int total_stride);
double token_rate(const FsqSpec& spec, double sample_rate, int total_stride);

void write_bitstream_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace lfsc
