#include "lfsc/bitstream.hpp"

#include <algorithm>
#include <fstream>
#include <string>

#include "byte_io.hpp"
#include "lfsc/codec_model.hpp"
#include "lfsc/error.hpp"

namespace lfsc {

namespace {

class BitWriter {
public:
    explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

    void put(std::uint32_t value, int width) {
        for (int bit = width - 1; bit >= 0; --bit) {
            acc_ = static_cast<std::uint8_t>((acc_ << 1) | ((value >> bit) & 1u));
            if (++used_ == 8) flush();
        }
    }

    void finish() {
        if (used_ > 0) {
            acc_ = static_cast<std::uint8_t>(acc_ << (8 - used_));
            flush();
        }
    }

private:
    void flush() {
        out_.push_back(acc_);
        acc_ = 0;
        used_ = 0;
    }

    std::vector<std::uint8_t>& out_;
    std::uint8_t acc_ = 0;
    int used_ = 0;
};

class BitReader {
public:
    explicit BitReader(std::span<const std::uint8_t> in) : in_(in) {}

    std::uint32_t get(int width) {
        std::uint32_t v = 0;
        for (int i = 0; i < width; ++i) {
            const std::uint8_t byte = in_[pos_ >> 3];
            v = (v << 1) | ((byte >> (7 - (pos_ & 7))) & 1u);
            ++pos_;
        }
        return v;
    }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

void check_frame_length(std::uint32_t frames, std::uint16_t stride, std::uint64_t original_length,
                        ErrorCode code) {
    const std::uint64_t capacity = static_cast<std::uint64_t>(frames) * stride;
    const bool ok = frames == 0 ? original_length == 0
                                : original_length <= capacity && original_length > capacity - stride;
    if (!ok) {
        throw Error(code, "bitstream: original length " + std::to_string(original_length) +
                              " inconsistent with " + std::to_string(frames) + " frames of " +
                              std::to_string(stride) + " samples");
    }
}

BitstreamHeader parse_header(detail::ByteReader& in) {
    const std::string magic = in.str(4);
    if (!std::equal(magic.begin(), magic.end(), kBitstreamMagic)) {
        throw Error(ErrorCode::Format, "bitstream: bad magic (expected \"LFSC\")");
    }
    BitstreamHeader h;
    h.version = in.u16();
    if (h.version != kBitstreamVersion) {
        throw Error(ErrorCode::Format, "bitstream: unsupported version " + std::to_string(h.version));
    }
    h.sample_rate = in.u32();
    h.total_stride = in.u16();
    const int codebooks = in.u8();
    const int level_count = in.u8();
    std::vector<int> levels(static_cast<std::size_t>(level_count));
    for (int& l : levels) l = in.u16();
    h.num_frames = in.u32();
    h.original_length = in.u64();

    if (h.sample_rate == 0 || h.total_stride == 0) {
        throw Error(ErrorCode::Format, "bitstream: zero sample rate or stride");
    }
    try {
        h.spec = FsqSpec(codebooks, std::move(levels));
    } catch (const Error& e) {
        throw Error(ErrorCode::Format, std::string("bitstream: ") + e.what());
    }
    check_frame_length(h.num_frames, h.total_stride, h.original_length, ErrorCode::Format);
    return h;
}

}  // namespace

std::size_t payload_size(const FsqSpec& spec, std::size_t frames) {
    const std::size_t bits = frames * static_cast<std::size_t>(spec.num_codebooks()) *
                             static_cast<std::size_t>(spec.code_bit_width());
    return (bits + 7) / 8;
}

std::size_t BitstreamHeader::header_bytes() const {
    return 4 + 2 + 4 + 2 + 1 + 1 + 2 * spec.levels().size() + 4 + 8;
}

std::size_t BitstreamHeader::payload_bytes() const { return payload_size(spec, num_frames); }

std::vector<std::uint8_t> pack(const CodeSequence& codes, std::uint32_t sample_rate,
                               std::uint16_t total_stride, std::uint64_t original_length) {
    const FsqSpec& spec = codes.spec();
    if (sample_rate == 0 || total_stride == 0) {
        throw Error(ErrorCode::InvalidArgument, "pack: sample rate and stride must be positive");
    }
    if (spec.num_codebooks() > 255 || spec.levels().size() > 255) {
        throw Error(ErrorCode::InvalidArgument, "pack: codebook or level count exceeds 255");
    }
    for (int l : spec.levels()) {
        if (l > 65535) throw Error(ErrorCode::InvalidArgument, "pack: level exceeds 65535");
    }
    if (codes.frames() > 0xFFFFFFFFu) throw Error(ErrorCode::InvalidArgument, "pack: too many frames");
    const auto frames = static_cast<std::uint32_t>(codes.frames());
    check_frame_length(frames, total_stride, original_length, ErrorCode::InvalidArgument);
    codes.validate();

    detail::ByteWriter out;
    out.raw(std::string_view(kBitstreamMagic, 4));
    out.u16(kBitstreamVersion);
    out.u32(sample_rate);
    out.u16(total_stride);
    out.u8(static_cast<std::uint8_t>(spec.num_codebooks()));
    out.u8(static_cast<std::uint8_t>(spec.levels().size()));
    for (int l : spec.levels()) out.u16(static_cast<std::uint16_t>(l));
    out.u32(frames);
    out.u64(original_length);

    auto& bytes = out.bytes();
    bytes.reserve(bytes.size() + payload_size(spec, codes.frames()));
    BitWriter bits(bytes);
    const int width = spec.code_bit_width();
    for (std::uint32_t code : codes.data()) bits.put(code, width);
    bits.finish();
    return std::move(bytes);
}

BitstreamHeader read_header(std::span<const std::uint8_t> bytes) {
    detail::ByteReader in(bytes, ErrorCode::Truncation, "bitstream header");
    BitstreamHeader h = parse_header(in);
    const std::size_t expected = h.payload_bytes();
    if (in.remaining() != expected) {
        throw Error(ErrorCode::Truncation, "bitstream: payload is " + std::to_string(in.remaining()) +
                                               " bytes, expected " + std::to_string(expected));
    }
    return h;
}

DecodedBitstream unpack(std::span<const std::uint8_t> bytes) {
    BitstreamHeader h = read_header(bytes);
    const std::size_t offset = h.header_bytes();
    BitReader bits(bytes.subspan(offset));
    const int width = h.spec.code_bit_width();
    const std::size_t count = static_cast<std::size_t>(h.num_frames) * static_cast<std::size_t>(h.spec.num_codebooks());
    std::vector<std::uint32_t> codes(count);
    for (std::size_t i = 0; i < count; ++i) {
        codes[i] = bits.get(width);
        if (codes[i] >= h.spec.codes_per_codebook()) {
            throw Error(ErrorCode::Corruption, "bitstream: code " + std::to_string(codes[i]) + " at frame " +
                                                   std::to_string(i / static_cast<std::size_t>(h.spec.num_codebooks())) +
                                                   " exceeds codebook size " +
                                                   std::to_string(h.spec.codes_per_codebook()));
        }
    }
    CodeSequence seq(h.spec, h.num_frames, std::move(codes));
    return {std::move(h), std::move(seq)};
}

double token_rate(const FsqSpec& spec, double sample_rate, int total_stride) {
    return spec.num_codebooks() * frame_rate(sample_rate, total_stride);
}

double bitrate(const FsqSpec& spec, double sample_rate, int total_stride) {
    return token_rate(spec, sample_rate, total_stride) * spec.code_bit_width();
}

void write_bitstream_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error(ErrorCode::Io, "cannot write " + path.string());
    file.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!file) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace lfsc
