#include "lfsc/wav.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>

#include "byte_io.hpp"
#include "lfsc/error.hpp"

namespace lfsc {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

struct FmtChunk {
    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t bits = 0;
};

}  // namespace

AudioBuffer parse_wav(std::span<const std::uint8_t> bytes) {
    detail::ByteReader in(bytes, ErrorCode::Format, "wav");
    if (in.str(4) != "RIFF") throw Error(ErrorCode::Format, "wav: missing RIFF header");
    in.u32();
    if (in.str(4) != "WAVE") throw Error(ErrorCode::Format, "wav: not a WAVE file");

    std::optional<FmtChunk> fmt;
    while (in.remaining() >= 8) {
        const std::string id = in.str(4);
        const std::uint32_t size = in.u32();
        if (id == "fmt ") {
            if (size < 16) throw Error(ErrorCode::Format, "wav: fmt chunk too small");
            auto body = in.take(size);
            detail::ByteReader f(body, ErrorCode::Format, "wav fmt");
            FmtChunk c;
            c.format = f.u16();
            c.channels = f.u16();
            c.sample_rate = f.u32();
            f.u32();  // byte rate
            f.u16();  // block align
            c.bits = f.u16();
            if (c.format == kFormatExtensible && size >= 40) {
                f.u16();  // cbSize
                f.u16();  // valid bits
                f.u32();  // channel mask
                c.format = f.u16();  // first two bytes of the subformat GUID
            }
            fmt = c;
        } else if (id == "data") {
            if (!fmt) throw Error(ErrorCode::Format, "wav: data chunk before fmt chunk");
            if (fmt->format != kFormatPcm || fmt->bits != 16) {
                throw Error(ErrorCode::Format, "wav: only 16-bit PCM is supported (format " +
                                                   std::to_string(fmt->format) + ", " +
                                                   std::to_string(fmt->bits) + " bits)");
            }
            if (fmt->channels == 0 || fmt->sample_rate == 0) {
                throw Error(ErrorCode::Format, "wav: zero channels or sample rate");
            }
            // Tolerate a data size that overruns the file (streamed writers).
            const std::size_t n = std::min<std::size_t>(size, in.remaining()) / 2;
            AudioBuffer audio;
            audio.sample_rate = static_cast<int>(fmt->sample_rate);
            audio.channels = fmt->channels;
            audio.samples.resize(n - n % fmt->channels);
            for (float& s : audio.samples) s = static_cast<float>(static_cast<std::int16_t>(in.u16())) / 32768.0f;
            return audio;
        } else {
            in.take(std::min<std::size_t>(size + (size & 1u), in.remaining()));
            continue;
        }
        if (size & 1u) in.take(std::min<std::size_t>(1, in.remaining()));
    }
    throw Error(ErrorCode::Format, "wav: no data chunk");
}

AudioBuffer read_wav(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
    return parse_wav(bytes);
}

std::vector<std::uint8_t> serialize_wav(const AudioBuffer& audio) {
    if (audio.channels < 1 || audio.sample_rate <= 0) {
        throw Error(ErrorCode::InvalidArgument, "wav: invalid channel count or sample rate");
    }
    const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
    const auto channels = static_cast<std::uint16_t>(audio.channels);
    const auto rate = static_cast<std::uint32_t>(audio.sample_rate);

    detail::ByteWriter out;
    out.raw("RIFF");
    out.u32(36 + data_bytes);
    out.raw("WAVE");
    out.raw("fmt ");
    out.u32(16);
    out.u16(kFormatPcm);
    out.u16(channels);
    out.u32(rate);
    out.u32(rate * channels * 2);
    out.u16(static_cast<std::uint16_t>(channels * 2));
    out.u16(16);
    out.raw("data");
    out.u32(data_bytes);
    for (float s : audio.samples) {
        const float clamped = std::clamp(s, -1.0f, 1.0f);
        out.u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(clamped * 32767.0f))));
    }
    return std::move(out.bytes());
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio) {
    const auto bytes = serialize_wav(audio);
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error(ErrorCode::Io, "cannot write " + path.string());
    file.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!file) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace lfsc
