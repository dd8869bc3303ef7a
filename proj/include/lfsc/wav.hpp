#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lfsc/audio.hpp"

namespace lfsc {

// RIFF/WAVE, 16-bit PCM only (WAVE_FORMAT_PCM or EXTENSIBLE with a PCM
// subformat). Any channel count is read; samples are scaled by 1/32768.
AudioBuffer parse_wav(std::span<const std::uint8_t> bytes);
AudioBuffer read_wav(const std::filesystem::path& path);

// Writes 16-bit PCM, clamping to [-1, 1] and rounding x * 32767.
std::vector<std::uint8_t> serialize_wav(const AudioBuffer& audio);
void write_wav(const std::filesystem::path& path, const AudioBuffer& audio);

}  // namespace lfsc
