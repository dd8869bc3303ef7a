#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lfsc/audio.hpp"

namespace lfsc {

/// Short-time analysis settings shared by the spectral distances and the
/// bandwidth estimator.
///
/// Frames start at sample 0 and advance by `hop`; there is no centering. The
/// last frame is zero-padded, so a signal of N samples yields
/// 1 + ceil((N - fft_size) / hop) frames (one frame when N <= fft_size).
/// The window is a periodic Hann of fft_size. Mel filters are unnormalised
/// triangles on the HTK mel scale, 2595 * log10(1 + f / 700).
struct SpectralConfig {
    std::size_t fft_size = 1024;
    std::size_t hop = 256;
    std::size_t mel_bins = 80;
    double mel_low_hz = 0.0;
    std::optional<double> mel_high_hz;  // Nyquist when unset
    double log_floor = 1e-5;

    /// Throws InvalidArgument.
    void validate() const;
};

struct MetricReport {
    std::optional<double> si_sdr_db;
    std::optional<double> mel_distance;
    std::optional<double> stft_distance;
    std::optional<double> bandwidth_hz;
};

inline constexpr double kSiSdrCapDb = 100.0;

/// Scale-invariant SDR in dB, zero-mean convention. Capped at +100 dB when
/// the residual vanishes and floored at -100 dB when the projection does.
double si_sdr(const AudioBuffer& reference, const AudioBuffer& estimate);

/// Mean |log(mel_a + floor) - log(mel_b + floor)| over all (frame, bin) cells,
/// mel computed from the power spectrum.
double mel_distance(const AudioBuffer& a, const AudioBuffer& b, const SpectralConfig& cfg = {});

/// Mean |log(|X_a| + floor) - log(|X_b| + floor)| over all (frame, bin) cells.
double stft_distance(const AudioBuffer& a, const AudioBuffer& b, const SpectralConfig& cfg = {});

/// Smallest frequency whose cumulative long-term average power reaches
/// `energy_fraction` of the total.
double estimate_bandwidth(const AudioBuffer& x, double energy_fraction = 0.99, const SpectralConfig& cfg = {});

/// Dataset filter predicate: estimate_bandwidth(x) >= min_bandwidth_hz.
bool passes_bandwidth_filter(const AudioBuffer& x, double min_bandwidth_hz, double energy_fraction = 0.99,
                             const SpectralConfig& cfg = {});

// Building blocks, exposed for inspection and tests.

std::vector<double> periodic_hann(std::size_t n);

/// Row-major [mel_bins x (fft_size / 2 + 1)].
std::vector<double> mel_filterbank(const SpectralConfig& cfg, double sample_rate);

/// Row-major [frames x (fft_size / 2 + 1)] magnitudes.
std::vector<double> stft_magnitude(std::span<const float> samples, const SpectralConfig& cfg,
                                   std::size_t* frames_out = nullptr);

std::size_t stft_frame_count(std::size_t samples, const SpectralConfig& cfg);

}  // namespace lfsc
