#include "lfsc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <unsupported/Eigen/FFT>

#include "lfsc/error.hpp"

namespace lfsc {

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

void check_pair(const AudioBuffer& a, const AudioBuffer& b) {
    if (a.sample_rate != b.sample_rate) {
        throw Error(ErrorCode::UnsupportedRate, "sample rates differ: " + std::to_string(a.sample_rate) +
                                                    " vs " + std::to_string(b.sample_rate));
    }
    if (a.channels != b.channels) throw Error(ErrorCode::Shape, "channel counts differ");
    if (a.samples.size() != b.samples.size()) {
        throw Error(ErrorCode::Shape, "lengths differ: " + std::to_string(a.samples.size()) + " vs " +
                                          std::to_string(b.samples.size()));
    }
}

double mean_log_l1(const std::vector<double>& a, const std::vector<double>& b, double floor) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(std::log(a[i] + floor) - std::log(b[i] + floor));
    return a.empty() ? 0.0 : sum / static_cast<double>(a.size());
}

std::vector<double> mel_power(std::span<const float> samples, const SpectralConfig& cfg, double sample_rate) {
    std::size_t frames = 0;
    const auto mag = stft_magnitude(samples, cfg, &frames);
    const auto fb = mel_filterbank(cfg, sample_rate);
    const std::size_t bins = cfg.fft_size / 2 + 1;
    std::vector<double> mel(frames * cfg.mel_bins, 0.0);
    for (std::size_t f = 0; f < frames; ++f) {
        const double* spec = mag.data() + f * bins;
        for (std::size_t m = 0; m < cfg.mel_bins; ++m) {
            const double* row = fb.data() + m * bins;
            double acc = 0.0;
            for (std::size_t k = 0; k < bins; ++k) acc += row[k] * spec[k] * spec[k];
            mel[f * cfg.mel_bins + m] = acc;
        }
    }
    return mel;
}

}  // namespace

void SpectralConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw Error(ErrorCode::InvalidArgument, std::string("spectral config: ") + what);
    };
    require(fft_size >= 2, "fft_size must be >= 2");
    require(hop >= 1 && hop <= fft_size, "hop must be in [1, fft_size]");
    require(mel_bins >= 1, "mel_bins must be positive");
    require(log_floor > 0.0, "log_floor must be positive");
    require(mel_low_hz >= 0.0, "mel_low_hz must be non-negative");
    require(!mel_high_hz || *mel_high_hz > mel_low_hz, "mel range must be non-empty");
}

std::vector<double> periodic_hann(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    }
    return w;
}

std::vector<double> mel_filterbank(const SpectralConfig& cfg, double sample_rate) {
    cfg.validate();
    const double nyquist = 0.5 * sample_rate;
    const double high = cfg.mel_high_hz.value_or(nyquist);
    if (high > nyquist + 1e-9) {
        throw Error(ErrorCode::InvalidArgument, "spectral config: mel range exceeds Nyquist");
    }
    const std::size_t bins = cfg.fft_size / 2 + 1;
    const std::size_t n = cfg.mel_bins;
    const double mel_lo = hz_to_mel(cfg.mel_low_hz);
    const double mel_hi = hz_to_mel(high);
    std::vector<double> edges(n + 2);
    for (std::size_t i = 0; i < n + 2; ++i) {
        edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(n + 1));
    }

    std::vector<double> fb(n * bins, 0.0);
    for (std::size_t m = 0; m < n; ++m) {
        double row_sum = 0.0;
        for (std::size_t k = 0; k < bins; ++k) {
            const double f = static_cast<double>(k) * sample_rate / static_cast<double>(cfg.fft_size);
            const double down = (f - edges[m]) / (edges[m + 1] - edges[m]);
            const double up = (edges[m + 2] - f) / (edges[m + 2] - edges[m + 1]);
            const double w = std::max(0.0, std::min(down, up));
            fb[m * bins + k] = w;
            row_sum += w;
        }
        if (!(row_sum > 0.0)) {
            throw Error(ErrorCode::InvalidArgument,
                        "spectral config: mel filter " + std::to_string(m) +
                            " covers no FFT bin; use fewer mel bins or a larger fft_size");
        }
    }
    return fb;
}

std::size_t stft_frame_count(std::size_t samples, const SpectralConfig& cfg) {
    if (samples <= cfg.fft_size) return 1;
    return 1 + (samples - cfg.fft_size + cfg.hop - 1) / cfg.hop;
}

std::vector<double> stft_magnitude(std::span<const float> samples, const SpectralConfig& cfg,
                                   std::size_t* frames_out) {
    cfg.validate();
    const std::size_t n = cfg.fft_size;
    const std::size_t bins = n / 2 + 1;
    const std::size_t frames = stft_frame_count(samples.size(), cfg);
    const auto window = periodic_hann(n);

    Eigen::FFT<double> fft;
    std::vector<double> frame(n);
    std::vector<std::complex<double>> spectrum;
    std::vector<double> mag(frames * bins);
    for (std::size_t f = 0; f < frames; ++f) {
        const std::size_t start = f * cfg.hop;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t pos = start + i;
            frame[i] = pos < samples.size() ? window[i] * static_cast<double>(samples[pos]) : 0.0;
        }
        fft.fwd(spectrum, frame);
        for (std::size_t k = 0; k < bins; ++k) mag[f * bins + k] = std::abs(spectrum[k]);
    }
    if (frames_out) *frames_out = frames;
    return mag;
}

double si_sdr(const AudioBuffer& reference, const AudioBuffer& estimate) {
    check_pair(reference, estimate);
    const std::size_t n = reference.samples.size();
    if (n < 2) throw Error(ErrorCode::Shape, "si_sdr needs at least 2 samples");

    double mean_r = 0.0;
    double mean_e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_r += reference.samples[i];
        mean_e += estimate.samples[i];
    }
    mean_r /= static_cast<double>(n);
    mean_e /= static_cast<double>(n);

    double dot = 0.0;
    double ref_energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = reference.samples[i] - mean_r;
        const double e = estimate.samples[i] - mean_e;
        dot += r * e;
        ref_energy += r * r;
    }
    if (!(ref_energy > 0.0)) {
        throw Error(ErrorCode::InvalidInput, "si_sdr reference is identically zero after mean removal");
    }
    const double alpha = dot / ref_energy;

    double target_energy = 0.0;
    double error_energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double target = alpha * (reference.samples[i] - mean_r);
        const double err = (estimate.samples[i] - mean_e) - target;
        target_energy += target * target;
        error_energy += err * err;
    }
    if (!(target_energy > 0.0)) return -kSiSdrCapDb;
    if (!(error_energy > 0.0)) return kSiSdrCapDb;
    return std::clamp(10.0 * std::log10(target_energy / error_energy), -kSiSdrCapDb, kSiSdrCapDb);
}

double mel_distance(const AudioBuffer& a, const AudioBuffer& b, const SpectralConfig& cfg) {
    check_pair(a, b);
    const auto ma = mel_power(a.samples, cfg, a.sample_rate);
    const auto mb = mel_power(b.samples, cfg, b.sample_rate);
    return mean_log_l1(ma, mb, cfg.log_floor);
}

double stft_distance(const AudioBuffer& a, const AudioBuffer& b, const SpectralConfig& cfg) {
    check_pair(a, b);
    const auto sa = stft_magnitude(a.samples, cfg);
    const auto sb = stft_magnitude(b.samples, cfg);
    return mean_log_l1(sa, sb, cfg.log_floor);
}

double estimate_bandwidth(const AudioBuffer& x, double energy_fraction, const SpectralConfig& cfg) {
    if (!(energy_fraction > 0.0 && energy_fraction < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "energy_fraction must lie in (0, 1)");
    }
    if (x.channels != 1) throw Error(ErrorCode::UnsupportedLayout, "bandwidth estimation expects mono audio");
    if (x.samples.size() < cfg.fft_size) {
        throw Error(ErrorCode::InvalidInput, "bandwidth estimation needs at least fft_size samples");
    }
    std::size_t frames = 0;
    const auto mag = stft_magnitude(x.samples, cfg, &frames);
    const std::size_t bins = cfg.fft_size / 2 + 1;
    std::vector<double> power(bins, 0.0);
    for (std::size_t f = 0; f < frames; ++f) {
        for (std::size_t k = 0; k < bins; ++k) power[k] += mag[f * bins + k] * mag[f * bins + k];
    }
    double total = 0.0;
    for (double p : power) total += p;
    if (!(total > 0.0)) throw Error(ErrorCode::UndefinedBandwidth, "bandwidth undefined for a silent signal");

    const double target = energy_fraction * total;
    double cumulative = 0.0;
    std::size_t k = 0;
    for (; k < bins; ++k) {
        cumulative += power[k];
        if (cumulative >= target) break;
    }
    k = std::min(k, bins - 1);
    return static_cast<double>(k) * x.sample_rate / static_cast<double>(cfg.fft_size);
}

bool passes_bandwidth_filter(const AudioBuffer& x, double min_bandwidth_hz, double energy_fraction,
                             const SpectralConfig& cfg) {
    return estimate_bandwidth(x, energy_fraction, cfg) >= min_bandwidth_hz;
}

}  // namespace lfsc
