#pragma once

// Reference implementations used only by tests. Each one is written
// directly from the definition, without sharing code with the library.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

// out[o][t] = b[o] + sum_i sum_j w[o][i][j] * x[i][t*s + j*d - pad_left]
inline std::vector<float> conv1d(const std::vector<float>& x, int in_ch, std::size_t len,
                                 const std::vector<float>& w, const std::vector<float>& b, int out_ch,
                                 int k, int s, int d) {
    const std::size_t out_len = (len + s - 1) / s;
    const long long span = static_cast<long long>(d) * (k - 1) + 1;
    const long long need = static_cast<long long>(out_len - 1) * s + span - static_cast<long long>(len);
    const long long pad_left = need > 0 ? need / 2 : 0;
    std::vector<float> y(static_cast<std::size_t>(out_ch) * out_len);
    for (int o = 0; o < out_ch; ++o) {
        for (std::size_t t = 0; t < out_len; ++t) {
            double acc = b[o];
            for (int i = 0; i < in_ch; ++i) {
                for (int j = 0; j < k; ++j) {
                    const long long pos = static_cast<long long>(t) * s + static_cast<long long>(j) * d - pad_left;
                    if (pos < 0 || pos >= static_cast<long long>(len)) continue;
                    acc += static_cast<double>(w[(static_cast<std::size_t>(o) * in_ch + i) * k + j]) *
                           x[static_cast<std::size_t>(i) * len + pos];
                }
            }
            y[o * out_len + t] = static_cast<float>(acc);
        }
    }
    return y;
}

// Scatter form: x[i][t] contributes w[i][o][j] to full[o][t*s + j];
// the result is full[o][crop + u] for u < len * s, crop = (k - s) / 2.
inline std::vector<float> conv_transpose1d(const std::vector<float>& x, int in_ch, std::size_t len,
                                           const std::vector<float>& w, const std::vector<float>& b,
                                           int out_ch, int k, int s) {
    const std::size_t full_len = (len - 1) * s + k;
    std::vector<double> full(static_cast<std::size_t>(out_ch) * full_len, 0.0);
    for (int i = 0; i < in_ch; ++i)
        for (std::size_t t = 0; t < len; ++t)
            for (int o = 0; o < out_ch; ++o)
                for (int j = 0; j < k; ++j)
                    full[o * full_len + t * s + j] += static_cast<double>(x[i * len + t]) *
                                                      w[(static_cast<std::size_t>(i) * out_ch + o) * k + j];
    const std::size_t out_len = len * s;
    const std::size_t crop = (k - s) / 2;
    std::vector<float> y(static_cast<std::size_t>(out_ch) * out_len);
    for (int o = 0; o < out_ch; ++o)
        for (std::size_t u = 0; u < out_len; ++u) {
            const std::size_t src = crop + u;
            const double v = src < full_len ? full[o * full_len + src] : 0.0;
            y[o * out_len + u] = static_cast<float>(v + b[o]);
        }
    return y;
}

// |X[k]| for k in [0, n/2] by the O(n^2) DFT sum.
inline std::vector<double> dft_magnitude(const std::vector<double>& frame) {
    const std::size_t n = frame.size();
    std::vector<double> mag(n / 2 + 1);
    for (std::size_t k = 0; k <= n / 2; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double phase = -2.0 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n);
            acc += frame[t] * std::polar(1.0, phase);
        }
        mag[k] = std::abs(acc);
    }
    return mag;
}

struct Spectro {
    std::size_t frames = 0;
    std::size_t bins = 0;
    std::vector<double> mag;  // frames x bins
};

// Frames at 0, hop, 2*hop, ... while the previous frame has not reached the
// end of the signal; samples past the end read as zero.
inline Spectro stft(const std::vector<float>& x, std::size_t n, std::size_t hop) {
    Spectro s;
    s.bins = n / 2 + 1;
    std::size_t start = 0;
    while (true) {
        std::vector<double> frame(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double win = std::pow(std::sin(std::numbers::pi * static_cast<double>(i) / static_cast<double>(n)), 2);
            if (start + i < x.size()) frame[i] = win * x[start + i];
        }
        const auto m = dft_magnitude(frame);
        s.mag.insert(s.mag.end(), m.begin(), m.end());
        ++s.frames;
        if (start + n >= x.size()) break;
        start += hop;
    }
    return s;
}

// HTK triangles written with the natural-log form 1127 ln(1 + f / 700).
inline std::vector<double> mel_filters(std::size_t n_mels, std::size_t n_fft, double sr, double lo, double hi) {
    auto to_mel = [](double f) { return 1127.0 * std::log1p(f / 700.0); };
    auto to_hz = [](double m) { return 700.0 * std::expm1(m / 1127.0); };
    const std::size_t bins = n_fft / 2 + 1;
    std::vector<double> pts;
    for (std::size_t i = 0; i < n_mels + 2; ++i)
        pts.push_back(to_hz(to_mel(lo) + (to_mel(hi) - to_mel(lo)) * static_cast<double>(i) / static_cast<double>(n_mels + 1)));
    std::vector<double> fb(n_mels * bins, 0.0);
    for (std::size_t m = 0; m < n_mels; ++m) {
        for (std::size_t k = 0; k < bins; ++k) {
            const double f = sr * static_cast<double>(k) / static_cast<double>(n_fft);
            double w = 0.0;
            if (f > pts[m] && f <= pts[m + 1]) w = (f - pts[m]) / (pts[m + 1] - pts[m]);
            else if (f > pts[m + 1] && f < pts[m + 2]) w = (pts[m + 2] - f) / (pts[m + 2] - pts[m + 1]);
            fb[m * bins + k] = w;
        }
    }
    return fb;
}

inline double log_l1(const std::vector<double>& a, const std::vector<double>& b, double floor) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::fabs(std::log(a[i] + floor) - std::log(b[i] + floor));
    return sum / static_cast<double>(a.size());
}

inline double stft_distance(const std::vector<float>& a, const std::vector<float>& b, std::size_t n,
                            std::size_t hop, double floor) {
    return log_l1(stft(a, n, hop).mag, stft(b, n, hop).mag, floor);
}

inline std::vector<double> mel_power(const std::vector<float>& x, std::size_t n, std::size_t hop,
                                     std::size_t n_mels, double sr) {
    const auto s = stft(x, n, hop);
    const auto fb = mel_filters(n_mels, n, sr, 0.0, sr / 2.0);
    std::vector<double> out(s.frames * n_mels, 0.0);
    for (std::size_t f = 0; f < s.frames; ++f)
        for (std::size_t m = 0; m < n_mels; ++m)
            for (std::size_t k = 0; k < s.bins; ++k)
                out[f * n_mels + m] += fb[m * s.bins + k] * s.mag[f * s.bins + k] * s.mag[f * s.bins + k];
    return out;
}

inline double mel_distance(const std::vector<float>& a, const std::vector<float>& b, std::size_t n,
                           std::size_t hop, std::size_t n_mels, double sr, double floor) {
    return log_l1(mel_power(a, n, hop, n_mels, sr), mel_power(b, n, hop, n_mels, sr), floor);
}

// All index tuples of a mixed-radix layout in code order, enumerated with
// an odometer whose first digit turns fastest.
inline std::vector<std::vector<int>> enumerate_indices(const std::vector<int>& levels) {
    std::vector<std::vector<int>> out;
    std::vector<int> digit(levels.size(), 0);
    while (true) {
        out.push_back(digit);
        std::size_t d = 0;
        while (d < levels.size() && ++digit[d] == levels[d]) digit[d++] = 0;
        if (d == levels.size()) break;
    }
    return out;
}

inline std::vector<float> sine(double freq, double sr, std::size_t n, double amp = 0.5) {
    std::vector<float> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = static_cast<float>(amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / sr));
    return x;
}

inline std::vector<float> noise(std::size_t n, std::uint64_t seed, double amp = 0.3) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, amp);
    std::vector<float> x(n);
    for (auto& v : x) v = static_cast<float>(dist(rng));
    return x;
}

// reference = 440 Hz sine; estimate = reference + e with e zero-mean,
// orthogonal to the centred reference and scaled so that
// |ref|^2 / |e|^2 = 10^(db / 10). The exact SI-SDR of the pair is db.
inline std::pair<std::vector<float>, std::vector<float>> orthogonal_mixture(double db, std::size_t n,
                                                                            std::uint64_t seed) {
    const auto r = sine(440.0, 22050.0, n);
    const auto e = noise(n, seed);
    std::vector<double> rd(r.begin(), r.end()), ed(e.begin(), e.end());
    auto center = [](std::vector<double>& v) {
        double m = 0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        for (double& x : v) x -= m;
    };
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    };
    center(rd);
    center(ed);
    const double p = dot(ed, rd) / dot(rd, rd);
    for (std::size_t i = 0; i < n; ++i) ed[i] -= p * rd[i];
    const double scale = std::sqrt(dot(rd, rd) / dot(ed, ed) / std::pow(10.0, db / 10.0));
    std::vector<float> ref(n), est(n);
    for (std::size_t i = 0; i < n; ++i) {
        ref[i] = static_cast<float>(rd[i]);
        est[i] = static_cast<float>(rd[i] + scale * ed[i]);
    }
    return {ref, est};
}

// 4th-order Butterworth low-pass as two RBJ biquads (Q = 0.5412, 1.3066).
inline std::vector<float> butterworth_lowpass(const std::vector<float>& x, double cutoff, double sr) {
    std::vector<double> y(x.begin(), x.end());
    for (double q : {0.54119610014619698, 1.3065629648763766}) {
        const double w0 = 2.0 * std::numbers::pi * cutoff / sr;
        const double alpha = std::sin(w0) / (2.0 * q);
        const double c = std::cos(w0);
        const double a0 = 1.0 + alpha;
        const double b0 = (1.0 - c) / 2.0 / a0, b1 = (1.0 - c) / a0, b2 = b0;
        const double a1 = -2.0 * c / a0, a2 = (1.0 - alpha) / a0;
        double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
        for (auto& v : y) {
            const double in = v;
            const double out = b0 * in + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
            x2 = x1; x1 = in; y2 = y1; y1 = out;
            v = out;
        }
    }
    return {y.begin(), y.end()};
}

}  // namespace oracle
