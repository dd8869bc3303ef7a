#include <doctest.h>

#include <cmath>
#include <random>

#include "lfsc/error.hpp"
#include "lfsc/metrics.hpp"
#include "oracles.hpp"

using namespace lfsc;

namespace {

AudioBuffer buf(std::vector<float> s, int rate = 22050) {
    AudioBuffer a;
    a.samples = std::move(s);
    a.sample_rate = rate;
    return a;
}

std::pair<AudioBuffer, AudioBuffer> orthogonal_pair(double db, std::size_t n, std::uint64_t seed) {
    auto [ref, est] = oracle::orthogonal_mixture(db, n, seed);
    return {buf(std::move(ref)), buf(std::move(est))};
}

}  // namespace

TEST_CASE("si_sdr orthogonal decompositions") {
    for (double db : {-10.0, 0.0, 5.0, 20.0, 40.0}) {
        const auto [ref, est] = orthogonal_pair(db, 8000, static_cast<std::uint64_t>(db + 100));
        CHECK(std::fabs(si_sdr(ref, est) - db) < 0.1);
    }
}

TEST_CASE("si_sdr is scale invariant in the estimate") {
    const auto [ref, est] = orthogonal_pair(12.0, 4000, 3);
    const double base = si_sdr(ref, est);
    for (float k : {0.5f, 2.0f, 0.25f, 4.0f}) {
        auto scaled = est;
        for (auto& s : scaled.samples) s *= k;
        CHECK(std::fabs(si_sdr(ref, scaled) - base) < 1e-9);
    }
}

TEST_CASE("si_sdr decreases as noise grows") {
    const auto ref = buf(oracle::sine(300.0, 22050.0, 4000));
    const auto n = oracle::noise(4000, 8);
    double prev = 1e9;
    for (double a : {0.001, 0.01, 0.1, 1.0}) {
        auto est = ref;
        for (std::size_t i = 0; i < n.size(); ++i) est.samples[i] += static_cast<float>(a * n[i]);
        const double v = si_sdr(ref, est);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("si_sdr edge cases") {
    const auto ref = buf(oracle::sine(300.0, 22050.0, 1000));
    CHECK(si_sdr(ref, ref) == kSiSdrCapDb);
    CHECK(si_sdr(ref, buf(std::vector<float>(1000, 0.0f))) == -kSiSdrCapDb);
    CHECK_THROWS_AS(si_sdr(buf(std::vector<float>(1000, 0.25f)), ref), Error);
    CHECK_THROWS_AS(si_sdr(ref, buf(std::vector<float>(999))), Error);
    CHECK_THROWS_AS(si_sdr(ref, buf(ref.samples, 16000)), Error);
}

TEST_CASE("spectral distances agree with the direct DFT oracle") {
    SpectralConfig cfg;
    cfg.fft_size = 16;
    cfg.hop = 8;
    cfg.mel_bins = 4;
    for (std::size_t n : {std::size_t{10}, std::size_t{16}, std::size_t{17}, std::size_t{40}, std::size_t{61}}) {
        const auto a = oracle::noise(n, n);
        auto b = oracle::sine(900.0, 8000.0, n);
        for (std::size_t i = 0; i < n; ++i) b[i] += 0.1f * a[i];
        CHECK(std::fabs(stft_distance(buf(a, 8000), buf(b, 8000), cfg) - oracle::stft_distance(a, b, 16, 8, cfg.log_floor)) < 1e-6);
        CHECK(std::fabs(mel_distance(buf(a, 8000), buf(b, 8000), cfg) -
                        oracle::mel_distance(a, b, 16, 8, 4, 8000.0, cfg.log_floor)) < 1e-6);
    }
}

TEST_CASE("stft framing and filterbank") {
    SpectralConfig cfg;
    CHECK(stft_frame_count(1, cfg) == 1);
    CHECK(stft_frame_count(1024, cfg) == 1);
    CHECK(stft_frame_count(1025, cfg) == 2);
    CHECK(stft_frame_count(1280, cfg) == 2);
    CHECK(stft_frame_count(1281, cfg) == 3);

    const auto fb = mel_filterbank(cfg, 22050.0);
    REQUIRE(fb.size() == 80 * 513);
    const auto ref = oracle::mel_filters(80, 1024, 22050.0, 0.0, 11025.0);
    for (std::size_t i = 0; i < fb.size(); ++i) REQUIRE(fb[i] == doctest::Approx(ref[i]).epsilon(1e-9));

    SpectralConfig toy;
    toy.fft_size = 16;
    toy.mel_bins = 4;
    CHECK_THROWS_AS(mel_filterbank(toy, 22050.0), Error);  // first filter falls between bins
    SpectralConfig bad;
    bad.hop = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("distances are symmetric and zero on identical input") {
    const auto a = buf(oracle::noise(5000, 1));
    const auto b = buf(oracle::sine(1000.0, 22050.0, 5000));
    CHECK(mel_distance(a, a) == 0.0);
    CHECK(stft_distance(a, a) == 0.0);
    CHECK(mel_distance(a, b) == doctest::Approx(mel_distance(b, a)));
    CHECK(stft_distance(a, b) == doctest::Approx(stft_distance(b, a)));
    CHECK(mel_distance(a, b) > 0.0);
}

TEST_CASE("bandwidth of a pure tone") {
    const auto tone = buf(oracle::sine(5000.0, 22050.0, 22050));
    const double bw = estimate_bandwidth(tone);
    CHECK(std::fabs(bw - 5000.0) <= 22050.0 / 1024.0);
}

TEST_CASE("bandwidth of white noise and filtered noise") {
    const auto white = buf(oracle::noise(44100, 2, 0.3), 44100);
    CHECK(estimate_bandwidth(white) > 0.95 * 22050.0);
    const auto wide = buf(oracle::butterworth_lowpass(white.samples, 11000.0, 44100.0), 44100);
    const auto narrow = buf(oracle::butterworth_lowpass(white.samples, 6000.0, 44100.0), 44100);
    const double bw_wide = estimate_bandwidth(wide);
    const double bw_narrow = estimate_bandwidth(narrow);
    MESSAGE("11 kHz filtered: " << bw_wide << " Hz, 6 kHz filtered: " << bw_narrow << " Hz");
    CHECK(bw_wide > bw_narrow);
    CHECK(passes_bandwidth_filter(wide, 11000.0));
    CHECK_FALSE(passes_bandwidth_filter(narrow, 11000.0));
}

TEST_CASE("bandwidth errors") {
    CHECK_THROWS_AS(estimate_bandwidth(buf(std::vector<float>(4096, 0.0f))), Error);
    CHECK_THROWS_AS(estimate_bandwidth(buf(std::vector<float>(100, 0.1f))), Error);
    CHECK_THROWS_AS(estimate_bandwidth(buf(oracle::noise(4096, 1)), 1.0), Error);
    auto stereo = buf(oracle::noise(4096, 1));
    stereo.channels = 2;
    CHECK_THROWS_AS(estimate_bandwidth(stereo), Error);
    try {
        estimate_bandwidth(buf(std::vector<float>(4096, 0.0f)));
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UndefinedBandwidth);
    }
}
