#include <doctest.h>

#include <cmath>
#include <random>

#include "lfsc/codec_model.hpp"
#include "lfsc/error.hpp"
#include "oracles.hpp"

using namespace lfsc;

namespace {

const ModelWeights& reduced() {
    static const ModelWeights w = random_weights(ModelConfig::reduced(), 2024);
    return w;
}

AudioBuffer mono(std::vector<float> samples, int rate = kCodecSampleRate) {
    AudioBuffer a;
    a.samples = std::move(samples);
    a.sample_rate = rate;
    return a;
}

ErrorCode error_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidInput;
}

}  // namespace

TEST_CASE("frame arithmetic") {
    CHECK(frame_count(22050, 1024) == 22);
    CHECK(frame_count(1024, 1024) == 1);
    CHECK(frame_count(1025, 1024) == 2);
    CHECK(frame_count(1, 1024) == 1);
    CHECK(frame_rate(22050, 1024) == doctest::Approx(21.533203125));
    CHECK(frame_rate(22050, 256) == doctest::Approx(86.1328125));
    CHECK(frame_rate(24000, 320) == 75.0);
    CHECK_THROWS_AS(frame_rate(22050, 0), Error);
    CHECK_THROWS_AS(frame_rate(0, 1024), Error);
}

TEST_CASE("encode frame counts for random lengths") {
    const auto& w = random_weights(ModelConfig::tiny(), 5);
    std::mt19937 rng(9);
    std::uniform_int_distribution<std::size_t> len(1, 65536);
    for (int i = 0; i < 20; ++i) {
        const std::size_t n = len(rng);
        const auto codes = encode(mono(oracle::noise(n, i)), w);
        CHECK(codes.frames() == (n + 3) / 4);
        CHECK(codes.num_codebooks() == 8);
    }
}

TEST_CASE("reduced model shapes") {
    for (std::size_t n : {std::size_t{1}, std::size_t{1023}, std::size_t{1024}, std::size_t{1025}, std::size_t{3000}}) {
        CAPTURE(n);
        const auto audio = mono(oracle::noise(n, n));
        const auto latent = encode_latent(audio, reduced());
        CHECK(latent.width == 32);
        CHECK(latent.frames == (n + 1023) / 1024);
        CHECK(latent.frame_rate == doctest::Approx(22050.0 / 1024.0));

        const auto codes = encode(audio, reduced());
        REQUIRE(codes.frames() == (n + 1023) / 1024);
        CHECK(codes == encode(audio, reduced()));
        CHECK_NOTHROW(codes.validate());

        const auto full = decode(codes, reduced());
        CHECK(full.samples.size() == codes.frames() * 1024);
        const auto trimmed = decode(codes, reduced(), n);
        REQUIRE(trimmed.samples.size() == n);
        CHECK(trimmed.sample_rate == 22050);
        CHECK(std::equal(trimmed.samples.begin(), trimmed.samples.end(), full.samples.begin()));
        for (float s : full.samples) {
            REQUIRE(std::isfinite(s));
            REQUIRE(std::fabs(s) <= 1.0f);
        }
    }
}

TEST_CASE("decode is deterministic and one frame gives one stride") {
    CodeSequence codes(FsqSpec::standard(), 1, {0, 100, 2015, 7, 8, 9, 10, 1204});
    const auto a = decode(codes, reduced());
    CHECK(a.samples.size() == 1024);
    CHECK(a.samples == decode(codes, reduced()).samples);
}

TEST_CASE("encode pads with zeros") {
    // A short input and the same input followed by explicit zeros up to the frame edge agree.
    auto x = oracle::noise(1500, 1);
    auto padded = x;
    padded.resize(2048, 0.0f);
    CHECK(encode(mono(x), reduced()) == encode(mono(padded), reduced()));
}

TEST_CASE("error paths") {
    const auto& w = reduced();
    CHECK(error_of([&] { encode(mono(oracle::noise(100, 1), 16000), w); }) == ErrorCode::UnsupportedRate);
    auto stereo = mono(oracle::noise(200, 1));
    stereo.channels = 2;
    CHECK(error_of([&] { encode(stereo, w); }) == ErrorCode::UnsupportedLayout);
    CHECK(error_of([&] { encode(mono({}), w); }) == ErrorCode::InvalidInput);

    CodeSequence bad(FsqSpec::standard(), 2);
    bad.at(1, 7) = 2016;
    CHECK(error_of([&] { decode(bad, w); }) == ErrorCode::InvalidCode);
    CodeSequence foreign(FsqSpec::codes_1000(), 2);
    CHECK(error_of([&] { decode(foreign, w); }) == ErrorCode::InvalidCode);
    CodeSequence ok(FsqSpec::standard(), 2);
    CHECK(error_of([&] { decode(ok, w, 2049); }) == ErrorCode::Length);

    LatentSequence narrow;
    narrow.frames = 1;
    narrow.width = 16;
    narrow.values.resize(16);
    CHECK(error_of([&] { decode_latent(narrow, w); }) == ErrorCode::Shape);
}
