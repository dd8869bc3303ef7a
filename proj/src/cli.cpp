#include "lfsc/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lfsc/bitstream.hpp"
#include "lfsc/codec_model.hpp"
#include "lfsc/error.hpp"
#include "lfsc/metrics.hpp"
#include "lfsc/wav.hpp"
#include "lfsc/weights.hpp"

namespace lfsc {

namespace {

using json = nlohmann::ordered_json;

struct Failure {
    int exit_code;
    std::string kind;
    std::string message;
};

[[noreturn]] void fail(int exit_code, std::string kind, std::string message) {
    throw Failure{exit_code, std::move(kind), std::move(message)};
}

[[noreturn]] void fail(int exit_code, const Error& e) {
    throw Failure{exit_code, std::string(error_code_name(e.code())), e.what()};
}

struct Options {
    std::string model;
    std::string input;
    std::string output;
    std::string degraded;
    std::vector<int> levels;
    int codebooks = 0;
    int sample_rate = kCodecSampleRate;
    int stride = 1024;
    std::vector<std::string> metrics;
    std::string config = "standard";
    std::uint64_t seed = 0;
    bool json = false;
    bool trim = false;
};

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) fail(kExitBadInput, "io", "cannot open " + path);
    return {std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
}

ModelWeights load_model(const std::string& path) {
    try {
        return load_weights_file(path);
    } catch (const Error& e) {
        fail(kExitBadModel, e);
    }
}

AudioBuffer load_wav(const std::string& path) {
    try {
        return read_wav(path);
    } catch (const Error& e) {
        fail(kExitBadInput, e);
    }
}

void check_overrides(const Options& opt, const FsqSpec& model_spec) {
    if (!opt.levels.empty() && opt.levels != model_spec.levels()) {
        fail(kExitSpecMismatch, "spec-mismatch", "--levels does not match the model's FSQ levels");
    }
    if (opt.codebooks != 0 && opt.codebooks != model_spec.num_codebooks()) {
        fail(kExitSpecMismatch, "spec-mismatch", "--codebooks does not match the model");
    }
}

std::string levels_string(const std::vector<int>& levels) {
    std::string s;
    for (std::size_t i = 0; i < levels.size(); ++i) s += (i ? "," : "") + std::to_string(levels[i]);
    return s;
}

void print(std::ostream& out, const json& report, bool as_json) {
    if (as_json) {
        out << report.dump() << '\n';
        return;
    }
    for (const auto& [key, value] : report.items()) {
        out << key << ": ";
        if (value.is_number_float()) {
            std::ostringstream s;
            s << std::setprecision(10) << value.get<double>();
            out << s.str();
        } else if (value.is_string()) {
            out << value.get<std::string>();
        } else {
            out << value.dump();
        }
        out << '\n';
    }
}

json rate_fields(const FsqSpec& spec, double sample_rate, int stride) {
    json j;
    j["bits_per_code"] = spec.code_bit_width();
    j["frames_per_sec"] = frame_rate(sample_rate, stride);
    j["tokens_per_sec"] = token_rate(spec, sample_rate, stride);
    j["bitrate_bps"] = bitrate(spec, sample_rate, stride);
    j["kbps"] = bitrate(spec, sample_rate, stride) / 1000.0;
    return j;
}

int cmd_encode(const Options& opt, std::ostream& out) {
    const ModelWeights weights = load_model(opt.model);
    const ModelConfig& config = weights.config;
    check_overrides(opt, config.fsq);

    const AudioBuffer audio = load_wav(opt.input);
    if (audio.channels != 1) {
        fail(kExitBadInput, "unsupported-layout",
             "input WAV must be mono, got " + std::to_string(audio.channels) + " channels");
    }
    if (audio.sample_rate != config.sample_rate) {
        fail(kExitBadInput, "unsupported-rate",
             "input WAV must be " + std::to_string(config.sample_rate) + " Hz, got " +
                 std::to_string(audio.sample_rate) + " Hz (resampling is not performed)");
    }
    if (audio.samples.empty()) fail(kExitBadInput, "invalid-input", "input WAV contains no samples");

    const CodeSequence codes = encode(audio, weights);
    const auto stride = static_cast<std::uint16_t>(config.total_stride());
    const auto bytes = pack(codes, static_cast<std::uint32_t>(config.sample_rate), stride, audio.samples.size());
    try {
        write_bitstream_file(opt.output, bytes);
    } catch (const Error& e) {
        fail(kExitOutput, e);
    }

    const std::size_t payload = payload_size(config.fsq, codes.frames());
    const double coded_seconds =
        static_cast<double>(codes.frames()) * stride / static_cast<double>(config.sample_rate);
    json j;
    j["frames"] = codes.frames();
    j["tokens"] = codes.size();
    j["payload_bytes"] = payload;
    j["file_bytes"] = bytes.size();
    j["samples"] = audio.samples.size();
    j["duration_sec"] = static_cast<double>(audio.samples.size()) / config.sample_rate;
    // Payload bits over the coded (frame-padded) duration.
    j["kbps"] = static_cast<double>(codes.frames() * codes.num_codebooks() *
                                    static_cast<std::size_t>(config.fsq.code_bit_width())) /
                coded_seconds / 1000.0;
    print(out, j, opt.json);
    return kExitOk;
}

DecodedBitstream load_bitstream(const std::string& path) {
    const auto bytes = read_file(path);
    try {
        return unpack(bytes);
    } catch (const Error& e) {
        fail(kExitCorrupt, e);
    }
}

int cmd_decode(const Options& opt, std::ostream& out) {
    const ModelWeights weights = load_model(opt.model);
    const ModelConfig& config = weights.config;
    check_overrides(opt, config.fsq);
    const DecodedBitstream stream = load_bitstream(opt.input);
    const BitstreamHeader& h = stream.header;
    if (!(h.spec == config.fsq)) {
        fail(kExitSpecMismatch, "spec-mismatch",
             "bitstream uses " + std::to_string(h.spec.num_codebooks()) + " codebooks at levels [" +
                 levels_string(h.spec.levels()) + "], model expects " +
                 std::to_string(config.fsq.num_codebooks()) + " at [" + levels_string(config.fsq.levels()) +
                 "]");
    }
    if (static_cast<int>(h.sample_rate) != config.sample_rate || h.total_stride != config.total_stride()) {
        fail(kExitSpecMismatch, "spec-mismatch", "bitstream sample rate or stride differs from the model");
    }

    const AudioBuffer audio = decode(stream.codes, weights, static_cast<std::size_t>(h.original_length));
    try {
        write_wav(opt.output, audio);
    } catch (const Error& e) {
        fail(kExitOutput, e);
    }
    json j;
    j["frames"] = stream.codes.frames();
    j["samples"] = audio.samples.size();
    j["sample_rate"] = audio.sample_rate;
    j["duration_sec"] = static_cast<double>(audio.samples.size()) / audio.sample_rate;
    print(out, j, opt.json);
    return kExitOk;
}

int cmd_info(const Options& opt, std::ostream& out) {
    const auto bytes = read_file(opt.input);
    const auto has_magic = [&](const char (&magic)[4]) {
        return bytes.size() >= 4 && std::equal(magic, magic + 4, bytes.begin());
    };

    json j;
    if (has_magic(kBitstreamMagic)) {
        DecodedBitstream stream = [&] {
            try {
                return unpack(bytes);
            } catch (const Error& e) {
                fail(kExitCorrupt, e);
            }
        }();
        const BitstreamHeader& h = stream.header;
        j["type"] = "bitstream";
        j["version"] = h.version;
        j["sample_rate"] = h.sample_rate;
        j["total_stride"] = h.total_stride;
        j["num_codebooks"] = h.spec.num_codebooks();
        j["levels"] = h.spec.levels();
        j["codes_per_codebook"] = h.spec.codes_per_codebook();
        j["num_frames"] = h.num_frames;
        j["original_length"] = h.original_length;
        j["header_bytes"] = h.header_bytes();
        j["payload_bytes"] = h.payload_bytes();
        j.update(rate_fields(h.spec, h.sample_rate, h.total_stride));
    } else if (has_magic(kWeightMagic)) {
        const ModelWeights weights = [&] {
            try {
                return load_weights(bytes);
            } catch (const Error& e) {
                fail(kExitCorrupt, e);
            }
        }();
        const ModelConfig& c = weights.config;
        const ParameterCount count = parameter_count(weights);
        j["type"] = "weights";
        j["sample_rate"] = c.sample_rate;
        j["num_codebooks"] = c.fsq.num_codebooks();
        j["levels"] = c.fsq.levels();
        j["encoder_channels"] = c.encoder.initial_channels;
        j["encoder_strides"] = c.encoder.strides;
        j["decoder_channels"] = c.decoder.initial_channels;
        j["decoder_rates"] = c.decoder.upsample_rates;
        j["total_stride"] = c.total_stride();
        j["tensors"] = weights.tensors.size();
        j["encoder_parameters"] = count.encoder;
        j["decoder_parameters"] = count.decoder;
        j["total_parameters"] = count.total();
        j.update(rate_fields(c.fsq, c.sample_rate, c.total_stride()));
    } else {
        fail(kExitBadInput, "format", "unrecognised file magic in " + opt.input);
    }
    print(out, j, opt.json);
    return kExitOk;
}

int cmd_eval(const Options& opt, std::ostream& out) {
    AudioBuffer ref = load_wav(opt.input);
    AudioBuffer deg = load_wav(opt.degraded);
    if (ref.sample_rate != deg.sample_rate) {
        fail(kExitBadInput, "unsupported-rate",
             "sample rates differ: " + std::to_string(ref.sample_rate) + " vs " + std::to_string(deg.sample_rate));
    }
    if (ref.channels != 1 || deg.channels != 1) fail(kExitBadInput, "unsupported-layout", "eval expects mono WAV files");
    if (ref.samples.size() != deg.samples.size()) {
        if (!opt.trim) {
            fail(kExitBadInput, "shape",
                 "lengths differ (" + std::to_string(ref.samples.size()) + " vs " +
                     std::to_string(deg.samples.size()) + "); pass --trim to compare the common prefix");
        }
        const std::size_t n = std::min(ref.samples.size(), deg.samples.size());
        ref.samples.resize(n);
        deg.samples.resize(n);
    }

    std::vector<std::string> metrics = opt.metrics;
    if (metrics.empty() || (metrics.size() == 1 && metrics[0] == "all")) {
        metrics = {"si_sdr", "mel", "stft", "bandwidth"};
    }
    json j;
    j["samples"] = ref.samples.size();
    try {
        for (const auto& m : metrics) {
            if (m == "si_sdr") j["si_sdr_db"] = si_sdr(ref, deg);
            else if (m == "mel") j["mel_distance"] = mel_distance(ref, deg);
            else if (m == "stft") j["stft_distance"] = stft_distance(ref, deg);
            else if (m == "bandwidth") {
                j["bandwidth_ref_hz"] = estimate_bandwidth(ref);
                j["bandwidth_deg_hz"] = estimate_bandwidth(deg);
            } else {
                fail(kExitUsage, "usage", "unknown metric '" + m + "' (si_sdr, mel, stft, bandwidth, all)");
            }
        }
    } catch (const Error& e) {
        fail(kExitBadInput, e);
    }
    print(out, j, opt.json);
    return kExitOk;
}

int cmd_rate(const Options& opt, std::ostream& out) {
    const std::vector<int> levels = opt.levels.empty() ? FsqSpec::standard().levels() : opt.levels;
    const int codebooks = opt.codebooks == 0 ? FsqSpec::standard().num_codebooks() : opt.codebooks;
    json j;
    try {
        const FsqSpec spec(codebooks, levels);
        j["num_codebooks"] = codebooks;
        j["levels"] = levels;
        j["codes_per_codebook"] = spec.codes_per_codebook();
        j["sample_rate"] = opt.sample_rate;
        j["total_stride"] = opt.stride;
        j.update(rate_fields(spec, opt.sample_rate, opt.stride));
    } catch (const Error& e) {
        fail(kExitUsage, e);
    }
    print(out, j, opt.json);
    return kExitOk;
}

int cmd_init(const Options& opt, std::ostream& out) {
    ModelConfig config;
    if (opt.config == "standard") config = ModelConfig::standard();
    else if (opt.config == "reduced") config = ModelConfig::reduced();
    else if (opt.config == "tiny") config = ModelConfig::tiny();
    else fail(kExitUsage, "usage", "unknown config '" + opt.config + "' (standard, reduced, tiny)");
    if (!opt.levels.empty() || opt.codebooks != 0) {
        try {
            config.fsq = FsqSpec(opt.codebooks == 0 ? config.fsq.num_codebooks() : opt.codebooks,
                                 opt.levels.empty() ? config.fsq.levels() : opt.levels);
        } catch (const Error& e) {
            fail(kExitUsage, e);
        }
    }
    const auto weights = random_weights(config, opt.seed);
    try {
        save_weights_file(weights, opt.output);
    } catch (const Error& e) {
        fail(kExitOutput, e);
    }
    const auto count = parameter_count(weights);
    json j;
    j["config"] = opt.config;
    j["seed"] = opt.seed;
    j["encoder_parameters"] = count.encoder;
    j["decoder_parameters"] = count.decoder;
    j["total_parameters"] = count.total();
    print(out, j, opt.json);
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Low frame-rate speech codec toolkit", "lfsc"};
    app.require_subcommand(1);
    Options opt;

    auto* enc = app.add_subcommand("encode", "Encode a mono 16-bit WAV into an .lfsc bitstream");
    enc->add_option("--model,-m", opt.model, "Weight file")->required();
    enc->add_option("--input,-i", opt.input, "Input WAV")->required();
    enc->add_option("--output,-o", opt.output, "Output .lfsc file")->required();

    auto* dec = app.add_subcommand("decode", "Decode an .lfsc bitstream into a WAV");
    dec->add_option("--model,-m", opt.model, "Weight file")->required();
    dec->add_option("--input,-i", opt.input, "Input .lfsc file")->required();
    dec->add_option("--output,-o", opt.output, "Output WAV")->required();

    for (auto* sub : {enc, dec}) {
        sub->add_option("--levels", opt.levels, "Expected FSQ levels (checked against the model)")->delimiter(',');
        sub->add_option("--codebooks", opt.codebooks, "Expected codebook count (checked against the model)");
    }

    auto* info = app.add_subcommand("info", "Describe an .lfsc bitstream or a weight file");
    info->add_option("--input,-i,input", opt.input, "File to inspect")->required();

    auto* eval = app.add_subcommand("eval", "Compare a degraded WAV against a reference");
    eval->add_option("--input,--reference,-i,-r", opt.input, "Reference WAV")->required();
    eval->add_option("--degraded,-d", opt.degraded, "Degraded WAV")->required();
    eval->add_option("--metrics", opt.metrics, "si_sdr, mel, stft, bandwidth or all")->delimiter(',');
    eval->add_flag("--trim", opt.trim, "Trim both signals to the shorter length");

    auto* rate = app.add_subcommand("rate", "Bitrate, token-rate and frame-rate accounting");
    rate->add_option("--levels", opt.levels, "FSQ levels per codebook")->delimiter(',');
    rate->add_option("--codebooks", opt.codebooks, "Number of codebooks");
    rate->add_option("--sample-rate", opt.sample_rate, "Sample rate in Hz")->check(CLI::PositiveNumber);
    rate->add_option("--stride", opt.stride, "Samples per frame")->check(CLI::PositiveNumber);

    auto* init = app.add_subcommand("init", "Write a randomly initialised weight file");
    init->add_option("--output,-o", opt.output, "Output weight file")->required();
    init->add_option("--config", opt.config, "standard, reduced or tiny");
    init->add_option("--seed", opt.seed, "Initialisation seed");
    init->add_option("--levels", opt.levels, "FSQ levels per codebook")->delimiter(',');
    init->add_option("--codebooks", opt.codebooks, "Number of codebooks");

    for (auto* sub : {enc, dec, info, eval, rate, init}) sub->add_flag("--json", opt.json, "Emit JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);  // --help
        err << "error: usage: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*enc) return cmd_encode(opt, out);
        if (*dec) return cmd_decode(opt, out);
        if (*info) return cmd_info(opt, out);
        if (*eval) return cmd_eval(opt, out);
        if (*rate) return cmd_rate(opt, out);
        if (*init) return cmd_init(opt, out);
    } catch (const Failure& f) {
        err << "error: " << f.kind << ": " << f.message << '\n';
        return f.exit_code;
    } catch (const Error& e) {
        err << "error: " << error_code_name(e.code()) << ": " << e.what() << '\n';
        return kExitBadInput;
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace lfsc
