#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "lfsc/cli.hpp"
#include "lfsc/wav.hpp"
#include "oracles.hpp"

using namespace lfsc;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "lfsc");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path = fs::temp_directory_path() / "lfsc_cli_unit";
    TempDir() { fs::create_directories(path); }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("rate") {
    const auto r = cli({"rate", "--json"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("\"bitrate_bps\":1894.921875") != std::string::npos);
    const auto alt = cli({"rate", "--levels", "8,5,5,5"});
    CHECK(alt.out.find("bitrate_bps: 1722.65625") != std::string::npos);
    CHECK(cli({"rate", "--levels", "1,4"}).code == kExitUsage);
}

TEST_CASE("usage errors") {
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"bogus"}).code == kExitUsage);
    const auto r = cli({"encode", "-i", "x.wav"});
    CHECK(r.code == kExitUsage);
    CHECK(r.err.rfind("error: usage:", 0) == 0);
    CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("init, encode, info, decode, eval") {
    TempDir dir;
    REQUIRE(cli({"init", "--config", "tiny", "--seed", "3", "-o", dir / "m.lfsw"}).code == kExitOk);

    AudioBuffer audio;
    audio.samples = oracle::sine(220.0, 22050.0, 3001);
    write_wav(dir / "in.wav", audio);

    const auto enc = cli({"encode", "-m", dir / "m.lfsw", "-i", dir / "in.wav", "-o", dir / "a.lfsc", "--json"});
    REQUIRE(enc.code == kExitOk);
    CHECK(enc.out.find("\"frames\":751") != std::string::npos);

    const auto info = cli({"info", dir / "a.lfsc"});
    CHECK(info.code == kExitOk);
    CHECK(info.out.find("original_length: 3001") != std::string::npos);

    const auto winfo = cli({"info", "-i", dir / "m.lfsw"});
    CHECK(winfo.code == kExitOk);
    CHECK(winfo.out.find("type: weights") != std::string::npos);

    REQUIRE(cli({"decode", "-m", dir / "m.lfsw", "-i", dir / "a.lfsc", "-o", dir / "out.wav"}).code == kExitOk);
    CHECK(read_wav(dir / "out.wav").samples.size() == 3001);

    const auto ev = cli({"eval", "-r", dir / "in.wav", "-d", dir / "in.wav", "--metrics", "si_sdr,mel"});
    CHECK(ev.code == kExitOk);
    CHECK(ev.out.find("si_sdr_db: 100") != std::string::npos);
    CHECK(ev.out.find("mel_distance: 0") != std::string::npos);
    CHECK(cli({"eval", "-r", dir / "in.wav", "-d", dir / "out.wav", "--metrics", "nope"}).code == kExitUsage);

    CHECK(cli({"decode", "-m", dir / "m.lfsw", "-i", dir / "a.lfsc", "-o", dir / "o.wav", "--codebooks", "4"}).code ==
          kExitSpecMismatch);
    CHECK(cli({"encode", "-m", dir / "missing.lfsw", "-i", dir / "in.wav", "-o", dir / "b.lfsc"}).code ==
          kExitBadModel);
    CHECK(cli({"encode", "-m", dir / "m.lfsw", "-i", dir / "missing.wav", "-o", dir / "b.lfsc"}).code ==
          kExitBadInput);
    CHECK(cli({"encode", "-m", dir / "m.lfsw", "-i", dir / "in.wav", "-o", dir / "no/such/dir/b.lfsc"}).code ==
          kExitOutput);
    CHECK(cli({"init", "--config", "huge", "-o", dir / "x.lfsw"}).code == kExitUsage);
}
