#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "skagree/cli.hpp"
#include "skagree/io.hpp"

using namespace skagree;
namespace fs = std::filesystem;

namespace {

const std::string kData = SKAGREE_DATA_DIR;

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("skagree_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
}

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("bundled files round-trip byte for byte") {
  for (const auto* name : {"noiseless-binary", "bsc-wiretap", "state-binary"}) {
    const std::string path = kData + "/channels/" + name + ".json";
    const std::string text = read_file(path);
    const auto ch = channel_from_json(parse_json_text(text, path));
    CHECK(to_file_text(channel_to_json(ch)) == text);
  }
  const auto noiseless = parse_channel(kData + "/channels/noiseless-binary.json");
  CHECK(noiseless.cards().x == 2);
  for (const auto* name : {"noiseless-fb", "state-binary-fb"}) {
    const std::string path = kData + "/schemes/" + name + ".json";
    const std::string text = read_file(path);
    const auto ch = parse_channel(kData + (std::string(name) == "noiseless-fb" ? "/channels/noiseless-binary.json"
                                                                                 : "/channels/state-binary.json"));
    CHECK(to_file_text(scheme_to_json(fb_scheme_from_json(parse_json_text(text, path), ch.cards()))) == text);
  }
  const std::string p = kData + "/schemes/noiseless-nofb.json";
  const std::string text = read_file(p);
  CHECK(to_file_text(scheme_to_json(aux_scheme_from_json(parse_json_text(text, p), noiseless.cards()))) == text);
}

TEST_CASE("channel validation errors") {
  auto j = channel_to_json(parse_channel(kData + "/channels/noiseless-binary.json"));
  j["transition"][1][0][1][1][0] = 1.1;
  CHECK_THROWS_WITH_AS(channel_from_json(j), doctest::Contains("(x=1, s=0)"), ValidationError);
  auto k = channel_to_json(parse_channel(kData + "/channels/noiseless-binary.json"));
  k["schema_version"] = 7;
  CHECK_THROWS_AS(channel_from_json(k), ValidationError);
  CHECK_THROWS_WITH_AS(parse_json_text("{\n  \"a\": ,\n}", "f.json"), doctest::Contains("f.json:2"), ValidationError);
  CHECK_THROWS_AS(read_file("/nonexistent/file.json"), ValidationError);
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == kExitValidation);
  CHECK(run({"bogus"}).code == kExitValidation);
  CHECK(run({"region"}).code == kExitValidation);
  CHECK(run({"region", "inner-fb", "--channel", "/nonexistent.json", "--scheme", "/nonexistent.json"}).code ==
        kExitValidation);

  TempDir tmp;
  const std::string bad = tmp.file("bad.json");
  write(bad, "{ not json");
  CHECK(run({"region", "outer-nofb", "--channel", bad}).code == kExitValidation);
  const std::string ch = kData + "/channels/noiseless-binary.json";
  const std::string fb = kData + "/schemes/noiseless-fb.json";
  // Scheme of the wrong kind.
  CHECK(run({"region", "inner-fb", "--channel", ch, "--scheme", kData + "/schemes/noiseless-nofb.json"}).code ==
        kExitValidation);
  CHECK(run({"simulate", "fb", "--channel", ch, "--scheme", fb, "--rates", "0.3,0"}).code == kExitValidation);
  CHECK(run({"simulate", "fb", "--channel", ch, "--scheme", fb, "--rates", "0.3,0,0.4,0", "--eps", "1.5"}).code ==
        kExitValidation);
  CHECK(run({"reduce", "wiretap", "--channel", kData + "/channels/state-binary.json", "--mode", "nofb"}).code ==
        kExitValidation);

  const auto ok = run({"region", "inner-fb", "--channel", ch, "--scheme", fb, "--out", tmp.file("fb.json")});
  CHECK(ok.code == kExitOk);
  const auto j = parse_json_text(read_file(tmp.file("fb.json")), "fb.json");
  CHECK(j.at("schema_version") == kSchemaVersion);
  CHECK(j.at("command") == "region inner-fb");
  CHECK(j.at("config_hash").get<std::string>().size() == 16);
  CHECK(j.contains("seed"));
  CHECK(j.at("result").contains("r1_max"));
  CHECK(ok.out.find("r1_max") != std::string::npos);
}

TEST_CASE("simulation output is reproducible") {
  TempDir tmp;
  const std::string ch = kData + "/channels/noiseless-binary.json";
  const std::string sc = kData + "/schemes/noiseless-nofb.json";
  std::vector<std::string> base = {"simulate", "nofb", "--channel", ch,  "--scheme", sc,       "--rates",
                                   "0.5,0,0,0.25,0,0", "--n",    "6",  "--eps", "0.5", "--trials", "1000",
                                   "--seed",  "7"};
  auto a = base, b = base, c = base;
  a.insert(a.end(), {"--out", tmp.file("a.json")});
  b.insert(b.end(), {"--out", tmp.file("b.json"), "--workers", "4"});
  c.insert(c.end(), {"--out", tmp.file("c.json"), "--csv", tmp.file("c.csv")});
  REQUIRE(run(a).code == kExitOk);
  REQUIRE(run(b).code == kExitOk);
  REQUIRE(run(c).code == kExitOk);
  CHECK(read_file(tmp.file("a.json")) == read_file(tmp.file("b.json")));
  CHECK(read_file(tmp.file("a.json")) == read_file(tmp.file("c.json")));
  CHECK(read_file(tmp.file("c.csv")).rfind("group,name,value\n", 0) == 0);
}

TEST_CASE("output directory from the environment") {
  TempDir tmp;
  ::setenv(kOutDirEnv, tmp.path.c_str(), 1);
  const auto r = run({"region", "outer-nofb", "--channel", kData + "/channels/noiseless-binary.json", "--restarts",
                      "2", "--iterations", "10"});
  ::unsetenv(kOutDirEnv);
  CHECK(r.code == kExitOk);
  CHECK(fs::exists(tmp.path / "region-outer-nofb.json"));
}

TEST_CASE("config hash") {
  CHECK(config_hash("") == "cbf29ce484222325");
  CHECK(config_hash("a") != config_hash("b"));
}
