#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "mapminer/pipeline.hpp"
#include "mapminer/synthgen.hpp"

namespace fs = std::filesystem;
using namespace mapminer;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "mapminer");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("mapminer_test_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

// Six labels in two blocks that a 2-state model separates easily.
nlohmann::ordered_json spec_doc(std::size_t n_cases) {
  const HmmModel model({0.5, 0.5}, Matrix::from_rows({{0.8, 0.2}, {0.25, 0.75}}),
                       Matrix::from_rows({{0.3, 0.3, 0.3, 0.04, 0.03, 0.03}, {0.03, 0.03, 0.04, 0.3, 0.3, 0.3}}));
  return ground_truth_to_json({model,
                               {"Open", "Assignment", "Operator Update", "Closed", "Reopen", "Caused By CI"},
                               n_cases,
                               LengthLaw::fixed(20),
                               11});
}

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"stats"}).code == 2);
  CHECK(run({"stats", "--input", "x.csv", "--bogus"}).code == 2);
  CHECK(run({"pipeline", "--input", "x.csv", "--states", "many"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("data errors exit 1") {
  TempDir dir;
  write_file(dir / "empty.csv", "");
  const auto empty = run({"stats", "--input", dir / "empty.csv"});
  CHECK(empty.code == 1);
  CHECK(empty.err.find("empty") != std::string::npos);
  const auto missing = run({"stats", "--input", dir / "nope.csv"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("nope.csv") != std::string::npos);
  write_file(dir / "bad.csv", "Incident ID;DateStamp;IncidentActivity_Type;Assignment Group\nA;yesterday;Open;01\n");
  const auto bad = run({"stats", "--input", dir / "bad.csv"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("row 2") != std::string::npos);
  CHECK(run({"pipeline", "--input", dir / "bad.csv", "--epsilon", "1.5", "--output-dir", dir / "o"}).code == 1);
}

TEST_CASE("synth, stats, train, strategies, map, cluster and metrics") {
  TempDir dir;
  write_file(dir / "spec.json", spec_doc(50).dump(2));
  REQUIRE(run({"synth", "--spec", dir / "spec.json", "--output", dir / "log.csv"}).code == 0);
  const auto stats = run({"stats", "--input", dir / "log.csv", "--json", dir / "hist.json"});
  CHECK(stats.code == 0);
  CHECK(stats.out.find("50 cases, 1000 events, 6 distinct activities") != std::string::npos);
  CHECK(run({"ingest", "--input", dir / "log.csv", "--output", dir / "cases.json"}).code == 0);
  CHECK(run({"train", "--input", dir / "log.csv", "--output", dir / "model.json", "--states", "2"}).code == 0);
  const auto strategies = run({"strategies", "--model", dir / "model.json", "--json", dir / "s.json"});
  CHECK(strategies.code == 0);
  CHECK(strategies.out.find("Distribution") != std::string::npos);
  CHECK(run({"map", "--model", dir / "model.json", "--output-dir", dir / "map"}).code == 0);
  CHECK(fs::exists(dir / "map/pseudo_map.json"));
  CHECK(run({"cluster", "--map", dir / "map/pseudo_map.json", "--json", dir / "cover.json", "--intention-map",
             dir / "imap.json"})
            .code == 0);
  const auto metrics = run({"metrics", "--map", dir / "map/pseudo_map.json", "--json", dir / "metrics.json"});
  CHECK(metrics.code == 0);
  CHECK(metrics.out.find("diameter") != std::string::npos);
}

TEST_CASE("pipeline artifacts, determinism and the manifest guard") {
  TempDir dir;
  write_file(dir / "spec.json", spec_doc(300).dump(2));
  REQUIRE(run({"synth", "--spec", dir / "spec.json", "--output", dir / "log.csv"}).code == 0);
  const std::vector<std::string> base = {"pipeline", "--input", dir / "log.csv", "--states", "2",
                                         "--iterations", "100", "--ground-truth", dir / "spec.json"};
  auto with_dir = [&](const std::string& out) {
    auto args = base;
    args.insert(args.end(), {"--output-dir", out});
    return args;
  };
  const auto first = run(with_dir(dir / "a"));
  REQUIRE(first.code == 0);
  REQUIRE(run(with_dir(dir / "b")).code == 0);

  const auto manifest = read_json(dir / "a/manifest.json");
  const std::string hash = manifest["config_hash"];
  CHECK(hash.size() == 16);
  for (const auto& name : manifest["artifacts"]) {
    const auto file = name.get<std::string>();
    CHECK(slurp(dir / ("a/" + file)) == slurp(dir / ("b/" + file)));
    if (file.ends_with(".json")) CHECK(read_json(dir / ("a/" + file))["config_hash"] == hash);
    if (!file.ends_with(".json")) CHECK(slurp(dir / ("a/" + file)).find(hash) != std::string::npos);
  }
  for (const char* required : {"model.json", "strategies.json", "pseudo_map.dot", "cover.json", "metrics.json"}) {
    CHECK(fs::exists(dir / (std::string("a/") + required)));
  }
  CHECK(slurp(dir / "a/manifest.json") == slurp(dir / "b/manifest.json"));

  // Recovery against the planted model.
  REQUIRE(manifest.contains("recovery"));
  CHECK(manifest["recovery"]["max_trans_l1"].get<double>() <= 0.1);
  CHECK(manifest["recovery"]["max_emit_l1"].get<double>() <= 0.1);

  // Same config into the same directory is fine; a different one is refused.
  CHECK(run(with_dir(dir / "a")).code == 0);
  auto changed = with_dir(dir / "a");
  changed.insert(changed.end(), {"--epsilon", "0.2"});
  const auto refused = run(changed);
  CHECK(refused.code == 1);
  CHECK(refused.err.find("--force") != std::string::npos);
  changed.push_back("--force");
  CHECK(run(changed).code == 0);
  CHECK(read_json(dir / "a/manifest.json")["config_hash"] != hash);
}

TEST_CASE("the output directory defaults to the environment variable") {
  TempDir dir;
  write_file(dir / "spec.json", spec_doc(20).dump(2));
  REQUIRE(run({"synth", "--spec", dir / "spec.json", "--output", dir / "log.csv"}).code == 0);
  ::setenv("MAPMINER_OUTPUT_DIR", (dir / "env_out").c_str(), 1);
  const auto r = run({"pipeline", "--input", dir / "log.csv", "--states", "2", "--iterations", "5"});
  ::unsetenv("MAPMINER_OUTPUT_DIR");
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "env_out/manifest.json"));
}
