#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "avexp/pipeline.hpp"
#include "avexp/synth.hpp"

using namespace avexp;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("avexp_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string small_corpus(const fs::path& dir) {
  SynthSpec spec;
  spec.tuples = 1500;
  spec.attributes = 30;
  spec.value_vocab = 300;
  const auto path = (dir / "raw.tsv").string();
  std::ofstream out(path);
  write_raw_tsv(out, generate_synthetic(spec).tuples);
  return path;
}

}  // namespace

TEST_CASE("parse_system") {
  CHECK(parse_system("dictionary").dictionary);
  CHECK(parse_system("plain").name() == "plain");
  CHECK(parse_system("mixing+vals+drop").name() == "vals+drop+mixing");
  CHECK_THROWS_AS(parse_system("drop"), UsageError);
  CHECK_THROWS_AS(parse_system("plain+mixing"), UsageError);
  CHECK_THROWS_AS(parse_system("bert"), UsageError);
}

TEST_CASE("predictions JSONL round trip") {
  const std::vector<Prediction> p = {{3, TokenList{"dark", "blue"}}, {4, std::nullopt}};
  std::stringstream ss;
  write_predictions(ss, p);
  const auto back = read_predictions(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0].value == p[0].value);
  CHECK_FALSE(back[1].value);
}

TEST_CASE("mean_std uses the sample deviation") {
  const auto m = mean_std({1, 2, 3, 4});
  CHECK(m.mean == doctest::Approx(2.5));
  CHECK(m.stddev == doctest::Approx(std::sqrt(5.0 / 3)));
  CHECK(mean_std({7}).stddev == 0.0);
}

TEST_CASE("run_experiment is reproducible and resumable") {
  const auto dir = scratch("run");
  ExperimentConfig cfg;
  cfg.input = small_corpus(dir);
  cfg.systems = {"dictionary", "plain", "vals+drop+mixing"};
  cfg.trials = 2;
  cfg.train.epochs = 2;
  cfg.train.dim = 8;
  cfg.work_dir = (dir / "a").string();
  const auto first = run_experiment(cfg);
  REQUIRE(first.size() == 2);
  REQUIRE(first[0].size() == 3);
  cfg.work_dir = (dir / "b").string();
  run_experiment(cfg);
  for (const char* f : {"summary.json", "trial-0/plain/report.json",
                        "trial-1/vals+drop+mixing/predictions.jsonl", "kb.jsonl"}) {
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  CHECK(fs::exists(dir / "a" / "manifest.json"));
  // dictionary output is identical across trials
  CHECK(slurp(dir / "a/trial-0/dictionary/predictions.jsonl") ==
        slurp(dir / "a/trial-1/dictionary/predictions.jsonl"));
  // a resumed run reuses finished work and reproduces the summary
  cfg.resume = true;
  run_experiment(cfg);
  CHECK(slurp(dir / "a" / "summary.json") == slurp(dir / "b" / "summary.json"));
  fs::remove_all(dir);
}

TEST_CASE("experiment config validation") {
  ExperimentConfig cfg;
  cfg.systems = {"drop"};
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg.systems = {"plain"};
  cfg.trials = 0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
}
