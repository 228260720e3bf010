#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "morphtok/pipeline.hpp"

using namespace morphtok;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string tiny_config_text() {
  const std::string data = MORPHTOK_DATA_DIR;
  return R"({
  "name": "tiny",
  "seed": 42,
  "output_dir": "unused",
  "metadata": {"timestamp": "2026-01-01T00:00:00Z"},
  "inputs": {"synthetic": {"grammar": ")" + data + R"(/synthetic_grammar.json", "words": 120, "sentences": 600, "gold": 30}},
  "textnorm": {"char_map_file": ")" + data + R"(/charmap.tsv"},
  "segmenter": {"hidden_size": 8, "num_layers": 1, "char_dim": 8, "max_epochs": 2, "lr": 0.01},
  "bpe": {"vocab_size": 80},
  "sgns": {"dim": 8, "epochs": 1, "min_count": 2},
  "evalsuite": {"queries": 20, "k": 5, "dropoff_ranks": [2, 5], "runs": 2}
})";
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("morphtok_test_pipeline_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config round trip keeps every field") {
  const auto cfg = pipeline_config_from_json_text(tiny_config_text());
  const auto text = pipeline_config_to_json_text(cfg);
  const auto again = pipeline_config_from_json_text(text);
  CHECK(pipeline_config_to_json_text(again) == text);
  CHECK(again.segmenter.hidden_size == 8);
  CHECK(again.runs == 2);
  CHECK(again.eval.dropoff_ranks == std::vector<std::size_t>{2, 5});
}

TEST_CASE("defaults follow the documented configuration") {
  const auto cfg = pipeline_config_from_json_text("{}");
  CHECK(cfg.seed == 42);
  CHECK(cfg.sgns.dim == 150);
  CHECK(cfg.sgns.base_window == 5);
  CHECK(cfg.sgns.negatives == 5);
  CHECK(cfg.sgns.epochs == 10);
  CHECK(cfg.sgns.min_count == 5);
  CHECK(cfg.bpe.vocab_size == 2280);
  CHECK(cfg.bpe.min_frequency == 2);
  CHECK(cfg.segmenter.hidden_size == 256);
  CHECK(cfg.segmenter.num_layers == 3);
  CHECK(cfg.segmenter.dropout == 0.3);
  CHECK(cfg.segmenter.lr == 0.001);
  CHECK(cfg.segmenter.weight_decay == 1e-5);
  CHECK(cfg.segmenter.patience == 10);
}

TEST_CASE("unknown keys and bad values are rejected") {
  CHECK_THROWS_WITH(pipeline_config_from_json_text(R"({"sgns": {"dims": 100}})"), doctest::Contains("dims"));
  CHECK_THROWS(pipeline_config_from_json_text(R"({"colour": 1})"));
  CHECK_THROWS_WITH(pipeline_config_from_json_text(R"({"textnorm": {"max_repeats": 2}})"), doctest::Contains("max_repeats"));
  CHECK_THROWS(pipeline_config_from_json_text(R"({"tokenizers": ["char"]})"));
  CHECK_THROWS(pipeline_config_from_json_text(R"({"stages": ["nope"]})"));
  CHECK_THROWS(pipeline_config_from_json_text("[1, 2"));
}

TEST_CASE("stage seeds differ per stage and follow the global seed") {
  auto cfg = pipeline_config_from_json_text("{}");
  CHECK(cfg.stage_seed("eval") != cfg.stage_seed("seg-train"));
  const auto before = cfg.stage_seed("eval");
  cfg.seed = 7;
  CHECK(cfg.stage_seed("eval") != before);
  CHECK(pipeline_stages().front() == "gen-synthetic");
  CHECK(pipeline_stages().back() == "eval");
}

TEST_CASE("missing inputs fail before any stage runs") {
  const fs::path out = scratch("missing");
  auto cfg = pipeline_config_from_json_text(
      R"({"inputs": {"corpus": "nowhere.txt", "annotations": "a.tsv", "unimorph": "u.tsv"}})", out);
  try {
    run_pipeline(cfg, nullptr, out / "run");
    FAIL("expected a config error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "config");
    CHECK(std::string(e.what()).find("nowhere.txt") != std::string::npos);
  }
  CHECK_FALSE(fs::exists(out / "run"));
}

TEST_CASE("end-to-end run is complete and reproducible") {
  const auto cfg = pipeline_config_from_json_text(tiny_config_text());
  const fs::path root = scratch("e2e");
  const auto a = run_pipeline(cfg, nullptr, root / "a");
  const auto b = run_pipeline(cfg, nullptr, root / "b");

  std::set<std::string> listed;
  for (const auto& art : a.artifacts) listed.insert(art.path);
  for (const auto& entry : fs::recursive_directory_iterator(a.run_dir)) {
    if (!entry.is_regular_file() || entry.path().filename() == "manifest.json") continue;
    CHECK_MESSAGE(listed.count(fs::relative(entry.path(), a.run_dir).generic_string()) == 1,
                  entry.path().string());
  }
  for (const char* must : {"segmenter/model.mtseg", "bpe/model.mtbpe", "embeddings/word.run0.mtvec",
                           "embeddings/morpheme.run1.mtvec", "embeddings/bpe.run0.mtvec", "eval/report.json",
                           "config.resolved.json"}) {
    CHECK_MESSAGE(listed.count(must) == 1, must);
  }

  REQUIRE(a.artifacts.size() == b.artifacts.size());
  for (std::size_t i = 0; i < a.artifacts.size(); ++i) {
    CHECK(a.artifacts[i].path == b.artifacts[i].path);
    CHECK_MESSAGE(a.artifacts[i].sha256 == b.artifacts[i].sha256, a.artifacts[i].path);
  }
  CHECK(slurp(a.manifest) == slurp(b.manifest));

  const auto report = json::parse(slurp(a.run_dir / "eval" / "report.json"));
  for (const char* key : {"schema_version", "models", "vocab_overlap", "restricted", "agreement", "boundary",
                          "across_runs"}) {
    CHECK_MESSAGE(report.contains(key), key);
  }
  CHECK_FALSE(report["agreement"].is_null());
  CHECK_FALSE(report["boundary"].is_null());
  REQUIRE(report["models"].size() == 3);
  for (const auto& m : report["models"]) {
    for (const char* key : {"similarity", "distribution", "neighbors", "separation", "vocab_size"}) {
      CHECK_MESSAGE(m.contains(key), key);
    }
  }
  CHECK(report["vocab_overlap"].size() == 3);
  fs::remove_all(root);
}

TEST_CASE("tokens per word and corpus tokenization") {
  const std::vector<sgns::Sentence> words{{"ab", "c"}, {"de"}};
  const auto toks = tokenize_corpus(words, [](std::string_view w) {
    std::vector<std::string> out;
    for (char ch : w) out.emplace_back(1, ch);
    return out;
  });
  CHECK(toks[0] == sgns::Sentence{"a", "b", "c"});
  CHECK(tokens_per_word(words, toks) == doctest::Approx(5.0 / 3));
  CHECK(tokens_per_word(words, words) == 1.0);
}

TEST_CASE("published schema defaults match the built-in defaults") {
  const auto schema = json::parse(slurp(fs::path(MORPHTOK_SOURCE_DIR) / "schema" / "pipeline.schema.json"));
  const auto canonical = json::parse(pipeline_config_to_json_text(pipeline_config_from_json_text("{}")));
  for (const char* section : {"segmenter", "bpe", "sgns", "evalsuite", "textnorm"}) {
    for (const auto& [key, prop] : schema["properties"][section]["properties"].items()) {
      if (!prop.contains("default")) continue;
      REQUIRE_MESSAGE(canonical[section].contains(key), section, ".", key);
      CHECK_MESSAGE(canonical[section][key] == prop["default"], section, ".", key);
    }
  }
  CHECK(canonical["seed"] == schema["properties"]["seed"]["default"]);
  CHECK(canonical["tokenizers"] == schema["properties"]["tokenizers"]["default"]);
}
