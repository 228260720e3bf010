#include "morphtok/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json_config.hpp"
#include "morphtok/rng.hpp"
#include "morphtok/segmenter_io.hpp"
#include "morphtok/sha256.hpp"
#include "morphtok/synthetic.hpp"
#include "morphtok/utf8.hpp"

namespace morphtok {

using detail::json;
namespace fs = std::filesystem;

std::filesystem::path PipelineConfig::resolve(const std::string& p) const {
  const fs::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

std::uint64_t PipelineConfig::stage_seed(std::string_view stage) const { return derive_seed(seed, stage); }

const std::vector<std::string>& pipeline_stages() {
  static const std::vector<std::string> stages{"gen-synthetic", "normalize", "seg-train", "bpe-train",
                                               "tokenize",      "embed-train", "eval"};
  return stages;
}

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw StageError("config", where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw StageError("config", "unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw StageError("config", where + "." + key + " has the wrong type");
  }
}

std::string mode_name(textnorm::InputMode m) { return m == textnorm::InputMode::kLine ? "line" : "doc"; }

textnorm::InputMode parse_mode(const std::string& s) {
  if (s == "line") return textnorm::InputMode::kLine;
  if (s == "doc") return textnorm::InputMode::kDocument;
  throw StageError("config", "inputs.mode must be 'line' or 'doc'");
}

}  // namespace

PipelineConfig pipeline_config_from_json_text(std::string_view text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw StageError("config", std::string("invalid JSON: ") + e.what());
  }
  check_keys(j, {"schema_version", "name", "seed", "output_dir", "metadata", "inputs", "textnorm", "segmenter",
                 "bpe", "sgns", "tokenizers", "evalsuite", "stages"},
             "config");
  PipelineConfig cfg;
  cfg.base_dir = base_dir;
  int version = kPipelineSchemaVersion;
  read(j, "schema_version", version, "config");
  if (version != kPipelineSchemaVersion) {
    throw StageError("config", "unsupported schema_version " + std::to_string(version));
  }
  read(j, "name", cfg.name, "config");
  read(j, "seed", cfg.seed, "config");
  read(j, "output_dir", cfg.output_dir, "config");
  if (j.contains("metadata")) {
    const auto& m = j["metadata"];
    check_keys(m, {"toolkit_version", "timestamp"}, "metadata");
    read(m, "toolkit_version", cfg.toolkit_version, "metadata");
    read(m, "timestamp", cfg.timestamp, "metadata");
  }
  if (j.contains("inputs")) {
    const auto& in = j["inputs"];
    check_keys(in, {"synthetic", "corpus", "annotations", "unimorph", "gold", "mode"}, "inputs");
    if (in.contains("synthetic") && !in["synthetic"].is_null()) {
      const auto& s = in["synthetic"];
      check_keys(s, {"grammar", "words", "sentences", "gold"}, "inputs.synthetic");
      SyntheticInput si;
      read(s, "grammar", si.grammar, "inputs.synthetic");
      read(s, "words", si.words, "inputs.synthetic");
      read(s, "sentences", si.sentences, "inputs.synthetic");
      read(s, "gold", si.gold, "inputs.synthetic");
      if (si.grammar.empty()) throw StageError("config", "inputs.synthetic.grammar is required");
      cfg.inputs.synthetic = si;
    }
    read(in, "corpus", cfg.inputs.corpus, "inputs");
    read(in, "annotations", cfg.inputs.annotations, "inputs");
    read(in, "unimorph", cfg.inputs.unimorph, "inputs");
    read(in, "gold", cfg.inputs.gold, "inputs");
    std::string mode = mode_name(cfg.inputs.mode);
    read(in, "mode", mode, "inputs");
    cfg.inputs.mode = parse_mode(mode);
  }
  if (j.contains("textnorm")) {
    try {
      cfg.textnorm = detail::textnorm_from_json(j["textnorm"], base_dir);
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError("config", std::string("textnorm: ") + e.what());
    }
  }
  if (j.contains("segmenter")) {
    const auto& s = j["segmenter"];
    check_keys(s, {"scheme", "hidden_size", "num_layers", "dropout", "lr", "weight_decay", "patience", "char_dim",
                   "val_fraction", "max_epochs"},
               "segmenter");
    std::string scheme(scheme_name(cfg.scheme));
    read(s, "scheme", scheme, "segmenter");
    try {
      cfg.scheme = parse_scheme(scheme);
    } catch (const std::exception& e) {
      throw StageError("config", std::string("segmenter.scheme: ") + e.what());
    }
    auto& t = cfg.segmenter;
    read(s, "hidden_size", t.hidden_size, "segmenter");
    read(s, "num_layers", t.num_layers, "segmenter");
    read(s, "dropout", t.dropout, "segmenter");
    read(s, "lr", t.lr, "segmenter");
    read(s, "weight_decay", t.weight_decay, "segmenter");
    read(s, "patience", t.patience, "segmenter");
    read(s, "char_dim", t.char_dim, "segmenter");
    read(s, "val_fraction", t.val_fraction, "segmenter");
    read(s, "max_epochs", t.max_epochs, "segmenter");
  }
  if (j.contains("bpe")) {
    const auto& b = j["bpe"];
    check_keys(b, {"vocab_size", "min_frequency"}, "bpe");
    read(b, "vocab_size", cfg.bpe.vocab_size, "bpe");
    read(b, "min_frequency", cfg.bpe.min_frequency, "bpe");
  }
  if (j.contains("sgns")) {
    const auto& s = j["sgns"];
    check_keys(s, {"dim", "base_window", "negatives", "epochs", "min_count", "initial_lr", "threads"}, "sgns");
    read(s, "dim", cfg.sgns.dim, "sgns");
    read(s, "base_window", cfg.sgns.base_window, "sgns");
    read(s, "negatives", cfg.sgns.negatives, "sgns");
    read(s, "epochs", cfg.sgns.epochs, "sgns");
    read(s, "min_count", cfg.sgns.min_count, "sgns");
    read(s, "initial_lr", cfg.sgns.initial_lr, "sgns");
    read(s, "threads", cfg.sgns.threads, "sgns");
  }
  if (j.contains("tokenizers")) {
    std::vector<std::string> names;
    read(j, "tokenizers", names, "config");
    cfg.tokenizers.clear();
    for (const auto& n : names) {
      try {
        cfg.tokenizers.push_back(sgns::parse_kind(n));
      } catch (const std::exception& e) {
        throw StageError("config", e.what());
      }
    }
    if (cfg.tokenizers.empty()) throw StageError("config", "tokenizers must not be empty");
  }
  if (j.contains("evalsuite")) {
    const auto& e = j["evalsuite"];
    check_keys(e, {"queries", "k", "dropoff_ranks", "max_inter_pairs", "runs"}, "evalsuite");
    read(e, "queries", cfg.eval.queries, "evalsuite");
    read(e, "k", cfg.eval.k, "evalsuite");
    read(e, "dropoff_ranks", cfg.eval.dropoff_ranks, "evalsuite");
    read(e, "max_inter_pairs", cfg.eval.max_inter_pairs, "evalsuite");
    read(e, "runs", cfg.runs, "evalsuite");
  }
  read(j, "stages", cfg.stages, "config");
  for (const auto& s : cfg.stages) {
    const auto& all = pipeline_stages();
    if (std::find(all.begin(), all.end(), s) == all.end()) throw StageError("config", "unknown stage '" + s + "'");
  }
  cfg.eval.seed = cfg.stage_seed("eval");
  try {
    cfg.textnorm.validate();
    cfg.segmenter.seed = cfg.stage_seed("seg-train");
    cfg.segmenter.validate();
    cfg.sgns.validate();
  } catch (const std::exception& e) {
    throw StageError("config", e.what());
  }
  if (cfg.bpe.min_frequency < 1) throw StageError("config", "bpe.min_frequency must be >= 1");
  if (cfg.runs < 1) throw StageError("config", "evalsuite.runs must be >= 1");
  if (cfg.eval.k < 1) throw StageError("config", "evalsuite.k must be >= 1");
  return cfg;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StageError("config", "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return pipeline_config_from_json_text(ss.str(), path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

std::string pipeline_config_to_json_text(const PipelineConfig& cfg) {
  json j;
  j["schema_version"] = kPipelineSchemaVersion;
  j["name"] = cfg.name;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  j["metadata"] = json{{"toolkit_version", cfg.toolkit_version}, {"timestamp", cfg.timestamp}};
  json in;
  if (cfg.inputs.synthetic) {
    const auto& s = *cfg.inputs.synthetic;
    in["synthetic"] = json{{"grammar", s.grammar}, {"words", s.words}, {"sentences", s.sentences}, {"gold", s.gold}};
  } else {
    in["synthetic"] = nullptr;
  }
  in["corpus"] = cfg.inputs.corpus;
  in["annotations"] = cfg.inputs.annotations;
  in["unimorph"] = cfg.inputs.unimorph;
  in["gold"] = cfg.inputs.gold;
  in["mode"] = mode_name(cfg.inputs.mode);
  j["inputs"] = in;
  j["textnorm"] = detail::textnorm_to_json(cfg.textnorm);
  const auto& t = cfg.segmenter;
  j["segmenter"] = json{{"scheme", std::string(scheme_name(cfg.scheme))},
                        {"hidden_size", t.hidden_size},
                        {"num_layers", t.num_layers},
                        {"dropout", t.dropout},
                        {"lr", t.lr},
                        {"weight_decay", t.weight_decay},
                        {"patience", t.patience},
                        {"char_dim", t.char_dim},
                        {"val_fraction", t.val_fraction},
                        {"max_epochs", t.max_epochs}};
  j["bpe"] = json{{"vocab_size", cfg.bpe.vocab_size}, {"min_frequency", cfg.bpe.min_frequency}};
  j["sgns"] = json{{"dim", cfg.sgns.dim},           {"base_window", cfg.sgns.base_window},
                   {"negatives", cfg.sgns.negatives}, {"epochs", cfg.sgns.epochs},
                   {"min_count", cfg.sgns.min_count}, {"initial_lr", cfg.sgns.initial_lr},
                   {"threads", cfg.sgns.threads}};
  json toks = json::array();
  for (auto k : cfg.tokenizers) toks.push_back(std::string(sgns::kind_name(k)));
  j["tokenizers"] = toks;
  j["evalsuite"] = json{{"queries", cfg.eval.queries},
                        {"k", cfg.eval.k},
                        {"dropoff_ranks", cfg.eval.dropoff_ranks},
                        {"max_inter_pairs", cfg.eval.max_inter_pairs},
                        {"runs", cfg.runs}};
  j["stages"] = cfg.stages;
  return j.dump(2) + "\n";
}

void validate_inputs(const PipelineConfig& cfg) {
  auto need = [&](const std::string& field, const std::string& value) {
    if (value.empty()) throw StageError("config", "inputs." + field + " is required");
    const fs::path p = cfg.resolve(value);
    if (!fs::exists(p)) throw StageError("config", "missing input file for inputs." + field + ": " + p.string());
  };
  if (cfg.inputs.synthetic) {
    need("synthetic.grammar", cfg.inputs.synthetic->grammar);
  } else {
    need("corpus", cfg.inputs.corpus);
    need("annotations", cfg.inputs.annotations);
    need("unimorph", cfg.inputs.unimorph);
  }
  if (!cfg.inputs.gold.empty()) need("gold", cfg.inputs.gold);
}

std::vector<sgns::Sentence> tokenize_corpus(const std::vector<sgns::Sentence>& corpus,
                                            const sgns::SubwordFn& fn) {
  std::unordered_map<std::string, std::vector<std::string>> cache;
  std::vector<sgns::Sentence> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) {
    sgns::Sentence row;
    for (const auto& w : s) {
      auto it = cache.find(w);
      if (it == cache.end()) it = cache.emplace(w, fn(w)).first;
      row.insert(row.end(), it->second.begin(), it->second.end());
    }
    out.push_back(std::move(row));
  }
  return out;
}

void write_corpus(const fs::path& path, const std::vector<sgns::Sentence>& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& s : corpus) out << join(s, " ") << '\n';
}

double tokens_per_word(const std::vector<sgns::Sentence>& words, const std::vector<sgns::Sentence>& tokens) {
  std::size_t w = 0, t = 0;
  for (const auto& s : words) w += s.size();
  for (const auto& s : tokens) t += s.size();
  if (w == 0) return 1.0;
  return std::max(1.0, static_cast<double>(t) / static_cast<double>(w));
}

namespace {

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream o;
  o << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return o.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Runner {
 public:
  Runner(const PipelineConfig& cfg, fs::path run_dir, std::ostream* log)
      : cfg_(cfg), dir_(std::move(run_dir)), log_(log) {}

  PipelineResult run() {
    fs::create_directories(dir_);
    const std::string resolved = pipeline_config_to_json_text(cfg_);
    write_text(dir_ / "config.resolved.json", resolved);
    record("config.resolved.json", "config");

    const auto& order = pipeline_stages();
    for (const auto& stage : order) {
      if (!enabled(stage)) continue;
      if (stage == "gen-synthetic" && !cfg_.inputs.synthetic) continue;
      if (log_) *log_ << "[" << stage << "] start\n";
      try {
        dispatch(stage);
      } catch (const StageError&) {
        throw;
      } catch (const std::exception& e) {
        throw StageError(stage, e.what());
      }
    }
    return finish();
  }

 private:
  bool enabled(const std::string& stage) const {
    return cfg_.stages.empty() || std::find(cfg_.stages.begin(), cfg_.stages.end(), stage) != cfg_.stages.end();
  }

  void dispatch(const std::string& stage) {
    if (stage == "gen-synthetic") gen_synthetic();
    else if (stage == "normalize") normalize();
    else if (stage == "seg-train") seg_train();
    else if (stage == "bpe-train") bpe_train();
    else if (stage == "tokenize") tokenize();
    else if (stage == "embed-train") embed_train();
    else if (stage == "eval") evaluate();
  }

  void record(const std::string& rel, const std::string& stage) {
    artifacts_[rel] = stage;
  }

  fs::path stage_dir(const std::string& name) {
    const fs::path d = dir_ / name;
    fs::create_directories(d);
    return d;
  }

  fs::path input(const std::string& synthetic_name, const std::string& configured) const {
    if (cfg_.inputs.synthetic && synthetic_name != "") return dir_ / "synthetic" / synthetic_name;
    return cfg_.resolve(configured);
  }

  fs::path require(const fs::path& p, const std::string& what) const {
    if (!fs::exists(p)) throw std::runtime_error("missing " + what + ": " + p.string());
    return p;
  }

  void gen_synthetic() {
    const auto& s = *cfg_.inputs.synthetic;
    const auto grammar = synth::load_grammar(cfg_.resolve(s.grammar));
    const auto data = synth::gen_synthetic(grammar, s.words, s.sentences, cfg_.stage_seed("gen-synthetic"), s.gold);
    const fs::path d = stage_dir("synthetic");
    for (const auto& p : synth::write_synthetic(data, d)) record(fs::relative(p, dir_).generic_string(), "gen-synthetic");
  }

  void normalize() {
    const fs::path src = require(input("corpus.txt", cfg_.inputs.corpus), "corpus");
    std::ifstream in(src, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + src.string());
    auto result = textnorm::normalize_corpus(in, cfg_.textnorm, cfg_.inputs.mode);
    const fs::path d = stage_dir("normalize");
    textnorm::write_sentences(d / "corpus.sents.txt", result.sentences);
    textnorm::write_words(d / "corpus.words.txt", result.sentences);
    write_text(d / "stats.json", result.stats.to_json_text());
    for (const char* f : {"corpus.sents.txt", "corpus.words.txt", "stats.json"}) {
      record("normalize/" + std::string(f), "normalize");
    }
    if (result.sentences.empty()) throw std::runtime_error("normalization kept no sentences");
  }

  void seg_train() {
    const fs::path src = require(input("annotations.tsv", cfg_.inputs.annotations), "annotations");
    const auto data = load_annotations(src);
    seg::TrainConfig tc = cfg_.segmenter;
    tc.seed = cfg_.stage_seed("seg-train");
    auto result = seg::train_segmenter(data, cfg_.scheme, tc, [&](const seg::EpochRecord& e) {
      if (log_) *log_ << "[seg-train] epoch " << e.epoch << " loss " << e.train_loss << " val_f1 " << e.val_f1 << "\n";
    });
    const fs::path d = stage_dir("segmenter");
    seg::save_model(d / "model.mtseg", result.model);
    write_text(d / "train_log.json", result.log.to_json_text());
    record("segmenter/model.mtseg", "seg-train");
    record("segmenter/train_log.json", "seg-train");
  }

  void bpe_train() {
    const fs::path words = require(dir_ / "normalize" / "corpus.words.txt", "normalized word list");
    std::ifstream in(words, std::ios::binary);
    const auto counts = bpe::count_words(in);
    const auto model = bpe::train_bpe(counts, cfg_.bpe);
    const fs::path d = stage_dir("bpe");
    bpe::save_model(d / "model.mtbpe", model);
    json info{{"target_vocab_size", cfg_.bpe.vocab_size},
              {"achieved_vocab_size", model.vocab_size()},
              {"alphabet_size", model.alphabet().size()},
              {"merges", model.merges().size()}};
    write_text(d / "vocab_info.json", info.dump(2) + "\n");
    record("bpe/model.mtbpe", "bpe-train");
    record("bpe/vocab_info.json", "bpe-train");
  }

  sgns::SubwordFn subword_fn(sgns::TokenizerKind kind) {
    switch (kind) {
      case sgns::TokenizerKind::kWord:
        return {};
      case sgns::TokenizerKind::kMorpheme: {
        if (!segmenter_) {
          segmenter_ = seg::load_model(require(dir_ / "segmenter" / "model.mtseg", "segmenter model"));
        }
        const auto* m = &*segmenter_;
        return [m](std::string_view w) { return seg::segment_word(w, *m); };
      }
      case sgns::TokenizerKind::kBpe: {
        if (!bpe_) bpe_ = bpe::load_model(require(dir_ / "bpe" / "model.mtbpe", "BPE model"));
        const auto* m = &*bpe_;
        return [m](std::string_view w) { return bpe::bpe_encode(w, *m); };
      }
    }
    return {};
  }

  void tokenize() {
    const auto words = sgns::read_corpus(require(dir_ / "normalize" / "corpus.sents.txt", "normalized corpus"));
    const fs::path d = stage_dir("tokenized");
    json density = json::object();
    for (auto kind : cfg_.tokenizers) {
      const std::string name(sgns::kind_name(kind));
      const auto fn = subword_fn(kind);
      const auto toks = fn ? tokenize_corpus(words, fn) : words;
      write_corpus(d / (name + ".txt"), toks);
      density[name] = tokens_per_word(words, toks);
      record("tokenized/" + name + ".txt", "tokenize");
    }
    write_text(d / "density.json", density.dump(2) + "\n");
    record("tokenized/density.json", "tokenize");
  }

  void embed_train() {
    const json density = json::parse(read_text(require(dir_ / "tokenized" / "density.json", "density table")));
    const fs::path d = stage_dir("embeddings");
    for (std::size_t r = 0; r < cfg_.runs; ++r) {
      sgns::SgnsConfig sc = cfg_.sgns;
      sc.seed = cfg_.stage_seed("embed-train.run" + std::to_string(r));
      for (auto kind : cfg_.tokenizers) {
        const std::string name(sgns::kind_name(kind));
        const auto corpus = sgns::read_corpus(require(dir_ / "tokenized" / (name + ".txt"), name + " corpus"));
        const double avg = density.at(name).get<double>();
        const int window = sgns::adjust_window(sc.base_window, avg);
        sgns::SgnsTrainLog tl;
        const auto model = sgns::train_sgns(corpus, sc, window, kind, avg, &tl);
        const std::string file = name + ".run" + std::to_string(r) + ".mtvec";
        sgns::save_model(d / file, model);
        record("embeddings/" + file, "embed-train");
        if (log_) {
          *log_ << "[embed-train] " << file << " window " << window << " vocab " << model.vocab.size()
                << " final loss " << (tl.epoch_loss.empty() ? 0.0 : tl.epoch_loss.back()) << "\n";
        }
      }
    }
  }

  void evaluate() {
    const auto entries = eval::load_unimorph(require(input("unimorph.tsv", cfg_.inputs.unimorph), "UniMorph pairs"));
    std::vector<std::vector<sgns::EmbeddingModel>> models(cfg_.runs);
    std::vector<std::vector<eval::EvalModel>> runs(cfg_.runs);
    for (std::size_t r = 0; r < cfg_.runs; ++r) {
      for (auto kind : cfg_.tokenizers) {
        const std::string name(sgns::kind_name(kind));
        models[r].push_back(sgns::load_model(
            require(dir_ / "embeddings" / (name + ".run" + std::to_string(r) + ".mtvec"), name + " embeddings")));
      }
      for (std::size_t i = 0; i < cfg_.tokenizers.size(); ++i) {
        runs[r].push_back({std::string(sgns::kind_name(cfg_.tokenizers[i])), &models[r][i], subword_fn(cfg_.tokenizers[i])});
      }
    }
    std::optional<eval::AgreementInput> agreement;
    const bool has_morph = std::count(cfg_.tokenizers.begin(), cfg_.tokenizers.end(), sgns::TokenizerKind::kMorpheme);
    const bool has_bpe = std::count(cfg_.tokenizers.begin(), cfg_.tokenizers.end(), sgns::TokenizerKind::kBpe);
    if (has_morph && has_bpe) {
      eval::AgreementInput a;
      std::set<std::string> seen;
      for (const auto& e : entries) {
        if (seen.insert(e.wordform).second) a.words.push_back(e.wordform);
      }
      a.morph_tokens = subword_fn(sgns::TokenizerKind::kMorpheme);
      a.bpe_tokens = subword_fn(sgns::TokenizerKind::kBpe);
      agreement = std::move(a);
    }
    std::optional<eval::BoundaryInput> boundary;
    const fs::path gold = cfg_.inputs.synthetic ? dir_ / "synthetic" / "gold.tsv"
                          : cfg_.inputs.gold.empty() ? fs::path() : cfg_.resolve(cfg_.inputs.gold);
    if (!gold.empty() && has_morph) {
      auto g = load_annotations(require(gold, "gold segmentations"));
      if (!g.empty()) boundary = eval::BoundaryInput{std::move(g), subword_fn(sgns::TokenizerKind::kMorpheme)};
    }
    eval::EvalOptions opts = cfg_.eval;
    opts.seed = cfg_.stage_seed("eval");
    const auto report = eval::evaluate(entries, runs, agreement, boundary, opts);
    for (const auto& p : report.write(dir_ / "eval")) record(fs::relative(p, dir_).generic_string(), "eval");
  }

  PipelineResult finish() {
    PipelineResult res;
    res.run_dir = dir_;
    json arts = json::array();
    for (const auto& [rel, stage] : artifacts_) {
      Artifact a;
      a.path = rel;
      a.stage = stage;
      a.sha256 = sha256_file(dir_ / rel);
      a.bytes = fs::file_size(dir_ / rel);
      arts.push_back(json{{"path", a.path}, {"stage", a.stage}, {"sha256", a.sha256}, {"bytes", a.bytes}});
      res.artifacts.push_back(std::move(a));
    }
    json manifest;
    manifest["schema_version"] = kPipelineSchemaVersion;
    manifest["name"] = cfg_.name;
    manifest["toolkit_version"] = cfg_.toolkit_version;
    manifest["timestamp"] = cfg_.timestamp == "auto" ? now_utc() : cfg_.timestamp;
    manifest["seed"] = cfg_.seed;
    manifest["artifacts"] = std::move(arts);
    res.manifest = dir_ / "manifest.json";
    write_text(res.manifest, manifest.dump(2) + "\n");
    return res;
  }

  const PipelineConfig& cfg_;
  fs::path dir_;
  std::ostream* log_;
  std::map<std::string, std::string> artifacts_;
  std::optional<seg::SegmenterModel> segmenter_;
  std::optional<bpe::BpeModel> bpe_;
};

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg, std::ostream* log, const std::optional<fs::path>& out_dir) {
  validate_inputs(cfg);
  const fs::path dir = out_dir ? *out_dir : cfg.resolve(cfg.output_dir);
  return Runner(cfg, dir, log).run();
}

}  // namespace morphtok
