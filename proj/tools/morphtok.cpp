// morphtok command-line entry point.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "morphtok/bpe.hpp"
#include "morphtok/evalsuite.hpp"
#include "morphtok/labels.hpp"
#include "morphtok/pipeline.hpp"
#include "morphtok/report.hpp"
#include "morphtok/segmenter_io.hpp"
#include "morphtok/segmenter_train.hpp"
#include "morphtok/sgns.hpp"
#include "morphtok/synthetic.hpp"
#include "morphtok/textnorm.hpp"
#include "morphtok/utf8.hpp"

namespace fs = std::filesystem;
using namespace morphtok;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out_dir;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::vector<std::string> lines;
  std::istringstream in(read_file(p));
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto t = trim(line);
    if (!t.empty()) lines.emplace_back(t);
  }
  return lines;
}

// Word list: `word TAB tokens` lines. Sentence corpus: tokens joined by spaces.
void run_tokenizer(const sgns::SubwordFn& fn, const std::string& words, const std::string& sentences,
                   const fs::path& out_path) {
  if (!words.empty()) {
    auto out = open_out(out_path);
    for (const auto& w : read_lines(words)) out << w << '\t' << join(fn(w), "-") << '\n';
  } else {
    write_corpus(out_path, tokenize_corpus(sgns::read_corpus(fs::path(sentences)), fn));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"morphtok: word, morpheme and BPE tokenization with embedding evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Global random seed");
  app.add_option("--config", g.config, "Config file (textnorm JSON for normalize, pipeline JSON for pipeline)");
  app.add_option("--out-dir", g.out_dir, "Output directory");

  std::string stage;
  std::function<void()> action;

  // normalize
  auto* norm = app.add_subcommand("normalize", "Normalize, filter, deduplicate and sentence-split a raw corpus");
  std::string norm_in, norm_mode = "doc";
  unsigned norm_threads = 1;
  norm->add_option("--in", norm_in, "Raw UTF-8 text")->required()->check(CLI::ExistingFile);
  norm->add_option("--mode", norm_mode, "Input mode")->check(CLI::IsMember({"doc", "line"}));
  norm->add_option("--threads", norm_threads, "Normalization workers");
  norm->callback([&] {
    stage = "normalize";
    action = [&] {
      if (g.out_dir.empty()) throw std::runtime_error("--out-dir is required");
      const auto cfg = g.config.empty() ? textnorm::default_config() : textnorm::load_config(g.config);
      std::ifstream in(norm_in, std::ios::binary);
      const auto mode = norm_mode == "line" ? textnorm::InputMode::kLine : textnorm::InputMode::kDocument;
      const auto result = textnorm::normalize_corpus(in, cfg, mode, norm_threads);
      const fs::path dir = g.out_dir;
      fs::create_directories(dir);
      textnorm::write_sentences(dir / "corpus.sents.txt", result.sentences);
      textnorm::write_words(dir / "corpus.words.txt", result.sentences);
      open_out(dir / "stats.json") << result.stats.to_json_text();
      std::cout << result.stats.to_json_text();
    };
  });

  // seg-train
  auto* st = app.add_subcommand("seg-train", "Train the BiLSTM-CRF segmenter");
  std::string st_data, st_scheme = "end", st_out, st_log;
  seg::TrainConfig tc;
  st->add_option("--data", st_data, "Annotation file")->required()->check(CLI::ExistingFile);
  st->add_option("--scheme", st_scheme, "Label scheme")->check(CLI::IsMember({"end", "both"}));
  st->add_option("--out", st_out, "Model file")->required();
  st->add_option("--log", st_log, "Training log JSON");
  st->add_option("--hidden", tc.hidden_size, "Hidden size per direction");
  st->add_option("--layers", tc.num_layers, "Stacked recurrent layers");
  st->add_option("--char-dim", tc.char_dim, "Character embedding size");
  st->add_option("--dropout", tc.dropout, "Dropout between recurrent layers");
  st->add_option("--lr", tc.lr, "Adam learning rate");
  st->add_option("--weight-decay", tc.weight_decay, "Decoupled weight decay");
  st->add_option("--patience", tc.patience, "Early-stopping patience in epochs");
  st->add_option("--val-fraction", tc.val_fraction, "Validation share");
  st->add_option("--max-epochs", tc.max_epochs, "Epoch limit");
  st->callback([&] {
    stage = "seg-train";
    action = [&] {
      if (g.seed) tc.seed = *g.seed;
      const auto data = load_annotations(st_data);
      auto res = seg::train_segmenter(data, parse_scheme(st_scheme), tc, [](const seg::EpochRecord& e) {
        std::cerr << "epoch " << e.epoch << " loss " << e.train_loss << " val_f1 " << e.val_f1 << '\n';
      });
      seg::save_model(st_out, res.model);
      if (!st_log.empty()) open_out(st_log) << res.log.to_json_text();
      std::cout << "best epoch " << res.log.best_epoch << " val_f1 " << res.log.best_val_f1 << '\n';
    };
  });

  // seg-run
  auto* sr = app.add_subcommand("seg-run", "Segment words or a sentence corpus");
  std::string sr_model, sr_words, sr_sents, sr_out;
  sr->add_option("--model", sr_model, "Segmenter model")->required()->check(CLI::ExistingFile);
  auto* sr_w = sr->add_option("--words", sr_words, "One word per line")->check(CLI::ExistingFile);
  auto* sr_s = sr->add_option("--sentences", sr_sents, "Sentence-per-line corpus")->check(CLI::ExistingFile);
  sr_w->excludes(sr_s);
  sr->add_option("--out", sr_out, "Output file")->required();
  sr->callback([&] {
    stage = "seg-run";
    action = [&] {
      if (sr_words.empty() && sr_sents.empty()) throw std::runtime_error("give --words or --sentences");
      const auto model = seg::load_model(sr_model);
      run_tokenizer([&](std::string_view w) { return seg::segment_word(w, model); }, sr_words, sr_sents, sr_out);
    };
  });

  // seg-bootstrap
  auto* sb = app.add_subcommand("seg-bootstrap", "Export proposals for review, or merge a reviewed file");
  std::string sb_model, sb_cands, sb_out, sb_import, sb_data;
  sb->add_option("--model", sb_model, "Segmenter model")->check(CLI::ExistingFile);
  sb->add_option("--candidates", sb_cands, "Unannotated words, one per line")->check(CLI::ExistingFile);
  sb->add_option("--import", sb_import, "Reviewed file to merge")->check(CLI::ExistingFile);
  sb->add_option("--data", sb_data, "Existing annotations to merge into")->check(CLI::ExistingFile);
  sb->add_option("--out", sb_out, "Review file (export) or merged annotations (import)")->required();
  sb->callback([&] {
    stage = "seg-bootstrap";
    action = [&] {
      if (!sb_import.empty()) {
        auto base = sb_data.empty() ? std::vector<AnnotatedWord>{} : load_annotations(sb_data);
        const auto before = base.size();
        const auto merged = seg::merge_annotations(std::move(base), seg::import_review(read_file(sb_import)));
        save_annotations(sb_out, merged);
        std::cout << "annotations " << before << " -> " << merged.size() << '\n';
        return;
      }
      if (sb_model.empty() || sb_cands.empty()) throw std::runtime_error("export needs --model and --candidates");
      const auto model = seg::load_model(sb_model);
      open_out(sb_out) << seg::export_review(model, read_lines(sb_cands));
    };
  });

  // bpe-train
  auto* bt = app.add_subcommand("bpe-train", "Train a BPE vocabulary");
  std::string bt_corpus, bt_out;
  bpe::BpeConfig bc;
  bt->add_option("--corpus", bt_corpus, "Whitespace-tokenized text")->required()->check(CLI::ExistingFile);
  bt->add_option("--vocab-size", bc.vocab_size, "Target vocabulary size, alphabet included");
  bt->add_option("--min-freq", bc.min_frequency, "Minimum pair count for a merge");
  bt->add_option("--out", bt_out, "Model file")->required();
  bt->callback([&] {
    stage = "bpe-train";
    action = [&] {
      std::ifstream in(bt_corpus, std::ios::binary);
      const auto model = bpe::train_bpe(bpe::count_words(in), bc);
      bpe::save_model(bt_out, model);
      std::cout << "target vocab " << bc.vocab_size << " achieved " << model.vocab_size() << " merges "
                << model.merges().size() << '\n';
    };
  });

  // bpe-run
  auto* br = app.add_subcommand("bpe-run", "Apply a BPE model");
  std::string br_model, br_words, br_sents, br_out;
  br->add_option("--model", br_model, "BPE model")->required()->check(CLI::ExistingFile);
  auto* br_w = br->add_option("--words", br_words, "One word per line")->check(CLI::ExistingFile);
  auto* br_s = br->add_option("--sentences", br_sents, "Sentence-per-line corpus")->check(CLI::ExistingFile);
  br_w->excludes(br_s);
  br->add_option("--out", br_out, "Output file")->required();
  br->callback([&] {
    stage = "bpe-run";
    action = [&] {
      if (br_words.empty() && br_sents.empty()) throw std::runtime_error("give --words or --sentences");
      const auto model = bpe::load_model(br_model);
      run_tokenizer([&](std::string_view w) { return bpe::bpe_encode(w, model); }, br_words, br_sents, br_out);
    };
  });

  // embed-train
  auto* et = app.add_subcommand("embed-train", "Train skip-gram embeddings with negative sampling");
  std::string et_corpus, et_kind = "word", et_out, et_reference;
  std::optional<int> et_window;
  std::optional<double> et_avg;
  sgns::SgnsConfig sc;
  et->add_option("--corpus", et_corpus, "Tokenized sentence-per-line corpus")->required()->check(CLI::ExistingFile);
  et->add_option("--tokenizer", et_kind, "Tokenizer kind")->check(CLI::IsMember({"word", "morpheme", "bpe"}));
  et->add_option("--dim", sc.dim, "Vector dimension");
  et->add_option("--base-window", sc.base_window, "Window before density adjustment");
  et->add_option("--window", et_window, "Fixed window, skipping the density adjustment");
  et->add_option("--reference", et_reference, "Word-level corpus the tokenized corpus came from")
      ->check(CLI::ExistingFile);
  et->add_option("--avg-tokens", et_avg, "Known tokens per word");
  et->add_option("--negatives", sc.negatives, "Negative samples per pair");
  et->add_option("--epochs", sc.epochs, "Passes over the corpus");
  et->add_option("--min-count", sc.min_count, "Minimum token count");
  et->add_option("--lr", sc.initial_lr, "Initial learning rate");
  et->add_option("--threads", sc.threads, "Workers; more than one gives up bit-reproducibility");
  et->add_option("--out", et_out, "Model file")->required();
  et->callback([&] {
    stage = "embed-train";
    action = [&] {
      if (g.seed) sc.seed = *g.seed;
      const auto kind = sgns::parse_kind(et_kind);
      const auto corpus = sgns::read_corpus(fs::path(et_corpus));
      double avg = 1.0;
      if (et_avg) {
        avg = *et_avg;
      } else if (!et_reference.empty()) {
        avg = tokens_per_word(sgns::read_corpus(fs::path(et_reference)), corpus);
      } else if (kind != sgns::TokenizerKind::kWord && !et_window) {
        throw std::runtime_error("subword corpora need --reference, --avg-tokens or --window");
      }
      const int window = et_window ? *et_window : sgns::adjust_window(sc.base_window, avg);
      if (et_window && !et_avg && et_reference.empty() && kind != sgns::TokenizerKind::kWord) {
        avg = static_cast<double>(window) / sc.base_window;
      }
      sgns::SgnsTrainLog log;
      const auto model = sgns::train_sgns(corpus, sc, window, kind, avg, &log);
      sgns::save_model(et_out, model);
      std::cout << "vocab " << model.vocab.size() << " window " << window << " avg_tokens " << avg;
      if (!log.epoch_loss.empty()) std::cout << " loss " << log.epoch_loss.front() << " -> " << log.epoch_loss.back();
      std::cout << '\n';
    };
  });

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate the three embedding models");
  std::string ev_unimorph, ev_word, ev_morph, ev_bpe, ev_seg, ev_bpe_model, ev_out, ev_gold, ev_agree;
  eval::EvalOptions eo;
  ev->add_option("--unimorph", ev_unimorph, "lemma TAB wordform TAB features")->required()->check(CLI::ExistingFile);
  ev->add_option("--model-word", ev_word, "Word-level embeddings")->required()->check(CLI::ExistingFile);
  ev->add_option("--model-morph", ev_morph, "Morpheme-level embeddings")->required()->check(CLI::ExistingFile);
  ev->add_option("--model-bpe", ev_bpe, "BPE embeddings")->required()->check(CLI::ExistingFile);
  ev->add_option("--segmenter", ev_seg, "Segmenter model")->required()->check(CLI::ExistingFile);
  ev->add_option("--bpe-model", ev_bpe_model, "BPE model")->required()->check(CLI::ExistingFile);
  ev->add_option("--out", ev_out, "Report directory");
  ev->add_option("--queries", eo.queries, "Neighbor query sample size");
  ev->add_option("--k", eo.k, "Neighbor ranks");
  ev->add_option("--gold", ev_gold, "Gold segmentations for boundary P/R/F1")->check(CLI::ExistingFile);
  ev->add_option("--agreement-words", ev_agree, "Words for segmentation agreement (default: UniMorph wordforms)")
      ->check(CLI::ExistingFile);
  ev->callback([&] {
    stage = "eval";
    action = [&] {
      if (g.seed) eo.seed = *g.seed;
      const fs::path out = !ev_out.empty() ? fs::path(ev_out) : fs::path(g.out_dir);
      if (out.empty()) throw std::runtime_error("--out is required");
      const auto entries = eval::load_unimorph(ev_unimorph);
      const auto wm = sgns::load_model(ev_word);
      const auto mm = sgns::load_model(ev_morph);
      const auto bm = sgns::load_model(ev_bpe);
      const auto segm = seg::load_model(ev_seg);
      const auto bpem = bpe::load_model(ev_bpe_model);
      sgns::SubwordFn seg_fn = [&](std::string_view w) { return seg::segment_word(w, segm); };
      sgns::SubwordFn bpe_fn = [&](std::string_view w) { return bpe::bpe_encode(w, bpem); };
      std::vector<std::vector<eval::EvalModel>> runs{{{"word", &wm, {}}, {"morpheme", &mm, seg_fn}, {"bpe", &bm, bpe_fn}}};
      eval::AgreementInput agree;
      if (!ev_agree.empty()) {
        agree.words = read_lines(ev_agree);
      } else {
        std::set<std::string> seen;
        for (const auto& e : entries) {
          if (seen.insert(e.wordform).second) agree.words.push_back(e.wordform);
        }
      }
      agree.morph_tokens = seg_fn;
      agree.bpe_tokens = bpe_fn;
      std::optional<eval::BoundaryInput> boundary;
      if (!ev_gold.empty()) boundary = eval::BoundaryInput{load_annotations(ev_gold), seg_fn};
      const auto report = eval::evaluate(entries, runs, agree, boundary, eo);
      for (const auto& p : report.write(out)) std::cout << p.string() << '\n';
    };
  });

  // pipeline
  auto* pl = app.add_subcommand("pipeline", "Run a config-driven end-to-end pipeline");
  pl->callback([&] {
    stage = "pipeline";
    action = [&] {
      if (g.config.empty()) throw std::runtime_error("--config is required");
      auto cfg = load_pipeline_config(g.config);
      if (g.seed) {
        cfg.seed = *g.seed;
        cfg.segmenter.seed = cfg.stage_seed("seg-train");
        cfg.eval.seed = cfg.stage_seed("eval");
      }
      std::optional<fs::path> out;
      if (!g.out_dir.empty()) out = fs::path(g.out_dir);
      const auto res = run_pipeline(cfg, &std::cerr, out);
      std::cout << res.manifest.string() << '\n';
    };
  });

  // gen-synthetic
  auto* gs = app.add_subcommand("gen-synthetic", "Generate words, corpus and pairs from a toy grammar");
  std::string gs_grammar;
  std::size_t gs_words = 500, gs_sents = 5000, gs_gold = 200;
  gs->add_option("--grammar", gs_grammar, "Grammar JSON")->required()->check(CLI::ExistingFile);
  gs->add_option("--words", gs_words, "Annotated words");
  gs->add_option("--sentences", gs_sents, "Corpus sentences");
  gs->add_option("--gold", gs_gold, "Held-out annotated words");
  gs->callback([&] {
    stage = "gen-synthetic";
    action = [&] {
      if (g.out_dir.empty()) throw std::runtime_error("--out-dir is required");
      const auto grammar = synth::load_grammar(gs_grammar);
      const auto data = synth::gen_synthetic(grammar, gs_words, gs_sents, g.seed.value_or(42), gs_gold);
      for (const auto& p : synth::write_synthetic(data, g.out_dir)) std::cout << p.string() << '\n';
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    if (action) action();
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: [" << stage << "] " << e.what() << '\n';
    return 1;
  }
  return 0;
}
