// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "../planted.hpp"
#include "morphtok/bpe.hpp"
#include "morphtok/crf.hpp"
#include "morphtok/evalsuite.hpp"
#include "morphtok/pipeline.hpp"
#include "morphtok/rng.hpp"
#include "morphtok/segmenter.hpp"
#include "morphtok/segmenter_train.hpp"
#include "morphtok/sgns.hpp"
#include "morphtok/synthetic.hpp"
#include "morphtok/textnorm.hpp"
#include "morphtok/utf8.hpp"

using namespace morphtok;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kF1Target = 0.815;
constexpr double kF1Tol = 0.001;
constexpr double kDropoffTarget = 39.0;
constexpr double kDropoffTol = 0.5;
constexpr double kLogZTol = 1e-10;
constexpr double kGradRelTol = 1e-4;
constexpr double kSegF1Min = 0.95;
constexpr double kPlantedMin = 0.95;
constexpr double kMeanTol = 1e-12;
constexpr double kBinTol = 1e-12;
constexpr double kRatioUlps = 4.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool pass = o.pass;
  if (secs > budget_s) {
    pass = false;
    o.detail += " (over budget)";
  }
  if (!pass) ++failures;
  std::printf("%s criterion %2d: %s | %s | %.2fs of %.0fs\n", pass ? "PASS" : "FAIL", id, title, o.detail.c_str(),
              secs, budget_s);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome window_adjustment() {
  const int a = sgns::adjust_window(5, 1.99);
  const int b = sgns::adjust_window(5, 3.75);
  return {a == 10 && b == 19, fmt("adjust_window(5,1.99)=%.0f adjust_window(5,3.75)=%.0f", a, b)};
}

Outcome f1_identity() {
  // Two-character words: a gold cut predicted (tp), an extra cut (fp), a missed cut (fn).
  const std::size_t tp = 33233, fp = 6567, fn = 8517;
  std::vector<AnnotatedWord> gold;
  std::vector<std::vector<std::string>> pred;
  const std::vector<std::string> split{"a", "b"}, whole{"ab"};
  for (std::size_t i = 0; i < tp; ++i) {
    gold.push_back({"ab", split, PosTag::kNoun});
    pred.push_back(split);
  }
  for (std::size_t i = 0; i < fp; ++i) {
    gold.push_back({"ab", whole, PosTag::kVerb});
    pred.push_back(split);
  }
  for (std::size_t i = 0; i < fn; ++i) {
    gold.push_back({"ab", split, PosTag::kAdjective});
    pred.push_back(whole);
  }
  const auto r = eval::boundary_prf(gold, pred);
  const bool ok = std::abs(r.precision - 0.835) < 1e-12 && std::abs(r.recall - 0.796) < 1e-12 &&
                  std::abs(r.f1 - kF1Target) <= kF1Tol;
  return {ok, fmt("P=%.6f R=%.6f F1=%.6f", r.precision, r.recall, r.f1)};
}

Outcome dropoff_anchor() {
  std::vector<double> curve(20);
  for (std::size_t r = 0; r < 20; ++r) curve[r] = 0.885 - (0.885 - 0.540) * static_cast<double>(r) / 19.0;
  const double d = eval::dropoff(curve, 20);
  return {std::abs(d - kDropoffTarget) <= kDropoffTol, fmt("dropoff(1->20)=%.4f%%", d)};
}

Outcome crf_brute_force() {
  Rng rng(2024);
  double worst_logz = 0.0;
  int viterbi_bad = 0;
  for (int inst = 0; inst < 200; ++inst) {
    const int n = 1 + static_cast<int>(rng.below(10));
    const int labels = 2;
    crf::Matrix em(n, labels);
    for (int i = 0; i < em.size(); ++i) em.data()[i] = rng.uniform(-3, 3);
    auto tr = crf::Transitions::zeros(labels);
    for (int i = 0; i < tr.pairwise.size(); ++i) tr.pairwise.data()[i] = rng.uniform(-2, 2);
    for (int l = 0; l < labels; ++l) {
      tr.start(l) = rng.uniform(-2, 2);
      tr.stop(l) = rng.uniform(-2, 2);
    }
    double best = -INFINITY, m = -INFINITY;
    std::vector<double> scores;
    std::vector<int> seq(static_cast<std::size_t>(n));
    for (int code = 0; code < (1 << n); ++code) {
      for (int t = 0; t < n; ++t) seq[static_cast<std::size_t>(t)] = (code >> t) & 1;
      const double s = crf::sequence_score(em, seq, tr);
      scores.push_back(s);
      best = std::max(best, s);
    }
    m = best;
    double acc = 0.0;
    for (double s : scores) acc += std::exp(s - m);
    const double logz = m + std::log(acc);
    worst_logz = std::max(worst_logz, std::abs(logz - crf::log_partition(em, tr)));
    const auto v = crf::viterbi(em, tr);
    if (crf::sequence_score(em, v.labels, tr) != best || std::abs(v.score - best) > 1e-12) ++viterbi_bad;
  }
  return {viterbi_bad == 0 && worst_logz <= kLogZTol,
          fmt("viterbi mismatches=%.0f max|logZ diff|=%.3g", viterbi_bad, worst_logz)};
}

Outcome gradient_correctness() {
  Rng rng(5);
  const std::string letters = "abcdefghij";
  double worst = 0.0;
  for (int w = 0; w < 20; ++w) {
    const std::size_t len = 5 + rng.below(4);
    std::string surface;
    for (std::size_t i = 0; i < len; ++i) surface += letters[rng.below(letters.size())];
    // Random tiling into morphemes.
    std::vector<std::string> morphemes;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= len; ++i) {
      if (i == len || rng.bernoulli(0.35)) {
        morphemes.push_back(surface.substr(start, i - start));
        start = i;
      }
    }
    const AnnotatedWord word{surface, morphemes, std::nullopt};
    const std::vector<AnnotatedWord> one{word};
    const auto vocab = seg::CharVocab::build(one);
    const seg::ModelShape shape{vocab.size(), 6, 5, 2, 2};
    Rng init(100 + static_cast<std::uint64_t>(w));
    auto params = seg::SegmenterParams::random(shape, 0.0, init);
    for (int l = 0; l < params.transitions.labels(); ++l) {
      params.transitions.start(l) = init.uniform(-1, 1);
      params.transitions.stop(l) = init.uniform(-1, 1);
      for (int k = 0; k < params.transitions.labels(); ++k) params.transitions.pairwise(l, k) = init.uniform(-1, 1);
    }
    const auto scheme = w % 2 ? LabelScheme::kBothEnds : LabelScheme::kEndOnly;
    seg::GradientCheckOptions opts;
    opts.seed = static_cast<std::uint64_t>(w);
    const auto r = seg::gradient_check(params, vocab, word, scheme, opts);
    worst = std::max(worst, r.max_relative_error);
  }
  return {worst < kGradRelTol, fmt("max relative error=%.3g over 20 words", worst)};
}

Outcome segmenter_learning() {
  const auto grammar = synth::load_grammar(fs::path(MORPHTOK_DATA_DIR) / "synthetic_grammar.json");
  const auto data = synth::gen_synthetic(grammar, 500, 0, 42);
  std::vector<AnnotatedWord> words;
  for (const auto& w : data.words) words.push_back(w.word);
  seg::TrainConfig cfg;
  // Reduced network so 200 epochs fit the single-core budget.
  cfg.hidden_size = 64;
  cfg.num_layers = 2;
  cfg.max_epochs = 200;
  cfg.seed = 42;
  const auto res = seg::train_segmenter(words, LabelScheme::kEndOnly, cfg);
  return {res.log.best_val_f1 >= kSegF1Min,
          fmt("best val F1=%.4f at epoch %.0f, %.0f epochs run", res.log.best_val_f1, res.log.best_epoch,
              static_cast<double>(res.log.epochs.size()))};
}

Outcome bpe_oracle() {
  const auto toy = bpe::train_bpe({{"abab", 1}, {"ab", 1}}, {10, 1});
  const bool first_ok = !toy.merges().empty() && toy.merges()[0] == bpe::Merge{"a", "b"};
  Rng rng(42);
  std::size_t steps = 0, mismatches = 0;
  for (int c = 0; c < 50; ++c) {
    std::vector<bpe::WordCount> corpus;
    const std::size_t n = 5 + rng.below(30);
    for (std::size_t i = 0; i < n; ++i) {
      std::string w;
      const std::size_t len = 1 + rng.below(8);
      for (std::size_t k = 0; k < len; ++k) w += static_cast<char>('a' + rng.below(4));
      corpus.push_back({w, 1 + rng.below(4)});
    }
    std::vector<bpe::MergeStep> trace;
    bpe::train_bpe(corpus, {4 + rng.below(40), 1 + rng.below(2)}, &trace);
    std::vector<std::vector<std::string>> seqs;
    for (const auto& wc : corpus) seqs.push_back(split_chars(wc.word));
    for (const auto& step : trace) {
      ++steps;
      std::map<std::pair<std::string, std::string>, std::uint64_t> counts;
      for (std::size_t i = 0; i < seqs.size(); ++i) {
        for (std::size_t k = 0; k + 1 < seqs[i].size(); ++k) counts[{seqs[i][k], seqs[i][k + 1]}] += corpus[i].count;
      }
      std::pair<std::string, std::string> best;
      std::uint64_t best_count = 0;
      for (const auto& [p, cnt] : counts) {
        const std::string cat = p.first + p.second, best_cat = best.first + best.second;
        if (cnt > best_count || (cnt == best_count && (cat < best_cat || (cat == best_cat && p.first < best.first)))) {
          best = p;
          best_count = cnt;
        }
      }
      if (best.first != step.pair.left || best.second != step.pair.right || best_count != step.count) ++mismatches;
      for (auto& s : seqs) {
        std::vector<std::string> out;
        for (std::size_t k = 0; k < s.size();) {
          if (k + 1 < s.size() && s[k] == step.pair.left && s[k + 1] == step.pair.right) {
            out.push_back(step.pair.merged());
            k += 2;
          } else {
            out.push_back(s[k++]);
          }
        }
        s = std::move(out);
      }
    }
  }
  return {first_ok && mismatches == 0 && steps > 0,
          fmt("first merge ok=%.0f, %.0f merge steps checked, mismatches=%.0f", first_ok, static_cast<double>(steps),
              static_cast<double>(mismatches))};
}

Outcome sgns_signal() {
  const std::size_t pairs = 100;
  const auto corpus = testing::planted_corpus(pairs, 50000, 8, 42);
  sgns::SgnsConfig cfg;
  cfg.dim = 100;
  cfg.epochs = 5;
  cfg.seed = 42;
  const auto model = sgns::train_sgns(corpus, cfg, 2, sgns::TokenizerKind::kWord, 1.0);
  const auto st = testing::planted_stats(model, pairs, 1000, 42);
  return {st.planted_mean > st.random_mean && st.above_random_mean >= kPlantedMin,
          fmt("planted mean=%.4f random mean=%.4f planted above random mean=%.3f", st.planted_mean, st.random_mean,
              st.above_random_mean)};
}

sgns::EmbeddingModel random_model(std::size_t n, int dim, sgns::TokenizerKind kind, std::uint64_t seed) {
  sgns::EmbeddingModel m;
  std::vector<std::string> toks;
  std::vector<std::uint64_t> counts;
  for (std::size_t i = 0; i < n; ++i) {
    toks.push_back("t" + std::to_string(i));
    counts.push_back(10);
  }
  m.vocab = sgns::Vocab(toks, counts);
  Rng rng(seed);
  m.input.resize(static_cast<long>(n), dim);
  for (long i = 0; i < m.input.size(); ++i) m.input.data()[i] = static_cast<float>(rng.uniform(-1, 1));
  m.output = sgns::MatrixF::Zero(static_cast<long>(n), dim);
  m.kind = kind;
  return m;
}

Outcome compositional_oov() {
  const auto m = random_model(50, 16, sgns::TokenizerKind::kMorpheme, 9);
  const auto r = sgns::vector_for("t3t17", m, [](std::string_view) { return std::vector<std::string>{"t3", "t17"}; });
  double worst = r.covered() ? 0.0 : INFINITY;
  if (r.covered()) {
    for (int d = 0; d < 16; ++d) {
      const double expect = (static_cast<double>(m.input(3, d)) + static_cast<double>(m.input(17, d))) / 2.0;
      worst = std::max(worst, std::abs(r.values[static_cast<std::size_t>(d)] - expect));
    }
  }
  const auto w = random_model(50, 16, sgns::TokenizerKind::kWord, 9);
  std::size_t covered_oov = 0;
  for (int i = 0; i < 200; ++i) {
    const std::string oov = "oov" + std::to_string(i);
    if (sgns::vector_for(oov, w, [](std::string_view) { return std::vector<std::string>{"t1", "t2"}; }).covered()) {
      ++covered_oov;
    }
  }
  return {r.source == sgns::VectorSource::kCompositional && worst <= kMeanTol && covered_oov == 0,
          fmt("max |mean diff|=%.3g, word-level OOV covered=%.0f", worst, static_cast<double>(covered_oov))};
}

Outcome metric_oracles() {
  const double j = eval::jaccard_agreement({2, 5}, {3, 5});
  // 0.2 + 0.4 is not 0.6 in binary, so the decimal case is held to a few ulps
  // and a dyadic case with the same shape must come out bit-exact.
  const double ratio = eval::separation_ratio(std::vector<double>{0.2, 0.4}, std::vector<double>{0.6, 0.6});
  const double dyadic = eval::separation_ratio(std::vector<double>{0.25, 0.5}, std::vector<double>{0.75, 0.75});
  const bool ratio_ok = std::abs(ratio - 2.0) <= kRatioUlps * std::numeric_limits<double>::epsilon() * 2.0 &&
                        dyadic == 2.0;
  const auto dist = eval::similarity_distribution(std::vector<double>{0.1, 0.5, 0.5, 0.9});
  const bool bins_ok = std::abs(dist.fractions[0] - 0.25) <= kBinTol && std::abs(dist.fractions[1] - 0.5) <= kBinTol &&
                       std::abs(dist.fractions[2] - 0.25) <= kBinTol;
  const auto m = random_model(100, 12, sgns::TokenizerKind::kWord, 10);
  std::size_t mismatches = 0;
  for (std::size_t q = 0; q < 100; ++q) {
    std::vector<std::pair<double, std::size_t>> all;
    const Eigen::RowVectorXd qv = m.input.row(static_cast<long>(q)).cast<double>();
    for (std::size_t o = 0; o < 100; ++o) {
      if (o == q) continue;
      const Eigen::RowVectorXd ov = m.input.row(static_cast<long>(o)).cast<double>();
      all.push_back({-qv.dot(ov) / (qv.norm() * ov.norm()), o});
    }
    std::sort(all.begin(), all.end());
    const auto nn = eval::nearest_neighbors(m, q, 99);
    for (std::size_t r = 0; r < 99; ++r) {
      if (nn.size() != 99 || nn[r].index != all[r].second) ++mismatches;
    }
  }
  const bool ok = j == 1.0 / 3.0 && ratio_ok && bins_ok && mismatches == 0;
  return {ok, fmt("jaccard=%.17g ratio=%.17g dyadic ratio=%.17g", j, ratio, dyadic) +
                  fmt(" kNN rank mismatches=%.0f", static_cast<double>(mismatches)) +
                  fmt(" bins=(%.2f,%.2f,%.2f)", dist.fractions[0], dist.fractions[1], dist.fractions[2])};
}

Outcome pipeline_determinism() {
  const fs::path config = fs::path(MORPHTOK_SOURCE_DIR) / "configs" / "synthetic_pipeline.json";
  const auto cfg = load_pipeline_config(config);
  const fs::path root = fs::current_path() / "acceptance_pipeline";
  fs::remove_all(root);
  const auto a = run_pipeline(cfg, nullptr, root / "a");
  const auto b = run_pipeline(cfg, nullptr, root / "b");
  std::size_t differing = a.artifacts.size() == b.artifacts.size() ? 0 : 1;
  for (std::size_t i = 0; i < std::min(a.artifacts.size(), b.artifacts.size()); ++i) {
    if (a.artifacts[i].path != b.artifacts[i].path || a.artifacts[i].sha256 != b.artifacts[i].sha256) ++differing;
  }
  return {differing == 0 && !a.artifacts.empty(),
          fmt("%.0f artifacts, %.0f differing", static_cast<double>(a.artifacts.size()), static_cast<double>(differing))};
}

Outcome normalization_invariants() {
  const auto cfg = textnorm::default_config();
  Rng rng(42);
  std::size_t broken = 0;
  for (int i = 0; i < 10000; ++i) {
    std::u32string s;
    const std::size_t len = rng.below(40);
    for (std::size_t k = 0; k < len; ++k) {
      Codepoint c;
      switch (rng.below(3)) {
        case 0:  // Arabic block and presentation forms
          c = static_cast<Codepoint>(rng.bernoulli(0.8) ? 0x0600 + rng.below(0x100) : 0xFB50 + rng.below(0x300));
          break;
        case 1:  // format, space and combining characters
          c = static_cast<Codepoint>(rng.bernoulli(0.5) ? 0x2000 + rng.below(0x70) : 0x0300 + rng.below(0x70));
          break;
        default:  // anything outside the surrogate range
          do {
            c = static_cast<Codepoint>(1 + rng.below(0x10FFFF));
          } while (c >= 0xD800 && c <= 0xDFFF);
      }
      s.append(rng.bernoulli(0.1) ? 1 + rng.below(6) : 1, c);
    }
    const auto once = textnorm::normalize_line(encode_utf8(s), cfg);
    if (textnorm::normalize_line(once, cfg) != once) ++broken;
  }
  const auto rep = textnorm::normalize_line("سڵاووووو", cfg);
  return {broken == 0 && rep == "سڵاووو", fmt("non-idempotent strings=%.0f, repetition example ", static_cast<double>(broken)) +
                                                (rep == "سڵاووو" ? "matches" : "differs")};
}

}  // namespace

int main() {
  criterion(1, "window adjustment values", 0.001, window_adjustment);
  criterion(2, "F1 harmonic identity", 1, f1_identity);
  criterion(3, "dropoff anchor", 1, dropoff_anchor);
  criterion(4, "CRF Viterbi and partition vs enumeration", 30, crf_brute_force);
  criterion(5, "BiLSTM-CRF gradient check", 120, gradient_correctness);
  criterion(6, "segmenter learns synthetic boundaries", 300, segmenter_learning);
  criterion(7, "BPE merge oracle", 10, bpe_oracle);
  criterion(8, "SGNS planted co-occurrence signal", 180, sgns_signal);
  criterion(9, "compositional OOV vectors", 1, compositional_oov);
  criterion(10, "metric oracles", 10, metric_oracles);
  criterion(11, "pipeline determinism", 600, pipeline_determinism);
  criterion(12, "normalization invariants", 5, normalization_invariants);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
